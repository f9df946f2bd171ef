#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tarseg/config.hpp"
#include "tarseg/contrastive.hpp"
#include "tarseg/errors.hpp"
#include "tarseg/eval.hpp"
#include "tarseg/image_io.hpp"
#include "tarseg/meanfield.hpp"
#include "tarseg/ops.hpp"
#include "tarseg/pipeline.hpp"
#include "tarseg/pyramid.hpp"
#include "tarseg/recognizer.hpp"
#include "tarseg/rng.hpp"
#include "tarseg/synth.hpp"
#include "tarseg/tar.hpp"
#include "tarseg/tensor_io.hpp"
#include "tarseg/weights.hpp"

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;
using namespace tarseg;

namespace {

class Timer {
public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double ms() const {
        const auto d = std::chrono::steady_clock::now() - start_;
        return std::chrono::duration<double, std::milli>(d).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

RefineConfig refine_from(const RunConfig& cfg) {
    RefineConfig rc;
    rc.kernel_radius = cfg.radius;
    rc.iters_stage1 = cfg.iters1;
    rc.iters_stage2 = cfg.iters2;
    rc.sigma_floor = cfg.sigma_floor;
    rc.include_center = cfg.include_center;
    rc.sigma_global = cfg.sigma_global;
    rc.binarize_threshold = cfg.threshold;
    rc.validate();
    return rc;
}

SceneConfig scene_from(const RunConfig& cfg) {
    SceneConfig sc;
    sc.height = cfg.height;
    sc.width = cfg.width;
    sc.min_glyphs = cfg.min_glyphs;
    sc.max_glyphs = cfg.max_glyphs;
    sc.contrast_floor = cfg.contrast_floor;
    sc.min_glyph_px = cfg.min_glyph_px;
    sc.area_budget = cfg.area_budget;
    sc.retry_budget = cfg.retry_budget;
    sc.seed_coverage = cfg.seed_coverage;
    sc.background = cfg.background;
    sc.alphabet = cfg.alphabet;
    if (cfg.seed_mode == "blob")
        sc.seed_mode = SeedMode::Blob;
    else if (cfg.seed_mode == "center")
        sc.seed_mode = SeedMode::CenterPoint;
    else
        throw ConfigError("seed-mode must be 'blob' or 'center', got '" + cfg.seed_mode + "'");
    sc.validate();
    return sc;
}

ModelDims dims_from(const RunConfig& cfg, int num_classes) {
    ModelDims d;
    d.channels = cfg.channels;
    d.hidden = cfg.hidden;
    d.attn_dim = cfg.attn_dim;
    d.embed_dim = cfg.embed_dim;
    d.proj_dim = cfg.proj_dim;
    d.num_classes = num_classes;
    d.validate();
    return d;
}

bool has_tensor_magic(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    char magic[4] = {};
    in.read(magic, 4);
    return in.gcount() == 4 && std::string(magic, 4) == "TSR1";
}

// Loads a [H,W] map in [0,1] from a raw tensor file or a grayscale image.
Tensor load_map(const std::string& path) {
    if (has_tensor_magic(path)) {
        Tensor t = read_tensor(path);
        if (t.rank() != 2)
            throw ShapeError("map tensor in '" + path + "' must be rank 2, got rank " +
                             std::to_string(static_cast<int>(t.rank())));
        return t;
    }
    const Tensor img = image_to_tensor(read_image(path));  // [C,H,W]
    const int c = img.dim(0), h = img.dim(1), w = img.dim(2);
    Tensor map({h, w});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            float acc = 0.0f;
            for (int ch = 0; ch < c; ++ch) acc += img(ch, y, x);
            map(y, x) = acc / static_cast<float>(c);
        }
    return map;
}

void write_map(const std::string& path, const Tensor& map, bool binary) {
    if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".tsr") == 0) {
        write_tensor(path, map);
        return;
    }
    write_image(path, binary ? gray_from_binary(map) : gray_from_map(map));
}

void make_dirs(const fs::path& p) {
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw IoError("cannot create directory '" + p.string() + "': " + ec.message());
}

void ensure_parent_dir(const std::string& path) {
    const fs::path p = fs::path(path).parent_path();
    if (!p.empty()) make_dirs(p);
}

double foreground_fraction(const Tensor& mask) {
    double fg = 0.0;
    for (float v : mask.vec()) fg += (v >= 0.5f) ? 1.0 : 0.0;
    return mask.size() ? fg / static_cast<double>(mask.size()) : 0.0;
}

Guidance feature_guidance(const Tensor& image, const BackboneWeights& bb,
                          const FusionWeights& fw, double gain) {
    const FeaturePyramid fused = fuse(extract_pyramid(image, bb), fw);
    return prepare_stage1_guidance(fused.fused[0], image.dim(1), image.dim(2), gain);
}

void emit_report(const ojson& rep, bool as_json) {
    if (as_json) {
        std::cout << rep.dump(2) << "\n";
        return;
    }
    // Flat human-readable rendering; nested objects are inlined as JSON.
    for (const auto& [key, value] : rep.items()) {
        if (key == "config" || key == "scenes" || key == "levels" || key == "instances") continue;
        std::cout << key << ": " << (value.is_string() ? value.get<std::string>() : value.dump())
                  << "\n";
    }
}

// ---------------------------------------------------------------------------

int cmd_gen_weights(const RunConfig& cfg, const std::string& out_path,
                    const std::string& symbols_path) {
    const SymbolTable st =
        symbols_path.empty() ? SymbolTable::builtin() : SymbolTable::load(symbols_path);
    const ModelDims dims = dims_from(cfg, st.num_classes());
    const PipelineWeights w = PipelineWeights::seeded(dims, cfg.rng_seed);
    TensorArchive ar;
    w.to_archive(ar);
    ensure_parent_dir(out_path);
    ar.save(out_path);

    ojson rep;
    rep["config"] = config_echo(cfg);
    rep["out"] = out_path;
    rep["entries"] = ar.entries().size();
    rep["num_classes"] = st.num_classes();
    emit_report(rep, cfg.json);
    return 0;
}

int cmd_refine(const RunConfig& cfg, const std::string& image_path, const std::string& seed_path,
               const std::string& out_path, const std::string& soft_out,
               const std::string& weights_path) {
    const RefineConfig rc = refine_from(cfg);
    const Tensor image = image_to_tensor(read_image(image_path));
    const Tensor seedmap = load_map(seed_path);
    if (seedmap.dim(0) != image.dim(1) || seedmap.dim(1) != image.dim(2))
        throw ShapeError("seed map is " + seedmap.shape_str() + " but the image is " +
                         std::to_string(image.dim(1)) + "x" + std::to_string(image.dim(2)));

    BackboneWeights bb;
    FusionWeights fw;
    if (!weights_path.empty()) {
        const TensorArchive ar = TensorArchive::load(weights_path);
        bb = BackboneWeights::from_archive(ar);
        fw = FusionWeights::from_archive(ar);
        if (bb.in_channels() != image.dim(0))
            throw ShapeError("weights expect " + std::to_string(bb.in_channels()) +
                             "-channel images, got " + std::to_string(image.dim(0)));
    } else {
        bb = BackboneWeights::seeded(image.dim(0), cfg.guide_channels, cfg.weights_seed);
        fw = FusionWeights::seeded(cfg.weights_seed);
    }

    const Guidance feat = feature_guidance(image, bb, fw, cfg.guide_gain);
    const Guidance rgb{image};

    const Timer timer;
    const SoftLabel refined = two_stage_refine(SoftLabel{seedmap}, feat, rgb, rc);
    const double refine_ms = timer.ms();
    const Tensor mask = binarize(refined, rc.binarize_threshold);

    ensure_parent_dir(out_path);
    write_map(out_path, mask, true);
    if (!soft_out.empty()) {
        ensure_parent_dir(soft_out);
        write_map(soft_out, refined.values, false);
    }

    ojson rep;
    rep["config"] = config_echo(cfg);
    rep["image"] = image_path;
    rep["seed"] = seed_path;
    rep["out"] = out_path;
    if (!soft_out.empty()) rep["soft_out"] = soft_out;
    rep["foreground_fraction"] = foreground_fraction(mask);
    if (!cfg.no_timing) rep["timing_ms"] = ojson{{"refine", refine_ms}};
    emit_report(rep, cfg.json);
    return 0;
}

int cmd_pipeline(const RunConfig& cfg, const std::string& image_path,
                 const std::string& weights_path, const std::string& symbols_path,
                 const std::string& out_dir, const std::string& emit) {
    const SymbolTable st =
        symbols_path.empty() ? SymbolTable::builtin() : SymbolTable::load(symbols_path);

    PipelineWeights w;
    if (weights_path.empty()) {
        w = PipelineWeights::seeded(dims_from(cfg, st.num_classes()), cfg.rng_seed);
    } else {
        w = PipelineWeights::load(weights_path);
        if (w.rec.num_classes() != st.num_classes())
            throw ConfigError("weights expect " + std::to_string(w.rec.num_classes()) +
                              " classes but the symbol table defines " +
                              std::to_string(st.num_classes()));
    }

    const Tensor image = image_to_tensor(read_image(image_path));
    if (image.dim(0) != w.backbone.in_channels())
        throw ShapeError("weights expect " + std::to_string(w.backbone.in_channels()) +
                         "-channel images, got " + std::to_string(image.dim(0)));

    PipelineOptions opt;
    opt.max_steps = cfg.max_steps;
    opt.refine = refine_from(cfg);
    opt.guide_gain = cfg.guide_gain;
    opt.threads = cfg.threads;

    const Timer timer;
    const PipelineResult res = run_pipeline(image, w, opt);
    const double total_ms = timer.ms();

    const bool emit_masks = emit == "masks" || emit == "all";
    const bool emit_pseudo = emit == "pseudo" || emit == "all";
    const std::string stem = fs::path(image_path).stem().string();
    make_dirs(out_dir);
    if (emit_masks) make_dirs(fs::path(out_dir) / "masks");
    if (emit_pseudo) make_dirs(fs::path(out_dir) / "pseudo");

    ojson rep;
    rep["config"] = config_echo(cfg);
    rep["image"] = image_path;

    ojson levels = ojson::array();
    for (std::size_t l = 0; l < res.traces.size(); ++l) {
        const AttentionTrace& tr = res.traces[l];
        ojson steps = ojson::array();
        std::string decoded;
        for (std::size_t t = 0; t < tr.steps.size(); ++t) {
            const AttentionStep& s = tr.steps[t];
            steps.push_back(ojson{{"step", t},
                                  {"symbol", st.symbol(s.symbol)},
                                  {"entropy", attention_entropy(s.attention)}});
            if (s.symbol >= kFirstSymbolId) decoded += st.symbol(s.symbol);
        }
        levels.push_back(
            ojson{{"level", l + 1}, {"decoded", decoded}, {"steps", std::move(steps)}});
    }
    rep["levels"] = std::move(levels);

    ojson instances = ojson::array();
    for (const InstanceOutput& inst : res.instances) {
        const std::string tag = st.symbol_tag(inst.symbol);
        const std::string base = stem + "_" + std::to_string(inst.step) + "_" + tag + ".png";
        ojson rec{{"step", inst.step}, {"symbol", st.symbol(inst.symbol)}};
        if (emit_masks) {
            const std::string rel = "masks/" + base;
            write_image((fs::path(out_dir) / rel).string(), gray_from_binary(inst.final_mask));
            rec["mask"] = rel;
        }
        if (emit_pseudo) {
            const std::string rel = "pseudo/" + base;
            write_image((fs::path(out_dir) / rel).string(), gray_from_binary(inst.pseudo));
            rec["pseudo"] = rel;
        }
        instances.push_back(std::move(rec));
    }
    rep["instances"] = std::move(instances);
    rep["decoded"] = rep["levels"][0]["decoded"];
    if (!cfg.no_timing) rep["timing_ms"] = ojson{{"total", total_ms}};

    std::ofstream trace_out(fs::path(out_dir) / "trace.json");
    if (!trace_out) throw IoError("cannot write '" + (fs::path(out_dir) / "trace.json").string() + "'");
    trace_out << rep.dump(2) << "\n";
    trace_out.close();

    emit_report(rep, cfg.json);
    return 0;
}

int cmd_eval(const RunConfig& cfg, const std::string& out_path, const std::string& corpus_dir) {
    EvalConfig ec;
    ec.scenes = cfg.scenes;
    ec.rng_seed = cfg.rng_seed;
    ec.weights_seed = cfg.weights_seed;
    ec.scene = scene_from(cfg);
    ec.refine = refine_from(cfg);
    ec.rgb_only_iters = cfg.rgb_iters;
    ec.feature_channels = cfg.guide_channels;
    ec.guide_gain = cfg.guide_gain;
    ec.threads = cfg.threads;
    ec.validate();

    const EvalReport rep = run_eval(ec);

    if (!corpus_dir.empty()) {
        std::vector<GlyphScene> scenes;
        scenes.reserve(static_cast<std::size_t>(ec.scenes));
        for (int i = 0; i < ec.scenes; ++i)
            scenes.push_back(
                generate_scene(ec.rng_seed + 1000003ULL * static_cast<std::uint64_t>(i), ec.scene));
        write_corpus(corpus_dir, scenes);
    }

    ojson out;
    out["config"] = config_echo(cfg);
    out["mean_fiou_seed"] = rep.mean_seed;
    out["mean_fiou_rgb_only"] = rep.mean_rgb_only;
    out["mean_fiou_two_stage"] = rep.mean_two_stage;
    out["median_fiou_two_stage"] = rep.median_two_stage;
    out["improved_fraction"] = rep.improved_fraction;
    out["vs_rgb_only_win_fraction"] = rep.vs_rgb_only_win_fraction;
    out["scenes_with_holes"] = rep.scenes_with_holes;
    if (rep.scenes_with_holes > 0) out["mean_hole_leak"] = rep.mean_hole_leak;
    ojson scenes = ojson::array();
    for (const SceneResult& r : rep.scenes) {
        ojson rec{{"id", r.id},
                  {"scene_seed", r.scene_seed},
                  {"instances", r.instances},
                  {"fiou_seed", r.fiou_seed},
                  {"fiou_rgb_only", r.fiou_rgb_only},
                  {"fiou_two_stage", r.fiou_two_stage}};
        if (r.hole_leak >= 0.0) rec["hole_leak"] = r.hole_leak;
        scenes.push_back(std::move(rec));
    }
    out["scenes"] = std::move(scenes);
    if (!corpus_dir.empty()) out["corpus"] = corpus_dir;
    if (!cfg.no_timing) out["timing_ms"] = ojson{{"total", rep.wall_ms}};

    if (!out_path.empty()) {
        ensure_parent_dir(out_path);
        std::ofstream f(out_path);
        if (!f) throw IoError("cannot write '" + out_path + "'");
        f << out.dump(2) << "\n";
    }
    emit_report(out, cfg.json);
    return 0;
}

int cmd_bench(const RunConfig& cfg, const std::string& size_str) {
    BenchConfig bc;
    bc.height = cfg.height;
    bc.width = cfg.width;
    if (!size_str.empty()) {
        const auto x = size_str.find('x');
        bool ok = x != std::string::npos && x > 0 && x + 1 < size_str.size();
        if (ok) {
            try {
                bc.height = std::stoi(size_str.substr(0, x));
                bc.width = std::stoi(size_str.substr(x + 1));
            } catch (const std::exception&) {
                ok = false;
            }
        }
        if (!ok) throw ConfigError("--size expects HxW (e.g. 48x160), got '" + size_str + "'");
    }
    bc.repeats = cfg.repeats;
    bc.refine = refine_from(cfg);
    bc.mf_iters = cfg.mf_iters;
    bc.mf.pos_sigma = cfg.pos_sigma;
    bc.mf.rgb_sigma = cfg.rgb_sigma;
    bc.mf.area_cap = cfg.area_cap;
    bc.mf.validate();
    bc.feature_channels = cfg.guide_channels;
    bc.guide_gain = cfg.guide_gain;
    bc.rng_seed = cfg.rng_seed;
    bc.scaling_probe = cfg.scaling_probe;
    bc.validate();

    const BenchReport br = run_bench(bc);

    ojson rep;
    rep["config"] = config_echo(cfg);
    rep["size"] = std::to_string(bc.height) + "x" + std::to_string(bc.width);
    rep["repeats"] = br.repeats;
    rep["tar_median_ms"] = br.tar_median_ms;
    rep["meanfield_median_ms"] = br.mf_median_ms;
    rep["speedup"] = br.ratio;
    if (br.tar_doubled_median_ms >= 0.0) {
        rep["tar_doubled_median_ms"] = br.tar_doubled_median_ms;
        rep["doubling_factor"] =
            br.tar_median_ms > 0.0 ? br.tar_doubled_median_ms / br.tar_median_ms : 0.0;
    }
    emit_report(rep, cfg.json);

    if (!(br.tar_median_ms < br.mf_median_ms))
        throw CheckError("refinement (" + std::to_string(br.tar_median_ms) +
                         " ms) is not faster than the dense baseline (" +
                         std::to_string(br.mf_median_ms) + " ms)");
    return 0;
}

int cmd_gradcheck(const RunConfig& cfg) {
    if (cfg.batches < 1) throw ConfigError("batches must be positive");
    Rng rng = Rng::stream(cfg.rng_seed, 60);
    double max_rel = 0.0;
    double fd_h = 1e-5;
    for (int b = 0; b < cfg.batches; ++b) {
        const int n = rng.uniform_int(2, 8);
        const int dp = rng.uniform_int(4, 16);
        BatchD batch;
        batch.pi.assign(static_cast<std::size_t>(n), VecD(static_cast<std::size_t>(dp)));
        batch.pp.assign(static_cast<std::size_t>(n), VecD(static_cast<std::size_t>(dp)));
        for (int i = 0; i < n; ++i)
            for (int d = 0; d < dp; ++d) {
                batch.pi[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)] =
                    rng.normal();
                batch.pp[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)] =
                    rng.normal();
            }
        const BatchGrad grad = contrastive_grad(batch, cfg.tau, cfg.include_positive);
        auto probe = [&](std::vector<VecD>& side, const std::vector<VecD>& analytic) {
            for (int i = 0; i < n; ++i)
                for (int d = 0; d < dp; ++d) {
                    auto& slot = side[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)];
                    const double keep = slot;
                    slot = keep + fd_h;
                    const double up = contrastive_loss(batch, cfg.tau, cfg.include_positive);
                    slot = keep - fd_h;
                    const double dn = contrastive_loss(batch, cfg.tau, cfg.include_positive);
                    slot = keep;
                    const double fd = (up - dn) / (2.0 * fd_h);
                    const double an =
                        analytic[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)];
                    const double rel = std::abs(an - fd) / std::max(std::abs(an) + std::abs(fd), 1e-6);
                    max_rel = std::max(max_rel, rel);
                }
        };
        probe(batch.pi, grad.d_pi);
        probe(batch.pp, grad.d_pp);
    }

    ojson rep;
    rep["config"] = config_echo(cfg);
    rep["batches"] = cfg.batches;
    rep["max_rel_err"] = max_rel;
    rep["tolerance"] = 1e-4;
    rep["pass"] = max_rel <= 1e-4;
    emit_report(rep, cfg.json);
    if (max_rel > 1e-4)
        throw CheckError("gradient check failed: max relative error " + std::to_string(max_rel));
    return 0;
}

// ---------------------------------------------------------------------------

void add_common_flags(CLI::App* sub, RunConfig& cfg, std::string& config_path) {
    sub->add_option("--config", config_path,
                    "key=value config file; explicit flags override its values");
    sub->add_option("--rng-seed", cfg.rng_seed, "deterministic run seed");
    sub->add_option("--threads", cfg.threads, "worker threads (1 = serial)");
    sub->add_flag("--json", cfg.json, "emit the report as JSON on stdout");
    sub->add_flag("--no-timing", cfg.no_timing, "omit wall-clock timings from reports");
}

void add_refine_flags(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--radius", cfg.radius, "refinement window radius");
    sub->add_option("--iters1", cfg.iters1, "feature-guided iterations");
    sub->add_option("--iters2", cfg.iters2, "color-guided iterations");
    sub->add_option("--sigma-floor", cfg.sigma_floor, "lower clamp for the deviation");
    sub->add_flag("--include-center", cfg.include_center, "average over the center pixel too");
    sub->add_flag("--sigma-global", cfg.sigma_global, "per-image instead of per-window deviation");
    sub->add_option("--threshold", cfg.threshold, "binarization threshold");
    sub->add_option("--guide-channels", cfg.guide_channels, "guidance feature width");
    sub->add_option("--guide-gain", cfg.guide_gain, "stage-one guidance magnitude");
    sub->add_option("--weights-seed", cfg.weights_seed, "seed for generated guidance weights");
}

void add_model_flags(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--channels", cfg.channels, "feature channels");
    sub->add_option("--hidden", cfg.hidden, "decoder state size (even)");
    sub->add_option("--attn-dim", cfg.attn_dim, "attention projection size");
    sub->add_option("--embed-dim", cfg.embed_dim, "symbol embedding size");
    sub->add_option("--proj-dim", cfg.proj_dim, "contrastive projection size");
}

void add_scene_flags(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--height", cfg.height, "scene height (multiple of 8)");
    sub->add_option("--width", cfg.width, "scene width (multiple of 4)");
    sub->add_option("--min-glyphs", cfg.min_glyphs, "fewest glyphs per scene");
    sub->add_option("--max-glyphs", cfg.max_glyphs, "most glyphs per scene");
    sub->add_option("--seed-mode", cfg.seed_mode, "blob | center")
        ->check(CLI::IsMember({"blob", "center"}));
    sub->add_option("--background", cfg.background, "flat | gradient | noise | random")
        ->check(CLI::IsMember({"flat", "gradient", "noise", "random"}));
    sub->add_option("--alphabet", cfg.alphabet, "glyph subset (default: all)");
    sub->add_option("--contrast-floor", cfg.contrast_floor, "min fg/bg intensity gap");
    sub->add_option("--seed-coverage", cfg.seed_coverage, "min blob-core mask coverage");
    sub->add_option("--min-glyph-px", cfg.min_glyph_px, "smallest glyph box edge");
    sub->add_option("--area-budget", cfg.area_budget, "glyph area fraction of the image");
    sub->add_option("--retry-budget", cfg.retry_budget, "placement attempts per glyph");
}

int run_cli(int argc, char** argv) {
    RunConfig cfg;

    // First pass: honor --config before binding flag defaults, so explicit
    // flags override file values and everything else keeps them.
    std::string config_path;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--config" && i + 1 < argc)
            config_path = argv[i + 1];
        else if (a.rfind("--config=", 0) == 0)
            config_path = a.substr(9);
    }
    if (!config_path.empty()) apply_config_file(cfg, config_path);

    CLI::App app{"Weakly supervised text instance segmentation tools"};
    app.require_subcommand(1);

    std::string image_path, seed_path, out_path, soft_out, weights_path, symbols_path;
    std::string out_dir, emit = "all", corpus_dir, size_str, config_dummy;

    CLI::App* gen = app.add_subcommand("gen-weights", "write a seeded weight archive");
    gen->add_option("--out", out_path, "archive path")->required();
    gen->add_option("--symbols", symbols_path, "symbol list, one per line");
    add_model_flags(gen, cfg);
    add_common_flags(gen, cfg, config_dummy);

    CLI::App* ref = app.add_subcommand("refine", "refine a seed map against an image");
    ref->add_option("--image", image_path, "input image (PNG/PNM)")->required();
    ref->add_option("--seed", seed_path, "seed map (grayscale image or tensor file)")->required();
    ref->add_option("--out", out_path, "output mask path")->required();
    ref->add_option("--soft-out", soft_out, "optional refined soft map path");
    ref->add_option("--weights", weights_path, "weight archive for stage-one guidance");
    add_refine_flags(ref, cfg);
    add_common_flags(ref, cfg, config_dummy);

    CLI::App* pipe = app.add_subcommand("pipeline", "run the full forward pipeline");
    pipe->add_option("--image", image_path, "input image (PNG/PNM)")->required();
    pipe->add_option("--weights", weights_path, "weight archive (default: seeded)");
    pipe->add_option("--symbols", symbols_path, "symbol list, one per line");
    pipe->add_option("--out-dir", out_dir, "output directory")->required();
    pipe->add_option("--emit", emit, "masks | pseudo | all")
        ->check(CLI::IsMember({"masks", "pseudo", "all"}));
    pipe->add_option("--max-steps", cfg.max_steps, "decode step cap");
    add_model_flags(pipe, cfg);
    add_refine_flags(pipe, cfg);
    add_common_flags(pipe, cfg, config_dummy);

    CLI::App* ev = app.add_subcommand("eval", "score refinement on synthetic scenes");
    ev->add_option("--scenes", cfg.scenes, "number of scenes");
    ev->add_option("--out", out_path, "also write the JSON report here");
    ev->add_option("--emit-corpus", corpus_dir, "write the generated scenes to this directory");
    ev->add_option("--rgb-iters", cfg.rgb_iters, "iterations for the color-only comparator");
    add_scene_flags(ev, cfg);
    add_refine_flags(ev, cfg);
    add_common_flags(ev, cfg, config_dummy);

    CLI::App* ben = app.add_subcommand("bench", "time refinement against the dense baseline");
    ben->add_option("--size", size_str, "scene size as HxW (e.g. 48x160)");
    ben->add_option("--repeats", cfg.repeats, "timed repetitions (median reported)");
    ben->add_option("--mf-iters", cfg.mf_iters, "dense baseline iterations");
    ben->add_option("--pos-sigma", cfg.pos_sigma, "baseline spatial bandwidth");
    ben->add_option("--rgb-sigma", cfg.rgb_sigma, "baseline color bandwidth");
    ben->add_option("--area-cap", cfg.area_cap, "baseline pixel-count cap");
    ben->add_flag("--scaling-probe", cfg.scaling_probe, "also time doubled iteration counts");
    add_refine_flags(ben, cfg);
    add_common_flags(ben, cfg, config_dummy);

    CLI::App* grad = app.add_subcommand("gradcheck", "finite-difference check of the loss gradients");
    grad->add_option("--batches", cfg.batches, "random batches to probe");
    grad->add_option("--tau", cfg.tau, "similarity temperature");
    grad->add_flag("--include-positive", cfg.include_positive,
                   "count the positive pair in the denominator");
    add_common_flags(grad, cfg, config_dummy);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (*gen) return cmd_gen_weights(cfg, out_path, symbols_path);
    if (*ref) return cmd_refine(cfg, image_path, seed_path, out_path, soft_out, weights_path);
    if (*pipe) return cmd_pipeline(cfg, image_path, weights_path, symbols_path, out_dir, emit);
    if (*ev) return cmd_eval(cfg, out_path, corpus_dir);
    if (*ben) return cmd_bench(cfg, size_str);
    if (*grad) return cmd_gradcheck(cfg);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 2;
    } catch (const CheckError& e) {
        std::cerr << "check failed: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
