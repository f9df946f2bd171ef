#include "tarseg/eval.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "tarseg/image_io.hpp"
#include "tarseg/ops.hpp"
#include "tarseg/pyramid.hpp"
#include "tarseg/threadpool.hpp"

namespace tarseg {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Stage-1 guidance: the finest fused pyramid level, upsampled to image size.
Guidance feature_guidance(const Tensor& image, const BackboneWeights& bb,
                          const FusionWeights& fw, double gain) {
    const FeaturePyramid fused = fuse(extract_pyramid(image, bb), fw);
    return prepare_stage1_guidance(fused.fused[0], image.dim(1), image.dim(2), gain);
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

void EvalConfig::validate() const {
    if (scenes < 1) throw ConfigError("eval: scene count must be >= 1");
    if (rgb_only_iters < 0) throw ConfigError("eval: comparator iterations must be >= 0");
    if (feature_channels < 1) throw ConfigError("eval: feature channels must be >= 1");
    if (!(guide_gain > 0.0)) throw ConfigError("eval: guidance gain must be positive");
    if (threads < 1) throw ConfigError("eval: thread count must be >= 1");
    scene.validate();
    refine.validate();
}

EvalReport run_eval(const EvalConfig& cfg) {
    cfg.validate();
    const auto t0 = Clock::now();

    const BackboneWeights bb = BackboneWeights::seeded(3, cfg.feature_channels, cfg.weights_seed);
    const FusionWeights fw = FusionWeights::seeded(cfg.weights_seed);

    EvalReport report;
    report.scenes.resize(static_cast<std::size_t>(cfg.scenes));
    parallel_for(cfg.scenes, cfg.threads, [&](int i) {
        SceneResult& r = report.scenes[static_cast<std::size_t>(i)];
        r.id = i;
        r.scene_seed = cfg.rng_seed + 1000003ULL * static_cast<std::uint64_t>(i);
        const GlyphScene scene = generate_scene(r.scene_seed, cfg.scene);
        const Guidance feat = feature_guidance(scene.image, bb, fw, cfg.guide_gain);
        const Guidance rgb{scene.image};

        double sum_seed = 0.0, sum_rgb = 0.0, sum_two = 0.0;
        double hole_px = 0.0, hole_leaked = 0.0;
        for (const auto& inst : scene.instances) {
            const Tensor seed_bin = binarize(inst.seed, cfg.refine.binarize_threshold);
            sum_seed += fiou(seed_bin, inst.mask);

            const SoftLabel rgb_only = refine(inst.seed, rgb, cfg.rgb_only_iters, cfg.refine);
            sum_rgb += fiou(binarize(rgb_only, cfg.refine.binarize_threshold), inst.mask);

            const SoftLabel two = two_stage_refine(inst.seed, feat, rgb, cfg.refine);
            const Tensor two_bin = binarize(two, cfg.refine.binarize_threshold);
            sum_two += fiou(two_bin, inst.mask);

            const Tensor holes = interior_holes(inst.mask);
            for (std::size_t p = 0; p < holes.size(); ++p)
                if (holes[p] > 0.5f) {
                    hole_px += 1.0;
                    if (two_bin[p] > 0.5f) hole_leaked += 1.0;
                }
        }
        const double n = static_cast<double>(scene.instances.size());
        r.instances = static_cast<int>(scene.instances.size());
        r.fiou_seed = sum_seed / n;
        r.fiou_rgb_only = sum_rgb / n;
        r.fiou_two_stage = sum_two / n;
        r.hole_leak = hole_px > 0.0 ? hole_leaked / hole_px : -1.0;
    });

    std::vector<double> two;
    double leak_sum = 0.0;
    for (const auto& r : report.scenes) {
        report.mean_seed += r.fiou_seed;
        report.mean_rgb_only += r.fiou_rgb_only;
        report.mean_two_stage += r.fiou_two_stage;
        two.push_back(r.fiou_two_stage);
        if (r.fiou_two_stage > r.fiou_seed) report.improved_fraction += 1.0;
        if (r.fiou_two_stage >= r.fiou_rgb_only) report.vs_rgb_only_win_fraction += 1.0;
        if (r.hole_leak >= 0.0) {
            leak_sum += r.hole_leak;
            ++report.scenes_with_holes;
        }
    }
    const double n = static_cast<double>(report.scenes.size());
    report.mean_seed /= n;
    report.mean_rgb_only /= n;
    report.mean_two_stage /= n;
    report.median_two_stage = median(two);
    report.improved_fraction /= n;
    report.vs_rgb_only_win_fraction /= n;
    if (report.scenes_with_holes > 0) report.mean_hole_leak = leak_sum / report.scenes_with_holes;
    report.wall_ms = ms_since(t0);
    return report;
}

void BenchConfig::validate() const {
    if (repeats < 5) throw ConfigError("bench: at least 5 repeats required for a stable median");
    if (mf_iters < 1) throw ConfigError("bench: mean-field iterations must be >= 1");
    if (feature_channels < 1) throw ConfigError("bench: feature channels must be >= 1");
    refine.validate();
    mf.validate();
}

BenchReport run_bench(const BenchConfig& cfg) {
    cfg.validate();
    SceneConfig sc;
    sc.height = cfg.height;
    sc.width = cfg.width;
    sc.min_glyphs = sc.max_glyphs = 3;
    const GlyphScene scene = generate_scene(cfg.rng_seed, sc);
    const BackboneWeights bb = BackboneWeights::seeded(3, cfg.feature_channels, cfg.rng_seed);
    const FusionWeights fw = FusionWeights::seeded(cfg.rng_seed);
    const Guidance feat = feature_guidance(scene.image, bb, fw, cfg.guide_gain);
    const Guidance rgb{scene.image};
    const SoftLabel& seed = scene.instances.front().seed;

    BenchReport report;
    report.repeats = cfg.repeats;

    auto time_runs = [&](auto&& fn) {
        fn();  // warm-up, discarded
        std::vector<double> ms;
        ms.reserve(static_cast<std::size_t>(cfg.repeats));
        for (int i = 0; i < cfg.repeats; ++i) {
            const auto t0 = Clock::now();
            fn();
            ms.push_back(ms_since(t0));
        }
        return median(ms);
    };

    report.tar_median_ms =
        time_runs([&] { (void)two_stage_refine(seed, feat, rgb, cfg.refine); });
    report.mf_median_ms =
        time_runs([&] { (void)baseline_meanfield(seed, scene.image, cfg.mf_iters, cfg.mf); });
    report.ratio = report.mf_median_ms / report.tar_median_ms;

    if (cfg.scaling_probe) {
        RefineConfig doubled = cfg.refine;
        doubled.iters_stage1 *= 2;
        doubled.iters_stage2 *= 2;
        report.tar_doubled_median_ms =
            time_runs([&] { (void)two_stage_refine(seed, feat, rgb, doubled); });
    }
    return report;
}

std::vector<CorpusRecord> write_corpus(const std::string& dir,
                                       const std::vector<GlyphScene>& scenes) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create corpus directory " + dir + ": " + ec.message());

    std::vector<CorpusRecord> records;
    std::ofstream manifest(fs::path(dir) / "manifest.jsonl");
    if (!manifest) throw IoError("cannot write corpus manifest in " + dir);
    for (std::size_t i = 0; i < scenes.size(); ++i) {
        const GlyphScene& s = scenes[i];
        CorpusRecord rec;
        rec.id = static_cast<int>(i);
        rec.rng_seed = s.rng_seed;
        rec.image_path = (fs::path(dir) / ("scene_" + std::to_string(i) + ".png")).string();
        write_image(rec.image_path, tensor_to_image(s.image));
        for (std::size_t j = 0; j < s.instances.size(); ++j) {
            const auto& inst = s.instances[j];
            const std::string mpath =
                (fs::path(dir) /
                 ("scene_" + std::to_string(i) + "_mask_" + std::to_string(j) + ".png"))
                    .string();
            write_image(mpath, gray_from_binary(inst.mask));
            rec.mask_paths.push_back(mpath);
            rec.symbols.push_back(inst.symbol);
        }
        nlohmann::ordered_json line;
        line["id"] = rec.id;
        line["rng_seed"] = rec.rng_seed;
        line["image"] = rec.image_path;
        line["masks"] = rec.mask_paths;
        line["symbols"] = rec.symbols;
        manifest << line.dump() << "\n";
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<CorpusRecord> read_corpus_manifest(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open corpus manifest " + path);
    std::vector<CorpusRecord> records;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) throw IoError("corpus manifest has a malformed line: " + line);
        CorpusRecord rec;
        rec.id = j.at("id").get<int>();
        rec.rng_seed = j.at("rng_seed").get<std::uint64_t>();
        rec.image_path = j.at("image").get<std::string>();
        rec.mask_paths = j.at("masks").get<std::vector<std::string>>();
        rec.symbols = j.at("symbols").get<std::vector<int>>();
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace tarseg
