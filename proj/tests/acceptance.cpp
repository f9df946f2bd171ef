// Acceptance gate: one line per criterion, nonzero exit if any fail.
//
// Each criterion is self-contained, measures its own wall time, and prints
//   [PASS] n. <what was checked> (<evidence>)
// or the matching [FAIL] line. The checks pin the artifact's contracts:
// reference equivalence, invariants, relative quality and speed, loss and
// gradient correctness, metric exactness, reproducibility, and the
// ring-glyph escape scenario.

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "oracles.hpp"
#include "tarseg/contrastive.hpp"
#include "tarseg/eval.hpp"
#include "tarseg/image_io.hpp"
#include "tarseg/recognizer.hpp"
#include "tarseg/rng.hpp"
#include "tarseg/seghead.hpp"
#include "tarseg/synth.hpp"
#include "tarseg/tar.hpp"
#include "tarseg/tensor_io.hpp"

using namespace tarseg;
namespace fs = std::filesystem;
using nlohmann::json;
using testutil::normal_tensor;
using testutil::to_vec;
using testutil::uniform_tensor;

namespace {

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct Outcome {
    bool pass = false;
    std::string evidence;
};

int failures = 0;

void report(int index, const std::string& title, const Outcome& o) {
    std::printf("[%s] %d. %s (%s)\n", o.pass ? "PASS" : "FAIL", index, title.c_str(),
                o.evidence.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
}

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof buf, format, args);
    va_end(args);
    return buf;
}

refimpl::RefineRef mirror(const RefineConfig& cfg) {
    refimpl::RefineRef r;
    r.radius = cfg.kernel_radius;
    r.sigma_floor = cfg.sigma_floor;
    r.include_center = cfg.include_center;
    r.sigma_global = cfg.sigma_global;
    return r;
}

// --------------------------------------------------------------------------
// 1. Single refinement step vs. the double-precision brute-force reference.
// --------------------------------------------------------------------------
Outcome criterion_ref_equivalence() {
    const Stopwatch sw;
    Rng rng(9001);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const int h = rng.uniform_int(1, 8), w = rng.uniform_int(1, 8);
        const int cg = rng.uniform_int(1, 4);
        RefineConfig cfg;
        cfg.kernel_radius = rng.uniform_int(1, 2);
        cfg.include_center = i % 2 == 1;
        cfg.sigma_global = i % 4 >= 2;

        const Tensor label = uniform_tensor({h, w}, rng);
        const Tensor guidance = normal_tensor({cg, h, w}, rng);
        const SoftLabel out = tar_step({label}, {guidance}, cfg);
        const auto ref =
            refimpl::tar_step_ref(to_vec(label), to_vec(guidance), h, w, cg, mirror(cfg));
        worst = std::max(worst, testutil::max_abs_diff(out.values, ref));
    }
    const double secs = sw.seconds();
    return {worst <= 1e-6 && secs < 5.0,
            fmt("max |d| = %.2e over 100 instances up to 8x8; %.2fs < 5s", worst, secs)};
}

// --------------------------------------------------------------------------
// 2. Refinement invariants: fixed point, containment, composition.
// --------------------------------------------------------------------------
Outcome criterion_invariants() {
    const Stopwatch sw;
    Rng rng(9002);

    double fixed_err = 0.0;
    for (const float level : {0.0f, 0.37f, 1.0f}) {
        const Tensor guidance = normal_tensor({3, 6, 9}, rng);
        Tensor label({6, 9});
        for (auto& v : label.vec()) v = level;
        RefineConfig cfg;
        SoftLabel cur{label};
        for (int i = 0; i < 5; ++i) cur = tar_step(cur, {guidance}, cfg);
        for (const float v : cur.values.vec())
            fixed_err = std::max(fixed_err, static_cast<double>(std::abs(v - level)));
    }

    int contained = 0;
    for (int i = 0; i < 100; ++i) {
        const int h = rng.uniform_int(2, 8), w = rng.uniform_int(2, 8);
        const Tensor label = uniform_tensor({h, w}, rng, -2.0, 3.0);
        const Tensor guidance = normal_tensor({2, h, w}, rng);
        float lo = label[0], hi = label[0];
        for (const float v : label.vec()) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        RefineConfig cfg;
        cfg.kernel_radius = 1 + i % 2;
        const SoftLabel out = tar_step({label}, {guidance}, cfg);
        bool ok = true;
        for (const float v : out.values.vec()) ok = ok && v >= lo - 1e-6f && v <= hi + 1e-6f;
        contained += ok;
    }

    bool composed = true;
    for (int i = 0; i < 10; ++i) {
        const Tensor label = uniform_tensor({7, 9}, rng);
        const Tensor guidance = normal_tensor({2, 7, 9}, rng);
        RefineConfig cfg;
        const SoftLabel whole = refine({label}, {guidance}, 5, cfg);
        const SoftLabel split = refine(refine({label}, {guidance}, 2, cfg), {guidance}, 3, cfg);
        composed = composed && testutil::bit_equal(whole.values, split.values);
        composed =
            composed && testutil::bit_equal(refine({label}, {guidance}, 0, cfg).values, label);
    }

    const double secs = sw.seconds();
    const bool pass = fixed_err <= 1e-7 && contained == 100 && composed && secs < 10.0;
    return {pass, fmt("fixed-point err %.1e <= 1e-7; containment %d/100; composition %s; %.2fs < 10s",
                      fixed_err, contained, composed ? "bit-exact" : "BROKEN", secs)};
}

// --------------------------------------------------------------------------
// 3. Two-stage quality on the 200-scene corpus.
// --------------------------------------------------------------------------
Outcome criterion_two_stage_benefit() {
    const Stopwatch sw;
    EvalConfig cfg;  // 200 scenes, blob seeds, contrast floor 0.3, seed 1
    const EvalReport rep = run_eval(cfg);
    const double secs = sw.seconds();
    const bool pass = rep.mean_two_stage > rep.mean_seed &&
                      rep.mean_two_stage >= rep.mean_rgb_only && rep.improved_fraction >= 0.9 &&
                      secs < 120.0;
    return {pass,
            fmt("mean two-stage %.4f > seed %.4f, >= color-only %.4f; improved %.0f%%; %.1fs < 120s",
                rep.mean_two_stage, rep.mean_seed, rep.mean_rgb_only,
                100.0 * rep.improved_fraction, secs)};
}

// --------------------------------------------------------------------------
// 4. Refinement speed vs. the dense mean-field baseline.
// --------------------------------------------------------------------------
Outcome criterion_speed() {
    BenchConfig cfg;  // 48x160, 2+8 iterations radius 1, baseline 5 iterations
    const BenchReport rep = run_bench(cfg);
    const bool pass = rep.tar_median_ms < 50.0 && rep.ratio >= 5.0;
    return {pass, fmt("median %.1fms < 50ms; baseline %.0fms = %.0fx >= 5x (20 repeats)",
                      rep.tar_median_ms, rep.mf_median_ms, rep.ratio)};
}

// --------------------------------------------------------------------------
// 5. Attention distribution, glimpse containment, one-hot identity.
// --------------------------------------------------------------------------
Outcome criterion_attention() {
    const Stopwatch sw;
    Rng rng(9005);
    double worst_sum = 0.0;
    bool contained = true;
    int steps_checked = 0;
    for (int draw = 0; draw < 50; ++draw) {
        const RecognizerWeights w = RecognizerWeights::seeded(
            8, 16, 8, 8, kFirstSymbolId + 10, 7000 + static_cast<std::uint64_t>(draw));
        const int h = rng.uniform_int(4, 9), wd = rng.uniform_int(4, 12);
        const Tensor fused = normal_tensor({8, h, wd}, rng);

        float lo[8], hi[8];
        for (int c = 0; c < 8; ++c) {
            lo[c] = fused(c, 0, 0);
            hi[c] = lo[c];
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < wd; ++x) {
                    lo[c] = std::min(lo[c], fused(c, y, x));
                    hi[c] = std::max(hi[c], fused(c, y, x));
                }
        }

        const AttentionTrace trace = decode(fused, w, 4);
        for (const AttentionStep& step : trace.steps) {
            ++steps_checked;
            double sum = 0.0;
            for (const float a : step.attention.vec()) sum += a;
            worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
            for (int c = 0; c < 8; ++c)
                contained = contained && step.glimpse(c) >= lo[c] - 1e-5f &&
                            step.glimpse(c) <= hi[c] + 1e-5f;
        }
    }

    // One-hot identity on contrived weights: a single huge score makes the
    // softmax an indicator, so the glimpse must equal that feature column
    // exactly.
    RecognizerWeights w = RecognizerWeights::seeded(5, 6, 3, 4, kFirstSymbolId + 2, 9);
    w.att_conv = Tensor({3, 5, 3, 3});
    w.att_conv(0, 0, 1, 1) = 1.0f;
    w.att_Wh = Tensor({3, 6});
    w.att_we = Tensor({3});
    w.att_we(0) = 1e6f;
    Tensor fused = normal_tensor({5, 4, 7}, rng);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 7; ++x) fused(0, y, x) = 0.0f;
    fused(0, 2, 5) = 5.0f;
    const AttentionStep step = attention_step(fused, Tensor({6}), w);
    bool onehot = step.attention(2, 5) == 1.0f;
    for (int c = 0; c < 5; ++c) onehot = onehot && step.glimpse(c) == fused(c, 2, 5);

    const double secs = sw.seconds();
    const bool pass = worst_sum <= 1e-5 && contained && onehot && secs < 30.0;
    return {pass, fmt("worst |sum-1| = %.1e over %d steps/50 draws; containment %s; one-hot %s; %.1fs < 30s",
                      worst_sum, steps_checked, contained ? "ok" : "BROKEN",
                      onehot ? "exact" : "BROKEN", secs)};
}

// --------------------------------------------------------------------------
// 6. Losses vs. references; analytic gradients vs. finite differences.
// --------------------------------------------------------------------------
Outcome criterion_losses() {
    const Stopwatch sw;
    Rng rng(9006);
    double worst_loss = 0.0;

    for (int i = 0; i < 50; ++i) {
        // Recognition cross entropy over a random multi-step trace.
        const int k = rng.uniform_int(4, 13);
        const int steps = rng.uniform_int(1, 5);
        AttentionTrace trace;
        std::vector<int> gt;
        double want = 0.0;
        for (int t = 0; t < steps; ++t) {
            AttentionStep s;
            s.logits = normal_tensor({k}, rng, 3.0);
            const int g = rng.uniform_int(0, k - 1);
            gt.push_back(g);
            want += refimpl::ce_ref(to_vec(s.logits), g);
            trace.steps.push_back(std::move(s));
        }
        worst_loss = std::max(worst_loss, std::abs(recognition_loss(trace, gt) - want));

        // Per-pixel cross entropy with clamped extremes.
        const int n = rng.uniform_int(1, 3);
        std::vector<Tensor> masks, pseudo;
        double bce_want = 0.0;
        for (int j = 0; j < n; ++j) {
            const int h = rng.uniform_int(2, 6), wd = rng.uniform_int(2, 6);
            Tensor m = uniform_tensor({h, wd}, rng);
            m[0] = 0.0f;  // exercise the clamp
            if (m.size() > 1) m[1] = 1.0f;
            Tensor y({h, wd});
            for (auto& v : y.vec()) v = rng.uniform() < 0.5 ? 0.0f : 1.0f;
            bce_want += refimpl::bce_ref(to_vec(m), to_vec(y));
            masks.push_back(std::move(m));
            pseudo.push_back(std::move(y));
        }
        worst_loss = std::max(worst_loss, std::abs(seg_loss(masks, pseudo) - bce_want));

        // Pairing term and batch loss in both variants.
        const int d = rng.uniform_int(4, 16);
        auto rv = [&](int dim) {
            VecD v(static_cast<std::size_t>(dim));
            for (auto& x : v) x = rng.normal();
            return v;
        };
        const VecD pi = rv(d), pp = rv(d);
        std::vector<VecD> negs;
        for (int j = rng.uniform_int(1, 7); j > 0; --j) negs.push_back(rv(d));
        const bool incl = i % 2 == 1;
        worst_loss = std::max(worst_loss, std::abs(l_nce(pi, pp, negs, 0.1, incl) -
                                                   refimpl::nce_ref(pi, pp, negs, 0.1, incl)));

        const int bn = rng.uniform_int(2, 8);
        BatchD batch;
        for (int j = 0; j < bn; ++j) {
            batch.pi.push_back(rv(d));
            batch.pp.push_back(rv(d));
        }
        worst_loss = std::max(
            worst_loss, std::abs(contrastive_loss(batch, 0.1, incl) -
                                 refimpl::contrastive_ref(batch.pi, batch.pp, 0.1, incl)));
    }

    // Gradients against central finite differences.
    double worst_rel = 0.0;
    for (int b = 0; b < 50; ++b) {
        const int n = rng.uniform_int(2, 8);
        const int d = rng.uniform_int(4, 16);
        const bool incl = b % 2 == 1;
        BatchD batch;
        for (int j = 0; j < n; ++j) {
            VecD a(static_cast<std::size_t>(d)), p(static_cast<std::size_t>(d));
            for (auto& x : a) x = rng.normal();
            for (auto& x : p) x = rng.normal();
            batch.pi.push_back(std::move(a));
            batch.pp.push_back(std::move(p));
        }
        const BatchGrad g = contrastive_grad(batch, 0.1, incl);
        auto probe = [&](std::vector<VecD>& side, const std::vector<VecD>& grad) {
            for (int i = 0; i < n; ++i)
                for (int kk = 0; kk < d; ++kk) {
                    auto& slot = side[static_cast<std::size_t>(i)][static_cast<std::size_t>(kk)];
                    const double keep = slot;
                    slot = keep + 1e-5;
                    const double up = contrastive_loss(batch, 0.1, incl);
                    slot = keep - 1e-5;
                    const double dn = contrastive_loss(batch, 0.1, incl);
                    slot = keep;
                    const double fd = (up - dn) / 2e-5;
                    const double an =
                        grad[static_cast<std::size_t>(i)][static_cast<std::size_t>(kk)];
                    worst_rel = std::max(worst_rel, std::abs(an - fd) /
                                                        std::max(std::abs(an) + std::abs(fd), 1e-6));
                }
        };
        probe(batch.pi, g.d_pi);
        probe(batch.pp, g.d_pp);
    }

    const double secs = sw.seconds();
    const bool pass = worst_loss <= 1e-9 && worst_rel <= 1e-4 && secs < 60.0;
    return {pass, fmt("worst loss |d| = %.1e <= 1e-9 (50 cases); worst grad rel err = %.1e <= 1e-4 (50 batches); %.1fs < 60s",
                      worst_loss, worst_rel, secs)};
}

// --------------------------------------------------------------------------
// 7. Metric hand cases and exhaustive voting properties.
// --------------------------------------------------------------------------
Outcome criterion_metric_and_vote() {
    // Hand cases must be exact.
    Tensor empty_a({2, 2}), empty_b({2, 2});
    bool hand = fiou(empty_a, empty_b) == 1.0;
    Tensor two({2, 2});
    two(0, 0) = 1.0f;
    two(0, 1) = 1.0f;
    hand = hand && fiou(two, two) == 1.0;
    Tensor other({2, 2});
    other(1, 0) = 1.0f;
    hand = hand && fiou(two, other) == 0.0;
    Tensor one({2, 2});
    one(0, 0) = 1.0f;
    hand = hand && fiou(one, two) == 0.5 && fiou(two, one) == 0.5;

    // Exhaustive 2x2 binary triples: 2^12 combinations.
    auto mask_of = [](int bits) {
        CoarseMask m;
        m.channels = Tensor({2, 2, 2});
        for (int i = 0; i < 4; ++i) {
            const float fg = (bits >> i) & 1 ? 1.0f : 0.0f;
            m.channels(0, i / 2, i % 2) = fg;
            m.channels(1, i / 2, i % 2) = 1.0f - fg;
        }
        return m;
    };
    auto vec_of = [](int bits) {
        refimpl::Vec v(4, 0.0);
        for (int i = 0; i < 4; ++i) v[static_cast<std::size_t>(i)] = (bits >> i) & 1 ? 1.0 : 0.0;
        return v;
    };

    int checked = 0;
    bool vote_ok = true, perm_ok = true, unanimous_ok = true, mean_ok = true;
    for (int a = 0; a < 16 && vote_ok && perm_ok && mean_ok; ++a) {
        for (int b = 0; b < 16; ++b) {
            for (int c = 0; c < 16; ++c) {
                const Tensor got = ensemble(mask_of(a), mask_of(b), mask_of(c), 2, 2);
                const auto want = refimpl::majority_ref(vec_of(a), vec_of(b), vec_of(c));
                for (int i = 0; i < 4; ++i)
                    vote_ok = vote_ok &&
                              got[static_cast<std::size_t>(i)] == want[static_cast<std::size_t>(i)];

                const Tensor p1 = ensemble(mask_of(c), mask_of(a), mask_of(b), 2, 2);
                const Tensor p2 = ensemble(mask_of(b), mask_of(c), mask_of(a), 2, 2);
                perm_ok = perm_ok && testutil::bit_equal(got, p1) && testutil::bit_equal(got, p2);

                const Tensor soft = ensemble(mask_of(a), mask_of(b), mask_of(c), 2, 2, true);
                mean_ok = mean_ok && testutil::bit_equal(got, soft);
                ++checked;
            }
        }
    }
    for (int a = 0; a < 16; ++a) {
        const Tensor same = ensemble(mask_of(a), mask_of(a), mask_of(a), 2, 2);
        for (int i = 0; i < 4; ++i)
            unanimous_ok = unanimous_ok && same[static_cast<std::size_t>(i)] ==
                                               static_cast<float>((a >> i) & 1);
    }

    const bool pass = hand && vote_ok && perm_ok && unanimous_ok && mean_ok && checked == 4096;
    return {pass, fmt("hand cases %s; %d/4096 triples: majority %s, permutation %s, unanimity %s, soft-mean %s",
                      hand ? "exact" : "BROKEN", checked, vote_ok ? "exact" : "BROKEN",
                      perm_ok ? "invariant" : "BROKEN", unanimous_ok ? "exact" : "BROKEN",
                      mean_ok ? "consistent" : "BROKEN")};
}

// --------------------------------------------------------------------------
// 8. End-to-end reproducibility through the command-line surface.
// --------------------------------------------------------------------------
std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

int run_cmd(const std::string& args, const fs::path& out_file) {
    const std::string cmd =
        std::string(CLI_PATH) + " " + args + " >" + out_file.string() + " 2>/dev/null";
    const int rc = std::system(cmd.c_str());
    return rc == -1 ? -1 : WEXITSTATUS(rc);
}

bool dirs_byte_equal(const fs::path& a, const fs::path& b) {
    if (!fs::exists(a) || !fs::exists(b)) return fs::exists(a) == fs::exists(b);
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(a))
        if (e.is_regular_file()) names.push_back(e.path().filename().string());
    std::sort(names.begin(), names.end());
    for (const auto& n : names)
        if (!fs::exists(b / n) || slurp(a / n) != slurp(b / n)) return false;
    std::size_t nb = 0;
    for (const auto& e : fs::directory_iterator(b)) nb += e.is_regular_file();
    return nb == names.size();
}

json parsed_without_config(const std::string& text) {
    json j = json::parse(text);
    j.erase("config");  // the echo differs in the thread count by design
    return j;
}

Outcome criterion_determinism() {
    const Stopwatch sw;
    const fs::path dir = fs::temp_directory_path() / "tarseg_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);

    SceneConfig sc;
    sc.height = 32;
    sc.width = 64;
    sc.min_glyphs = 1;
    sc.max_glyphs = 2;
    sc.min_glyph_px = 10;
    const GlyphScene scene = generate_scene(5, sc);
    const fs::path img = dir / "scene.png";
    write_image(img.string(), tensor_to_image(scene.image));

    const std::string pipe_args =
        "pipeline --image " + img.string() +
        " --channels 8 --hidden 8 --attn-dim 4 --embed-dim 4 --proj-dim 4"
        " --max-steps 3 --rng-seed 11 --json --no-timing";
    const fs::path pa = dir / "pa", pb = dir / "pb", pc = dir / "pc";
    bool ok = run_cmd(pipe_args + " --threads 1 --out-dir " + pa.string(), dir / "p1.json") == 0;
    ok = ok && run_cmd(pipe_args + " --threads 1 --out-dir " + pb.string(), dir / "p2.json") == 0;
    ok = ok && run_cmd(pipe_args + " --threads 4 --out-dir " + pc.string(), dir / "p3.json") == 0;

    const bool pipe_bytes = ok && slurp(dir / "p1.json") == slurp(dir / "p2.json") &&
                            slurp(pa / "trace.json") == slurp(pb / "trace.json") &&
                            dirs_byte_equal(pa / "masks", pb / "masks") &&
                            dirs_byte_equal(pa / "pseudo", pb / "pseudo");
    const bool pipe_json =
        ok && parsed_without_config(slurp(dir / "p1.json")) ==
                  parsed_without_config(slurp(dir / "p3.json"));

    const std::string eval_args =
        "eval --scenes 8 --min-glyphs 1 --max-glyphs 3 --rng-seed 3 --json --no-timing";
    bool ok2 = run_cmd(eval_args + " --threads 1", dir / "e1.json") == 0;
    ok2 = ok2 && run_cmd(eval_args + " --threads 1", dir / "e2.json") == 0;
    ok2 = ok2 && run_cmd(eval_args + " --threads 4", dir / "e3.json") == 0;
    const bool eval_bytes = ok2 && slurp(dir / "e1.json") == slurp(dir / "e2.json");
    const bool eval_json = ok2 && parsed_without_config(slurp(dir / "e1.json")) ==
                                        parsed_without_config(slurp(dir / "e3.json"));

    const double secs = sw.seconds();
    const bool pass = pipe_bytes && pipe_json && eval_bytes && eval_json;
    return {pass, fmt("serial reruns byte-identical (pipeline %s, eval %s); 4-thread reports JSON-identical (pipeline %s, eval %s); %.1fs",
                      pipe_bytes ? "yes" : "NO", eval_bytes ? "yes" : "NO",
                      pipe_json ? "yes" : "NO", eval_json ? "yes" : "NO", secs)};
}

// --------------------------------------------------------------------------
// 9. Ring-glyph escape: center-point seeds on O/C/D must improve, with the
//    enclosed-hole leak tracked as evidence rather than gated.
// --------------------------------------------------------------------------
Outcome criterion_ring_escape() {
    const Stopwatch sw;
    EvalConfig cfg;
    cfg.scenes = 40;
    cfg.scene.alphabet = "OCD";
    cfg.scene.seed_mode = SeedMode::CenterPoint;
    cfg.scene.min_glyphs = 1;
    cfg.scene.max_glyphs = 3;
    cfg.scene.min_glyph_px = 8;
    cfg.scene.area_budget = 0.2;
    // A window spanning the miniature stroke width lets mass cross the ring,
    // matching the full-scale window-to-stroke proportion.
    cfg.refine.kernel_radius = 2;

    const EvalReport rep = run_eval(cfg);
    const double secs = sw.seconds();
    const bool pass = rep.mean_two_stage > rep.mean_seed;
    return {pass, fmt("mean two-stage %.4f > center-seed %.4f over 40 ring scenes; tracked hole leak %.2f on %d scenes; %.1fs",
                      rep.mean_two_stage, rep.mean_seed, rep.mean_hole_leak,
                      rep.scenes_with_holes, secs)};
}

}  // namespace

int main() {
    std::printf("acceptance gate: 9 criteria\n");
    report(1, "single-step refinement equals the double-precision reference",
           criterion_ref_equivalence());
    report(2, "refinement invariants: fixed point, containment, composition",
           criterion_invariants());
    report(3, "two-stage refinement beats the seed and the color-only stage on the corpus",
           criterion_two_stage_benefit());
    report(4, "refinement outpaces the dense mean-field baseline", criterion_speed());
    report(5, "attention maps are distributions with contained, reducible glimpses",
           criterion_attention());
    report(6, "losses match references and gradients match finite differences",
           criterion_losses());
    report(7, "overlap metric hand cases and exhaustive vote properties",
           criterion_metric_and_vote());
    report(8, "command-line runs reproduce byte-for-byte and across thread counts",
           criterion_determinism());
    report(9, "center seeds escape ring glyphs under two-stage refinement",
           criterion_ring_escape());

    if (failures == 0) {
        std::printf("result: all 9 criteria passed\n");
        return 0;
    }
    std::printf("result: %d criteria FAILED\n", failures);
    return 1;
}
