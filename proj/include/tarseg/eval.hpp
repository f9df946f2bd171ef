#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tarseg/meanfield.hpp"
#include "tarseg/synth.hpp"
#include "tarseg/tar.hpp"

namespace tarseg {

struct EvalConfig {
    int scenes = 200;
    std::uint64_t rng_seed = 1;
    std::uint64_t weights_seed = 7;  // stage-1 guidance backbone
    SceneConfig scene;
    RefineConfig refine;
    int rgb_only_iters = 10;  // single-stage comparator
    int feature_channels = 16;  // desk-scale guidance width
    double guide_gain = 1.0;  // stage-1 feature magnitude (see prepare_stage1_guidance)
    int threads = 1;

    void validate() const;
};

struct SceneResult {
    int id = 0;
    std::uint64_t scene_seed = 0;
    int instances = 0;
    double fiou_seed = 0.0;
    double fiou_rgb_only = 0.0;
    double fiou_two_stage = 0.0;
    // Fraction of enclosed-hole pixels the refined mask claims as
    // foreground; negative when the scene has no enclosed holes.
    double hole_leak = -1.0;
};

struct EvalReport {
    std::vector<SceneResult> scenes;
    double mean_seed = 0.0, mean_rgb_only = 0.0, mean_two_stage = 0.0;
    double median_two_stage = 0.0;
    double improved_fraction = 0.0;   // scenes with two-stage strictly above seed
    double vs_rgb_only_win_fraction = 0.0;  // scenes with two-stage >= rgb-only
    double mean_hole_leak = -1.0;     // over scenes that have holes
    int scenes_with_holes = 0;
    double wall_ms = 0.0;
};

EvalReport run_eval(const EvalConfig& cfg);

struct BenchConfig {
    int height = 48, width = 160;
    int repeats = 20;  // >= 5, median reported, extra warm-up run discarded
    RefineConfig refine;
    int mf_iters = 5;
    MeanFieldConfig mf;
    int feature_channels = 16;
    double guide_gain = 1.0;
    std::uint64_t rng_seed = 1;
    bool scaling_probe = false;  // also time doubled iteration counts

    void validate() const;
};

struct BenchReport {
    double tar_median_ms = 0.0;
    double mf_median_ms = 0.0;
    double ratio = 0.0;  // mean-field / tar
    double tar_doubled_median_ms = -1.0;  // set by the scaling probe
    int repeats = 0;
};

BenchReport run_bench(const BenchConfig& cfg);

// Corpus serialization: one image and one mask file per record plus a
// JSON-lines manifest.
struct CorpusRecord {
    int id = 0;
    std::uint64_t rng_seed = 0;
    std::string image_path;
    std::vector<std::string> mask_paths;
    std::vector<int> symbols;
};

std::vector<CorpusRecord> write_corpus(const std::string& dir,
                                       const std::vector<GlyphScene>& scenes);
std::vector<CorpusRecord> read_corpus_manifest(const std::string& path);

}  // namespace tarseg
