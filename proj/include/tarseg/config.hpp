#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

namespace tarseg {

// Every tunable the CLI exposes, with its default. Keys in a config file are
// the long option names without the leading dashes (one key=value per line,
// '#' comments); explicit command-line flags override file values.
struct RunConfig {
    // Model dimensions.
    int channels = 512;
    int hidden = 256;
    int attn_dim = 128;
    int embed_dim = 32;
    int proj_dim = 128;
    // Guidance extraction width for the refinement tools (refine/eval/bench);
    // small by default so desk-scale runs stay fast.
    int guide_channels = 16;
    // Stage-1 feature magnitude; edge permeability scales inversely with it.
    double guide_gain = 1.0;

    // Refinement.
    int radius = 1;
    int iters1 = 2;
    int iters2 = 8;
    double sigma_floor = 1e-4;
    bool include_center = false;
    bool sigma_global = false;
    double threshold = 0.5;

    // Losses.
    double tau = 0.1;
    double lambda_rec = 1.0;
    double lambda_c = 0.1;
    bool include_positive = false;
    int batch = 32;

    // Run control.
    std::uint64_t rng_seed = 1;
    std::uint64_t weights_seed = 7;
    int threads = 1;
    int max_steps = 25;
    bool json = false;
    bool no_timing = false;

    // Scenes.
    int height = 48;
    int width = 160;
    int scenes = 200;
    int min_glyphs = 1;
    int max_glyphs = 8;
    double contrast_floor = 0.3;
    double seed_coverage = 0.25;
    std::string seed_mode = "blob";  // blob | center
    std::string background = "random";
    int min_glyph_px = 14;
    double area_budget = 0.35;
    int retry_budget = 100;
    std::string alphabet;  // glyph subset; empty = full builtin set

    // Comparators and benchmarks.
    int rgb_iters = 10;
    int repeats = 20;
    int mf_iters = 5;
    double pos_sigma = 20.0;
    double rgb_sigma = 0.1;
    int area_cap = 16384;
    bool scaling_probe = false;

    // Gradient checking.
    int batches = 50;
};

// Applies key=value lines from a file; unknown keys and malformed values
// are configuration errors naming the offending line.
void apply_config_file(RunConfig& cfg, const std::string& path);

// Same parser for a single in-memory line ("key=value").
void apply_config_line(RunConfig& cfg, const std::string& line);

// The effective configuration, echoed into every report.
nlohmann::ordered_json config_echo(const RunConfig& cfg);

}  // namespace tarseg
