#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tarseg/tar.hpp"
#include "tarseg/tensor.hpp"

namespace tarseg {

enum class SeedMode {
    Blob,        // Gaussian blob sized to cover >= the configured mask fraction
    CenterPoint  // tight dot at the mask centroid (the hollow-trap scenario)
};

struct SceneConfig {
    int height = 48;
    int width = 160;
    int min_glyphs = 1;
    int max_glyphs = 8;
    double contrast_floor = 0.3;    // min |fg - bg| mean-intensity gap
    int min_glyph_px = 14;          // smallest glyph box edge
    double area_budget = 0.35;      // total glyph-box area as a fraction of the image
    int retry_budget = 100;         // placement attempts per glyph
    SeedMode seed_mode = SeedMode::Blob;
    double seed_coverage = 0.25;    // min fraction of mask pixels inside the blob core
    std::string background = "random";  // flat | gradient | noise | random
    std::string alphabet;           // subset of the builtin glyphs; empty = all

    void validate() const;
};

struct GlyphInstance {
    Tensor mask;     // [H,W] of {0,1}, exact ground truth
    int symbol = 0;  // class id
    SoftLabel seed;  // synthetic attention blob, [H,W] in [0,1]
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // tight mask bounding box, inclusive
};

struct GlyphScene {
    Tensor image;  // [3,H,W] in [0,1]
    std::vector<GlyphInstance> instances;
    std::string background_kind;  // flat | gradient | noise
    std::uint64_t rng_seed = 0;
};

// The builtin vector-stroke alphabet (includes the ring glyphs O, C, D).
const std::string& glyph_alphabet();

// Deterministic scene synthesis with exact ground truth. Throws a
// configuration error when a glyph cannot be placed within the retry budget,
// and a check error if a generated scene violates its own invariants
// (disjoint masks, contrast floor, seed centroid containment, blob coverage).
GlyphScene generate_scene(std::uint64_t rng_seed, const SceneConfig& cfg);

// Foreground intersection over union; both-empty is defined as 1.0.
double fiou(const Tensor& pred, const Tensor& gt);

// {0,1} map of background pixels fully enclosed by the mask (background
// connectivity to the border is 4-connected).
Tensor interior_holes(const Tensor& mask);

}  // namespace tarseg
