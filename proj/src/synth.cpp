#include "tarseg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "tarseg/recognizer.hpp"
#include "tarseg/rng.hpp"

namespace tarseg {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kStrokeHalfwidth = 0.09;  // relative to the glyph box edge

struct Segment {
    double x0, y0, x1, y1;
};

// Circular arc, angles in radians with y pointing down: 0 = right,
// pi/2 = down. The covered range is [a0, a1] going counter... increasing.
struct Arc {
    double cx, cy, r, a0, a1;
};

struct GlyphShape {
    std::vector<Segment> segs;
    std::vector<Arc> arcs;
};

const std::map<char, GlyphShape>& glyph_shapes() {
    static const std::map<char, GlyphShape> shapes = [] {
        std::map<char, GlyphShape> m;
        m['O'] = {{}, {{0.5, 0.5, 0.35, 0.0, 2.0 * kPi}}};
        m['C'] = {{}, {{0.5, 0.5, 0.35, 0.25 * kPi, 1.75 * kPi}}};
        m['D'] = {{{0.30, 0.15, 0.30, 0.85}}, {{0.30, 0.5, 0.35, -0.5 * kPi, 0.5 * kPi}}};
        m['I'] = {{{0.5, 0.15, 0.5, 0.85}}, {}};
        m['L'] = {{{0.3, 0.15, 0.3, 0.85}, {0.3, 0.85, 0.75, 0.85}}, {}};
        m['T'] = {{{0.2, 0.15, 0.8, 0.15}, {0.5, 0.15, 0.5, 0.85}}, {}};
        m['H'] = {{{0.25, 0.15, 0.25, 0.85}, {0.75, 0.15, 0.75, 0.85}, {0.25, 0.5, 0.75, 0.5}},
                  {}};
        m['U'] = {{{0.25, 0.15, 0.25, 0.6}, {0.75, 0.15, 0.75, 0.6}},
                  {{0.5, 0.6, 0.25, 0.0, kPi}}};
        m['X'] = {{{0.25, 0.15, 0.75, 0.85}, {0.75, 0.15, 0.25, 0.85}}, {}};
        m['Z'] = {{{0.25, 0.15, 0.75, 0.15}, {0.75, 0.15, 0.25, 0.85}, {0.25, 0.85, 0.75, 0.85}},
                  {}};
        return m;
    }();
    return shapes;
}

double segment_distance(double px, double py, const Segment& s) {
    const double dx = s.x1 - s.x0, dy = s.y1 - s.y0;
    const double len_sq = dx * dx + dy * dy;
    double t = len_sq > 0.0 ? ((px - s.x0) * dx + (py - s.y0) * dy) / len_sq : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double qx = s.x0 + t * dx, qy = s.y0 + t * dy;
    return std::hypot(px - qx, py - qy);
}

double arc_distance(double px, double py, const Arc& a) {
    const double dx = px - a.cx, dy = py - a.cy;
    const double d = std::hypot(dx, dy);
    double ang = std::atan2(dy, dx);
    while (ang < a.a0) ang += 2.0 * kPi;
    if (ang <= a.a1) return std::abs(d - a.r);
    const double ex0 = a.cx + a.r * std::cos(a.a0), ey0 = a.cy + a.r * std::sin(a.a0);
    const double ex1 = a.cx + a.r * std::cos(a.a1), ey1 = a.cy + a.r * std::sin(a.a1);
    return std::min(std::hypot(px - ex0, py - ey0), std::hypot(px - ex1, py - ey1));
}

double stroke_distance(double px, double py, const GlyphShape& g) {
    double d = 1e30;
    for (const auto& s : g.segs) d = std::min(d, segment_distance(px, py, s));
    for (const auto& a : g.arcs) d = std::min(d, arc_distance(px, py, a));
    return d;
}

struct Placement {
    char ch;
    int x, y, size;  // top-left of the glyph box
};

void paint_background(Tensor& image, const std::string& kind, Rng& rng) {
    const int h = image.dim(1), w = image.dim(2);
    if (kind == "flat") {
        const double base = rng.uniform(0.05, 0.35);
        for (int c = 0; c < 3; ++c) {
            const float v =
                static_cast<float>(std::clamp(base + rng.uniform(-0.05, 0.05), 0.0, 0.43));
            float* p = image.data() + static_cast<std::size_t>(c) * h * w;
            std::fill(p, p + static_cast<std::size_t>(h) * w, v);
        }
    } else if (kind == "gradient") {
        const double b0 = rng.uniform(0.05, 0.30), b1 = rng.uniform(0.05, 0.30);
        const bool horizontal = rng.uniform() < 0.5;
        double off[3];
        for (auto& o : off) o = rng.uniform(-0.05, 0.05);
        for (int c = 0; c < 3; ++c)
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) {
                    const double t = horizontal ? static_cast<double>(x) / (w - 1)
                                                : static_cast<double>(y) / (h - 1);
                    image(c, y, x) =
                        static_cast<float>(std::clamp(b0 + (b1 - b0) * t + off[c], 0.0, 0.43));
                }
    } else {  // noise: smooth value noise on a coarse grid
        const double base = rng.uniform(0.10, 0.30);
        const int cell = 8;
        const int gh = (h + cell - 1) / cell + 1, gw = (w + cell - 1) / cell + 1;
        std::vector<double> grid(static_cast<std::size_t>(gh) * gw * 3);
        for (auto& g : grid) g = rng.uniform(-0.08, 0.08);
        for (int c = 0; c < 3; ++c)
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) {
                    const double gy = static_cast<double>(y) / cell;
                    const double gx = static_cast<double>(x) / cell;
                    const int iy = static_cast<int>(gy), ix = static_cast<int>(gx);
                    const double fy = gy - iy, fx = gx - ix;
                    auto at = [&](int yy, int xx) {
                        return grid[(static_cast<std::size_t>(c) * gh + yy) * gw + xx];
                    };
                    const double top = at(iy, ix) + fx * (at(iy, ix + 1) - at(iy, ix));
                    const double bot = at(iy + 1, ix) + fx * (at(iy + 1, ix + 1) - at(iy + 1, ix));
                    image(c, y, x) =
                        static_cast<float>(std::clamp(base + top + fy * (bot - top), 0.0, 0.43));
                }
    }
}

}  // namespace

void SceneConfig::validate() const {
    if (height < 8 || width < 8) throw ConfigError("scene: image must be at least 8x8");
    if (height % 8 != 0 || width % 4 != 0)
        throw ConfigError("scene: height must be divisible by 8 and width by 4");
    if (min_glyphs < 1 || max_glyphs < min_glyphs)
        throw ConfigError("scene: glyph count range is invalid");
    if (!(contrast_floor > 0.0 && contrast_floor <= 0.32))
        throw ConfigError("scene: contrast floor must lie in (0, 0.32]");
    if (min_glyph_px < 8) throw ConfigError("scene: glyphs below 8 px render too coarsely");
    if (min_glyph_px + 2 > std::min(height, width))
        throw ConfigError("scene: the smallest glyph plus its 1 px margin must fit the image");
    if (!(area_budget > 0.0 && area_budget <= 0.9))
        throw ConfigError("scene: area budget must lie in (0, 0.9]");
    if (retry_budget < 1) throw ConfigError("scene: retry budget must be >= 1");
    if (!(seed_coverage > 0.0 && seed_coverage <= 1.0))
        throw ConfigError("scene: seed coverage must lie in (0, 1]");
    if (background != "flat" && background != "gradient" && background != "noise" &&
        background != "random")
        throw ConfigError("scene: background must be flat, gradient, noise, or random");
    for (const char ch : alphabet)
        if (glyph_shapes().find(ch) == glyph_shapes().end())
            throw ConfigError(std::string("scene: glyph '") + ch + "' is not in the alphabet " +
                              glyph_alphabet());
}

const std::string& glyph_alphabet() {
    static const std::string alphabet = "OCDILTHUXZ";
    return alphabet;
}

GlyphScene generate_scene(std::uint64_t rng_seed, const SceneConfig& cfg) {
    cfg.validate();
    Rng rng = Rng::stream(rng_seed, 50);
    const int h = cfg.height, w = cfg.width;
    const std::string alphabet = cfg.alphabet.empty() ? glyph_alphabet() : cfg.alphabet;

    GlyphScene scene;
    scene.rng_seed = rng_seed;
    scene.image = Tensor({3, h, w});
    scene.background_kind = cfg.background;
    if (scene.background_kind == "random") {
        const char* kinds[3] = {"flat", "gradient", "noise"};
        scene.background_kind = kinds[rng.uniform_int(0, 2)];
    }
    paint_background(scene.image, scene.background_kind, rng);

    // Place glyph boxes, pairwise disjoint with a 1 px margin.
    const int n = rng.uniform_int(cfg.min_glyphs, cfg.max_glyphs);
    const double budget = cfg.area_budget * h * w / n;
    const int smax = std::max(cfg.min_glyph_px,
                              std::min(static_cast<int>(0.75 * std::min(h, w) + 0.5),
                                       static_cast<int>(std::sqrt(budget))));
    std::vector<Placement> placed;
    for (int i = 0; i < n; ++i) {
        const char ch = alphabet[static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<int>(alphabet.size()) - 1))];
        const int s = rng.uniform_int(cfg.min_glyph_px, smax);
        bool ok = false;
        for (int attempt = 0; attempt < cfg.retry_budget && !ok; ++attempt) {
            const int gx = rng.uniform_int(1, w - s - 1);
            const int gy = rng.uniform_int(1, h - s - 1);
            ok = true;
            for (const auto& p : placed) {
                const bool apart = gx + s + 1 <= p.x || p.x + p.size + 1 <= gx ||
                                   gy + s + 1 <= p.y || p.y + p.size + 1 <= gy;
                if (!apart) {
                    ok = false;
                    break;
                }
            }
            if (ok) placed.push_back({ch, gx, gy, s});
        }
        // A crowded draw degrades to fewer glyphs; only the floor is enforced.
    }
    if (static_cast<int>(placed.size()) < cfg.min_glyphs)
        throw ConfigError("scene: placed only " + std::to_string(placed.size()) + " of the " +
                          std::to_string(cfg.min_glyphs) + " required glyphs within " +
                          std::to_string(cfg.retry_budget) +
                          " attempts each; lower the glyph count or size");

    // Rasterize masks from the exact stroke distance field and paint the ink.
    const SymbolTable table = SymbolTable::builtin();
    for (const auto& p : placed) {
        const GlyphShape& shape = glyph_shapes().at(p.ch);
        GlyphInstance inst;
        inst.mask = Tensor({h, w});
        inst.symbol = table.class_of(std::string(1, p.ch));
        float fg[3];
        for (auto& v : fg) v = static_cast<float>(rng.uniform(0.75, 0.95));

        int x0 = w, y0 = h, x1 = -1, y1 = -1;
        for (int y = p.y; y < p.y + p.size; ++y) {
            for (int x = p.x; x < p.x + p.size; ++x) {
                const double u = (x + 0.5 - p.x) / p.size;
                const double v = (y + 0.5 - p.y) / p.size;
                if (stroke_distance(u, v, shape) > kStrokeHalfwidth) continue;
                inst.mask(y, x) = 1.0f;
                for (int c = 0; c < 3; ++c) scene.image(c, y, x) = fg[c];
                x0 = std::min(x0, x);
                x1 = std::max(x1, x);
                y0 = std::min(y0, y);
                y1 = std::max(y1, y);
            }
        }
        if (x1 < 0) throw CheckError("scene: glyph rasterized to an empty mask");
        inst.x0 = x0;
        inst.y0 = y0;
        inst.x1 = x1;
        inst.y1 = y1;
        scene.instances.push_back(std::move(inst));
    }

    // Seeds: isotropic Gaussians at each mask centroid.
    for (auto& inst : scene.instances) {
        double cx = 0.0, cy = 0.0, count = 0.0, rms = 0.0;
        for (int y = inst.y0; y <= inst.y1; ++y)
            for (int x = inst.x0; x <= inst.x1; ++x)
                if (inst.mask(y, x) > 0.5f) {
                    cx += x;
                    cy += y;
                    count += 1.0;
                }
        cx /= count;
        cy /= count;
        for (int y = inst.y0; y <= inst.y1; ++y)
            for (int x = inst.x0; x <= inst.x1; ++x)
                if (inst.mask(y, x) > 0.5f)
                    rms += (x - cx) * (x - cx) + (y - cy) * (y - cy);
        rms = std::sqrt(rms / count);

        const int side = std::min(inst.x1 - inst.x0, inst.y1 - inst.y0) + 1;
        double sigma = cfg.seed_mode == SeedMode::CenterPoint
                           ? std::max(1.0, 0.06 * side)
                           : std::max(1.0, 0.6 * rms);
        Tensor seed({h, w});
        auto render = [&](double sg) {
            const double inv = 1.0 / (2.0 * sg * sg);
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) {
                    const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
                    seed(y, x) = static_cast<float>(std::exp(-d2 * inv));
                }
        };
        render(sigma);
        if (cfg.seed_mode == SeedMode::Blob) {
            // Core = the region that binarizes to foreground; grow the blob
            // until it covers at least the configured fraction of the mask.
            for (int tries = 0; tries < 5; ++tries) {
                const double core = sigma * std::sqrt(2.0 * std::log(2.0));
                double covered = 0.0;
                for (int y = inst.y0; y <= inst.y1; ++y)
                    for (int x = inst.x0; x <= inst.x1; ++x)
                        if (inst.mask(y, x) > 0.5f &&
                            (x - cx) * (x - cx) + (y - cy) * (y - cy) <= core * core)
                            covered += 1.0;
                if (covered / count >= cfg.seed_coverage) break;
                if (tries == 4)
                    throw CheckError("scene: seed blob covers under " +
                                     std::to_string(cfg.seed_coverage) + " of its glyph");
                sigma *= 1.5;
                render(sigma);
            }
        }
        inst.seed.values = std::move(seed);

        // Centroid containment is structural (the mask lies in its box), but
        // assert it anyway as a generator self-check.
        if (cx < inst.x0 || cx > inst.x1 || cy < inst.y0 || cy > inst.y1)
            throw CheckError("scene: seed centroid escaped the glyph bounding box");
    }

    // Self-checks: pairwise disjointness and the contrast floor.
    Tensor any_fg({h, w});
    for (const auto& inst : scene.instances)
        for (std::size_t i = 0; i < any_fg.size(); ++i)
            if (inst.mask[i] > 0.5f) {
                if (any_fg[i] > 0.5f) throw CheckError("scene: instance masks overlap");
                any_fg[i] = 1.0f;
            }
    double fg_sum = 0.0, bg_sum = 0.0, fg_n = 0.0, bg_n = 0.0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double intensity =
                (scene.image(0, y, x) + scene.image(1, y, x) + scene.image(2, y, x)) / 3.0;
            if (any_fg(y, x) > 0.5f) {
                fg_sum += intensity;
                fg_n += 1.0;
            } else {
                bg_sum += intensity;
                bg_n += 1.0;
            }
        }
    if (fg_n > 0.0 && bg_n > 0.0 &&
        std::abs(fg_sum / fg_n - bg_sum / bg_n) < cfg.contrast_floor)
        throw CheckError("scene: foreground/background contrast fell below the floor");

    return scene;
}

double fiou(const Tensor& pred, const Tensor& gt) {
    if (!pred.same_shape(gt))
        throw ShapeError("fiou: shapes " + pred.shape_str() + " vs " + gt.shape_str());
    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const bool a = pred[i] > 0.5f, b = gt[i] > 0.5f;
        inter += a && b ? 1 : 0;
        uni += a || b ? 1 : 0;
    }
    if (uni == 0) return 1.0;  // both empty
    return static_cast<double>(inter) / static_cast<double>(uni);
}

Tensor interior_holes(const Tensor& mask) {
    if (mask.rank() != 2) throw ShapeError("interior_holes: mask must be [H,W]");
    const int h = mask.dim(0), w = mask.dim(1);
    std::vector<std::uint8_t> reached(static_cast<std::size_t>(h) * w, 0);
    std::vector<int> stack;
    auto push = [&](int y, int x) {
        const std::size_t i = static_cast<std::size_t>(y) * w + x;
        if (!reached[i] && mask[i] <= 0.5f) {
            reached[i] = 1;
            stack.push_back(y * w + x);
        }
    };
    for (int x = 0; x < w; ++x) {
        push(0, x);
        push(h - 1, x);
    }
    for (int y = 0; y < h; ++y) {
        push(y, 0);
        push(y, w - 1);
    }
    while (!stack.empty()) {
        const int i = stack.back();
        stack.pop_back();
        const int y = i / w, x = i % w;
        if (y > 0) push(y - 1, x);
        if (y + 1 < h) push(y + 1, x);
        if (x > 0) push(y, x - 1);
        if (x + 1 < w) push(y, x + 1);
    }
    Tensor holes({h, w});
    for (std::size_t i = 0; i < holes.size(); ++i)
        holes[i] = (mask[i] <= 0.5f && !reached[i]) ? 1.0f : 0.0f;
    return holes;
}

}  // namespace tarseg
