#pragma once

#include <cmath>
#include <cstdint>

namespace tarseg {

// Counter-based pseudo-random generator built on the splitmix64 finalizer.
//
// The whole artifact draws its randomness from one explicit 64-bit seed.
// Output i of a generator with key k is mix64(k + (i+1) * GOLDEN), so a
// stream is a pure function of (key, counter) and independent streams are
// derived by hashing a stream id into the key. Normal deviates use
// Box-Muller and consume exactly two uniforms per call. No std::
// distributions are used anywhere; the byte-level sequence is fixed by
// this header alone.
class Rng {
public:
    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

    static std::uint64_t mix64(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ULL;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBULL;
        z ^= z >> 31;
        return z;
    }

    explicit Rng(std::uint64_t seed) : key_(seed) {}

    // Independent stream: key' = mix64(seed + (id+1)*GOLDEN).
    static Rng stream(std::uint64_t seed, std::uint64_t stream_id) {
        return Rng(mix64(seed + (stream_id + 1) * kGolden));
    }

    std::uint64_t next_u64() { return mix64(key_ + (++counter_) * kGolden); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Inclusive integer range.
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
    }

    // Standard normal via Box-Muller; consumes two uniforms.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log1p(-u1));
        return r * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace tarseg
