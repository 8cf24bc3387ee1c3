#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mvdpm {

/// Thrown when a computation produces non-finite values or an iterative
/// numerical procedure fails to converge. Contract violations use
/// std::invalid_argument instead.
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

namespace rng {

inline constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

// splitmix64 finalizer
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Derives an independent sub-stream key from a parent key and an index.
/// Used to give every particle / purpose its own stream so rows can be
/// generated in any order (or in parallel) with identical results.
inline std::uint64_t derive(std::uint64_t key, std::uint64_t idx) {
    return mix64(mix64(key + kGamma) + idx * 0xD1B54A32D192ED03ULL + kGamma);
}

/// Purpose tags for deriving the per-run sub-streams from one config seed.
enum : std::uint64_t {
    kStreamNoise = 1,
    kStreamInit = 2,
    kStreamThin = 3,
    kStreamMseDist = 4,
    kStreamReference = 5,
};

/// Counter-based generator: output i is mix64(base + i*gamma), so a stream
/// is fully determined by its key. State is just the counter plus the
/// cached Box-Muller spare.
class Stream {
public:
    explicit Stream(std::uint64_t key) : base_(key) {}

    std::uint64_t next_u64() { return mix64(base_ + (++counter_) * kGamma); }

    /// uniform on [0,1)
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// uniform on (0,1) -- safe for log()
    double open01() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// uniform on [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// standard normal via Box-Muller
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = open01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// uniform integer in [0, n) by 128-bit multiply (bias-free enough for
    /// subset draws; n is tiny compared to 2^64)
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

private:
    std::uint64_t base_;
    std::uint64_t counter_ = 0;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace rng

/// FNV-1a 64-bit, used for artifact checksums in run manifests.
inline std::uint64_t fnv1a64(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001B3ULL;
    }
    return h;
}

} // namespace mvdpm
