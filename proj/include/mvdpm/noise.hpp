#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mvdpm/common.hpp"

namespace mvdpm {

enum class NoiseKind { Brownian, FractionalBrownian };

std::string to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(const std::string& s);

/// Ordered time points on [0, T]. Always starts at 0, always has the final
/// time present, and may be non-uniform (thinned grids).
struct TimeGrid {
    std::vector<double> points;

    std::size_t size() const { return points.size(); }
    double t_end() const { return points.back(); }

    /// strictly increasing, first element 0, at least 2 points
    void validate() const;
};

/// N noise trajectories sampled on a common grid, one row per particle.
/// Every row starts at 0 at t=0.
struct PathSet {
    TimeGrid grid;
    std::size_t n_paths = 0;
    std::vector<double> values; // n_paths x grid.size(), row-major
    NoiseKind kind = NoiseKind::Brownian;
    double hurst = 0.5;
    std::uint64_t seed = 0;

    double operator()(std::size_t path, std::size_t j) const {
        return values[path * grid.size() + j];
    }
    double& operator()(std::size_t path, std::size_t j) {
        return values[path * grid.size() + j];
    }

    void validate() const;
};

/// Uniform grid on [0, t_end] with m_points points (spacing t_end/(m_points-1)).
TimeGrid make_grid(double t_end, std::size_t m_points);

/// Randomly removes round(deletion_rate * (M-2)) interior points, drawn
/// uniformly without replacement. Endpoints are always kept.
TimeGrid thin_grid(const TimeGrid& grid, double deletion_rate, std::uint64_t seed);

/// Standard Brownian paths: increments over [t_j, t_{j+1}] are independent
/// N(0, t_{j+1}-t_j). Row i draws from the sub-stream derive(seed, i).
PathSet sample_brownian(const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed);

/// Fractional Brownian paths with Hurst index H in [0.5, 1), exact via
/// Cholesky factorization of the grid covariance
/// Cov(W_s, W_t) = (s^{2H} + t^{2H} - |t-s|^{2H}) / 2.
PathSet sample_fbm(const TimeGrid& grid, double hurst, std::size_t n_paths,
                   std::uint64_t seed);

/// CSV layout: header "t,path_0,...,path_{N-1}", one row per grid point,
/// 17 significant digits (lossless double round-trip).
void write_pathset_csv(const PathSet& paths, const std::string& file);
PathSet read_pathset_csv(const std::string& file, NoiseKind kind = NoiseKind::Brownian,
                         double hurst = 0.5);

/// In-place lower Cholesky of a dense symmetric matrix (row-major, n x n).
/// Returns false if a non-positive pivot is hit. Exposed for tests.
bool cholesky_lower(std::vector<double>& a, std::size_t n);

} // namespace mvdpm
