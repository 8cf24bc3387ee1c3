#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "mvdpm/common.hpp"
#include "mvdpm/ensemble.hpp"

namespace mvdpm {

/// Right-continuous empirical CDF: F(x) = (#samples <= x) / n.
class ECDF {
public:
    explicit ECDF(std::vector<double> samples);

    double operator()(double x) const;
    const std::vector<double>& sorted_samples() const { return sorted_; }
    std::size_t size() const { return sorted_.size(); }

private:
    std::vector<double> sorted_;
};

ECDF ecdf(std::vector<double> samples);

using CdfFn = std::function<double(double)>;

inline constexpr std::pair<double, double> kDefaultCdfRange{-1.5, 2.5};
inline constexpr int kDefaultMsePoints = 10000;

/// Mean squared CDF gap over n_points i.i.d. uniform draws on (lo, hi).
double mse_dist(const CdfFn& f, const CdfFn& g, int n_points,
                std::pair<double, double> range, std::uint64_t seed);

/// Deterministic variant on an equispaced grid (test/debug mode).
double mse_dist_grid(const CdfFn& f, const CdfFn& g, int n_points,
                     std::pair<double, double> range);

/// Exact CDF of the Burgers-type solution at T=1 for X0 = 0:
/// numerator integrates exp(-[(x-y)^2/2 + y]/sigma^2) over y >= 0,
/// denominator the same with the linear term only for y >= 0, over all y.
/// Adaptive quadrature, absolute tolerance 1e-10 per integral; integration
/// windows truncated at |y - x| <= 12 sigma.
double burgers_exact_cdf(double x, double sigma);

/// p-Wasserstein distance between two uniform empirical measures with the
/// same atom count: L^p distance of sorted samples (the optimal monotone
/// coupling in one dimension).
double wasserstein_p_1d(std::vector<double> a, std::vector<double> b, double p);

/// Per-grid-time mean squared gap across particles (pathwise pairing).
std::vector<double> trajectory_error(const Ensemble& y, const Ensemble& x_ref);

/// (arithmetic mean, population standard deviation)
std::pair<double, double> moments(std::span<const double> samples);

} // namespace mvdpm
