#pragma once

#include "mvdpm/ensemble.hpp"
#include "mvdpm/metrics.hpp"
#include "mvdpm/models.hpp"

namespace mvdpm {

/// Explicit Euler-Maruyama for the interacting particle system: each step
/// uses the empirical measure of the *current* states and the noise
/// increments of the given paths. Supports non-uniform grids.
Ensemble pem_simulate(const ModelSpec& model, const PathSet& paths, double x0);

/// Runs pem_simulate on a fine uniform grid (spacing fine_h up to t_eval)
/// with big_n particles and returns the empirical CDF of the terminal
/// states. Used to manufacture reference solutions.
ECDF reference_cdf(const ModelSpec& model, double t_eval, double fine_h, std::size_t big_n,
                   std::uint64_t seed);

} // namespace mvdpm
