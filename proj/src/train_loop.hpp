#pragma once

// Internal training machinery shared by the interacting-particle and
// self-interacting solvers. Not part of the public API.

#include <functional>
#include <vector>

#include "mvdpm/dpm.hpp"

namespace mvdpm::detail {

/// Builds the measure seen by the residuals at interior grid index m
/// (1 <= m < grid size) from the current network outputs
/// (n_paths x grid_size, row-major).
using MeasureBuilder =
    std::function<EmpiricalMeasure(std::size_t m, const std::vector<double>& y,
                                   std::size_t n_paths, std::size_t grid_size)>;

/// Particle-system measure: uniform over the column of outputs at time m.
EmpiricalMeasure column_measure(std::size_t m, const std::vector<double>& y,
                                std::size_t n_paths, std::size_t grid_size);

/// Occupation measure along a single trajectory: uniform over the outputs
/// at the positive grid times up to and including m (the t=0 value is
/// excluded).
EmpiricalMeasure occupation_prefix_measure(std::size_t m, const std::vector<double>& y,
                                           std::size_t n_paths, std::size_t grid_size);

LossBreakdown loss_only(const std::vector<Mlp>& nets, const PathSet& paths,
                        const ModelSpec& model, double x0, const TrainConfig& config,
                        const MeasureBuilder& measure);

/// Loss plus per-net gradients: the exact derivative of loss_only with the
/// measure atoms frozen at the current outputs. grads must hold one zeroed
/// vector of param_count() per net. Exposed for finite-difference checks.
LossBreakdown loss_and_grads(const std::vector<Mlp>& nets, const PathSet& paths,
                             const ModelSpec& model, double x0, const TrainConfig& config,
                             const MeasureBuilder& measure,
                             std::vector<std::vector<double>>& grads);

TrainedSolver train_loop(const ModelSpec& model, const PathSet& paths, double x0,
                         const TrainConfig& config, const MeasureBuilder& measure,
                         const EpochCallback& on_epoch);

} // namespace mvdpm::detail
