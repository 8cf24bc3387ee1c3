#pragma once

#include <span>
#include <utility>

#include "mvdpm/dpm.hpp"

namespace mvdpm {

/// Discrete occupation measure along one trajectory: the uniform measure
/// over the values at the positive grid times t_1..t_k, where k is the
/// largest index with t_k <= t. The t=0 value is excluded.
EmpiricalMeasure occupation_measure(std::span<const double> values, const TimeGrid& grid,
                                    double t);

/// Single-path self-interacting training: same loop as dpm_train but the
/// measure at each interior time is the occupation measure of the current
/// outputs along the same trajectory (snapshotted per epoch). The model's
/// coefficients must be time-homogeneous.
TrainedSolver train_self(const ModelSpec& model, const PathSet& path, double x0,
                         const TrainConfig& config, const EpochCallback& on_epoch = nullptr);

/// Mean and population standard deviation of the trained trajectory over
/// the grid times after discarding the first burn_in fraction.
std::pair<double, double> stationary_stats(const TrainedSolver& solver, const TimeGrid& grid,
                                           double burn_in);

} // namespace mvdpm
