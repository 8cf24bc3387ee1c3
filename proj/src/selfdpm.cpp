#include "mvdpm/selfdpm.hpp"

#include <algorithm>
#include <cmath>

#include "mvdpm/metrics.hpp"
#include "train_loop.hpp"

namespace mvdpm {

EmpiricalMeasure occupation_measure(std::span<const double> values, const TimeGrid& grid,
                                    double t) {
    grid.validate();
    if (values.size() != grid.size())
        throw std::invalid_argument("occupation_measure: values do not match the grid");
    if (!(t >= grid.points[1]))
        throw std::invalid_argument(
            "occupation_measure: t must be at or after the first positive grid time");
    // largest k with t_k <= t
    const auto it = std::upper_bound(grid.points.begin(), grid.points.end(), t);
    const auto k = static_cast<std::size_t>(it - grid.points.begin()) - 1;
    return EmpiricalMeasure(std::vector<double>(values.begin() + 1, values.begin() + k + 1));
}

TrainedSolver train_self(const ModelSpec& model, const PathSet& path, double x0,
                         const TrainConfig& config, const EpochCallback& on_epoch) {
    if (path.n_paths != 1)
        throw std::invalid_argument("train_self: expected a single-path PathSet");
    TrainConfig cfg = config;
    cfg.mode = TrainMode::SharedF; // one network either way
    return detail::train_loop(model, path, x0, cfg, detail::occupation_prefix_measure,
                              on_epoch);
}

std::pair<double, double> stationary_stats(const TrainedSolver& solver, const TimeGrid& grid,
                                           double burn_in) {
    if (!(burn_in >= 0.0 && burn_in < 1.0))
        throw std::invalid_argument("stationary_stats: burn_in must lie in [0, 1)");
    const Ensemble ens = dpm_evaluate(solver, grid, solver.paths);
    const std::size_t m = grid.size();
    const auto skip = static_cast<std::size_t>(std::floor(burn_in * static_cast<double>(m)));
    if (skip >= m) throw std::invalid_argument("stationary_stats: no points after burn-in");
    std::vector<double> tail;
    tail.reserve(m - skip);
    for (std::size_t j = skip; j < m; ++j) tail.push_back(ens(0, j));
    return moments(tail);
}

} // namespace mvdpm
