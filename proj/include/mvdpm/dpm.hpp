#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "mvdpm/autonet.hpp"
#include "mvdpm/ensemble.hpp"
#include "mvdpm/models.hpp"

namespace mvdpm {

/// SharedF: one network for all particles (i.i.d. copies).
/// PerParticleF: one network per particle (interacting system).
enum class TrainMode { SharedF, PerParticleF };

struct TrainConfig {
    int epochs = 100;
    double lr = 1e-3;
    /// per-interior-time-point loss weights (index m-1 for grid index m);
    /// empty means all ones
    std::vector<double> loss_weights;
    /// early-stop thresholds; 0 disables early stopping
    double eps1 = 0.0, eps2 = 0.0, eps3 = 0.0;
    TrainMode mode = TrainMode::PerParticleF;
    std::vector<int> layer_sizes = {2, 32, 32, 1};
    std::uint64_t seed = 0;
    /// treat the empirical measure's atoms as constants within an epoch
    bool detach_measure = true;
};

struct LossBreakdown {
    double l1 = 0.0; // initial-condition MSE
    double l2 = 0.0; // drift-residual weighted MSE
    double l3 = 0.0; // diffusion-residual weighted MSE
    double total() const { return l1 + l2 + l3; }
};

struct TrainedSolver {
    std::vector<Mlp> nets; // 1 (SharedF) or N (PerParticleF)
    PathSet paths;
    TrainConfig config;
    std::vector<LossBreakdown> loss_history;
};

/// Drift/diffusion implied by the stochastic chain rule for Y = F(t, W):
/// Brownian:   (f_t + f_ww / 2,           f_w)
/// fractional: (f_t + H t^{2H-1} f_ww,    f_w)
std::pair<double, double> pseudo_coefficients(const Jet& j, NoiseKind kind, double hurst,
                                              double t);

/// Loss of the current networks on the given paths. The measure at each
/// grid time is the uniform measure over the networks' outputs at that
/// time. L2/L3 average the weighted squared residuals over all
/// (particle, interior time) pairs; t=0 contributes only to L1.
LossBreakdown dpm_compute_loss(const std::vector<Mlp>& nets, const PathSet& paths,
                               const ModelSpec& model, double x0, const TrainConfig& config);

/// Invoked once per epoch with the losses and the current network outputs
/// (n_paths x grid_size, row-major) before the parameter update.
using EpochCallback = std::function<void(int epoch, const LossBreakdown&,
                                         std::span<const double> y_values)>;

/// Full-batch Adam over at most config.epochs epochs; stops early when all
/// three thresholds are met. Throws numerical_error (with the epoch index)
/// if the loss goes non-finite.
TrainedSolver dpm_train(const ModelSpec& model, const PathSet& paths, double x0,
                        const TrainConfig& config, const EpochCallback& on_epoch = nullptr);

/// Meshless evaluation: Y(i,m) = F^i(t_m, W(i,m)) by forward pass only.
/// The paths must live on the given grid; PerParticleF requires one path
/// per network.
Ensemble dpm_evaluate(const TrainedSolver& solver, const TimeGrid& grid, const PathSet& paths);

} // namespace mvdpm
