#include "mvdpm/dpm.hpp"

#include <cmath>
#include <string>

#include "train_loop.hpp"

namespace mvdpm {

std::pair<double, double> pseudo_coefficients(const Jet& j, NoiseKind kind, double hurst,
                                              double t) {
    if (kind == NoiseKind::Brownian) return {j.f_t + 0.5 * j.f_ww, j.f_w};
    // fractional chain rule: dY = F_1 dt + H t^{2H-1} F_22 dt + F_2 dW^H
    return {j.f_t + hurst * std::pow(t, 2.0 * hurst - 1.0) * j.f_ww, j.f_w};
}

namespace detail {

EmpiricalMeasure column_measure(std::size_t m, const std::vector<double>& y,
                                std::size_t n_paths, std::size_t grid_size) {
    std::vector<double> atoms(n_paths);
    for (std::size_t i = 0; i < n_paths; ++i) atoms[i] = y[i * grid_size + m];
    return EmpiricalMeasure(std::move(atoms));
}

EmpiricalMeasure occupation_prefix_measure(std::size_t m, const std::vector<double>& y,
                                           std::size_t n_paths, std::size_t) {
    if (n_paths != 1)
        throw std::invalid_argument("occupation measure needs a single trajectory");
    // atoms are the values at the positive grid times t_1..t_m
    return EmpiricalMeasure(std::vector<double>(y.begin() + 1, y.begin() + m + 1));
}

namespace {

void check_shapes(std::size_t n_nets, const PathSet& paths, const TrainConfig& config) {
    const std::size_t expected =
        config.mode == TrainMode::PerParticleF ? paths.n_paths : 1;
    if (n_nets != expected)
        throw std::invalid_argument("dpm: network count does not match the training mode");
    if (!config.loss_weights.empty() && config.loss_weights.size() != paths.grid.size() - 1)
        throw std::invalid_argument(
            "dpm: loss_weights must have one entry per interior time point");
}

struct EpochScratch {
    std::vector<Jet> jets;       // n x m
    std::vector<double> y;       // n x m
    std::vector<double> resid_b; // drift residuals at interior points
    std::vector<double> resid_s; // diffusion residuals
    std::vector<double> b_dx;    // drift x-slope at interior points
    std::vector<double> s_dx;    // diffusion x-slope
};

// One epoch: forward everything, build per-time measures from the current
// outputs (snapshot; atoms are constants for the gradient), reduce the
// three loss terms and, when grads is non-null, accumulate per-net
// gradients of the total loss.
LossBreakdown run_epoch(const std::vector<Mlp>& nets, const PathSet& paths,
                        const ModelSpec& model, double x0, const TrainConfig& config,
                        const MeasureBuilder& measure, std::vector<std::vector<double>>* grads,
                        JetEvaluator& eval, EpochScratch& s) {
    const std::size_t n = paths.n_paths;
    const std::size_t m = paths.grid.size();
    const std::size_t interior = m - 1;
    const bool shared = config.mode == TrainMode::SharedF;

    s.jets.resize(n * m);
    s.y.resize(n * m);
    s.resid_b.assign(n * m, 0.0);
    s.resid_s.assign(n * m, 0.0);
    s.b_dx.assign(n * m, 0.0);
    s.s_dx.assign(n * m, 0.0);

    for (std::size_t i = 0; i < n; ++i) {
        const Mlp& net = nets[shared ? 0 : i];
        for (std::size_t j = 0; j < m; ++j) {
            const Jet jt = eval.forward(net, paths.grid.points[j], paths(i, j));
            s.jets[i * m + j] = jt;
            s.y[i * m + j] = jt.f;
        }
    }

    LossBreakdown loss;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = s.y[i * m] - x0;
        loss.l1 += e * e;
    }
    loss.l1 /= static_cast<double>(n);

    const double norm = 1.0 / static_cast<double>(n * interior);
    for (std::size_t j = 1; j < m; ++j) {
        const double t = paths.grid.points[j];
        const double lambda = config.loss_weights.empty() ? 1.0 : config.loss_weights[j - 1];
        const EmpiricalMeasure mu = measure(j, s.y, n, m);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t k = i * m + j;
            const auto [b_ps, s_ps] =
                pseudo_coefficients(s.jets[k], paths.kind, paths.hurst, t);
            const double yk = s.y[k];
            const double rb = model.drift(t, yk, mu) - b_ps;
            const double rs = model.diffusion(t, yk, mu) - s_ps;
            s.resid_b[k] = lambda * rb;
            s.resid_s[k] = lambda * rs;
            loss.l2 += lambda * rb * rb;
            loss.l3 += lambda * rs * rs;
            if (grads) {
                s.b_dx[k] = model.drift_dx(t, yk, mu);
                s.s_dx[k] = model.diffusion_dx(t, yk, mu);
            }
        }
    }
    loss.l2 *= norm;
    loss.l3 *= norm;

    if (grads) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t owner = shared ? 0 : i;
            const Mlp& net = nets[owner];
            auto& grad = (*grads)[owner];
            for (std::size_t j = 0; j < m; ++j) {
                const std::size_t k = i * m + j;
                const double t = paths.grid.points[j];
                JetCotangent cot;
                if (j == 0) {
                    cot.c_f = 2.0 * (s.y[k] - x0) / static_cast<double>(n);
                } else {
                    // d/dtheta of lambda*(b(t,Y,mu) - b_ps)^2 and the sigma
                    // term; gradient flows through Y but not the atoms
                    const double coef =
                        paths.kind == NoiseKind::Brownian
                            ? 0.5
                            : paths.hurst * std::pow(t, 2.0 * paths.hurst - 1.0);
                    const double gb = 2.0 * norm * s.resid_b[k];
                    const double gs = 2.0 * norm * s.resid_s[k];
                    cot.c_f = gb * s.b_dx[k] + gs * s.s_dx[k];
                    cot.c_t = -gb;
                    cot.c_ww = -gb * coef;
                    cot.c_w = -gs;
                }
                eval.forward(net, t, paths(i, j));
                eval.backward(net, cot, grad);
            }
        }
    }
    return loss;
}

} // namespace

LossBreakdown loss_only(const std::vector<Mlp>& nets, const PathSet& paths,
                        const ModelSpec& model, double x0, const TrainConfig& config,
                        const MeasureBuilder& measure) {
    paths.validate();
    check_shapes(nets.size(), paths, config);
    JetEvaluator eval(nets[0]);
    EpochScratch scratch;
    return run_epoch(nets, paths, model, x0, config, measure, nullptr, eval, scratch);
}

LossBreakdown loss_and_grads(const std::vector<Mlp>& nets, const PathSet& paths,
                             const ModelSpec& model, double x0, const TrainConfig& config,
                             const MeasureBuilder& measure,
                             std::vector<std::vector<double>>& grads) {
    paths.validate();
    check_shapes(nets.size(), paths, config);
    JetEvaluator eval(nets[0]);
    EpochScratch scratch;
    return run_epoch(nets, paths, model, x0, config, measure, &grads, eval, scratch);
}

TrainedSolver train_loop(const ModelSpec& model, const PathSet& paths, double x0,
                         const TrainConfig& config, const MeasureBuilder& measure,
                         const EpochCallback& on_epoch) {
    paths.validate();
    if (paths.kind != model.noise_kind)
        throw std::invalid_argument("dpm_train: noise kind does not match the model");
    if (config.epochs < 1) throw std::invalid_argument("dpm_train: epochs must be >= 1");
    if (!(config.lr > 0.0)) throw std::invalid_argument("dpm_train: learning rate must be > 0");
    if (config.eps1 < 0.0 || config.eps2 < 0.0 || config.eps3 < 0.0)
        throw std::invalid_argument("dpm_train: thresholds must be non-negative");

    const std::size_t n_nets =
        config.mode == TrainMode::PerParticleF ? paths.n_paths : 1;

    TrainedSolver solver;
    solver.paths = paths;
    solver.config = config;
    solver.nets.reserve(n_nets);
    for (std::size_t k = 0; k < n_nets; ++k)
        solver.nets.push_back(mlp_init(config.layer_sizes, rng::derive(config.seed, k)));
    check_shapes(solver.nets.size(), paths, config);

    const std::size_t n_params = solver.nets[0].param_count();
    std::vector<AdamState> opt(n_nets, adam_init(n_params));
    std::vector<std::vector<double>> grads(n_nets, std::vector<double>(n_params, 0.0));

    JetEvaluator eval(solver.nets[0]);
    EpochScratch scratch;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        for (auto& g : grads) std::fill(g.begin(), g.end(), 0.0);
        const LossBreakdown loss = run_epoch(solver.nets, paths, model, x0, config, measure,
                                             &grads, eval, scratch);
        if (!std::isfinite(loss.total()))
            throw numerical_error("dpm_train: non-finite loss at epoch " +
                                  std::to_string(epoch));
        solver.loss_history.push_back(loss);
        if (on_epoch) on_epoch(epoch, loss, scratch.y);
        for (std::size_t k = 0; k < n_nets; ++k)
            adam_step(opt[k], solver.nets[k], grads[k], config.lr);
        if (loss.l1 < config.eps1 && loss.l2 < config.eps2 && loss.l3 < config.eps3) break;
    }
    return solver;
}

} // namespace detail

LossBreakdown dpm_compute_loss(const std::vector<Mlp>& nets, const PathSet& paths,
                               const ModelSpec& model, double x0, const TrainConfig& config) {
    return detail::loss_only(nets, paths, model, x0, config, detail::column_measure);
}

TrainedSolver dpm_train(const ModelSpec& model, const PathSet& paths, double x0,
                        const TrainConfig& config, const EpochCallback& on_epoch) {
    return detail::train_loop(model, paths, x0, config, detail::column_measure, on_epoch);
}

Ensemble dpm_evaluate(const TrainedSolver& solver, const TimeGrid& grid, const PathSet& paths) {
    grid.validate();
    paths.validate();
    if (paths.grid.points != grid.points)
        throw std::invalid_argument("dpm_evaluate: paths are not sampled on the given grid");
    if (solver.config.mode == TrainMode::PerParticleF &&
        paths.n_paths != solver.nets.size())
        throw std::invalid_argument("dpm_evaluate: path count does not match network count");

    const std::size_t n = paths.n_paths;
    const std::size_t m = grid.size();
    const bool shared = solver.config.mode == TrainMode::SharedF;

    Ensemble ens;
    ens.grid = grid;
    ens.n_particles = n;
    ens.states.assign(n * m, 0.0);

    JetEvaluator eval(solver.nets[0]);
    for (std::size_t i = 0; i < n; ++i) {
        const Mlp& net = solver.nets[shared ? 0 : i];
        for (std::size_t j = 0; j < m; ++j)
            ens(i, j) = eval.forward(net, grid.points[j], paths(i, j)).f;
    }
    return ens;
}

} // namespace mvdpm
