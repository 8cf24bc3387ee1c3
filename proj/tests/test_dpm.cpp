#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mvdpm/dpm.hpp"
#include "mvdpm/pem.hpp"
#include "train_loop.hpp"

using namespace mvdpm;

namespace {

Mlp affine_net(double wt, double ww, double b) {
    Mlp net;
    net.layer_sizes = {2, 1};
    net.weights = {{wt, ww}};
    net.biases = {{b}};
    return net;
}

// constant-coefficient SDE dX = a dt + c dW (measure unused)
ModelSpec constant_model(double a, double c) {
    ModelSpec m;
    m.name = "constant";
    m.drift = [a](double, double, const EmpiricalMeasure&) { return a; };
    m.drift_dx = [](double, double, const EmpiricalMeasure&) { return 0.0; };
    m.diffusion = [c](double, double, const EmpiricalMeasure&) { return c; };
    m.diffusion_dx = [](double, double, const EmpiricalMeasure&) { return 0.0; };
    return m;
}

// state-dependent coefficients, no measure dependence: makes the frozen-atom
// gradient equal to the plain finite difference of the loss
ModelSpec state_dependent_model() {
    ModelSpec m;
    m.name = "state_dep";
    m.drift = [](double, double x, const EmpiricalMeasure&) { return -2.0 * x + 0.5; };
    m.drift_dx = [](double, double, const EmpiricalMeasure&) { return -2.0; };
    m.diffusion = [](double, double x, const EmpiricalMeasure&) { return 0.3 + 0.1 * x; };
    m.diffusion_dx = [](double, double, const EmpiricalMeasure&) { return 0.1; };
    return m;
}

} // namespace

TEST_CASE("pseudo coefficients: brownian and fractional chain rules") {
    SUBCASE("affine F has pseudo-drift a and pseudo-diffusion c") {
        const Jet j{1.3, 0.25, 0.5, 0.0};
        const auto [b, s] = pseudo_coefficients(j, NoiseKind::Brownian, 0.5, 0.7);
        CHECK(b == 0.25);
        CHECK(s == 0.5);
    }
    SUBCASE("H = 0.5 reduces to the Ito term") {
        const Jet j{0.0, 0.0, 0.0, 2.0};
        for (double t : {0.0, 0.3, 1.0}) {
            const auto [bf, sf] =
                pseudo_coefficients(j, NoiseKind::FractionalBrownian, 0.5, t);
            const auto [bb, sb] = pseudo_coefficients(j, NoiseKind::Brownian, 0.5, t);
            CHECK(bf == 1.0);
            CHECK(bf == bb);
            CHECK(sf == sb);
        }
    }
    SUBCASE("H = 0.7 at t = 1 scales f_ww by H") {
        const Jet j{0.0, 0.0, 0.0, 1.0};
        const auto [b, s] = pseudo_coefficients(j, NoiseKind::FractionalBrownian, 0.7, 1.0);
        CHECK(b == doctest::Approx(0.7).epsilon(1e-15));
        CHECK(s == 0.0);
    }
}

TEST_CASE("exact affine solution of the constant-coefficient SDE has zero loss") {
    const double a = 0.4, c = 0.8, x0 = 1.1;
    const TimeGrid g = make_grid(1.0, 6);
    const PathSet paths = sample_brownian(g, 7, 3);
    const std::vector<Mlp> nets{affine_net(a, c, x0)};
    TrainConfig cfg;
    cfg.mode = TrainMode::SharedF;
    const LossBreakdown loss =
        dpm_compute_loss(nets, paths, constant_model(a, c), x0, cfg);
    CHECK(loss.l1 == 0.0);
    CHECK(loss.l2 == 0.0);
    CHECK(loss.l3 == 0.0);
}

TEST_CASE("initial-condition loss by hand: single particle, offset 0.3") {
    const TimeGrid g = make_grid(1.0, 2);
    const PathSet paths = sample_brownian(g, 1, 1);
    const std::vector<Mlp> nets{affine_net(0.0, 0.0, 0.3)}; // F == 0.3 everywhere
    TrainConfig cfg;
    cfg.mode = TrainMode::SharedF;
    const LossBreakdown loss =
        dpm_compute_loss(nets, paths, constant_model(0.0, 1.0), 0.0, cfg);
    CHECK(loss.l1 == doctest::Approx(0.09).epsilon(1e-15));
}

TEST_CASE("residual identity on a one-hidden-unit network") {
    // F = gamma tanh(alpha t + beta w + delta) + rho on a single path
    const double alpha = 0.6, beta = -1.1, delta = 0.3, gamma = 1.4, rho = 0.2;
    Mlp net;
    net.layer_sizes = {2, 1, 1};
    net.weights = {{alpha, beta}, {gamma}};
    net.biases = {{delta}, {rho}};

    const TimeGrid g{{0.0, 1.0}};
    PathSet paths = sample_brownian(g, 1, 9);
    const double w1 = paths(0, 1);

    const ModelSpec model = burgers_model(0.5);
    TrainConfig cfg;
    cfg.mode = TrainMode::SharedF;
    const LossBreakdown loss = dpm_compute_loss({net}, paths, model, 0.0, cfg);

    // hand jet at (1, w1)
    const double u = alpha * 1.0 + beta * w1 + delta;
    const double v = std::tanh(u);
    const double p = 1.0 - v * v;
    const double f = gamma * v + rho;
    const double f_t = gamma * p * alpha;
    const double f_w = gamma * p * beta;
    const double f_ww = gamma * (-2.0 * v * p) * beta * beta;

    // single atom: the particle sees itself, so the drift is H(0) = 1
    const double r2 = 1.0 - (f_t + 0.5 * f_ww);
    const double r3 = 0.5 - f_w;
    CHECK(loss.l2 == doctest::Approx(r2 * r2).epsilon(1e-13));
    CHECK(loss.l3 == doctest::Approx(r3 * r3).epsilon(1e-13));

    const double u0 = delta; // at (0, 0)
    const double e0 = gamma * std::tanh(u0) + rho;
    CHECK(loss.l1 == doctest::Approx(e0 * e0).epsilon(1e-13));
}

TEST_CASE("training gradient equals the finite difference of the loss") {
    // measure-free model: frozen atoms change nothing, so FD is exact
    const ModelSpec model = state_dependent_model();
    const TimeGrid g = make_grid(1.0, 4);

    const auto check_mode = [&](TrainMode mode, std::size_t n_paths) {
        const PathSet paths = sample_brownian(g, n_paths, 21);
        TrainConfig cfg;
        cfg.mode = mode;
        cfg.layer_sizes = {2, 4, 1};
        const std::size_t n_nets = mode == TrainMode::SharedF ? 1 : n_paths;
        std::vector<Mlp> nets;
        for (std::size_t k = 0; k < n_nets; ++k)
            nets.push_back(mlp_init(cfg.layer_sizes, 40 + k));

        std::vector<std::vector<double>> grads(
            n_nets, std::vector<double>(nets[0].param_count(), 0.0));
        detail::loss_and_grads(nets, paths, model, 0.2, cfg, detail::column_measure, grads);

        const double hp = 1e-6;
        for (std::size_t k = 0; k < n_nets; ++k) {
            std::vector<double> theta = nets[k].flatten();
            for (std::size_t idx = 0; idx < theta.size(); idx += 3) {
                const double save = theta[idx];
                theta[idx] = save + hp;
                nets[k].unflatten(theta);
                const double up =
                    detail::loss_only(nets, paths, model, 0.2, cfg, detail::column_measure)
                        .total();
                theta[idx] = save - hp;
                nets[k].unflatten(theta);
                const double dn =
                    detail::loss_only(nets, paths, model, 0.2, cfg, detail::column_measure)
                        .total();
                theta[idx] = save;
                nets[k].unflatten(theta);
                const double fd = (up - dn) / (2 * hp);
                CHECK(std::abs(grads[k][idx] - fd) <=
                      1e-6 * std::max(1.0, std::abs(fd)));
            }
        }
    };
    check_mode(TrainMode::SharedF, 3);
    check_mode(TrainMode::PerParticleF, 3);
}

TEST_CASE("training is deterministic per seed") {
    const ModelSpec model = burgers_model(0.5);
    const TimeGrid g = make_grid(1.0, 3);
    const PathSet paths = sample_brownian(g, 6, 4);
    TrainConfig cfg;
    cfg.epochs = 12;
    cfg.layer_sizes = {2, 8, 1};
    cfg.seed = 5;
    const TrainedSolver a = dpm_train(model, paths, 0.0, cfg);
    const TrainedSolver b = dpm_train(model, paths, 0.0, cfg);
    REQUIRE(a.loss_history.size() == b.loss_history.size());
    for (std::size_t e = 0; e < a.loss_history.size(); ++e) {
        CHECK(a.loss_history[e].l1 == b.loss_history[e].l1);
        CHECK(a.loss_history[e].l2 == b.loss_history[e].l2);
        CHECK(a.loss_history[e].l3 == b.loss_history[e].l3);
    }
    for (std::size_t k = 0; k < a.nets.size(); ++k)
        CHECK(a.nets[k].flatten() == b.nets[k].flatten());
}

TEST_CASE("early stop fires only when all three thresholds are met") {
    const double a = 0.2, c = 0.6, x0 = 0.5;
    const ModelSpec model = constant_model(a, c);
    const TimeGrid g = make_grid(1.0, 3);
    const PathSet paths = sample_brownian(g, 4, 8);
    TrainConfig cfg;
    cfg.epochs = 4000;
    cfg.layer_sizes = {2, 8, 1};
    cfg.mode = TrainMode::SharedF;
    cfg.eps1 = cfg.eps2 = cfg.eps3 = 1e-3;
    cfg.seed = 11;
    const TrainedSolver s = dpm_train(model, paths, x0, cfg);
    REQUIRE(!s.loss_history.empty());
    CHECK(s.loss_history.size() < 4000);
    const LossBreakdown last = s.loss_history.back();
    CHECK(last.l1 < cfg.eps1);
    CHECK(last.l2 < cfg.eps2);
    CHECK(last.l3 < cfg.eps3);
    // defaults never stop early
    TrainConfig fixed = cfg;
    fixed.eps1 = fixed.eps2 = fixed.eps3 = 0.0;
    fixed.epochs = 7;
    CHECK(dpm_train(model, paths, x0, fixed).loss_history.size() == 7);
}

TEST_CASE("sharedF loss is invariant under path permutations") {
    const ModelSpec model = burgers_model(0.5);
    const TimeGrid g = make_grid(1.0, 4);
    const PathSet paths = sample_brownian(g, 5, 14);
    PathSet permuted = paths;
    const std::vector<std::size_t> perm{4, 2, 0, 3, 1};
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < g.size(); ++j) permuted(i, j) = paths(perm[i], j);

    const std::vector<Mlp> nets{mlp_init({2, 8, 1}, 2)};
    TrainConfig cfg;
    cfg.mode = TrainMode::SharedF;
    const LossBreakdown la = dpm_compute_loss(nets, paths, model, 0.0, cfg);
    const LossBreakdown lb = dpm_compute_loss(nets, permuted, model, 0.0, cfg);
    CHECK(la.l1 == doctest::Approx(lb.l1).epsilon(1e-13));
    CHECK(la.l2 == doctest::Approx(lb.l2).epsilon(1e-13));
    CHECK(la.l3 == doctest::Approx(lb.l3).epsilon(1e-13));

    // evaluated trajectories permute exactly
    TrainedSolver solver;
    solver.nets = nets;
    solver.paths = paths;
    solver.config = cfg;
    const Ensemble ea = dpm_evaluate(solver, g, paths);
    const Ensemble eb = dpm_evaluate(solver, g, permuted);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < g.size(); ++j) CHECK(eb(i, j) == ea(perm[i], j));
}

TEST_CASE("H = 0.5 fbm and brownian paths with the same normals give one loss") {
    const TimeGrid g = make_grid(1.0, 5);
    PathSet brownian = sample_brownian(g, 4, 6);
    PathSet fbm = brownian;
    fbm.kind = NoiseKind::FractionalBrownian;
    fbm.hurst = 0.5;

    const std::vector<Mlp> nets{mlp_init({2, 8, 8, 1}, 3)};
    TrainConfig cfg;
    cfg.mode = TrainMode::SharedF;
    const ModelSpec model = burgers_model(0.5);
    const LossBreakdown lb = dpm_compute_loss(nets, brownian, model, 0.0, cfg);
    const LossBreakdown lf = dpm_compute_loss(nets, fbm, model, 0.0, cfg);
    CHECK(lb.l1 == lf.l1);
    CHECK(lb.l2 == lf.l2);
    CHECK(lb.l3 == lf.l3);
}

TEST_CASE("evaluate: affine solver reproduces the closed form on any grid") {
    const double a = 0.4, c = 0.8, x0 = 1.1;
    TrainedSolver solver;
    solver.nets = {affine_net(a, c, x0)};
    solver.config.mode = TrainMode::SharedF;

    const TimeGrid g = thin_grid(make_grid(2.0, 17), 0.3, 2);
    const PathSet paths = sample_brownian(g, 6, 12);
    const Ensemble ens = dpm_evaluate(solver, g, paths);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < g.size(); ++j)
            CHECK(ens(i, j) == doctest::Approx(x0 + a * g.points[j] + c * paths(i, j))
                                   .epsilon(1e-14));

    // meshless: fresh paths through the same trained net still evaluate
    const PathSet fresh = sample_brownian(g, 9, 999);
    CHECK(dpm_evaluate(solver, g, fresh).n_particles == 9);
}

TEST_CASE("evaluate re-runs the same forward pass bitwise") {
    const ModelSpec model = burgers_model(0.5);
    const TimeGrid g = make_grid(1.0, 3);
    const PathSet paths = sample_brownian(g, 4, 4);
    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.layer_sizes = {2, 8, 1};
    const TrainedSolver solver = dpm_train(model, paths, 0.0, cfg);
    const Ensemble e1 = dpm_evaluate(solver, g, paths);
    const Ensemble e2 = dpm_evaluate(solver, g, paths);
    CHECK(e1.states == e2.states);
    // and matches a manual jet pass over the first net
    CHECK(e1(0, 1) == jet(solver.nets[0], g.points[1], paths(0, 1)).f);
}

TEST_CASE("evaluate rejects mismatched path counts in per-particle mode") {
    const ModelSpec model = burgers_model(0.5);
    const TimeGrid g = make_grid(1.0, 3);
    const PathSet paths = sample_brownian(g, 4, 4);
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.layer_sizes = {2, 4, 1};
    const TrainedSolver solver = dpm_train(model, paths, 0.0, cfg);
    const PathSet wrong = sample_brownian(g, 3, 4);
    CHECK_THROWS_AS(dpm_evaluate(solver, g, wrong), std::invalid_argument);
}

TEST_CASE("training aborts on a non-finite loss instead of continuing") {
    ModelSpec blowup = constant_model(1e308, 1.0);
    const TimeGrid g = make_grid(1.0, 3);
    const PathSet paths = sample_brownian(g, 2, 2);
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.layer_sizes = {2, 4, 1};
    CHECK_THROWS_WITH_AS(dpm_train(blowup, paths, 0.0, cfg), doctest::Contains("epoch"),
                         numerical_error);
}

TEST_CASE("noise-kind mismatch is rejected at train time") {
    const TimeGrid g = make_grid(1.0, 3);
    const PathSet fbm = sample_fbm(g, 0.7, 2, 1);
    TrainConfig cfg;
    cfg.epochs = 1;
    CHECK_THROWS_AS(dpm_train(burgers_model(0.5), fbm, 0.0, cfg), std::invalid_argument);
}

TEST_CASE("loss trends downward on a small burgers run") {
    const ModelSpec model = burgers_model(0.5);
    const TimeGrid g = make_grid(1.0, 3);
    const PathSet paths = sample_brownian(g, 16, 10);
    TrainConfig cfg;
    cfg.epochs = 100;
    cfg.layer_sizes = {2, 16, 1};
    cfg.seed = 1;
    const TrainedSolver s = dpm_train(model, paths, 0.0, cfg);

    auto median_total = [&](std::size_t lo, std::size_t hi) {
        std::vector<double> totals;
        for (std::size_t e = lo; e < hi; ++e) totals.push_back(s.loss_history[e].total());
        std::sort(totals.begin(), totals.end());
        return totals[totals.size() / 2];
    };
    const std::size_t k = s.loss_history.size();
    CHECK(median_total(k - k / 10, k) < median_total(0, k / 10));
}
