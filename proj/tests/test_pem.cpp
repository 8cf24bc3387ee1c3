#include <doctest.h>

#include <cmath>

#include "mvdpm/pem.hpp"

using namespace mvdpm;

namespace {

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

ModelSpec drift_free(double sigma) {
    ModelSpec m;
    m.name = "pure_diffusion";
    m.drift = [](double, double, const EmpiricalMeasure&) { return 0.0; };
    m.drift_dx = m.drift;
    m.diffusion = constant_diffusion(sigma);
    m.diffusion_dx = [](double, double, const EmpiricalMeasure&) { return 0.0; };
    return m;
}

ModelSpec noiseless_linear_meanfield() {
    ModelSpec m = linear_meanfield_model(1.0);
    m.name = "linear_meanfield_ode";
    m.diffusion = [](double, double, const EmpiricalMeasure&) { return 0.0; };
    return m;
}

} // namespace

TEST_CASE("pure diffusion reproduces x0 + c W exactly") {
    const TimeGrid g = make_grid(1.0, 21);
    const PathSet paths = sample_brownian(g, 8, 5);
    const Ensemble ens = pem_simulate(drift_free(0.7), paths, 1.5);
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < g.size(); ++j)
            CHECK(ens(i, j) == doctest::Approx(1.5 + 0.7 * paths(i, j)).epsilon(1e-12));
}

TEST_CASE("one deterministic Euler step of the mean-field ODE") {
    // sigma = 0, N = 1: drift -2x - x = -3x; from x0 = 1 with h = 0.5
    const TimeGrid g{{0.0, 0.5}};
    PathSet paths = sample_brownian(g, 1, 0);
    const Ensemble ens = pem_simulate(noiseless_linear_meanfield(), paths, 1.0);
    CHECK(ens(0, 1) == doctest::Approx(-0.5).epsilon(1e-15));
}

TEST_CASE("zero diffusion makes the output independent of the noise") {
    const TimeGrid g = make_grid(1.0, 11);
    const PathSet a = sample_brownian(g, 6, 1);
    const PathSet b = sample_brownian(g, 6, 2);
    const ModelSpec model = noiseless_linear_meanfield();
    CHECK(pem_simulate(model, a, 0.8).states == pem_simulate(model, b, 0.8).states);
}

TEST_CASE("exchangeability: permuting path rows permutes output rows") {
    const TimeGrid g = make_grid(1.0, 9);
    const PathSet paths = sample_brownian(g, 5, 77);
    PathSet permuted = paths;
    const std::vector<std::size_t> perm{3, 0, 4, 1, 2};
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < g.size(); ++j) permuted(i, j) = paths(perm[i], j);

    const ModelSpec model = burgers_model(0.5);
    const Ensemble a = pem_simulate(model, paths, 0.0);
    const Ensemble b = pem_simulate(model, permuted, 0.0);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < g.size(); ++j) CHECK(b(i, j) == a(perm[i], j));
}

TEST_CASE("first-order convergence on the noiseless mean-field ODE") {
    // exact solution x(t) = x0 e^{-3t}
    const ModelSpec model = noiseless_linear_meanfield();
    const double exact = std::exp(-3.0);
    std::vector<double> errs;
    for (double h : {0.1, 0.05, 0.025}) {
        const auto m = static_cast<std::size_t>(std::llround(1.0 / h)) + 1;
        const PathSet paths = sample_brownian(make_grid(1.0, m), 1, 0);
        const Ensemble ens = pem_simulate(model, paths, 1.0);
        errs.push_back(std::abs(ens(0, m - 1) - exact));
    }
    CHECK(errs[0] / errs[1] == doctest::Approx(2.0).epsilon(0.15));
    CHECK(errs[1] / errs[2] == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("pem runs on thinned (non-uniform) grids") {
    const TimeGrid g = thin_grid(make_grid(1.0, 21), 0.4, 5);
    const PathSet paths = sample_brownian(g, 10, 8);
    const Ensemble ens = pem_simulate(burgers_model(0.5), paths, 0.0);
    CHECK_NOTHROW(ens.validate());
    CHECK(ens.grid.points == g.points);
}

TEST_CASE("noise-kind mismatch and non-finite states are rejected") {
    const TimeGrid g = make_grid(1.0, 5);
    const PathSet fbm = sample_fbm(g, 0.7, 3, 1);
    CHECK_THROWS_AS(pem_simulate(burgers_model(0.5), fbm, 0.0), std::invalid_argument);

    ModelSpec blowup = drift_free(1.0);
    blowup.drift = [](double, double x, const EmpiricalMeasure&) { return x * 1e200; };
    const PathSet paths = sample_brownian(g, 2, 1);
    CHECK_THROWS_WITH_AS(pem_simulate(blowup, paths, 1.0),
                         doctest::Contains("step"), numerical_error);
}

TEST_CASE("reference cdf of pure diffusion approximates the normal law") {
    const ModelSpec model = drift_free(1.0);
    const ECDF ref = reference_cdf(model, 1.0, 0.01, 10000, 31415);
    double sup = 0.0;
    for (double x = -4.0; x <= 4.0; x += 0.01)
        sup = std::max(sup, std::abs(ref(x) - norm_cdf(x)));
    CHECK(sup < 0.02); // DKW at n = 1e4
}

TEST_CASE("reference cdf validates the step size") {
    const ModelSpec model = drift_free(1.0);
    CHECK_THROWS_AS(reference_cdf(model, 1.0, 0.3, 10, 0), std::invalid_argument);
    CHECK_THROWS_AS(reference_cdf(model, -1.0, 0.1, 10, 0), std::invalid_argument);
}
