#include "mvdpm/pem.hpp"

#include <cmath>
#include <string>

namespace mvdpm {

Ensemble pem_simulate(const ModelSpec& model, const PathSet& paths, double x0) {
    paths.validate();
    if (paths.kind != model.noise_kind)
        throw std::invalid_argument("pem_simulate: noise kind does not match the model");
    if (!std::isfinite(x0)) throw std::invalid_argument("pem_simulate: non-finite x0");

    const std::size_t n = paths.n_paths;
    const std::size_t m = paths.grid.size();
    Ensemble ens;
    ens.grid = paths.grid;
    ens.n_particles = n;
    ens.model_name = model.name;
    ens.states.assign(n * m, 0.0);
    for (std::size_t i = 0; i < n; ++i) ens(i, 0) = x0;

    std::vector<double> current(n, x0);
    for (std::size_t j = 0; j + 1 < m; ++j) {
        const double t = paths.grid.points[j];
        const double h = paths.grid.points[j + 1] - t;
        const EmpiricalMeasure mu(current);
        for (std::size_t i = 0; i < n; ++i) {
            const double dw = paths(i, j + 1) - paths(i, j);
            const double x = current[i];
            const double next =
                x + h * model.drift(t, x, mu) + model.diffusion(t, x, mu) * dw;
            if (!std::isfinite(next))
                throw numerical_error("pem_simulate: non-finite state at step " +
                                      std::to_string(j + 1));
            current[i] = next;
            ens(i, j + 1) = next;
        }
    }
    return ens;
}

ECDF reference_cdf(const ModelSpec& model, double t_eval, double fine_h, std::size_t big_n,
                   std::uint64_t seed) {
    if (!(t_eval > 0.0) || !(fine_h > 0.0))
        throw std::invalid_argument("reference_cdf: t_eval and fine_h must be positive");
    const double steps = t_eval / fine_h;
    const auto n_steps = static_cast<std::size_t>(std::llround(steps));
    if (n_steps < 1 || std::abs(steps - static_cast<double>(n_steps)) > 1e-9 * steps)
        throw std::invalid_argument("reference_cdf: fine_h must divide t_eval");

    const TimeGrid grid = make_grid(t_eval, n_steps + 1);
    const PathSet paths =
        model.noise_kind == NoiseKind::FractionalBrownian
            ? sample_fbm(grid, model.hurst, big_n, seed)
            : sample_brownian(grid, big_n, seed);
    const Ensemble ens = pem_simulate(model, paths, model.x0);
    return ECDF(ens.terminal());
}

} // namespace mvdpm
