#include "mvdpm/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mvdpm {

EmpiricalMeasure::EmpiricalMeasure(std::vector<double> atoms) : atoms_(std::move(atoms)) {
    if (atoms_.empty()) throw std::invalid_argument("EmpiricalMeasure: no atoms");
    for (double a : atoms_)
        if (!std::isfinite(a)) throw std::invalid_argument("EmpiricalMeasure: non-finite atom");
    sorted_ = atoms_;
    std::sort(sorted_.begin(), sorted_.end());
    // accumulate in sorted order so the mean is invariant under atom
    // permutations down to the last bit (exchangeability tests rely on it)
    mean_ = std::accumulate(sorted_.begin(), sorted_.end(), 0.0) /
            static_cast<double>(sorted_.size());
}

double EmpiricalMeasure::fraction_leq(double x) const {
    const auto n = std::upper_bound(sorted_.begin(), sorted_.end(), x) - sorted_.begin();
    return static_cast<double>(n) / static_cast<double>(sorted_.size());
}

double burgers_drift(double x, const EmpiricalMeasure& mu) { return mu.fraction_leq(x); }

double linear_meanfield_drift(double x, const EmpiricalMeasure& mu) {
    return -2.0 * x - mu.mean();
}

double fbm_interaction_drift(double x, const EmpiricalMeasure& mu) { return x - mu.mean(); }

Coefficient constant_diffusion(double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("constant_diffusion: sigma must be positive");
    return [sigma](double, double, const EmpiricalMeasure&) { return sigma; };
}

namespace {

const Coefficient kZero = [](double, double, const EmpiricalMeasure&) { return 0.0; };

} // namespace

ModelSpec burgers_model(double sigma) {
    ModelSpec m;
    m.name = "burgers";
    m.drift = [](double, double x, const EmpiricalMeasure& mu) { return burgers_drift(x, mu); };
    m.diffusion = constant_diffusion(sigma);
    m.drift_dx = kZero; // step kernel: zero slope almost everywhere
    m.diffusion_dx = kZero;
    m.x0 = 0.0;
    return m;
}

ModelSpec linear_meanfield_model(double sigma) {
    ModelSpec m;
    m.name = "linear_meanfield";
    m.drift = [](double, double x, const EmpiricalMeasure& mu) {
        return linear_meanfield_drift(x, mu);
    };
    m.diffusion = constant_diffusion(sigma);
    m.drift_dx = [](double, double, const EmpiricalMeasure&) { return -2.0; };
    m.diffusion_dx = kZero;
    m.x0 = 0.0;
    return m;
}

ModelSpec fbm_interaction_model(double sigma, double hurst) {
    ModelSpec m;
    m.name = "fbm_interaction";
    m.drift = [](double, double x, const EmpiricalMeasure& mu) {
        return fbm_interaction_drift(x, mu);
    };
    m.diffusion = constant_diffusion(sigma);
    m.drift_dx = [](double, double, const EmpiricalMeasure&) { return 1.0; };
    m.diffusion_dx = kZero;
    m.x0 = 0.0;
    m.noise_kind = NoiseKind::FractionalBrownian;
    m.hurst = hurst;
    return m;
}

ModelSpec model_by_name(const std::string& name, double sigma, double hurst, double x0) {
    ModelSpec m;
    if (name == "burgers")
        m = burgers_model(sigma);
    else if (name == "linear_meanfield")
        m = linear_meanfield_model(sigma);
    else if (name == "fbm_interaction")
        m = fbm_interaction_model(sigma, hurst);
    else
        throw std::invalid_argument("unknown model: " + name);
    m.x0 = x0;
    return m;
}

} // namespace mvdpm
