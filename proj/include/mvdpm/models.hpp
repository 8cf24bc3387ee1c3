#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mvdpm/noise.hpp"

namespace mvdpm {

/// Uniform probability measure on a finite list of atoms. Atoms are kept in
/// the order given; a sorted copy and the mean are cached on construction so
/// indicator-type drifts and mean-field drifts stay cheap.
class EmpiricalMeasure {
public:
    explicit EmpiricalMeasure(std::vector<double> atoms);

    const std::vector<double>& atoms() const { return atoms_; }
    std::size_t size() const { return atoms_.size(); }
    double mean() const { return mean_; }

    /// (#atoms <= x) / n
    double fraction_leq(double x) const;

private:
    std::vector<double> atoms_;
    std::vector<double> sorted_;
    double mean_;
};

/// Coefficient of the MV-SDE: (t, x, measure) -> real.
using Coefficient = std::function<double(double, double, const EmpiricalMeasure&)>;

/// Problem definition: drift b, diffusion sigma, their x-derivatives (used
/// by the training gradient, which flows through the state argument while
/// the measure atoms stay frozen), initial state and noise kind.
struct ModelSpec {
    std::string name;
    Coefficient drift;
    Coefficient diffusion;
    Coefficient drift_dx;     // db/dx, analytic (a.e. for indicator drifts)
    Coefficient diffusion_dx; // dsigma/dx
    double x0 = 0.0;
    NoiseKind noise_kind = NoiseKind::Brownian;
    double hurst = 0.5;
};

/// Drift of the Burgers-type MV-SDE: integral of the step kernel,
/// (1/N) #{atoms y : x >= y}. The boundary y = x counts.
double burgers_drift(double x, const EmpiricalMeasure& mu);

/// -2x - mean(atoms)
double linear_meanfield_drift(double x, const EmpiricalMeasure& mu);

/// x - mean(atoms)
double fbm_interaction_drift(double x, const EmpiricalMeasure& mu);

/// Constant diffusion (t,x,mu) -> sigma; sigma must be positive.
Coefficient constant_diffusion(double sigma);

ModelSpec burgers_model(double sigma);
ModelSpec linear_meanfield_model(double sigma);
ModelSpec fbm_interaction_model(double sigma, double hurst);

/// Lookup by CLI name: "burgers", "linear_meanfield", "fbm_interaction".
ModelSpec model_by_name(const std::string& name, double sigma, double hurst, double x0);

} // namespace mvdpm
