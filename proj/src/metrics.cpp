#include "mvdpm/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace mvdpm {

ECDF::ECDF(std::vector<double> samples) : sorted_(std::move(samples)) {
    if (sorted_.empty()) throw std::invalid_argument("ECDF: empty sample");
    for (double s : sorted_)
        if (!std::isfinite(s)) throw std::invalid_argument("ECDF: non-finite sample");
    std::sort(sorted_.begin(), sorted_.end());
}

double ECDF::operator()(double x) const {
    const auto n = std::upper_bound(sorted_.begin(), sorted_.end(), x) - sorted_.begin();
    return static_cast<double>(n) / static_cast<double>(sorted_.size());
}

ECDF ecdf(std::vector<double> samples) { return ECDF(std::move(samples)); }

double mse_dist(const CdfFn& f, const CdfFn& g, int n_points,
                std::pair<double, double> range, std::uint64_t seed) {
    if (!(range.first < range.second)) throw std::invalid_argument("mse_dist: invalid range");
    if (n_points < 1) throw std::invalid_argument("mse_dist: need at least one point");
    rng::Stream stream(rng::derive(seed, rng::kStreamMseDist));
    double acc = 0.0;
    for (int k = 0; k < n_points; ++k) {
        const double x = stream.uniform(range.first, range.second);
        const double d = f(x) - g(x);
        acc += d * d;
    }
    return acc / n_points;
}

double mse_dist_grid(const CdfFn& f, const CdfFn& g, int n_points,
                     std::pair<double, double> range) {
    if (!(range.first < range.second)) throw std::invalid_argument("mse_dist: invalid range");
    if (n_points < 1) throw std::invalid_argument("mse_dist: need at least one point");
    double acc = 0.0;
    for (int k = 0; k < n_points; ++k) {
        const double x = range.first + (range.second - range.first) * (k + 0.5) / n_points;
        const double d = f(x) - g(x);
        acc += d * d;
    }
    return acc / n_points;
}

namespace {

template <typename F>
double adapt_simpson(const F& f, double a, double m, double b, double fa, double fm, double fb,
                     double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    if (depth <= 0)
        throw numerical_error("burgers_exact_cdf: quadrature did not converge");
    return adapt_simpson(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adapt_simpson(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <typename F>
double integrate(const F& f, double a, double b, double tol) {
    if (!(b > a)) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adapt_simpson(f, a, m, b, fa, fm, fb, whole, tol, 48);
}

} // namespace

double burgers_exact_cdf(double x, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("burgers_exact_cdf: sigma must be positive");
    const double inv_s2 = 1.0 / (sigma * sigma);
    const double lo = x - 12.0 * sigma;
    const double hi = x + 12.0 * sigma;

    // exponents of the two smooth pieces of the denominator integrand
    const auto expo_pos = [&](double y) { return -inv_s2 * (0.5 * (x - y) * (x - y) + y); };
    const auto expo_neg = [&](double y) { return -inv_s2 * (0.5 * (x - y) * (x - y)); };

    // shared scale so exp() stays in range; the ratio is unaffected
    double peak = -1e300;
    if (hi > 0.0) peak = std::max(peak, expo_pos(std::clamp(x - 1.0, std::max(lo, 0.0), hi)));
    if (lo < 0.0) peak = std::max(peak, expo_neg(std::clamp(x, lo, 0.0)));

    const double tol = 1e-10;
    double num = 0.0;
    if (hi > 0.0) {
        const auto f = [&](double y) { return std::exp(expo_pos(y) - peak); };
        num = integrate(f, std::max(lo, 0.0), hi, tol);
    }
    double den = num;
    if (lo < 0.0) {
        const auto f = [&](double y) { return std::exp(expo_neg(y) - peak); };
        den += integrate(f, lo, std::min(hi, 0.0), tol);
    }
    if (!(den > 0.0)) throw numerical_error("burgers_exact_cdf: vanishing denominator");
    return num / den;
}

double wasserstein_p_1d(std::vector<double> a, std::vector<double> b, double p) {
    if (a.size() != b.size())
        throw std::invalid_argument("wasserstein_p_1d: sample counts must match");
    if (a.empty()) throw std::invalid_argument("wasserstein_p_1d: empty samples");
    if (!(p >= 1.0)) throw std::invalid_argument("wasserstein_p_1d: order must be >= 1");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = std::abs(a[i] - b[i]);
        if (p == 1.0)
            acc += d;
        else if (p == 2.0)
            acc += d * d;
        else
            acc += std::pow(d, p);
    }
    acc /= static_cast<double>(a.size());
    if (p == 1.0) return acc;
    if (p == 2.0) return std::sqrt(acc);
    return std::pow(acc, 1.0 / p);
}

std::vector<double> trajectory_error(const Ensemble& y, const Ensemble& x_ref) {
    if (y.n_particles != x_ref.n_particles || y.grid.points != x_ref.grid.points)
        throw std::invalid_argument("trajectory_error: shapes or grids do not match");
    const std::size_t m = y.grid.size();
    std::vector<double> out(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < y.n_particles; ++i) {
            const double d = y(i, j) - x_ref(i, j);
            acc += d * d;
        }
        out[j] = acc / static_cast<double>(y.n_particles);
    }
    return out;
}

std::pair<double, double> moments(std::span<const double> samples) {
    if (samples.empty()) throw std::invalid_argument("moments: empty sample");
    double mean = 0.0;
    for (double s : samples) mean += s;
    mean /= static_cast<double>(samples.size());
    double var = 0.0;
    for (double s : samples) var += (s - mean) * (s - mean);
    var /= static_cast<double>(samples.size()); // population convention
    return {mean, std::sqrt(var)};
}

} // namespace mvdpm
