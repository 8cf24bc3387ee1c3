#include "mvdpm/noise.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mvdpm {

std::string to_string(NoiseKind kind) {
    return kind == NoiseKind::Brownian ? "brownian" : "fbm";
}

NoiseKind noise_kind_from_string(const std::string& s) {
    if (s == "brownian") return NoiseKind::Brownian;
    if (s == "fbm") return NoiseKind::FractionalBrownian;
    throw std::invalid_argument("unknown noise kind: " + s);
}

void TimeGrid::validate() const {
    if (points.size() < 2) throw std::invalid_argument("TimeGrid: need at least 2 points");
    if (points.front() != 0.0) throw std::invalid_argument("TimeGrid: first point must be 0");
    for (std::size_t j = 1; j < points.size(); ++j) {
        if (!(points[j] > points[j - 1]))
            throw std::invalid_argument("TimeGrid: points must be strictly increasing");
        if (!std::isfinite(points[j])) throw std::invalid_argument("TimeGrid: non-finite point");
    }
}

void PathSet::validate() const {
    grid.validate();
    if (values.size() != n_paths * grid.size())
        throw std::invalid_argument("PathSet: value matrix shape does not match grid");
    if (kind == NoiseKind::FractionalBrownian && !(hurst >= 0.5 && hurst < 1.0))
        throw std::invalid_argument("PathSet: Hurst index must lie in [0.5, 1)");
}

TimeGrid make_grid(double t_end, std::size_t m_points) {
    if (!(t_end > 0.0)) throw std::invalid_argument("make_grid: t_end must be positive");
    if (m_points < 2) throw std::invalid_argument("make_grid: need at least 2 points");
    TimeGrid grid;
    grid.points.resize(m_points);
    const double h = t_end / static_cast<double>(m_points - 1);
    for (std::size_t j = 0; j < m_points; ++j) grid.points[j] = h * static_cast<double>(j);
    grid.points.back() = t_end; // exact endpoint regardless of rounding
    return grid;
}

TimeGrid thin_grid(const TimeGrid& grid, double deletion_rate, std::uint64_t seed) {
    grid.validate();
    if (!(deletion_rate >= 0.0 && deletion_rate < 1.0))
        throw std::invalid_argument("thin_grid: deletion_rate must lie in [0, 1)");

    const std::size_t m = grid.points.size();
    const std::size_t interior = m - 2;
    const auto n_delete =
        static_cast<std::size_t>(std::llround(deletion_rate * static_cast<double>(interior)));
    if (n_delete == 0) return grid;

    // partial Fisher-Yates over the interior indices: the first n_delete
    // entries form a uniform subset without replacement
    std::vector<std::size_t> idx(interior);
    for (std::size_t i = 0; i < interior; ++i) idx[i] = i + 1;
    rng::Stream stream(rng::derive(seed, rng::kStreamThin));
    for (std::size_t i = 0; i < n_delete; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(stream.below(interior - i));
        std::swap(idx[i], idx[j]);
    }
    std::vector<bool> drop(m, false);
    for (std::size_t i = 0; i < n_delete; ++i) drop[idx[i]] = true;

    TimeGrid out;
    out.points.reserve(m - n_delete);
    for (std::size_t j = 0; j < m; ++j)
        if (!drop[j]) out.points.push_back(grid.points[j]);
    return out;
}

PathSet sample_brownian(const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed) {
    grid.validate();
    PathSet out;
    out.grid = grid;
    out.n_paths = n_paths;
    out.kind = NoiseKind::Brownian;
    out.seed = seed;
    const std::size_t m = grid.size();
    out.values.assign(n_paths * m, 0.0);
    for (std::size_t i = 0; i < n_paths; ++i) {
        rng::Stream stream(rng::derive(seed, i));
        double w = 0.0;
        for (std::size_t j = 1; j < m; ++j) {
            const double h = grid.points[j] - grid.points[j - 1];
            w += std::sqrt(h) * stream.normal();
            out.values[i * m + j] = w;
        }
    }
    return out;
}

bool cholesky_lower(std::vector<double>& a, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
            if (i == j) {
                if (!(s > 0.0)) return false;
                a[i * n + i] = std::sqrt(s);
            } else {
                a[i * n + j] = s / a[j * n + j];
            }
        }
        for (std::size_t j = i + 1; j < n; ++j) a[i * n + j] = 0.0;
    }
    return true;
}

PathSet sample_fbm(const TimeGrid& grid, double hurst, std::size_t n_paths,
                   std::uint64_t seed) {
    grid.validate();
    if (!(hurst >= 0.5 && hurst < 1.0))
        throw std::invalid_argument("sample_fbm: Hurst index must lie in [0.5, 1)");

    const std::size_t m = grid.size();
    const std::size_t k = m - 1; // positive times; W(0)=0 is pinned
    const double two_h = 2.0 * hurst;

    std::vector<double> cov(k * k);
    for (std::size_t i = 0; i < k; ++i) {
        const double s = grid.points[i + 1];
        for (std::size_t j = 0; j <= i; ++j) {
            const double t = grid.points[j + 1];
            const double c =
                0.5 * (std::pow(s, two_h) + std::pow(t, two_h) - std::pow(s - t, two_h));
            cov[i * k + j] = c;
            cov[j * k + i] = c;
        }
    }

    std::vector<double> chol = cov;
    if (!cholesky_lower(chol, k)) {
        // near-singular fine grids can fail by rounding; jitter once and retry
        chol = cov;
        for (std::size_t i = 0; i < k; ++i) chol[i * k + i] += 1e-12;
        if (!cholesky_lower(chol, k))
            throw numerical_error("sample_fbm: covariance matrix is not positive definite");
    }

    PathSet out;
    out.grid = grid;
    out.n_paths = n_paths;
    out.kind = NoiseKind::FractionalBrownian;
    out.hurst = hurst;
    out.seed = seed;
    out.values.assign(n_paths * m, 0.0);
    std::vector<double> z(k);
    for (std::size_t i = 0; i < n_paths; ++i) {
        rng::Stream stream(rng::derive(seed, i));
        for (std::size_t j = 0; j < k; ++j) z[j] = stream.normal();
        for (std::size_t j = 0; j < k; ++j) {
            double w = 0.0;
            for (std::size_t l = 0; l <= j; ++l) w += chol[j * k + l] * z[l];
            out.values[i * m + (j + 1)] = w;
        }
    }
    return out;
}

namespace {

std::string fmt17(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

} // namespace

void write_pathset_csv(const PathSet& paths, const std::string& file) {
    paths.validate();
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot open for writing: " + file);
    out << "t";
    for (std::size_t i = 0; i < paths.n_paths; ++i) out << ",path_" << i;
    out << "\n";
    const std::size_t m = paths.grid.size();
    for (std::size_t j = 0; j < m; ++j) {
        out << fmt17(paths.grid.points[j]);
        for (std::size_t i = 0; i < paths.n_paths; ++i) out << "," << fmt17(paths(i, j));
        out << "\n";
    }
}

PathSet read_pathset_csv(const std::string& file, NoiseKind kind, double hurst) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open for reading: " + file);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty CSV: " + file);

    std::size_t n_cols = 1;
    for (char c : line)
        if (c == ',') ++n_cols;
    const std::size_t n_paths = n_cols - 1;

    std::vector<double> times;
    std::vector<std::vector<double>> rows; // per grid point
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
        if (row.size() != n_cols)
            throw std::runtime_error("ragged CSV row in " + file);
        times.push_back(row[0]);
        row.erase(row.begin());
        rows.push_back(std::move(row));
    }

    PathSet out;
    out.grid.points = std::move(times);
    out.n_paths = n_paths;
    out.kind = kind;
    out.hurst = hurst;
    const std::size_t m = out.grid.size();
    out.values.assign(n_paths * m, 0.0);
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t i = 0; i < n_paths; ++i) out.values[i * m + j] = rows[j][i];
    out.validate();
    return out;
}

} // namespace mvdpm
