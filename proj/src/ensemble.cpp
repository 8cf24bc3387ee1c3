#include "mvdpm/ensemble.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace mvdpm {

std::vector<double> Ensemble::at_time_index(std::size_t j) const {
    std::vector<double> out(n_particles);
    for (std::size_t i = 0; i < n_particles; ++i) out[i] = (*this)(i, j);
    return out;
}

void Ensemble::validate() const {
    grid.validate();
    if (states.size() != n_particles * grid.size())
        throw std::invalid_argument("Ensemble: state matrix shape does not match grid");
}

void write_ensemble_csv(const Ensemble& ens, const std::string& file) {
    ens.validate();
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot open for writing: " + file);
    out << "t";
    for (std::size_t i = 0; i < ens.n_particles; ++i) out << ",particle_" << i;
    out << "\n";
    char buf[32];
    const std::size_t m = ens.grid.size();
    for (std::size_t j = 0; j < m; ++j) {
        std::snprintf(buf, sizeof(buf), "%.17g", ens.grid.points[j]);
        out << buf;
        for (std::size_t i = 0; i < ens.n_particles; ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", ens(i, j));
            out << "," << buf;
        }
        out << "\n";
    }
}

Ensemble read_ensemble_csv(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open for reading: " + file);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty CSV: " + file);
    std::size_t n_cols = 1;
    for (char c : line)
        if (c == ',') ++n_cols;

    Ensemble ens;
    ens.n_particles = n_cols - 1;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
        if (row.size() != n_cols) throw std::runtime_error("ragged CSV row in " + file);
        ens.grid.points.push_back(row[0]);
        row.erase(row.begin());
        rows.push_back(std::move(row));
    }
    const std::size_t m = ens.grid.size();
    ens.states.assign(ens.n_particles * m, 0.0);
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t i = 0; i < ens.n_particles; ++i) ens.states[i * m + j] = rows[j][i];
    ens.validate();
    return ens;
}

} // namespace mvdpm
