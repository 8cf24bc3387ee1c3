#pragma once

#include <string>
#include <vector>

#include "mvdpm/noise.hpp"

namespace mvdpm {

/// N particle trajectories over a grid: PEM output or a DPM evaluation.
struct Ensemble {
    TimeGrid grid;
    std::size_t n_particles = 0;
    std::vector<double> states; // n_particles x grid.size(), row-major
    std::string model_name;

    double operator()(std::size_t particle, std::size_t j) const {
        return states[particle * grid.size() + j];
    }
    double& operator()(std::size_t particle, std::size_t j) {
        return states[particle * grid.size() + j];
    }

    /// all states at grid index j, one per particle
    std::vector<double> at_time_index(std::size_t j) const;
    /// states at the final grid time
    std::vector<double> terminal() const { return at_time_index(grid.size() - 1); }

    void validate() const;
};

/// CSV layout mirrors PathSet: "t,particle_0,...", one row per grid point.
void write_ensemble_csv(const Ensemble& ens, const std::string& file);
Ensemble read_ensemble_csv(const std::string& file);

} // namespace mvdpm
