#pragma once

#include "photonhier/model.hpp"

namespace fixtures {

// Two 1D modes on 12 molecular groups: small enough for dense oracles and
// for the hierarchy to close after a few levels.
inline photonhier::ModelConfig toy_1d() {
    photonhier::ModelConfig c;
    c.dimensions = 1;
    c.max_level = 1;
    c.absorption_per_level = {1.83e-12, 4.21e-12};
    c.emission_per_level = {4.81e-10, 5.69e-10};
    c.grid.points_per_axis = 12;
    c.grid.extent = 3.0;
    return c;
}

// Three 1D modes on the default 1D grid.
inline photonhier::ModelConfig three_mode_1d() {
    photonhier::ModelConfig c;
    c.dimensions = 1;
    c.max_level = 2;
    c.absorption_per_level = {1.83e-12, 4.21e-12, 10.3e-12};
    c.emission_per_level = {4.81e-10, 5.69e-10, 6.97e-10};
    return c;
}

// Default ten-mode set on a coarse grid, for fast 2D checks.
inline photonhier::ModelConfig coarse_2d(int points = 13) {
    photonhier::ModelConfig c;
    c.grid.points_per_axis = points;
    c.grid.extent = 3.2;
    return c;
}

}  // namespace fixtures
