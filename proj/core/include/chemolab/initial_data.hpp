#pragma once

#include <cstdint>

#include "chemolab/config.hpp"
#include "chemolab/grid.hpp"
#include "chemolab/model.hpp"
#include "chemolab/solver.hpp"

namespace chemolab {

/// u0 >= 0 with integrate(u0) == spec.mass up to round-off.
ScalarField initial_density(const Grid& grid, const InitialSpec& spec, std::uint64_t seed);

/// v0 > 0; its maximum is the v0_max used by the model.
ScalarField initial_signal(const Grid& grid, const InitialSpec& spec);

struct InitialCondition {
    State state;
    Params params;
};

/// State in the configured formulation plus the model parameters tied to it.
InitialCondition make_initial_condition(const ExperimentConfig& cfg);

}  // namespace chemolab
