#ifndef FSHAWKES_SIMULATOR_HPP
#define FSHAWKES_SIMULATOR_HPP

#include <cstdint>

#include "fshawkes/basis.hpp"
#include "fshawkes/types.hpp"

namespace fshawkes {

struct SimConfig {
  ModelParams params;
  BasisSet basis;
  double horizon = 0.0;
  // 1-based starting state; 0 draws it uniformly over {1, ..., K}.
  int initial_state = 1;
  std::uint64_t seed = 0;
};

// Exact simulation by superposition thinning: candidates arrive at the
// homogeneous rate sum_i lambda_bar_i, are assigned a dimension
// proportionally to lambda_bar_i, and are kept with probability
// sigmoid(h_i(t, z(t))). An accepted type-i event is labeled with the
// pre-transition state, then the state jumps according to row z(t) of the
// i-th transition matrix; only actual state changes are recorded as
// switches (the transition draw is consumed either way, so replay is
// seed-exact). Rejected candidates never move the state.
//
// Throws std::invalid_argument on an invalid configuration.
Realization simulate(const SimConfig& config);

// The built-in two-dimension, two-state demonstration configuration used
// throughout the test suite: two Beta(50, 50) bases scaled to a window of
// 6 (one shifted to peak at lag 1, one at lag 3), self-excitation with
// cross-inhibition whose bump ordering flips between states, base
// activations (1, 1) and (0, 0), intensity bounds (2, 2), and sticky 0.99
// diagonal transitions over a horizon of 2000.
SimConfig builtin_sim_fixture();

}  // namespace fshawkes

#endif
