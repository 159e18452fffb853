#pragma once

#include "lpgnn/graph.hpp"
#include "lpgnn/matrix.hpp"
#include "lpgnn/model.hpp"

namespace lpgnn {

struct FixedPointReport {
  Matrix states;
  int iterations = 0;
  double final_update_norm = 0.0;  // max over nodes of the per-node L-inf change
  bool converged = false;
  bool diverged = false;           // states left the sane region (> 1e6)
};

// Classical encoding: synchronous sweeps x_v <- f_a(v) from the previous
// iterate until the update norm drops to `tolerance` or the iteration budget
// runs out. Dropout is always off here.
FixedPointReport iterate_to_fixed_point(const Model& m, const Graph& g,
                                        const NeighborIndex& idx,
                                        const Matrix& initial_states,
                                        int max_iterations = 100,
                                        double tolerance = 1e-4);

}  // namespace lpgnn
