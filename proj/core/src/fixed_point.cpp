#include "lpgnn/fixed_point.hpp"

#include <cmath>

namespace lpgnn {

FixedPointReport iterate_to_fixed_point(const Model& m, const Graph& g,
                                        const NeighborIndex& idx,
                                        const Matrix& initial_states,
                                        int max_iterations, double tolerance) {
  const int n = g.num_nodes;
  const int s = m.state_dim;

  FixedPointReport report;
  report.states = initial_states;
  Matrix next(n, s);

  for (int t = 0; t < max_iterations; ++t) {
    double norm = 0.0;
    bool sane = true;
    for (int v = 0; v < n; ++v) {
      transition_forward(m, g, idx, report.states, v,
                         std::span<double>(next.row(v), s));
      const double* old_row = report.states.row(v);
      const double* new_row = next.row(v);
      for (int i = 0; i < s; ++i) {
        const double x = new_row[i];
        if (!std::isfinite(x) || std::fabs(x) > 1e6) sane = false;
        norm = std::max(norm, std::fabs(x - old_row[i]));
      }
    }
    std::swap(report.states, next);
    report.iterations = t + 1;
    report.final_update_norm = norm;
    if (!sane) {
      report.diverged = true;
      return report;
    }
    if (norm <= tolerance) {
      report.converged = true;
      return report;
    }
  }
  return report;
}

}  // namespace lpgnn
