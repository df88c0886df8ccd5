#pragma once

#include <cstdint>

namespace valfun {

/// Knobs shared by the inner solver, the dual solver and the classifiers.
struct SolverConfig {
  int n_starts = 8;
  int grid_density = 9;
  int max_iter = 500;
  std::uint64_t seed = 20240611;
  double cluster_tol = 1e-4;
  int max_clusters = 16;
  double value_tol = 1e-6;
  double activity_tol = 1e-6;
};

}  // namespace valfun
