#pragma once

// Exhaustive search over all labelings of a tiny association problem.

#include <cstdint>
#include <limits>
#include <vector>

#include "aether3d/association.hpp"

namespace aether3d {

struct BruteForceReport {
  double solver = 0.0;
  double exhaustive = 0.0;
  double baseline = 0.0;
  Labels solver_labels;
  Labels best_labels;
  int solver_iterations = 0;

  double relative_gap() const { return (solver - exhaustive) / exhaustive; }
};

/// Minimum objective over all N^V labelings; refuses more than 2^22 of them.
inline std::pair<double, Labels> exhaustive_minimum(const AssociationProblem& problem) {
  const std::size_t V = problem.voxels();
  const std::size_t N = problem.stations();
  double count = 1.0;
  for (std::size_t v = 0; v < V; ++v) count *= static_cast<double>(N);
  detail::require(count <= 4194304.0, "instance too large for exhaustive search");

  Labels labels(V, 0), best(V, 0);
  double best_value = std::numeric_limits<double>::infinity();
  for (;;) {
    const double J = evaluate_objective(problem, labels).total;
    if (J < best_value) {
      best_value = J;
      best = labels;
    }
    std::size_t v = 0;
    while (v < V && ++labels[v] == N) labels[v++] = 0;
    if (v == V) break;
  }
  return {best_value, best};
}

/// Two stations 300 m apart over a 4x2x2 grid, the right one with a slow
/// processor, under a skewed density. Max-SINR splits the grid in half; the
/// optimum hands most of it to the left station.
inline AssociationProblem two_station_instance(double users = 50.0) {
  VoxelGrid grid(Box{{0.0, 0.0, 0.0}, {400.0, 200.0, 200.0}}, {4, 2, 2});
  Network net;
  DroneBS left;
  left.id = 0;
  left.position = {50.0, 100.0, 100.0};
  left.backhaul_bps = 101e6;
  DroneBS right;
  right.id = 1;
  right.position = {350.0, 100.0, 100.0};
  right.backhaul_bps = 101e6;
  right.compute_speed = 1e12;
  net.stations = {left, right};
  net.interferers = {{1}, {0}};

  std::vector<double> density(grid.size());
  double total = 0.0;
  for (std::size_t v = 0; v < density.size(); ++v) {
    const Vec3 c = grid.center(v);
    density[v] = 1.0 + c.x / 400.0 + c.y / 1000.0;
    total += density[v];
  }
  for (auto& f : density) f /= total * grid.voxel_volume();
  return AssociationProblem(grid, net, ChannelParams{}, density, users);
}

inline BruteForceReport brute_force_check(const AssociationProblem& problem, SolverSettings settings = {}) {
  BruteForceReport r;
  const auto solved = solve_association(problem, settings);
  r.solver = solved.objective.total;
  r.solver_labels = solved.partition.labels;
  r.solver_iterations = solved.iterations;
  auto [best, labels] = exhaustive_minimum(problem);
  r.exhaustive = best;
  r.best_labels = std::move(labels);
  r.baseline = evaluate_objective(problem, baseline_sinr_partition(problem).labels).total;
  return r;
}

}  // namespace aether3d
