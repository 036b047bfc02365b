#pragma once

// Latency-minimal 3D cell association on a voxel grid.
//
// With voxel probabilities w_v (summing to one), per-station cost
// h_n(v) = beta / (B_n log2(1 + sinr_n(v))) and K_n = L sum_{v in V_n} w_v,
// the objective is
//   J = sum_n [ K_n alpha_n + beta K_n / C_n + g_n(beta K_n) ],
//   alpha_n = sum_{v in V_n} h_n(v) w_v.
// Moving mass dw at v into cell n changes J by L dw times
//   score_n(v) = alpha_n + (K_n / L) h_n(v) + beta / C_n + beta g_n'(beta K_n)
// and the optimal cells are the lower envelopes of these scores. The solver
// finds a fixed point by averaging cell memberships over iterations (psi),
// reading K and alpha off the averaged memberships, and relabeling every
// voxel by its cheapest score.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "aether3d/channel.hpp"
#include "aether3d/error.hpp"
#include "aether3d/grid.hpp"
#include "aether3d/parallel.hpp"

namespace aether3d {

/// Tolerance on the midpoint-rule integral of the density over the grid.
/// Loose on purpose: a properly normalized pdf sampled on a coarse grid can
/// miss 1 by about a percent.
inline constexpr double kDensityNormalizationTolerance = 2e-2;

class AssociationProblem {
 public:
  /// `voxel_density` holds f-hat at each voxel center (1/m^3). It must
  /// integrate to one over the grid within kDensityNormalizationTolerance;
  /// the discrete voxel masses are then rescaled to sum to exactly one.
  AssociationProblem(VoxelGrid grid, Network network, ChannelParams params, std::span<const double> voxel_density,
                     double users)
      : grid_(std::move(grid)), network_(std::move(network)), params_(std::move(params)), users_(users) {
    grid_.validate();
    network_.validate();
    params_.validate();
    detail::require(users_ > 0.0, "user count L must be > 0");
    detail::require(voxel_density.size() == grid_.size(), "density size does not match the grid");

    double integral = 0.0;
    for (double f : voxel_density) {
      detail::require(std::isfinite(f) && f >= 0.0, "density must be finite and non-negative");
      integral += f;
    }
    integral *= grid_.voxel_volume();
    if (std::abs(integral - 1.0) > kDensityNormalizationTolerance) {
      throw ValidationError("density is not normalized over the domain (integral = " + std::to_string(integral) +
                            ")");
    }
    weights_.resize(voxel_density.size());
    for (std::size_t v = 0; v < weights_.size(); ++v) {
      weights_[v] = voxel_density[v] * grid_.voxel_volume() / integral;
    }

    const std::size_t N = network_.size();
    sinr_.assign(grid_.size() * N, 0.0);
    cost_.assign(grid_.size() * N, 0.0);
    parallel_for(grid_.size(), [&](std::size_t v) {
      const Vec3 p = grid_.center(v);
      std::vector<double> rx(N);
      for (std::size_t n = 0; n < N; ++n) rx[n] = received_power(p, network_.stations[n], params_);
      for (std::size_t n = 0; n < N; ++n) {
        double interference = 0.0;
        for (auto u : network_.interferers[n]) interference += rx[u];
        const auto& bs = network_.stations[n];
        const double g = rx[n] / (interference + params_.noise_psd * bs.bandwidth_hz);
        sinr_[v * N + n] = g;
        const double spectral = std::log2(1.0 + g);
        cost_[v * N + n] = spectral > 0.0 ? params_.packet_bits / (bs.bandwidth_hz * spectral) : kInfinity;
      }
    });
  }

  const VoxelGrid& grid() const { return grid_; }
  const Network& network() const { return network_; }
  const ChannelParams& params() const { return params_; }
  double users() const { return users_; }
  std::size_t voxels() const { return grid_.size(); }
  std::size_t stations() const { return network_.size(); }

  /// Probability mass of voxel v.
  double weight(std::size_t v) const { return weights_[v]; }
  std::span<const double> weights() const { return weights_; }
  double sinr(std::size_t v, std::size_t n) const { return sinr_[v * stations() + n]; }
  /// h_n(v): per-UE transmission latency of a fully loaded unit share (seconds).
  double cost(std::size_t v, std::size_t n) const { return cost_[v * stations() + n]; }

  /// d/dK [beta K / C_n + g_n(beta K)] at K.
  double load_marginal(std::size_t n, double expected_users) const {
    const auto& bs = network_.stations[n];
    const double beta = params_.packet_bits;
    return beta / bs.backhaul_bps + beta * network_.compute.derivative(beta * expected_users, bs.compute_speed);
  }

 private:
  VoxelGrid grid_;
  Network network_;
  ChannelParams params_;
  double users_;
  std::vector<double> weights_;
  std::vector<double> sinr_;
  std::vector<double> cost_;
};

using Labels = std::vector<std::uint32_t>;

struct Partition {
  Labels labels;                // station per voxel
  std::vector<double> masses;   // K_n, expected users per cell
  std::vector<double> psi;      // voxel-major, stations() per voxel; empty for the baseline
};

/// Per-station load state the partition rule reads.
struct AssociationState {
  std::vector<double> masses;  // K_n
  std::vector<double> alpha;   // alpha_n
};

struct ObjectiveTerms {
  std::vector<double> masses;
  std::vector<double> alpha;
  std::vector<double> transmission;  // K_n alpha_n
  std::vector<double> backhaul;      // beta K_n / C_n
  std::vector<double> computation;   // g_n(beta K_n)
  double transmission_total = 0.0;
  double backhaul_total = 0.0;
  double computation_total = 0.0;
  double total = 0.0;                  // objective, seconds
  double average_latency = 0.0;        // total / L
  std::vector<std::size_t> infinite_voxels;  // loaded voxels with zero rate

  bool finite() const { return infinite_voxels.empty(); }
};

/// K_n and alpha_n of a labeling.
inline AssociationState state_of(const AssociationProblem& problem, std::span<const std::uint32_t> labels) {
  const std::size_t N = problem.stations();
  AssociationState s{std::vector<double>(N, 0.0), std::vector<double>(N, 0.0)};
  for (std::size_t v = 0; v < labels.size(); ++v) {
    const double w = problem.weight(v);
    if (w == 0.0) continue;
    s.masses[labels[v]] += w;
    s.alpha[labels[v]] += problem.cost(v, labels[v]) * w;
  }
  for (auto& k : s.masses) k *= problem.users();
  return s;
}

inline ObjectiveTerms evaluate_objective(const AssociationProblem& problem, std::span<const std::uint32_t> labels) {
  detail::require(labels.size() == problem.voxels(), "labeling does not cover the grid");
  const std::size_t N = problem.stations();
  for (auto l : labels) detail::require(l < N, "label out of range");

  ObjectiveTerms out;
  const auto state = state_of(problem, labels);
  out.masses = state.masses;
  out.alpha = state.alpha;
  for (std::size_t v = 0; v < labels.size(); ++v) {
    if (problem.weight(v) > 0.0 && std::isinf(problem.cost(v, labels[v]))) out.infinite_voxels.push_back(v);
  }
  out.transmission.resize(N);
  out.backhaul.resize(N);
  out.computation.resize(N);
  const auto& params = problem.params();
  const auto& net = problem.network();
  for (std::size_t n = 0; n < N; ++n) {
    const double K = out.masses[n];
    const auto& bs = net.stations[n];
    out.transmission[n] = K > 0.0 ? K * out.alpha[n] : 0.0;
    out.backhaul[n] = backhaul_latency(K, bs, params);
    out.computation[n] = net.compute.latency(params.packet_bits * K, bs.compute_speed);
    out.transmission_total += out.transmission[n];
    out.backhaul_total += out.backhaul[n];
    out.computation_total += out.computation[n];
  }
  out.total = out.transmission_total + out.backhaul_total + out.computation_total;
  out.average_latency = out.total / problem.users();
  return out;
}

/// Marginal cost of serving voxel v from station n under `state`.
inline double association_score(const AssociationProblem& problem, const AssociationState& state, std::size_t v,
                                std::size_t n) {
  const double h = problem.cost(v, n);
  if (std::isinf(h)) return kInfinity;
  return state.alpha[n] + state.masses[n] / problem.users() * h + problem.load_marginal(n, state.masses[n]);
}

/// True when station l is at least as cheap as m for voxel v.
inline bool partition_rule(const AssociationProblem& problem, const AssociationState& state, std::size_t v,
                           std::size_t l, std::size_t m) {
  return association_score(problem, state, v, l) <= association_score(problem, state, v, m);
}

/// score_n(v) = offset_n + slope_n h_n(v), with the per-station parts of a
/// state evaluated once.
struct ScoreCoefficients {
  std::vector<double> offset;
  std::vector<double> slope;

  ScoreCoefficients(const AssociationProblem& problem, const AssociationState& state) {
    const std::size_t N = problem.stations();
    offset.resize(N);
    slope.resize(N);
    for (std::size_t n = 0; n < N; ++n) {
      offset[n] = state.alpha[n] + problem.load_marginal(n, state.masses[n]);
      slope[n] = state.masses[n] / problem.users();
    }
  }

  double score(const AssociationProblem& problem, std::size_t v, std::size_t n) const {
    const double h = problem.cost(v, n);
    return std::isinf(h) ? kInfinity : offset[n] + slope[n] * h;
  }
};

/// argmin of the score over stations; lowest index on ties.
inline std::uint32_t best_station(const AssociationProblem& problem, const ScoreCoefficients& coeffs, std::size_t v) {
  std::uint32_t best = 0;
  double best_score = coeffs.score(problem, v, 0);
  for (std::size_t n = 1; n < problem.stations(); ++n) {
    const double s = coeffs.score(problem, v, n);
    if (s < best_score) {
      best_score = s;
      best = static_cast<std::uint32_t>(n);
    }
  }
  return best;
}

inline std::uint32_t best_station(const AssociationProblem& problem, const AssociationState& state, std::size_t v) {
  return best_station(problem, ScoreCoefficients(problem, state), v);
}

/// Max-SINR (weighted Voronoi) association.
inline Partition baseline_sinr_partition(const AssociationProblem& problem) {
  Partition p;
  p.labels.resize(problem.voxels());
  parallel_for(problem.voxels(), [&](std::size_t v) {
    std::uint32_t best = 0;
    for (std::size_t n = 1; n < problem.stations(); ++n) {
      if (problem.sinr(v, n) > problem.sinr(v, best)) best = static_cast<std::uint32_t>(n);
    }
    p.labels[v] = best;
  });
  p.masses = state_of(problem, p.labels).masses;
  return p;
}

/// Where alpha_n comes from during the iteration. `averaged` weights every
/// voxel by its averaged membership 1 - psi, like K_n; `labeling` takes the
/// current cells only, which tends to oscillate.
enum class AlphaUpdate { averaged, labeling };

struct SolverSettings {
  int max_iterations = 20;   // Q
  double tolerance = 1e-4;   // stop when fewer than this fraction of voxels relabel
  AlphaUpdate alpha_update = AlphaUpdate::averaged;

  void validate() const {
    detail::require(max_iterations >= 1, "solver.max_iterations must be >= 1");
    detail::require(tolerance >= 0.0, "solver.tolerance must be >= 0");
  }
};

struct IterationRecord {
  int iteration = 0;
  double objective = 0.0;         // J of the labeling after this iteration
  double relabel_fraction = 0.0;
  std::vector<double> masses;     // averaged K used for the relabel
};

struct SolveResult {
  Partition partition;
  ObjectiveTerms objective;
  AssociationState state;              // (K, alpha) the last relabel used
  std::vector<IterationRecord> trace;  // entry 0 is the initial labeling
  bool converged = false;
  int iterations = 0;
};

/// Fixed-point iteration for the optimal cells, started from the max-SINR
/// labeling with psi = 0. Iteration t (from 1):
///   psi <- (1 - 1/t) psi inside the current cell, 1 - (1 - 1/t)(1 - psi) outside
///   K_l <- L sum_v (1 - psi_l(v)) w_v
///   alpha_l <- sum_v (1 - psi_l(v)) w_v h_l(v)   (see AlphaUpdate)
///   relabel every voxel by its cheapest score.
inline SolveResult solve_association(const AssociationProblem& problem, const SolverSettings& settings = {}) {
  settings.validate();
  const std::size_t V = problem.voxels();
  const std::size_t N = problem.stations();

  SolveResult out;
  Partition& part = out.partition;
  part = baseline_sinr_partition(problem);
  part.psi.assign(V * N, 0.0);
  {
    IterationRecord r;
    r.objective = evaluate_objective(problem, part.labels).total;
    r.masses = part.masses;
    out.trace.push_back(std::move(r));
  }

  Labels next(V);
  for (int t = 1; t <= settings.max_iterations; ++t) {
    const double keep = 1.0 - 1.0 / static_cast<double>(t);
    parallel_for(V, [&](std::size_t v) {
      double* psi = &part.psi[v * N];
      for (std::size_t l = 0; l < N; ++l) {
        psi[l] = part.labels[v] == l ? keep * psi[l] : 1.0 - keep * (1.0 - psi[l]);
      }
    });

    AssociationState state{std::vector<double>(N, 0.0), std::vector<double>(N, 0.0)};
    for (std::size_t v = 0; v < V; ++v) {
      const double w = problem.weight(v);
      if (w == 0.0) continue;
      for (std::size_t l = 0; l < N; ++l) {
        const double share = (1.0 - part.psi[v * N + l]) * w;
        if (share == 0.0) continue;
        state.masses[l] += share;
        state.alpha[l] += share * problem.cost(v, l);
      }
    }
    for (auto& k : state.masses) k *= problem.users();
    if (settings.alpha_update == AlphaUpdate::labeling) state.alpha = state_of(problem, part.labels).alpha;

    const ScoreCoefficients coeffs(problem, state);
    parallel_for(V, [&](std::size_t v) { next[v] = best_station(problem, coeffs, v); });
    std::size_t changed = 0;
    for (std::size_t v = 0; v < V; ++v) changed += next[v] != part.labels[v];
    part.labels.swap(next);

    IterationRecord r;
    r.iteration = t;
    r.objective = evaluate_objective(problem, part.labels).total;
    r.relabel_fraction = static_cast<double>(changed) / static_cast<double>(V);
    r.masses = state.masses;
    out.trace.push_back(std::move(r));
    out.state = std::move(state);
    out.iterations = t;
    if (out.trace.back().relabel_fraction < settings.tolerance) {
      out.converged = true;
      break;
    }
  }
  part.masses = state_of(problem, part.labels).masses;
  out.objective = evaluate_objective(problem, part.labels);
  return out;
}

struct OptimalityAudit {
  double satisfied_fraction = 0.0;  // voxels whose label is within `slack` of the best score
  double worst_gap = 0.0;           // seconds
  std::size_t violations = 0;
};

/// Checks the cell condition score(label) <= score(m) + slack for every
/// rival m, with (K, alpha) taken from the labeling itself.
inline OptimalityAudit audit_optimality(const AssociationProblem& problem, std::span<const std::uint32_t> labels,
                                        double slack = 1e-9) {
  const ScoreCoefficients coeffs(problem, state_of(problem, labels));
  OptimalityAudit out;
  for (std::size_t v = 0; v < labels.size(); ++v) {
    const double own = coeffs.score(problem, v, labels[v]);
    const double best = coeffs.score(problem, v, best_station(problem, coeffs, v));
    const double gap = own - best;
    if (gap > slack) {
      ++out.violations;
      out.worst_gap = std::max(out.worst_gap, gap);
    }
  }
  out.satisfied_fraction = 1.0 - static_cast<double>(out.violations) / static_cast<double>(labels.size());
  return out;
}

}  // namespace aether3d
