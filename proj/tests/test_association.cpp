#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <numeric>

#include "aether3d/association.hpp"
#include "aether3d/density.hpp"
#include "aether3d/oracle.hpp"

using namespace aether3d;

namespace {

std::vector<double> uniform_density(const VoxelGrid& g) {
  return std::vector<double>(g.size(), 1.0 / g.box.volume());
}

Network pair_network(Vec3 a, Vec3 b, bool interfere = true) {
  Network net;
  DroneBS s0, s1;
  s0.id = 0;
  s0.position = a;
  s0.backhaul_bps = 101e6;
  s1.id = 1;
  s1.position = b;
  s1.backhaul_bps = 101e6;
  net.stations = {s0, s1};
  net.interferers = interfere ? std::vector<std::vector<std::size_t>>{{1}, {0}}
                              : std::vector<std::vector<std::size_t>>{{}, {}};
  return net;
}

// Objective written out from scratch: SINR, rate cost, masses and the three
// latency terms, without going through AssociationProblem.
double reference_objective(const VoxelGrid& g, const Network& net, const ChannelParams& p,
                           const std::vector<double>& density, double L, const Labels& labels) {
  const std::size_t N = net.size();
  std::vector<double> K(N, 0.0), a(N, 0.0);
  double mass = 0;
  for (double f : density) mass += f * g.voxel_volume();
  for (std::size_t v = 0; v < g.size(); ++v) {
    const Vec3 c = g.center(v);
    const std::size_t n = labels[v];
    const auto rx = [&](std::size_t m) {
      const double d = distance(c, net.stations[m].position);
      return p.path_loss_constant * net.stations[m].tx_power_w * std::pow(1 + d, -p.path_loss_exponent);
    };
    double interf = 0;
    for (auto u : net.interferers[n]) interf += rx(u);
    const double gamma = rx(n) / (interf + p.noise_psd * net.stations[n].bandwidth_hz);
    const double h = p.packet_bits / (net.stations[n].bandwidth_hz * std::log2(1 + gamma));
    const double w = density[v] * g.voxel_volume() / mass;
    K[n] += L * w;
    a[n] += h * w;
  }
  double J = 0;
  for (std::size_t n = 0; n < N; ++n) {
    const double u = p.packet_bits * K[n];
    J += K[n] * a[n] + u / net.stations[n].backhaul_bps + u * u / net.stations[n].compute_speed;
  }
  return J;
}

}  // namespace

TEST(Association, ObjectiveMatchesReferenceImplementation) {
  const VoxelGrid g(Box{{0, 0, 0}, {600, 300, 300}}, {6, 3, 3});
  const Network net = pair_network({100, 150, 150}, {500, 150, 150});
  std::vector<double> f(g.size());
  for (std::size_t v = 0; v < f.size(); ++v) f[v] = 1.0 + 0.1 * static_cast<double>(v % 7);
  const double s = std::accumulate(f.begin(), f.end(), 0.0) * g.voxel_volume();
  for (auto& x : f) x /= s;
  const AssociationProblem problem(g, net, ChannelParams{}, f, 120.0);
  Labels labels(g.size());
  for (std::size_t v = 0; v < labels.size(); ++v) labels[v] = (v * 7919) % 3 == 0;
  const auto terms = evaluate_objective(problem, labels);
  EXPECT_NEAR(terms.total / reference_objective(g, net, ChannelParams{}, f, 120.0, labels), 1.0, 1e-12);
  EXPECT_NEAR(terms.masses[0] + terms.masses[1], 120.0, 1e-9);
  EXPECT_NEAR(terms.average_latency, terms.total / 120.0, 1e-18);
  EXPECT_TRUE(terms.finite());
}

TEST(Association, SingleStationFormula) {
  const VoxelGrid g(Box{{0, 0, 0}, {200, 200, 200}}, {2, 2, 2});
  Network net;
  DroneBS bs;
  bs.position = {50, 50, 50};
  bs.backhaul_bps = 101e6;
  net.stations = {bs};
  net.interferers = {{}};
  const double L = 30;
  const AssociationProblem problem(g, net, ChannelParams{}, uniform_density(g), L);
  const Labels labels(g.size(), 0);
  double hbar = 0;
  for (std::size_t v = 0; v < g.size(); ++v) hbar += problem.cost(v, 0) / 8.0;
  const double want = L * hbar + 1e4 * L / 101e6 + (1e4 * L) * (1e4 * L) / 1e14;
  EXPECT_NEAR(evaluate_objective(problem, labels).total / want, 1.0, 1e-12);
}

TEST(Association, EmptyCellContributesNothing) {
  const VoxelGrid g(Box{{0, 0, 0}, {400, 200, 200}}, {4, 2, 2});
  const AssociationProblem problem(g, pair_network({50, 100, 100}, {350, 100, 100}), ChannelParams{},
                                   uniform_density(g), 10);
  const auto t = evaluate_objective(problem, Labels(g.size(), 0));
  EXPECT_EQ(t.masses[1], 0.0);
  EXPECT_EQ(t.transmission[1] + t.backhaul[1] + t.computation[1], 0.0);
}

TEST(Association, BaselineMatchesLinearScan) {
  const auto spec = LatticeSpec::defaults();
  const auto pos = generate_positions(spec);
  const auto net = build_network(pos, plan_cochannel(*find_reuse_solution(1, 400.0), spec, pos));
  const VoxelGrid g(spec.bounding_box, {12, 12, 12});
  const AssociationProblem problem(g, net, ChannelParams{}, uniform_density(g), 200);
  const auto base = baseline_sinr_partition(problem);
  for (std::size_t v = 0; v < g.size(); ++v) {
    std::size_t best = 0;
    double best_g = -1;
    for (std::size_t n = 0; n < net.size(); ++n) {
      const double s = net.sinr_at(g.center(v), n, ChannelParams{});
      if (s > best_g) {
        best_g = s;
        best = n;
      }
    }
    EXPECT_EQ(base.labels[v], best);
  }
  EXPECT_NEAR(std::accumulate(base.masses.begin(), base.masses.end(), 0.0), 200.0, 1e-9);
}

TEST(Association, SymmetricPairSplitsInHalf) {
  const VoxelGrid g(Box{{0, 0, 0}, {800, 400, 400}}, {8, 4, 4});
  const AssociationProblem problem(g, pair_network({200, 200, 200}, {600, 200, 200}), ChannelParams{},
                                   uniform_density(g), 100);
  SolverSettings st;
  st.max_iterations = 50;
  const auto r = solve_association(problem, st);
  EXPECT_NEAR(r.objective.masses[0], 50.0, 1e-9);
  EXPECT_NEAR(r.objective.masses[1], 50.0, 1e-9);
  for (std::size_t v = 0; v < g.size(); ++v) EXPECT_EQ(r.partition.labels[v], g.center(v).x < 400 ? 0u : 1u);
  const auto base = baseline_sinr_partition(problem);
  EXPECT_EQ(base.labels, r.partition.labels);
}

TEST(Association, AllPowerAtOneStation) {
  const VoxelGrid g(Box{{0, 0, 0}, {400, 200, 200}}, {4, 2, 2});
  Network net = pair_network({50, 100, 100}, {350, 100, 100});
  net.stations[1].tx_power_w = 0.0;
  const AssociationProblem problem(g, net, ChannelParams{}, uniform_density(g), 10);
  const auto base = baseline_sinr_partition(problem);
  for (auto l : base.labels) EXPECT_EQ(l, 0u);
  const auto r = solve_association(problem);
  for (auto l : r.partition.labels) EXPECT_EQ(l, 0u);
  // forcing voxels onto the silent station is infinitely slow
  const auto t = evaluate_objective(problem, Labels(g.size(), 1));
  EXPECT_TRUE(std::isinf(t.total));
  EXPECT_EQ(t.infinite_voxels.size(), g.size());
}

TEST(Association, RuleReducesToMaxSinrForIdenticalLoads) {
  const VoxelGrid g(Box{{0, 0, 0}, {400, 200, 200}}, {4, 2, 2});
  Network net = pair_network({50, 100, 100}, {350, 100, 100});
  net.stations[1].backhaul_bps = net.stations[0].backhaul_bps;
  const AssociationProblem problem(g, net, ChannelParams{}, uniform_density(g), 10);
  const AssociationState same{{5.0, 5.0}, {1e-4, 1e-4}};
  for (std::size_t v = 0; v < g.size(); ++v) {
    const std::size_t by_sinr = problem.sinr(v, 0) >= problem.sinr(v, 1) ? 0 : 1;
    EXPECT_EQ(best_station(problem, same, v), by_sinr);
    EXPECT_TRUE(partition_rule(problem, same, v, by_sinr, 1 - by_sinr));
  }
}

TEST(Association, FastBackhaulWinsForEqualCost) {
  const VoxelGrid g(Box{{0, 0, 0}, {400, 200, 200}}, {4, 2, 2});
  Network net = pair_network({200, 100, 50}, {200, 100, 150});
  net.stations[0].backhaul_bps = 1e3;
  net.stations[1].backhaul_bps = 1e12;
  net.stations[1].compute_speed = 1e20;
  const AssociationProblem problem(g, net, ChannelParams{}, uniform_density(g), 10);
  const AssociationState state{{1.0, 1.0}, {0.0, 0.0}};
  // voxel at z = 50 is equidistant from neither, pick one on the mirror plane
  for (std::size_t v = 0; v < g.size(); ++v) {
    if (std::abs(problem.cost(v, 0) - problem.cost(v, 1)) < 1e-15) {
      EXPECT_TRUE(partition_rule(problem, state, v, 1, 0));
      EXPECT_FALSE(partition_rule(problem, state, v, 0, 1));
    }
  }
  EXPECT_EQ(best_station(problem, state, 0), 1u);
}

TEST(Association, SolverBeatsBaselineAndKeepsInvariants) {
  const auto r = solve_association(two_station_instance(), SolverSettings{100, 1e-4});
  const auto& problem_base = two_station_instance();
  const double base = evaluate_objective(problem_base, baseline_sinr_partition(problem_base).labels).total;
  EXPECT_LE(r.objective.total, base);
  for (const auto& it : r.trace) {
    EXPECT_NEAR(std::accumulate(it.masses.begin(), it.masses.end(), 0.0), 50.0, 1e-6 * 50.0);
  }
  for (double psi : r.partition.psi) {
    EXPECT_GE(psi, 0.0);
    EXPECT_LE(psi, 1.0);
  }
  EXPECT_EQ(r.partition.labels.size(), 16u);
}

TEST(Association, ExhaustiveOracleOnSixteenVoxels) {
  const auto problem = two_station_instance();
  const auto r = solve_association(problem, SolverSettings{200, 1e-4});
  // independent enumeration with the reference objective
  const auto& g = problem.grid();
  std::vector<double> f(g.size());
  for (std::size_t v = 0; v < f.size(); ++v) f[v] = problem.weight(v) / g.voxel_volume();
  double best = 1e300;
  Labels labels(16);
  for (unsigned m = 0; m < (1u << 16); ++m) {
    for (unsigned v = 0; v < 16; ++v) labels[v] = (m >> v) & 1u;
    best = std::min(best, reference_objective(g, problem.network(), problem.params(), f, problem.users(), labels));
  }
  EXPECT_NEAR(r.objective.total / best, 1.0, 1e-12);
  const double base = evaluate_objective(problem, baseline_sinr_partition(problem).labels).total;
  EXPECT_GT(base, best * 1.01);  // the instance is not won by max-SINR
}

TEST(Association, FasterBackhaulNeverHurts) {
  const auto spec = LatticeSpec::defaults();
  const auto pos = generate_positions(spec);
  auto net = build_network(pos, plan_cochannel(*find_reuse_solution(1, 400.0), spec, pos));
  const VoxelGrid g(spec.bounding_box, {12, 12, 12});
  TruncatedGaussianSpec truth;
  const auto f = truth.evaluate_on_grid(g);
  SolverSettings st{200, 1e-4};
  const double before = solve_association(AssociationProblem(g, net, ChannelParams{}, f, 200), st).objective.total;
  for (auto& bs : net.stations) bs.backhaul_bps *= 2;
  const double after = solve_association(AssociationProblem(g, net, ChannelParams{}, f, 200), st).objective.total;
  EXPECT_LE(after, before);
}

TEST(Association, PermutingStationsPermutesSolution) {
  const VoxelGrid g(Box{{0, 0, 0}, {900, 600, 300}}, {9, 6, 3});
  Network net;
  const Vec3 where[3] = {{150, 150, 150}, {750, 200, 150}, {400, 500, 150}};
  for (std::size_t n = 0; n < 3; ++n) {
    DroneBS bs;
    bs.id = n;
    bs.position = where[n];
    bs.backhaul_bps = 90e6 + 7e6 * n;
    bs.compute_speed = 1e12 * (n + 1);
    net.stations.push_back(bs);
  }
  net.interferers = {{1, 2}, {0, 2}, {0, 1}};
  std::vector<double> f(g.size());
  for (std::size_t v = 0; v < f.size(); ++v) f[v] = 1.0 + g.center(v).x / 900.0;
  const double s = std::accumulate(f.begin(), f.end(), 0.0) * g.voxel_volume();
  for (auto& x : f) x /= s;

  const std::size_t perm[3] = {2, 0, 1};  // new index i holds old station perm[i]
  Network pnet;
  for (std::size_t i = 0; i < 3; ++i) pnet.stations.push_back(net.stations[perm[i]]);
  pnet.interferers = {{1, 2}, {0, 2}, {0, 1}};

  const SolverSettings st{100, 1e-4};
  const auto a = solve_association(AssociationProblem(g, net, ChannelParams{}, f, 80), st);
  const auto b = solve_association(AssociationProblem(g, pnet, ChannelParams{}, f, 80), st);
  EXPECT_NEAR(a.objective.total, b.objective.total, 1e-12 * a.objective.total);
  for (std::size_t v = 0; v < g.size(); ++v) EXPECT_EQ(a.partition.labels[v], perm[b.partition.labels[v]]);
}

TEST(Association, ResultDoesNotDependOnThreadCount) {
  const auto spec = LatticeSpec::defaults();
  const auto pos = generate_positions(spec);
  const auto net = build_network(pos, plan_cochannel(*find_reuse_solution(1, 400.0), spec, pos));
  const VoxelGrid g(spec.bounding_box, {20, 20, 20});
  const auto f = TruncatedGaussianSpec{}.evaluate_on_grid(g);
  setenv("AETHER3D_THREADS", "1", 1);
  const auto a = solve_association(AssociationProblem(g, net, ChannelParams{}, f, 200), SolverSettings{40, 1e-4});
  setenv("AETHER3D_THREADS", "3", 1);
  const auto b = solve_association(AssociationProblem(g, net, ChannelParams{}, f, 200), SolverSettings{40, 1e-4});
  unsetenv("AETHER3D_THREADS");
  EXPECT_EQ(a.partition.labels, b.partition.labels);
  EXPECT_EQ(a.objective.total, b.objective.total);
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) EXPECT_EQ(a.trace[i].objective, b.trace[i].objective);
}

TEST(Association, AuditAcceptsExactOptimum) {
  const auto problem = two_station_instance();
  auto [best, labels] = exhaustive_minimum(problem);
  // A global optimum of a coarse instance need not satisfy the first-order
  // cell condition everywhere; the audit only reports it.
  const auto audit = audit_optimality(problem, labels);
  EXPECT_GE(audit.satisfied_fraction, 0.0);
  EXPECT_LE(audit.satisfied_fraction, 1.0);
  EXPECT_EQ(audit.violations, static_cast<std::size_t>(std::llround((1 - audit.satisfied_fraction) * 16)));
}

TEST(Association, AlphaFromLabelingIsAvailable) {
  SolverSettings st{30, 1e-4};
  st.alpha_update = AlphaUpdate::labeling;
  const auto r = solve_association(two_station_instance(), st);
  EXPECT_EQ(r.partition.labels.size(), 16u);
  EXPECT_GE(r.iterations, 1);
}

TEST(Association, RejectsBadInput) {
  const VoxelGrid g(Box{{0, 0, 0}, {400, 200, 200}}, {4, 2, 2});
  const Network net = pair_network({50, 100, 100}, {350, 100, 100});
  auto f = uniform_density(g);
  f[0] *= 2;  // no longer integrates to one
  EXPECT_THROW(AssociationProblem(g, net, ChannelParams{}, f, 10), ValidationError);
  EXPECT_THROW(AssociationProblem(g, net, ChannelParams{}, uniform_density(g), 0), ValidationError);
  EXPECT_THROW(AssociationProblem(g, net, ChannelParams{}, std::vector<double>(3, 1.0), 10), ValidationError);
  const AssociationProblem ok(g, net, ChannelParams{}, uniform_density(g), 10);
  EXPECT_THROW(solve_association(ok, SolverSettings{0, 1e-4}), ValidationError);
  EXPECT_THROW(evaluate_objective(ok, Labels(16, 2)), ValidationError);
}
