#pragma once

// Scenario pipeline: lattice -> frequency plan -> density -> association,
// plus the sweep, SINR-CDF, drift and bandwidth/MISE experiments.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "aether3d/association.hpp"
#include "aether3d/channel.hpp"
#include "aether3d/density.hpp"
#include "aether3d/io.hpp"
#include "aether3d/lattice.hpp"
#include "aether3d/scenario.hpp"
#include "aether3d/spectrum.hpp"

namespace aether3d {

struct Deployment {
  std::vector<BasePosition> positions;
  CochannelPlan plan;
  Network network;
};

/// Stations of the scenario under reuse factor q; overrides applied.
inline Deployment deploy(const Scenario& s, std::int64_t q) {
  Deployment d;
  d.positions = generate_positions(s.lattice);
  const auto solution = find_reuse_solution(q, s.lattice.edge_length);
  if (!solution) throw InfeasibleError("reuse factor " + std::to_string(q) + " admits no integer lattice witness");
  d.plan = plan_cochannel(*solution, s.lattice, d.positions);
  d.network = build_network(d.positions, d.plan, s.stations);
  for (std::size_t i = 0; i < s.overrides.size(); ++i) {
    const auto& ov = s.overrides[i];
    if (ov.index >= d.network.size()) {
      throw ValidationError("scenario: stations.override[" + std::to_string(i) + "].index: " +
                            std::to_string(ov.index) + " is out of range (" + std::to_string(d.network.size()) +
                            " stations)");
    }
    auto& bs = d.network.stations[ov.index];
    if (ov.tx_power_w) bs.tx_power_w = *ov.tx_power_w;
    if (ov.bandwidth_hz) bs.bandwidth_hz = *ov.bandwidth_hz;
    if (ov.backhaul_bps) bs.backhaul_bps = *ov.backhaul_bps;
    if (ov.compute_speed) bs.compute_speed = *ov.compute_speed;
  }
  d.network.validate();
  return d;
}

inline SampleSet draw_samples(const Scenario& s) {
  if (s.density.source == DensitySource::file) return io::read_samples_csv(s.density.file.string());
  return sample_truncated_gaussian(s.density.truth, s.density.sample_count, s.seed);
}

inline std::vector<Bandwidth> bandwidth_candidates(const Scenario& s) {
  return default_bandwidth_candidates(s.density.bandwidth_candidates, s.density.bandwidth_min,
                                      s.density.bandwidth_max);
}

inline BandwidthSelection fit_density(const Scenario& s, const SampleSet& samples) {
  const auto cands = bandwidth_candidates(s);
  return select_bandwidth_detailed(samples, cands, s.lattice.bounding_box);
}

inline VoxelGrid scenario_grid(const Scenario& s) { return VoxelGrid(s.lattice.bounding_box, s.resolution); }

inline SolveResult solve_scheme(const AssociationProblem& problem, bool proposed, const SolverSettings& settings) {
  if (proposed) return solve_association(problem, settings);
  SolveResult r;
  r.partition = baseline_sinr_partition(problem);
  r.objective = evaluate_objective(problem, r.partition.labels);
  r.state = state_of(problem, r.partition.labels);
  r.converged = true;
  return r;
}

inline const char* scheme_name(bool proposed) { return proposed ? "ot" : "sinr"; }

// ---- results ----

struct MetricRow {
  std::string scheme;
  std::string variable;
  double value = 0.0;
  double average_latency = 0.0;  // objective / L
  double transmission = 0.0;     // per-UE shares of the three components
  double backhaul = 0.0;
  double computation = 0.0;
  double objective = 0.0;
  int iterations = 0;
  bool converged = true;
};

struct CdfRow {
  std::int64_t q = 1;
  std::size_t rank = 0;
  double sinr_db = 0.0;
  double cdf = 0.0;
};

struct DriftRow {
  double minutes = 0.0;
  double drift_m_per_min = 0.0;
  std::string scheme;
  double stale_latency = 0.0;  // per UE, against the drifted truth
  double fresh_latency = 0.0;
  double additional = 0.0;     // stale - fresh
};

struct MiseRow {
  double h = 0.0;
  double loocv = 0.0;
  double mise = 0.0;
  bool chosen = false;
};

struct ExperimentResult {
  std::vector<MetricRow> rows;
  std::vector<CdfRow> cdf;
  std::vector<DriftRow> drift;
  std::vector<MiseRow> mise;
};

// ---- experiments ----

inline Scenario with_sweep_value(Scenario s, const std::string& variable, double value) {
  if (variable == "users") {
    s.users = value;
  } else if (variable == "bandwidth_hz") {
    s.stations.bandwidth_hz = value;
  } else if (variable == "packet_bits") {
    s.channel.packet_bits = value;
  } else if (variable == "reuse_factor") {
    if (value < 1 || value != std::floor(value)) {
      throw ValidationError("scenario: experiment.values: reuse_factor values must be positive integers");
    }
    s.channel.reuse_factor = static_cast<int>(value);
  } else {
    throw ValidationError("scenario: experiment.variable '" + variable + "' is not a sweepable variable");
  }
  s.validate();
  return s;
}

/// One row per (sweep value, scheme). The density is fitted once.
inline std::vector<MetricRow> run_sweep(const Scenario& base) {
  const auto samples = draw_samples(base);
  const auto model = fit_density(base, samples).model;
  const auto grid = scenario_grid(base);
  const auto voxel_density = model.evaluate_on_grid(grid);

  std::vector<MetricRow> rows;
  for (double value : base.experiment.values) {
    const Scenario s = with_sweep_value(base, base.experiment.variable, value);
    const auto dep = deploy(s, s.channel.reuse_factor);
    const AssociationProblem problem(grid, dep.network, s.channel, voxel_density, s.users);
    for (bool proposed : {true, false}) {
      if (proposed ? !s.experiment.run_ot : !s.experiment.run_sinr) continue;
      const auto r = solve_scheme(problem, proposed, s.solver);
      MetricRow row;
      row.scheme = scheme_name(proposed);
      row.variable = s.experiment.variable;
      row.value = value;
      row.objective = r.objective.total;
      row.average_latency = r.objective.average_latency;
      row.transmission = r.objective.transmission_total / s.users;
      row.backhaul = r.objective.backhaul_total / s.users;
      row.computation = r.objective.computation_total / s.users;
      row.iterations = r.iterations;
      row.converged = r.converged;
      rows.push_back(row);
    }
  }
  return rows;
}

/// Empirical SINR distribution over the voxel centers of one station's
/// nearest-center cell, for each reuse factor. Bandwidth is not split by q.
inline std::vector<CdfRow> sinr_cdf(const Scenario& s, const VoxelGrid& grid, std::size_t cell,
                                    std::span<const std::int64_t> reuse_factors) {
  std::vector<CdfRow> out;
  const auto positions = generate_positions(s.lattice);
  if (cell >= positions.size()) {
    throw ValidationError("scenario: experiment.cell: " + std::to_string(cell) + " is out of range");
  }
  std::vector<std::size_t> members;
  for (std::size_t v = 0; v < grid.size(); ++v) {
    if (nearest_cell(grid.center(v), positions) == cell) members.push_back(v);
  }
  for (auto q : reuse_factors) {
    const auto dep = deploy(s, q);
    std::vector<double> db;
    db.reserve(members.size());
    for (auto v : members) db.push_back(10.0 * std::log10(dep.network.sinr_at(grid.center(v), cell, s.channel)));
    std::sort(db.begin(), db.end());
    for (std::size_t i = 0; i < db.size(); ++i) {
      out.push_back({q, i, db[i], static_cast<double>(i + 1) / static_cast<double>(db.size())});
    }
  }
  return out;
}

/// Samples drawn at the start of a window fix the partition; the users keep
/// drifting for T minutes. The stale partition is scored against the drifted
/// truth and compared with the partition fitted to the same samples moved by
/// the drift (points that leave the box are dropped), so nu = 0 gives exactly
/// zero. Latencies are averaged over `experiment.realizations` sample sets
/// drawn with seeds seed, seed + 1, ...
inline std::vector<DriftRow> drift_experiment(const Scenario& s) {
  const auto grid = scenario_grid(s);
  const auto dep = deploy(s, s.channel.reuse_factor);
  const std::size_t R = s.experiment.realizations;

  std::vector<bool> schemes;
  if (s.experiment.run_ot) schemes.push_back(true);
  if (s.experiment.run_sinr) schemes.push_back(false);

  std::vector<DriftRow> out;
  for (bool proposed : schemes) {
    for (double minutes : s.experiment.values) {
      DriftRow row;
      row.minutes = minutes;
      row.drift_m_per_min = s.density.truth.drift_m_per_min;
      row.scheme = scheme_name(proposed);
      out.push_back(row);
    }
  }

  std::vector<AssociationProblem> truths;
  for (double minutes : s.experiment.values) {
    truths.emplace_back(grid, dep.network, s.channel, s.density.truth.drifted(minutes).evaluate_on_grid(grid),
                        s.users);
  }

  for (std::size_t r = 0; r < R; ++r) {
    Scenario sr = s;
    sr.seed = s.seed + r;
    const auto start = draw_samples(sr);
    const AssociationProblem stale_problem(grid, dep.network, s.channel,
                                           fit_density(s, start).model.evaluate_on_grid(grid), s.users);
    std::vector<SolveResult> stale;
    for (bool proposed : schemes) stale.push_back(solve_scheme(stale_problem, proposed, s.solver));

    for (std::size_t i = 0; i < s.experiment.values.size(); ++i) {
      const double shift = s.density.truth.drift_m_per_min * s.experiment.values[i];
      SampleSet moved;
      for (const auto& p : start.points) {
        const Vec3 q = p + Vec3{shift, shift, shift};
        if (s.lattice.bounding_box.contains(q)) moved.points.push_back(q);
      }
      if (moved.size() < 2) throw ValidationError("drift moves every sample out of the domain");
      const AssociationProblem fresh_problem(grid, dep.network, s.channel,
                                             fit_density(s, moved).model.evaluate_on_grid(grid), s.users);
      for (std::size_t k = 0; k < schemes.size(); ++k) {
        const auto fresh = solve_scheme(fresh_problem, schemes[k], s.solver);
        auto& row = out[k * s.experiment.values.size() + i];
        row.stale_latency += evaluate_objective(truths[i], stale[k].partition.labels).average_latency / R;
        row.fresh_latency += evaluate_objective(truths[i], fresh.partition.labels).average_latency / R;
      }
    }
  }
  for (auto& row : out) row.additional = row.stale_latency - row.fresh_latency;
  return out;
}

/// Leave-one-out score and Monte-Carlo MISE for every bandwidth candidate.
inline std::vector<MiseRow> mise_table(const Scenario& s) {
  if (s.density.source == DensitySource::file) {
    throw ValidationError("scenario: density.source: the mise experiment needs the synthetic ground truth");
  }
  const auto samples = draw_samples(s);
  const auto cands = bandwidth_candidates(s);
  const auto sel = select_bandwidth_detailed(samples, cands, s.lattice.bounding_box);
  std::vector<MiseRow> out;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    MiseRow row;
    row.h = cands[i].hx;
    row.loocv = sel.scores[i];
    if (s.experiment.realizations == 1) {
      row.mise = mise(DensityModel(samples, cands[i], s.lattice.bounding_box), s.density.truth, s.density.mc_points,
                      s.seed + 1);
    } else {
      row.mise = mise_over_realizations(s.density.truth, s.density.sample_count, cands[i],
                                        s.experiment.realizations, s.density.mc_points, s.seed);
    }
    row.chosen = i == sel.chosen;
    out.push_back(row);
  }
  return out;
}

inline ExperimentResult run_scenario(const Scenario& s) {
  ExperimentResult r;
  switch (s.experiment.kind) {
    case ExperimentKind::sweep:
      r.rows = run_sweep(s);
      break;
    case ExperimentKind::sinr_cdf:
      r.cdf = sinr_cdf(s, scenario_grid(s), s.experiment.cell, s.experiment.reuse_factors);
      break;
    case ExperimentKind::drift:
      r.drift = drift_experiment(s);
      break;
    case ExperimentKind::mise:
      r.mise = mise_table(s);
      break;
  }
  return r;
}

inline ExperimentResult run_scenario(const std::filesystem::path& path) { return run_scenario(load_scenario(path)); }

// ---- output ----

inline void write_metrics_csv(std::ostream& os, std::span<const MetricRow> rows) {
  io::CsvWriter w(os);
  w.row({"scheme", "variable", "value", "avg_total_latency_s", "transmission_s", "backhaul_s", "computation_s",
         "objective_s", "iterations", "converged"});
  for (const auto& r : rows) {
    w.field(r.scheme).field(r.variable).field(r.value).field(r.average_latency).field(r.transmission);
    w.field(r.backhaul).field(r.computation).field(r.objective).field(r.iterations);
    w.field(r.converged ? "true" : "false").end_row();
  }
}

inline void write_cdf_csv(std::ostream& os, std::span<const CdfRow> rows) {
  io::CsvWriter w(os);
  w.row({"q", "rank", "sinr_db", "cdf"});
  for (const auto& r : rows) {
    w.field(r.q).field(static_cast<std::uint64_t>(r.rank)).field(r.sinr_db).field(r.cdf).end_row();
  }
}

inline void write_drift_csv(std::ostream& os, std::span<const DriftRow> rows) {
  io::CsvWriter w(os);
  w.row({"scheme", "minutes", "drift_m_per_min", "stale_latency_s", "fresh_latency_s", "additional_s"});
  for (const auto& r : rows) {
    w.field(r.scheme).field(r.minutes).field(r.drift_m_per_min).field(r.stale_latency).field(r.fresh_latency);
    w.field(r.additional).end_row();
  }
}

inline void write_mise_csv(std::ostream& os, std::span<const MiseRow> rows) {
  io::CsvWriter w(os);
  w.row({"h_m2", "loocv", "mise", "chosen"});
  for (const auto& r : rows) w.field(r.h).field(r.loocv).field(r.mise).field(r.chosen ? "true" : "false").end_row();
}

/// Writes the non-empty tables of `r` into `dir`; returns the file names.
inline std::vector<std::string> write_results(const ExperimentResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> written;
  const auto emit = [&](const std::string& name, auto&& writer) {
    std::ostringstream os;
    writer(os);
    io::write_text((dir / name).string(), os.str());
    written.push_back(name);
  };
  if (!r.rows.empty()) emit("metrics.csv", [&](std::ostream& os) { write_metrics_csv(os, r.rows); });
  if (!r.cdf.empty()) emit("sinr_cdf.csv", [&](std::ostream& os) { write_cdf_csv(os, r.cdf); });
  if (!r.drift.empty()) emit("drift.csv", [&](std::ostream& os) { write_drift_csv(os, r.drift); });
  if (!r.mise.empty()) emit("mise.csv", [&](std::ostream& os) { write_mise_csv(os, r.mise); });
  return written;
}

}  // namespace aether3d
