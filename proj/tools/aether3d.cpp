// aether3d command-line front end.
//
//   aether3d plan       [--config f] [--out dir]
//   aether3d fit        [--config f] [--seed n] [--out dir]
//   aether3d solve      [--config f] [--seed n] [--scheme ot|sinr|both] [--grid nx,ny,nz] [--out dir]
//   aether3d experiment  --config f  [--seed n] [--scheme ...] [--grid ...] [--out dir]
//   aether3d oracle
//
// Exit status: 0 ok, 1 oracle mismatch or I/O failure, 2 invalid input,
// 3 infeasible problem.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "aether3d.hpp"

namespace fs = std::filesystem;
using namespace aether3d;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::string scheme;
  std::string grid;
};

std::array<int, 3> parse_grid(const std::string& text) {
  std::array<int, 3> res{};
  std::stringstream ss(text);
  std::string part;
  int i = 0;
  while (std::getline(ss, part, ',')) {
    if (i == 3) throw ValidationError("--grid: expected nx,ny,nz");
    try {
      std::size_t used = 0;
      res[static_cast<std::size_t>(i)] = std::stoi(part, &used);
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw ValidationError("--grid: '" + part + "' is not an integer");
    }
    if (res[static_cast<std::size_t>(i)] < 2) throw ValidationError("--grid: entries must be >= 2");
    ++i;
  }
  if (i != 3) throw ValidationError("--grid: expected nx,ny,nz");
  return res;
}

Scenario scenario_from(const Options& o) {
  Scenario s = o.config.empty() ? Scenario{} : load_scenario(o.config);
  if (o.seed) s.seed = *o.seed;
  if (!o.grid.empty()) s.resolution = parse_grid(o.grid);
  if (!o.scheme.empty()) {
    s.experiment.run_ot = o.scheme != "sinr";
    s.experiment.run_sinr = o.scheme != "ot";
  }
  s.validate();
  return s;
}

void emit(const fs::path& dir, const std::string& name, const std::string& text) {
  fs::create_directories(dir);
  io::write_text((dir / name).string(), text);
  std::cout << "wrote " << (dir / name).string() << "\n";
}

int cmd_plan(const Options& o) {
  const Scenario s = scenario_from(o);
  const auto dep = deploy(s, s.channel.reuse_factor);
  const auto nd = neighbor_distances(s.lattice.edge_length);
  std::printf("stations: %zu  R = %g m  neighbor distances %.6f / %.6f m\n", dep.positions.size(),
              s.lattice.edge_length, nd.hex_face, nd.square_face);
  std::printf("reuse q = %lld  hex witness (%lld,%lld,%lld) D_l = %.6f m  square witness (%lld,%lld,%lld) D_u = %.6f m\n",
              static_cast<long long>(dep.plan.q), static_cast<long long>(dep.plan.solution.hex_triple[0]),
              static_cast<long long>(dep.plan.solution.hex_triple[1]),
              static_cast<long long>(dep.plan.solution.hex_triple[2]), dep.plan.solution.hex_distance,
              static_cast<long long>(dep.plan.solution.square_triple[0]),
              static_cast<long long>(dep.plan.solution.square_triple[1]),
              static_cast<long long>(dep.plan.solution.square_triple[2]), dep.plan.solution.square_distance);
  std::ostringstream pos;
  io::write_positions_csv(pos, dep.positions);
  emit(o.out, "positions.csv", pos.str());
  emit(o.out, "cochannel.json", io::cochannel_json(dep.plan).dump(2) + "\n");
  return 0;
}

int cmd_fit(const Options& o) {
  const Scenario s = scenario_from(o);
  const auto samples = draw_samples(s);
  const auto cands = bandwidth_candidates(s);
  const auto sel = select_bandwidth_detailed(samples, cands, s.lattice.bounding_box);
  std::printf("samples: %zu  chosen h = %g m^2  loocv = %.6f\n", samples.size(), cands[sel.chosen].hx,
              sel.scores[sel.chosen]);
  std::ostringstream scores;
  io::CsvWriter w(scores);
  w.row({"h_m2", "loocv"});
  for (std::size_t i = 0; i < cands.size(); ++i) w.field(cands[i].hx).field(sel.scores[i]).end_row();
  std::ostringstream pts;
  io::write_samples_csv(pts, samples);
  emit(o.out, "samples.csv", pts.str());
  emit(o.out, "bandwidth_scores.csv", scores.str());
  emit(o.out, "model.json", io::density_json(sel.model).dump(2) + "\n");
  return 0;
}

int cmd_solve(const Options& o) {
  const Scenario s = scenario_from(o);
  const auto dep = deploy(s, s.channel.reuse_factor);
  const auto grid = scenario_grid(s);
  const auto model = fit_density(s, draw_samples(s)).model;
  const AssociationProblem problem(grid, dep.network, s.channel, model.evaluate_on_grid(grid), s.users);
  int status = 0;
  for (bool proposed : {true, false}) {
    if (proposed ? !s.experiment.run_ot : !s.experiment.run_sinr) continue;
    const auto r = solve_scheme(problem, proposed, s.solver);
    const std::string name = scheme_name(proposed);
    std::printf("%-4s objective %.9g s  avg latency %.9g s  iterations %d%s\n", name.c_str(), r.objective.total,
                r.objective.average_latency, r.iterations,
                proposed && !r.converged ? "  (not converged)" : "");
    if (!r.objective.finite()) {
      std::fprintf(stderr, "%s: %zu loaded voxels have zero rate, e.g. voxel %zu\n", name.c_str(),
                   r.objective.infinite_voxels.size(), r.objective.infinite_voxels.front());
      status = 3;
    }
    std::ostringstream part;
    io::write_partition_csv(part, grid, r.partition.labels);
    emit(o.out, "partition_" + name + ".csv", part.str());
    emit(o.out, "summary_" + name + ".json", io::solve_summary_json(r).dump(2) + "\n");
  }
  return status;
}

int cmd_experiment(const Options& o) {
  if (o.config.empty()) throw ValidationError("experiment: --config is required");
  const Scenario s = scenario_from(o);
  const auto result = run_scenario(s);
  for (const auto& name : write_results(result, o.out)) std::cout << "wrote " << (fs::path(o.out) / name).string() << "\n";
  for (const auto& r : result.rows) {
    if (!r.converged) std::fprintf(stderr, "note: %s at %s=%g stopped before convergence\n", r.scheme.c_str(),
                                   r.variable.c_str(), r.value);
  }
  return 0;
}

int cmd_oracle() {
  const auto problem = two_station_instance();
  SolverSettings settings;
  settings.max_iterations = 200;
  const auto r = brute_force_check(problem, settings);
  std::printf("2 stations, 16 voxels, 65536 labelings\n");
  std::printf("baseline   %.15g\nsolver     %.15g (%d iterations)\nexhaustive %.15g\nrelative gap %.3e\n", r.baseline,
              r.solver, r.solver_iterations, r.exhaustive, r.relative_gap());
  const bool ok = std::abs(r.relative_gap()) <= 1e-12;
  std::printf("%s\n", ok ? "match" : "MISMATCH");
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"3D drone-BS planning: lattice deployment, user density and latency-optimal association"};
  app.require_subcommand(1);
  Options o;

  const auto common = [&o](CLI::App* sub, bool with_solver) {
    sub->add_option("--config", o.config, "scenario TOML file")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory")->capture_default_str();
    sub->add_option("--seed", o.seed, "random seed (overrides the scenario)");
    if (with_solver) {
      sub->add_option("--scheme", o.scheme, "association scheme")->check(CLI::IsMember({"ot", "sinr", "both"}));
      sub->add_option("--grid", o.grid, "voxel resolution nx,ny,nz");
    }
  };
  auto* plan = app.add_subcommand("plan", "lattice positions and frequency plan");
  common(plan, false);
  auto* fit = app.add_subcommand("fit", "kernel density fit of the user samples");
  common(fit, false);
  auto* solve = app.add_subcommand("solve", "one association run");
  common(solve, true);
  auto* experiment = app.add_subcommand("experiment", "sweep defined by a scenario file");
  common(experiment, true);
  auto* oracle = app.add_subcommand("oracle", "exhaustive check of the solver on a 16-voxel instance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*plan) return cmd_plan(o);
    if (*fit) return cmd_fit(o);
    if (*solve) return cmd_solve(o);
    if (*experiment) return cmd_experiment(o);
    if (*oracle) return cmd_oracle();
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
