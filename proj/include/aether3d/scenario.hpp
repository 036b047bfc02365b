#pragma once

// Scenario files (TOML). Every table and key is optional; missing values take
// the reference defaults. Unknown keys are rejected so typos surface early.
//
//   seed = 42
//   users = 200
//   [lattice]    edge_length, reference, a, b, c, box_lo, box_hi
//   [channel]    carrier_frequency_hz, path_loss_exponent, path_loss_constant,
//                noise_psd_dbm_hz, channel_gain, packet_bits, reuse_factor
//   [stations]   tx_power_w, bandwidth_hz, backhaul_base_bps,
//                backhaul_step_bps, compute_speed
//   [[stations.override]]  index plus any [stations] key except the
//                backhaul pair, which becomes backhaul_bps
//   [density]    source = "synthetic" | "file", file, sample_count, mean,
//                stddev, drift_m_per_min, bandwidth_candidates,
//                bandwidth_min, bandwidth_max, mc_points
//   [grid]       resolution
//   [solver]     max_iterations, tolerance, alpha_update
//   [experiment] kind = "sweep" | "sinr_cdf" | "drift" | "mise", variable,
//                values, schemes, cell, reuse_factors, realizations

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "toml.hpp"

#include "aether3d/association.hpp"
#include "aether3d/channel.hpp"
#include "aether3d/density.hpp"
#include "aether3d/lattice.hpp"

namespace aether3d {

struct StationOverride {
  std::size_t index = 0;
  std::optional<double> tx_power_w;
  std::optional<double> bandwidth_hz;
  std::optional<double> backhaul_bps;
  std::optional<double> compute_speed;
};

enum class DensitySource { synthetic, file };

struct DensityConfig {
  DensitySource source = DensitySource::synthetic;
  std::filesystem::path file;
  TruncatedGaussianSpec truth;
  std::size_t sample_count = 200;
  std::size_t bandwidth_candidates = 15;
  double bandwidth_min = 1e2;
  double bandwidth_max = 1e6;
  std::size_t mc_points = 200000;
};

enum class ExperimentKind { sweep, sinr_cdf, drift, mise };

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::sweep;
  std::string variable = "users";
  std::vector<double> values{200.0};  // sweep: variable values; drift: window lengths T (minutes)
  bool run_ot = true;
  bool run_sinr = true;
  std::size_t cell = 0;  // sinr_cdf: station whose cell is sampled
  std::vector<std::int64_t> reuse_factors{1, 8};
  std::size_t realizations = 1;  // mise and drift: independent sample sets averaged
};

struct Scenario {
  std::uint64_t seed = 42;
  double users = 200.0;
  LatticeSpec lattice = LatticeSpec::defaults();
  ChannelParams channel;
  StationDefaults stations;
  std::vector<StationOverride> overrides;
  DensityConfig density;
  std::array<int, 3> resolution{48, 48, 48};
  SolverSettings solver;
  ExperimentConfig experiment;

  void validate() const;
};

inline const std::set<std::string>& sweep_variables() {
  static const std::set<std::string> v{"users", "bandwidth_hz", "packet_bits", "reuse_factor"};
  return v;
}

inline void Scenario::validate() const {
  const auto req = [](bool ok, const std::string& msg) {
    if (!ok) throw ValidationError("scenario: " + msg);
  };
  req(users > 0.0, "users must be > 0");
  lattice.validate();
  channel.validate();
  req(stations.tx_power_w >= 0.0, "stations.tx_power_w must be >= 0");
  req(stations.bandwidth_hz > 0.0, "stations.bandwidth_hz must be > 0");
  req(stations.backhaul_base_bps + stations.backhaul_step_bps > 0.0, "stations.backhaul_base_bps must be > 0");
  req(stations.backhaul_step_bps >= 0.0, "stations.backhaul_step_bps must be >= 0");
  req(stations.compute_speed > 0.0, "stations.compute_speed must be > 0");
  density.truth.validate();
  req(density.sample_count >= 2, "density.sample_count must be >= 2");
  req(density.bandwidth_candidates >= 1, "density.bandwidth_candidates must be >= 1");
  req(density.bandwidth_min > 0.0 && density.bandwidth_max >= density.bandwidth_min,
      "density.bandwidth_min/bandwidth_max must satisfy 0 < min <= max");
  req(density.mc_points > 0, "density.mc_points must be > 0");
  if (density.source == DensitySource::file) {
    req(std::filesystem::exists(density.file), "density.file '" + density.file.string() + "' does not exist");
  }
  for (int n : resolution) req(n >= 2, "grid.resolution entries must be >= 2");
  solver.validate();
  if (experiment.kind == ExperimentKind::sweep || experiment.kind == ExperimentKind::drift) {
    req(!experiment.values.empty(), "experiment.values is empty");
  }
  if (experiment.kind == ExperimentKind::drift) {
    for (double t : experiment.values) req(t >= 0.0, "experiment.values (minutes) must be >= 0");
  }
  req(experiment.run_ot || experiment.run_sinr, "experiment.schemes is empty");
  req(!experiment.reuse_factors.empty(), "experiment.reuse_factors is empty");
  req(experiment.realizations >= 1, "experiment.realizations must be >= 1");
  if (experiment.kind == ExperimentKind::sweep) {
    req(sweep_variables().count(experiment.variable) == 1, "experiment.variable '" + experiment.variable +
                                                               "' is not a sweepable variable");
  }
}

namespace detail {

class TableReader {
 public:
  TableReader(const toml::table* t, std::string prefix) : t_(t), prefix_(std::move(prefix)) {}

  bool present() const { return t_ != nullptr; }
  std::string field(std::string_view key) const { return prefix_.empty() ? std::string(key) : prefix_ + "." + std::string(key); }

  [[noreturn]] void fail(std::string_view key, const std::string& msg) const {
    throw ValidationError("scenario: " + field(key) + ": " + msg);
  }

  void number(std::string_view key, double& out) {
    if (const auto* n = node(key)) {
      if (auto v = n->value<double>()) {
        out = *v;
      } else {
        fail(key, "expected a number");
      }
      if (!std::isfinite(out)) fail(key, "must be finite");
    }
  }
  void number(std::string_view key, std::optional<double>& out) {
    if (node(key)) {
      double v = 0.0;
      number(key, v);
      out = v;
    }
  }
  template <class Int>
  void integer(std::string_view key, Int& out, std::int64_t min) {
    if (const auto* n = node(key)) {
      auto v = n->value_exact<std::int64_t>();
      if (!v) fail(key, "expected an integer");
      if (*v < min) fail(key, "must be >= " + std::to_string(min));
      out = static_cast<Int>(*v);
    }
  }
  void string(std::string_view key, std::string& out) {
    if (const auto* n = node(key)) {
      auto v = n->value<std::string>();
      if (!v) fail(key, "expected a string");
      out = *v;
    }
  }
  void vec3(std::string_view key, Vec3& out) {
    if (const auto* n = node(key)) {
      const auto* arr = n->as_array();
      if (!arr || arr->size() != 3) fail(key, "expected an array of 3 numbers");
      for (std::size_t i = 0; i < 3; ++i) {
        auto v = (*arr)[i].value<double>();
        if (!v || !std::isfinite(*v)) fail(key, "expected an array of 3 numbers");
        out[static_cast<int>(i)] = *v;
      }
    }
  }
  void range(std::string_view key, IndexRange& out) {
    if (const auto* n = node(key)) {
      const auto* arr = n->as_array();
      if (!arr || arr->size() != 2) fail(key, "expected [lo, hi]");
      auto lo = (*arr)[0].value_exact<std::int64_t>();
      auto hi = (*arr)[1].value_exact<std::int64_t>();
      if (!lo || !hi) fail(key, "expected [lo, hi] integers");
      out = {static_cast<int>(*lo), static_cast<int>(*hi)};
    }
  }
  void numbers(std::string_view key, std::vector<double>& out) {
    if (const auto* n = node(key)) {
      const auto* arr = n->as_array();
      if (!arr) fail(key, "expected an array of numbers");
      out.clear();
      for (const auto& e : *arr) {
        auto v = e.value<double>();
        if (!v || !std::isfinite(*v)) fail(key, "expected an array of numbers");
        out.push_back(*v);
      }
    }
  }
  void strings(std::string_view key, std::vector<std::string>& out) {
    if (const auto* n = node(key)) {
      const auto* arr = n->as_array();
      if (!arr) fail(key, "expected an array of strings");
      out.clear();
      for (const auto& e : *arr) {
        auto v = e.value<std::string>();
        if (!v) fail(key, "expected an array of strings");
        out.push_back(*v);
      }
    }
  }

  const toml::table* table(std::string_view key) const {
    if (const auto* n = node(key)) {
      if (const auto* t = n->as_table()) return t;
      fail(key, "expected a table");
    }
    return nullptr;
  }
  const toml::array* array_of_tables(std::string_view key) const {
    if (const auto* n = node(key)) {
      const auto* a = n->as_array();
      if (!a || !a->is_array_of_tables()) fail(key, "expected an array of tables");
      return a;
    }
    return nullptr;
  }

  void reject_unknown(std::initializer_list<std::string_view> known) const {
    if (!t_) return;
    for (const auto& [k, v] : *t_) {
      if (std::find(known.begin(), known.end(), k.str()) == known.end()) fail(k.str(), "unknown key");
    }
  }

 private:
  const toml::node* node(std::string_view key) const { return t_ ? t_->get(key) : nullptr; }
  const toml::table* t_;
  std::string prefix_;
};

}  // namespace detail

/// Parses scenario text; relative file paths resolve against `base_dir`.
inline Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir = {},
                               const std::string& source = "scenario") {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "scenario: " << source << ":" << e.source().begin.line << ": " << e.description();
    throw ValidationError(msg.str());
  }

  Scenario s;
  detail::TableReader top(&root, "");
  top.reject_unknown({"seed", "users", "lattice", "channel", "stations", "density", "grid", "solver", "experiment"});
  top.integer("seed", s.seed, 0);
  top.number("users", s.users);

  {
    detail::TableReader t(top.table("lattice"), "lattice");
    t.reject_unknown({"edge_length", "reference", "a", "b", "c", "box_lo", "box_hi"});
    t.number("edge_length", s.lattice.edge_length);
    t.vec3("reference", s.lattice.reference);
    t.range("a", s.lattice.a);
    t.range("b", s.lattice.b);
    t.range("c", s.lattice.c);
    t.vec3("box_lo", s.lattice.bounding_box.lo);
    t.vec3("box_hi", s.lattice.bounding_box.hi);
  }
  {
    detail::TableReader t(top.table("channel"), "channel");
    t.reject_unknown({"carrier_frequency_hz", "path_loss_exponent", "path_loss_constant", "noise_psd_dbm_hz",
                      "channel_gain", "packet_bits", "reuse_factor"});
    t.number("carrier_frequency_hz", s.channel.carrier_frequency_hz);
    t.number("path_loss_exponent", s.channel.path_loss_exponent);
    t.number("path_loss_constant", s.channel.path_loss_constant);
    std::optional<double> dbm;
    t.number("noise_psd_dbm_hz", dbm);
    if (dbm) s.channel.noise_psd = dbm_per_hz_to_watt_per_hz(*dbm);
    t.number("channel_gain", s.channel.channel_gain);
    t.number("packet_bits", s.channel.packet_bits);
    t.integer("reuse_factor", s.channel.reuse_factor, 1);
  }
  {
    detail::TableReader t(top.table("stations"), "stations");
    t.reject_unknown({"tx_power_w", "bandwidth_hz", "backhaul_base_bps", "backhaul_step_bps", "compute_speed",
                      "override"});
    t.number("tx_power_w", s.stations.tx_power_w);
    t.number("bandwidth_hz", s.stations.bandwidth_hz);
    t.number("backhaul_base_bps", s.stations.backhaul_base_bps);
    t.number("backhaul_step_bps", s.stations.backhaul_step_bps);
    t.number("compute_speed", s.stations.compute_speed);
    if (const auto* arr = t.array_of_tables("override")) {
      for (std::size_t i = 0; i < arr->size(); ++i) {
        detail::TableReader o((*arr)[i].as_table(), "stations.override[" + std::to_string(i) + "]");
        o.reject_unknown({"index", "tx_power_w", "bandwidth_hz", "backhaul_bps", "compute_speed"});
        StationOverride ov;
        if (!(*arr)[i].as_table()->contains("index")) o.fail("index", "missing");
        o.integer("index", ov.index, 0);
        o.number("tx_power_w", ov.tx_power_w);
        o.number("bandwidth_hz", ov.bandwidth_hz);
        o.number("backhaul_bps", ov.backhaul_bps);
        o.number("compute_speed", ov.compute_speed);
        s.overrides.push_back(ov);
      }
    }
  }
  {
    detail::TableReader t(top.table("density"), "density");
    t.reject_unknown({"source", "file", "sample_count", "mean", "stddev", "drift_m_per_min", "bandwidth_candidates",
                      "bandwidth_min", "bandwidth_max", "mc_points"});
    std::string source_kind = "synthetic";
    t.string("source", source_kind);
    if (source_kind == "file") {
      s.density.source = DensitySource::file;
    } else if (source_kind != "synthetic") {
      t.fail("source", "expected \"synthetic\" or \"file\"");
    }
    std::string file;
    t.string("file", file);
    if (s.density.source == DensitySource::file) {
      if (file.empty()) t.fail("file", "required when source = \"file\"");
      s.density.file = std::filesystem::path(file).is_absolute() ? std::filesystem::path(file) : base_dir / file;
    }
    t.integer("sample_count", s.density.sample_count, 2);
    t.vec3("mean", s.density.truth.mean);
    t.vec3("stddev", s.density.truth.stddev);
    t.number("drift_m_per_min", s.density.truth.drift_m_per_min);
    t.integer("bandwidth_candidates", s.density.bandwidth_candidates, 1);
    t.number("bandwidth_min", s.density.bandwidth_min);
    t.number("bandwidth_max", s.density.bandwidth_max);
    t.integer("mc_points", s.density.mc_points, 1);
    s.density.truth.box = s.lattice.bounding_box;
  }
  {
    detail::TableReader t(top.table("grid"), "grid");
    t.reject_unknown({"resolution"});
    std::vector<double> res;
    t.numbers("resolution", res);
    if (!res.empty()) {
      if (res.size() != 3) t.fail("resolution", "expected 3 integers");
      for (int a = 0; a < 3; ++a) {
        if (res[static_cast<std::size_t>(a)] != std::floor(res[static_cast<std::size_t>(a)])) {
          t.fail("resolution", "expected 3 integers");
        }
        s.resolution[static_cast<std::size_t>(a)] = static_cast<int>(res[static_cast<std::size_t>(a)]);
      }
    }
  }
  {
    detail::TableReader t(top.table("solver"), "solver");
    t.reject_unknown({"max_iterations", "tolerance", "alpha_update"});
    t.integer("max_iterations", s.solver.max_iterations, 1);
    t.number("tolerance", s.solver.tolerance);
    std::string alpha = "averaged";
    t.string("alpha_update", alpha);
    if (alpha == "labeling") {
      s.solver.alpha_update = AlphaUpdate::labeling;
    } else if (alpha != "averaged") {
      t.fail("alpha_update", "expected \"averaged\" or \"labeling\"");
    }
  }
  {
    detail::TableReader t(top.table("experiment"), "experiment");
    t.reject_unknown({"kind", "variable", "values", "schemes", "cell", "reuse_factors", "realizations"});
    std::string kind = "sweep";
    t.string("kind", kind);
    if (kind == "sweep") {
      s.experiment.kind = ExperimentKind::sweep;
    } else if (kind == "sinr_cdf") {
      s.experiment.kind = ExperimentKind::sinr_cdf;
    } else if (kind == "drift") {
      s.experiment.kind = ExperimentKind::drift;
    } else if (kind == "mise") {
      s.experiment.kind = ExperimentKind::mise;
    } else {
      t.fail("kind", "expected one of sweep, sinr_cdf, drift, mise");
    }
    t.string("variable", s.experiment.variable);
    t.numbers("values", s.experiment.values);
    std::vector<std::string> schemes;
    t.strings("schemes", schemes);
    if (!schemes.empty()) {
      s.experiment.run_ot = s.experiment.run_sinr = false;
      for (const auto& name : schemes) {
        if (name == "ot") {
          s.experiment.run_ot = true;
        } else if (name == "sinr") {
          s.experiment.run_sinr = true;
        } else {
          t.fail("schemes", "unknown scheme '" + name + "' (expected ot or sinr)");
        }
      }
    }
    t.integer("cell", s.experiment.cell, 0);
    std::vector<double> qs;
    t.numbers("reuse_factors", qs);
    if (!qs.empty()) {
      s.experiment.reuse_factors.clear();
      for (double q : qs) {
        if (q < 1 || q != std::floor(q)) t.fail("reuse_factors", "expected positive integers");
        s.experiment.reuse_factors.push_back(static_cast<std::int64_t>(q));
      }
    }
    t.integer("realizations", s.experiment.realizations, 1);
  }
  s.validate();
  return s;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("scenario: cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.parent_path(), path.string());
}

}  // namespace aether3d
