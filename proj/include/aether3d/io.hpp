#pragma once

// CSV and JSON import/export. CSV output is RFC 4180 with a header row and
// shortest round-trip number formatting, so equal inputs give equal bytes.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "aether3d/association.hpp"
#include "aether3d/density.hpp"
#include "aether3d/lattice.hpp"
#include "aether3d/spectrum.hpp"

namespace aether3d::io {

using json = nlohmann::ordered_json;

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

/// Minimal row-at-a-time CSV writer.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}

  CsvWriter& field(std::string_view s) {
    sep();
    os_ << csv_field(s);
    return *this;
  }
  CsvWriter& field(double v) { return field(format_number(v)); }
  CsvWriter& field(std::int64_t v) { return field(std::to_string(v)); }
  CsvWriter& field(std::uint64_t v) { return field(std::to_string(v)); }
  CsvWriter& field(int v) { return field(static_cast<std::int64_t>(v)); }
  CsvWriter& field(unsigned v) { return field(static_cast<std::uint64_t>(v)); }

  CsvWriter& row(std::initializer_list<std::string_view> cells) {
    for (auto c : cells) field(c);
    return end_row();
  }
  CsvWriter& end_row() {
    os_ << "\r\n";
    first_ = true;
    return *this;
  }

 private:
  void sep() {
    if (!first_) os_ << ',';
    first_ = false;
  }
  std::ostream& os_;
  bool first_ = true;
};

/// Splits one CSV record; handles quoted fields but not embedded newlines.
inline std::vector<std::string> parse_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  if (quoted) throw ValidationError("unterminated quote in CSV record");
  out.push_back(std::move(cur));
  return out;
}

inline double parse_double(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ValidationError(what + ": not a number: '" + s + "'");
  }
  if (used != s.size()) throw ValidationError(what + ": trailing characters in '" + s + "'");
  return v;
}

// ---- lattice ----

inline void write_positions_csv(std::ostream& os, std::span<const BasePosition> positions) {
  CsvWriter w(os);
  w.row({"a", "b", "c", "x", "y", "z"});
  for (const auto& p : positions) {
    w.field(p.index.a).field(p.index.b).field(p.index.c);
    w.field(p.position.x).field(p.position.y).field(p.position.z).end_row();
  }
}

// ---- spectrum ----

inline json cochannel_json(const CochannelPlan& plan) {
  json j;
  j["q"] = plan.q;
  j["witnesses"] = {{"hexagonal", plan.solution.hex_triple}, {"square", plan.solution.square_triple}};
  j["reuse_distance_m"] = {{"hexagonal", plan.solution.hex_distance}, {"square", plan.solution.square_distance}};
  j["groups"] = plan.groups;
  return j;
}

// ---- density ----

/// Reads x,y,z columns (any order, extra columns ignored).
inline SampleSet read_samples_csv(std::istream& is, const std::string& source = "samples") {
  std::string line;
  if (!std::getline(is, line)) throw ValidationError(source + ": empty file");
  const auto header = parse_csv_line(line);
  int col[3] = {-1, -1, -1};
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "x") col[0] = static_cast<int>(i);
    if (header[i] == "y") col[1] = static_cast<int>(i);
    if (header[i] == "z") col[2] = static_cast<int>(i);
  }
  for (int a = 0; a < 3; ++a) {
    if (col[a] < 0) throw ValidationError(source + ": missing column '" + std::string(1, "xyz"[a]) + "'");
  }
  SampleSet out;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = parse_csv_line(line);
    Vec3 p;
    for (int a = 0; a < 3; ++a) {
      const auto c = static_cast<std::size_t>(col[a]);
      const std::string where = source + ":" + std::to_string(lineno) + " column " + "xyz"[a];
      if (c >= cells.size()) throw ValidationError(where + ": too few columns");
      p[a] = parse_double(cells[c], where);
      if (!std::isfinite(p[a])) throw ValidationError(where + ": non-finite coordinate");
    }
    out.points.push_back(p);
  }
  if (out.points.empty()) throw ValidationError(source + ": no samples");
  return out;
}

inline SampleSet read_samples_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open sample file '" + path + "'");
  return read_samples_csv(in, path);
}

inline void write_samples_csv(std::ostream& os, const SampleSet& samples) {
  CsvWriter w(os);
  w.row({"x", "y", "z"});
  for (const auto& p : samples.points) w.field(p.x).field(p.y).field(p.z).end_row();
}

inline json density_json(const DensityModel& model) {
  json j;
  json pts = json::array();
  for (const auto& p : model.samples().points) pts.push_back({p.x, p.y, p.z});
  j["samples"] = std::move(pts);
  j["h"] = {model.bandwidth().hx, model.bandwidth().hy, model.bandwidth().hz};
  j["normalization"] = model.normalization();
  j["box"] = {{"lo", {model.box().lo.x, model.box().lo.y, model.box().lo.z}},
              {"hi", {model.box().hi.x, model.box().hi.y, model.box().hi.z}}};
  return j;
}

// ---- association ----

inline void write_partition_csv(std::ostream& os, const VoxelGrid& grid, std::span<const std::uint32_t> labels) {
  CsvWriter w(os);
  w.row({"voxel", "x", "y", "z", "label"});
  for (std::size_t v = 0; v < labels.size(); ++v) {
    const Vec3 c = grid.center(v);
    w.field(static_cast<std::uint64_t>(v)).field(c.x).field(c.y).field(c.z).field(labels[v]).end_row();
  }
}

inline json objective_json(const ObjectiveTerms& t) {
  json j;
  j["K"] = t.masses;
  j["alpha"] = t.alpha;
  j["transmission"] = t.transmission;
  j["backhaul"] = t.backhaul;
  j["computation"] = t.computation;
  j["transmission_total"] = t.transmission_total;
  j["backhaul_total"] = t.backhaul_total;
  j["computation_total"] = t.computation_total;
  j["objective"] = t.total;
  j["average_latency"] = t.average_latency;
  j["infinite_voxels"] = t.infinite_voxels;
  return j;
}

inline json solve_summary_json(const SolveResult& r) {
  json j = objective_json(r.objective);
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  json trace = json::array();
  for (const auto& it : r.trace) {
    trace.push_back({{"iteration", it.iteration},
                     {"objective", it.objective},
                     {"relabel_fraction", it.relabel_fraction},
                     {"K", it.masses}});
  }
  j["trace"] = std::move(trace);
  return j;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

}  // namespace aether3d::io
