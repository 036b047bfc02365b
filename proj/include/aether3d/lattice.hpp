#pragma once

// Drone-BS placement on the truncated-octahedron lattice.
//
// Cell centers form a body-centered-cubic lattice. With edge length R the
// three primitive vectors (one per hexagonal face direction) are
//   e1 = sqrt(2) R ( 1, -1,  1)
//   e2 = sqrt(2) R ( 1,  1, -1)
//   e3 = sqrt(2) R (-1,  1,  1)
// so that P(a,b,c) = ref + sqrt(2) R (a+b-c, -a+b+c, a-b+c).
// Each cell is the nearest-center region of its lattice point, so membership
// is answered by a nearest-neighbor query instead of a polyhedral mesh.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "aether3d/error.hpp"
#include "aether3d/geometry.hpp"

namespace aether3d {

/// Inclusive integer interval [lo, hi].
struct IndexRange {
  int lo = 0;
  int hi = 0;

  constexpr bool empty() const { return hi < lo; }
  constexpr int size() const { return empty() ? 0 : hi - lo + 1; }
};

struct LatticeIndex {
  int a = 0;
  int b = 0;
  int c = 0;

  friend constexpr bool operator==(const LatticeIndex&, const LatticeIndex&) = default;
};

struct LatticeSpec {
  double edge_length = 400.0;  // R, meters
  Vec3 reference{1500.0, 1500.0, 1500.0};
  IndexRange a{-1, 1};
  IndexRange b{-1, 1};
  IndexRange c{0, 1};
  Box bounding_box{{0.0, 0.0, 0.0}, {3000.0, 3000.0, 3000.0}};

  /// 18 stations, R = 400 m, centered in a 3 km cube.
  static LatticeSpec defaults() { return {}; }

  void validate() const {
    detail::require(std::isfinite(edge_length) && edge_length > 0.0, "lattice.edge_length must be > 0");
    bounding_box.validate();
  }
};

struct BasePosition {
  LatticeIndex index;
  Vec3 position;
};

inline Vec3 lattice_offset(double edge_length, const LatticeIndex& i) {
  const double s = std::sqrt(2.0) * edge_length;
  return {s * (i.a + i.b - i.c), s * (-i.a + i.b + i.c), s * (i.a - i.b + i.c)};
}

inline Vec3 lattice_point(const LatticeSpec& spec, const LatticeIndex& i) {
  return spec.reference + lattice_offset(spec.edge_length, i);
}

/// One station per (a, b, c) in the index ranges, ordered with a outermost
/// and c innermost. Station n in the returned list is "drone-BS n+1".
inline std::vector<BasePosition> generate_positions(const LatticeSpec& spec) {
  spec.validate();
  if (spec.a.empty() || spec.b.empty() || spec.c.empty()) {
    throw EmptyDeploymentError("lattice index ranges produce no drone-BS");
  }
  std::vector<BasePosition> out;
  out.reserve(static_cast<std::size_t>(spec.a.size()) * spec.b.size() * spec.c.size());
  for (int a = spec.a.lo; a <= spec.a.hi; ++a) {
    for (int b = spec.b.lo; b <= spec.b.hi; ++b) {
      for (int c = spec.c.lo; c <= spec.c.hi; ++c) {
        const LatticeIndex idx{a, b, c};
        out.push_back({idx, lattice_point(spec, idx)});
      }
    }
  }
  return out;
}

struct NeighborDistances {
  double hex_face;     // across a hexagonal face: sqrt(6) R
  double square_face;  // across a square face: 2 sqrt(2) R
};

inline NeighborDistances neighbor_distances(double edge_length) {
  detail::require(edge_length > 0.0, "edge length must be > 0");
  return {std::sqrt(6.0) * edge_length, 2.0 * std::sqrt(2.0) * edge_length};
}

/// Index of the closest station; the lowest index wins exact ties.
inline std::size_t nearest_cell(const Vec3& point, std::span<const BasePosition> positions) {
  detail::require(!positions.empty(), "nearest_cell needs at least one station");
  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < positions.size(); ++n) {
    const double d2 = squared_norm(point - positions[n].position);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = n;
    }
  }
  return best;
}

/// True when every position equals the closed form of its index triple for
/// `spec` (relative tolerance on the lattice scale).
inline bool matches_spec(const LatticeSpec& spec, std::span<const BasePosition> positions,
                         double rel_tol = 1e-9) {
  const double scale = spec.edge_length * (1.0 + norm(spec.reference) / spec.edge_length);
  for (const auto& p : positions) {
    if (distance(p.position, lattice_point(spec, p.index)) > rel_tol * scale) return false;
  }
  return true;
}

}  // namespace aether3d
