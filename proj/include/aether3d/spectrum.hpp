#pragma once

// Integer frequency reuse on the truncated-octahedron lattice.
//
// A co-channel cell reached through hexagonal faces sits at lattice
// coordinate n = (n1, n2, n3); one reached through square faces at m. With
//   Q(t) = 3 (t1^2 + t2^2 + t3^2) - 2 (t1 t2 + t1 t3 + t2 t3)
// the reuse factor must satisfy q^2 = Q(n)^3 / 27 = Q(m)^3 / 64, and the
// reuse distances are D = R sqrt(2 Q(.)). Everything here is exact integer
// arithmetic; distances are derived afterwards.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "aether3d/error.hpp"
#include "aether3d/lattice.hpp"

namespace aether3d {

using Triple = std::array<std::int64_t, 3>;

struct ReuseSolution {
  std::int64_t q = 1;
  Triple hex_triple{1, 0, 0};
  Triple square_triple{1, 1, 0};
  double hex_distance = 0.0;     // D_l, meters
  double square_distance = 0.0;  // D_u, meters
};

inline std::int64_t reuse_quadratic_form(const Triple& t) {
  return 3 * (t[0] * t[0] + t[1] * t[1] + t[2] * t[2]) - 2 * (t[0] * t[1] + t[0] * t[2] + t[1] * t[2]);
}

namespace detail {

inline std::optional<std::int64_t> exact_sqrt(std::int64_t v) {
  if (v < 0) return std::nullopt;
  auto r = static_cast<std::int64_t>(std::llround(std::sqrt(static_cast<long double>(v))));
  while (r > 0 && r * r > v) --r;
  while ((r + 1) * (r + 1) <= v) ++r;
  if (r * r != v) return std::nullopt;
  return r;
}

/// q with q^2 = Q^3 / divisor, if it is a positive integer.
inline std::optional<std::int64_t> reuse_from_form(std::int64_t form, std::int64_t divisor) {
  if (form <= 0) return std::nullopt;
  const std::int64_t cube = form * form * form;
  if (cube % divisor != 0) return std::nullopt;
  return exact_sqrt(cube / divisor);
}

inline std::int64_t l1(const Triple& t) { return std::abs(t[0]) + std::abs(t[1]) + std::abs(t[2]); }

/// Witness preference: smallest L1 norm, then lexicographically largest.
inline bool better_witness(const Triple& cand, const Triple& current) {
  if (l1(cand) != l1(current)) return l1(cand) < l1(current);
  return cand > current;
}

}  // namespace detail

inline std::optional<std::int64_t> reuse_from_hex_triple(const Triple& n) {
  return detail::reuse_from_form(reuse_quadratic_form(n), 27);
}

inline std::optional<std::int64_t> reuse_from_square_triple(const Triple& m) {
  return detail::reuse_from_form(reuse_quadratic_form(m), 64);
}

inline double reuse_distance(const Triple& t, double edge_length) {
  return edge_length * std::sqrt(2.0 * static_cast<double>(reuse_quadratic_form(t)));
}

inline ReuseSolution make_reuse_solution(const Triple& hex, const Triple& square, double edge_length) {
  const auto qn = reuse_from_hex_triple(hex);
  const auto qm = reuse_from_square_triple(square);
  detail::require(qn && qm && *qn == *qm, "witness triples do not yield the same integer reuse factor");
  return {*qn, hex, square, reuse_distance(hex, edge_length), reuse_distance(square, edge_length)};
}

/// Every q <= q_max admitting both a hexagonal and a square witness with
/// components in [-search_bound, search_bound], ascending in q.
inline std::vector<ReuseSolution> enumerate_reuse_factors(std::int64_t q_max, std::int64_t search_bound,
                                                          double edge_length = 1.0) {
  detail::require(q_max >= 1, "q_max must be >= 1");
  detail::require(search_bound >= 1 && search_bound <= 1000, "search_bound must be in [1, 1000]");
  detail::require(edge_length > 0.0, "edge length must be > 0");

  std::map<std::int64_t, Triple> hex;
  std::map<std::int64_t, Triple> square;
  const auto keep = [](std::map<std::int64_t, Triple>& into, std::int64_t q, const Triple& t) {
    auto it = into.find(q);
    if (it == into.end()) {
      into.emplace(q, t);
    } else if (detail::better_witness(t, it->second)) {
      it->second = t;
    }
  };
  const std::int64_t B = search_bound;
  for (std::int64_t i = -B; i <= B; ++i) {
    for (std::int64_t j = -B; j <= B; ++j) {
      for (std::int64_t k = -B; k <= B; ++k) {
        const Triple t{i, j, k};
        if (auto q = reuse_from_hex_triple(t); q && *q <= q_max) keep(hex, *q, t);
        if (auto q = reuse_from_square_triple(t); q && *q <= q_max) keep(square, *q, t);
      }
    }
  }

  std::vector<ReuseSolution> out;
  for (const auto& [q, n] : hex) {
    auto it = square.find(q);
    if (it == square.end()) continue;
    out.push_back(make_reuse_solution(n, it->second, edge_length));
  }
  return out;
}

/// Frequency groups of a deployment. For q = 1 every station shares one
/// band; for q > 1 stations are colored by their lattice coordinate modulo
/// the cluster sublattice spanned by the permutations of the hexagonal
/// witness.
struct CochannelPlan {
  std::int64_t q = 1;
  ReuseSolution solution;
  std::vector<int> color;                     // per station
  std::vector<std::vector<std::size_t>> groups;  // station indices per color, ascending
};

namespace detail {

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t d = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --d;
  return d;
}

/// Upper-triangular basis (rows) of the integer lattice spanned by `gens`.
inline std::array<Triple, 3> hermite_basis(std::vector<Triple> gens) {
  std::array<Triple, 3> basis{};
  for (int col = 0; col < 3; ++col) {
    // gcd-reduce column `col` across the remaining generators
    for (;;) {
      std::size_t pivot = gens.size();
      for (std::size_t r = 0; r < gens.size(); ++r) {
        if (gens[r][col] == 0) continue;
        if (pivot == gens.size() || std::abs(gens[r][col]) < std::abs(gens[pivot][col])) pivot = r;
      }
      if (pivot == gens.size()) {
        throw ValidationError("reuse witness permutations do not span a full-rank sublattice");
      }
      bool reduced = true;
      for (std::size_t r = 0; r < gens.size(); ++r) {
        if (r == pivot || gens[r][col] == 0) continue;
        const std::int64_t f = floor_div(gens[r][col], gens[pivot][col]);
        for (int c = 0; c < 3; ++c) gens[r][c] -= f * gens[pivot][c];
        if (gens[r][col] != 0) reduced = false;
      }
      if (reduced) {
        Triple row = gens[pivot];
        if (row[col] < 0) {
          for (auto& v : row) v = -v;
        }
        basis[col] = row;
        gens.erase(gens.begin() + static_cast<std::ptrdiff_t>(pivot));
        break;
      }
    }
  }
  return basis;
}

}  // namespace detail

/// Residue class of `p` modulo the sublattice with upper-triangular `basis`,
/// as an integer in [0, index).
inline std::int64_t residue_color(const std::array<Triple, 3>& basis, Triple p) {
  for (int col = 0; col < 3; ++col) {
    const std::int64_t f = detail::floor_div(p[col], basis[col][col]);
    for (int c = 0; c < 3; ++c) p[c] -= f * basis[col][c];
  }
  return (p[0] * basis[1][1] + p[1]) * basis[2][2] + p[2];
}

inline CochannelPlan plan_cochannel(const ReuseSolution& solution, const LatticeSpec& spec,
                                    std::span<const BasePosition> positions) {
  detail::require(solution.q >= 1, "reuse factor must be >= 1");
  if (!matches_spec(spec, positions)) {
    throw ValidationError("station positions do not belong to the given lattice spec");
  }
  CochannelPlan plan;
  plan.q = solution.q;
  plan.solution = solution;
  plan.color.assign(positions.size(), 0);

  if (solution.q == 1) {
    plan.groups.emplace_back();
    for (std::size_t n = 0; n < positions.size(); ++n) plan.groups.front().push_back(n);
    return plan;
  }

  std::vector<Triple> gens;
  Triple w = solution.hex_triple;
  std::sort(w.begin(), w.end());
  do {
    gens.push_back(w);
  } while (std::next_permutation(w.begin(), w.end()));
  const auto basis = detail::hermite_basis(gens);
  const std::int64_t index = basis[0][0] * basis[1][1] * basis[2][2];
  if (index != solution.q) {
    throw ValidationError("hexagonal witness does not tile clusters of q cells");
  }

  plan.groups.assign(static_cast<std::size_t>(solution.q), {});
  for (std::size_t n = 0; n < positions.size(); ++n) {
    const auto& i = positions[n].index;
    const auto c = residue_color(basis, {i.a, i.b, i.c});
    plan.color[n] = static_cast<int>(c);
    plan.groups[static_cast<std::size_t>(c)].push_back(n);
  }
  return plan;
}

/// Stations sharing the reference station's band, excluding the reference.
inline std::vector<std::size_t> cochannel_set(const ReuseSolution& solution, const LatticeSpec& spec,
                                              std::span<const BasePosition> positions,
                                              std::size_t reference) {
  detail::require(reference < positions.size(), "reference station out of range");
  const auto plan = plan_cochannel(solution, spec, positions);
  std::vector<std::size_t> out;
  for (std::size_t n : plan.groups[static_cast<std::size_t>(plan.color[reference])]) {
    if (n != reference) out.push_back(n);
  }
  return out;
}

/// Reuse solution for `q` from the default enumeration, if feasible.
inline std::optional<ReuseSolution> find_reuse_solution(std::int64_t q, double edge_length,
                                                        std::int64_t search_bound = 5) {
  for (const auto& s : enumerate_reuse_factors(q, search_bound, edge_length)) {
    if (s.q == q) return s;
  }
  return std::nullopt;
}

}  // namespace aether3d
