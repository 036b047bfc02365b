#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "aether3d/grid.hpp"
#include "aether3d/lattice.hpp"

using namespace aether3d;

namespace {

// Independent closed form of the station position.
Vec3 closed_form(double R, Vec3 ref, int a, int b, int c) {
  const double s = std::sqrt(2.0) * R;
  return {ref.x + s * (a + b - c), ref.y + s * (-a + b + c), ref.z + s * (a - b + c)};
}

}  // namespace

TEST(Lattice, DefaultDeploymentHas18Stations) {
  const auto spec = LatticeSpec::defaults();
  const auto pos = generate_positions(spec);
  ASSERT_EQ(pos.size(), 18u);
  std::size_t n = 0;
  for (int a = -1; a <= 1; ++a) {
    for (int b = -1; b <= 1; ++b) {
      for (int c = 0; c <= 1; ++c, ++n) {
        EXPECT_EQ(pos[n].index, (LatticeIndex{a, b, c}));
        const Vec3 want = closed_form(400.0, {1500.0, 1500.0, 1500.0}, a, b, c);
        EXPECT_NEAR(pos[n].position.x, want.x, 1e-9);
        EXPECT_NEAR(pos[n].position.y, want.y, 1e-9);
        EXPECT_NEAR(pos[n].position.z, want.z, 1e-9);
      }
    }
  }
  EXPECT_TRUE(matches_spec(spec, pos));
}

TEST(Lattice, ReferenceIndexSitsAtReference) {
  LatticeSpec spec;
  spec.a = {0, 0};
  spec.b = {0, 0};
  spec.c = {0, 0};
  const auto pos = generate_positions(spec);
  ASSERT_EQ(pos.size(), 1u);
  EXPECT_EQ(pos[0].position, spec.reference);
}

TEST(Lattice, NeighborDistancesFromBruteForce) {
  // Distances from the origin to every lattice point in a block; the two
  // smallest distinct values must be the face-neighbor distances.
  for (double R : {1.0, 400.0, 1234.5}) {
    std::set<long long> seen;
    std::vector<double> d;
    for (int a = -3; a <= 3; ++a) {
      for (int b = -3; b <= 3; ++b) {
        for (int c = -3; c <= 3; ++c) {
          if (a == 0 && b == 0 && c == 0) continue;
          d.push_back(norm(lattice_offset(R, {a, b, c})));
        }
      }
    }
    std::sort(d.begin(), d.end());
    const double first = d.front();
    const auto second = *std::find_if(d.begin(), d.end(), [&](double x) { return x > first * (1 + 1e-9); });
    const auto nd = neighbor_distances(R);
    EXPECT_NEAR(first / nd.hex_face, 1.0, 1e-12);
    EXPECT_NEAR(second / nd.square_face, 1.0, 1e-12);
    EXPECT_NEAR(nd.hex_face, std::sqrt(6.0) * R, 1e-9 * R);
    EXPECT_NEAR(nd.square_face, 2.0 * std::sqrt(2.0) * R, 1e-9 * R);
    const auto n_hex = std::count_if(d.begin(), d.end(), [&](double x) { return std::abs(x - first) < 1e-9 * R; });
    const auto n_sq = std::count_if(d.begin(), d.end(), [&](double x) { return std::abs(x - second) < 1e-9 * R; });
    EXPECT_EQ(n_hex, 8);
    EXPECT_EQ(n_sq, 6);
  }
}

TEST(Lattice, DeploymentNearestNeighborDistances) {
  const auto pos = generate_positions(LatticeSpec::defaults());
  std::set<double> seen;
  const auto nd = neighbor_distances(400.0);
  double min_d = 1e300;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    for (std::size_t j = i + 1; j < pos.size(); ++j) min_d = std::min(min_d, distance(pos[i].position, pos[j].position));
  }
  EXPECT_NEAR(min_d / nd.hex_face, 1.0, 1e-9);
}

TEST(Lattice, CellVolumeMatchesTruncatedOctahedron) {
  // The primitive cell of the center lattice has the volume of one cell.
  const double R = 400.0;
  const Vec3 e1 = lattice_offset(R, {1, 0, 0});
  const Vec3 e2 = lattice_offset(R, {0, 1, 0});
  const Vec3 e3 = lattice_offset(R, {0, 0, 1});
  const double det = e1.x * (e2.y * e3.z - e2.z * e3.y) - e1.y * (e2.x * e3.z - e2.z * e3.x) +
                     e1.z * (e2.x * e3.y - e2.y * e3.x);
  EXPECT_NEAR(std::abs(det), 8.0 * std::sqrt(2.0) * R * R * R, 1e-6);
}

TEST(Lattice, TessellationLabelsEveryVoxelOnce) {
  const auto pos = generate_positions(LatticeSpec::defaults());
  const VoxelGrid grid(LatticeSpec::defaults().bounding_box, {24, 24, 24});
  std::vector<int> count(pos.size(), 0);
  for (std::size_t v = 0; v < grid.size(); ++v) {
    const Vec3 p = grid.center(v);
    const auto label = nearest_cell(p, pos);
    ASSERT_LT(label, pos.size());
    ++count[label];
    // linear-scan oracle
    double best = 1e300;
    for (const auto& b : pos) best = std::min(best, distance(p, b.position));
    EXPECT_NEAR(distance(p, pos[label].position), best, 1e-9);
  }
  int total = 0;
  for (int c : count) total += c;
  EXPECT_EQ(static_cast<std::size_t>(total), grid.size());
}

TEST(Lattice, NearestCellTieGoesToLowestIndex) {
  std::vector<BasePosition> pos{{{0, 0, 0}, {-1.0, 0.0, 0.0}}, {{1, 0, 0}, {1.0, 0.0, 0.0}}};
  EXPECT_EQ(nearest_cell({0.0, 5.0, 0.0}, pos), 0u);
}

TEST(Lattice, EmptyRangeIsRejected) {
  LatticeSpec spec;
  spec.c = {1, 0};
  EXPECT_THROW(generate_positions(spec), EmptyDeploymentError);
}

TEST(Lattice, NonPositiveEdgeIsRejected) {
  LatticeSpec spec;
  spec.edge_length = 0.0;
  EXPECT_THROW(generate_positions(spec), ValidationError);
  spec.edge_length = -5.0;
  EXPECT_THROW(generate_positions(spec), ValidationError);
}

TEST(Lattice, MatchesSpecDetectsMovedStation) {
  const auto spec = LatticeSpec::defaults();
  auto pos = generate_positions(spec);
  pos[3].position.x += 1.0;
  EXPECT_FALSE(matches_spec(spec, pos));
}

TEST(Grid, VolumeAndIndexing) {
  const VoxelGrid g(Box{{0, 0, 0}, {30, 20, 10}}, {3, 4, 5});
  EXPECT_EQ(g.size(), 60u);
  EXPECT_NEAR(g.voxel_volume() * static_cast<double>(g.size()), 6000.0, 1e-9);
  for (std::size_t v = 0; v < g.size(); ++v) {
    const auto c = g.coords(v);
    EXPECT_EQ(g.index(c[0], c[1], c[2]), v);
  }
  EXPECT_EQ(g.center(0), (Vec3{5.0, 2.5, 1.0}));
  EXPECT_THROW(VoxelGrid(Box{{0, 0, 0}, {1, 1, 1}}, {1, 2, 2}), ValidationError);
}
