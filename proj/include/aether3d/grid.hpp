#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "aether3d/error.hpp"
#include "aether3d/geometry.hpp"

namespace aether3d {

/// Regular voxelization of a box; integrals use the midpoint rule on voxel
/// centers. Voxel index = (ix * ny + iy) * nz + iz.
struct VoxelGrid {
  Box box;
  std::array<int, 3> resolution{48, 48, 48};

  VoxelGrid() = default;
  VoxelGrid(const Box& b, std::array<int, 3> res) : box(b), resolution(res) { validate(); }

  void validate() const {
    box.validate();
    for (int n : resolution) detail::require(n >= 2, "grid resolution must be >= 2 per axis");
  }

  std::size_t size() const {
    return static_cast<std::size_t>(resolution[0]) * resolution[1] * resolution[2];
  }
  double spacing(int axis) const { return box.extent(axis) / resolution[static_cast<std::size_t>(axis)]; }
  double voxel_volume() const { return spacing(0) * spacing(1) * spacing(2); }

  double axis_center(int axis, int i) const { return box.lo[axis] + (i + 0.5) * spacing(axis); }

  std::vector<double> axis_centers(int axis) const {
    std::vector<double> out(static_cast<std::size_t>(resolution[static_cast<std::size_t>(axis)]));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = axis_center(axis, static_cast<int>(i));
    return out;
  }

  std::size_t index(int ix, int iy, int iz) const {
    return (static_cast<std::size_t>(ix) * resolution[1] + iy) * resolution[2] + iz;
  }

  std::array<int, 3> coords(std::size_t v) const {
    const int iz = static_cast<int>(v % resolution[2]);
    const std::size_t rest = v / resolution[2];
    const int iy = static_cast<int>(rest % resolution[1]);
    const int ix = static_cast<int>(rest / resolution[1]);
    return {ix, iy, iz};
  }

  Vec3 center(std::size_t v) const {
    const auto c = coords(v);
    return {axis_center(0, c[0]), axis_center(1, c[1]), axis_center(2, c[2])};
  }
};

}  // namespace aether3d
