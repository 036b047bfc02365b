#pragma once

#include <array>
#include <cmath>

#include "aether3d/error.hpp"

namespace aether3d {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr double operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
  constexpr double& operator[](int axis) { return axis == 0 ? x : (axis == 1 ? y : z); }

  constexpr Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  constexpr Vec3& operator-=(const Vec3& o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }

  friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
  friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
  friend constexpr Vec3 operator*(double s, const Vec3& v) { return {s * v.x, s * v.y, s * v.z}; }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr double squared_norm(const Vec3& v) { return dot(v, v); }
inline double norm(const Vec3& v) { return std::sqrt(squared_norm(v)); }
inline double distance(const Vec3& a, const Vec3& b) { return norm(a - b); }

/// Axis-aligned region of space, in meters.
struct Box {
  Vec3 lo;
  Vec3 hi;

  constexpr double extent(int axis) const { return hi[axis] - lo[axis]; }
  constexpr double volume() const { return extent(0) * extent(1) * extent(2); }
  constexpr Vec3 center() const { return 0.5 * (lo + hi); }
  constexpr bool contains(const Vec3& p) const {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y && p.z >= lo.z && p.z <= hi.z;
  }

  void validate() const {
    for (int axis = 0; axis < 3; ++axis) {
      detail::require(std::isfinite(lo[axis]) && std::isfinite(hi[axis]) && extent(axis) > 0.0,
                      "box must have positive extent on every axis");
    }
  }
};

}  // namespace aether3d
