#pragma once

#include <stdexcept>
#include <string>

namespace aether3d {

/// Bad input: configuration fields, preconditions, malformed files.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// Lattice index ranges that produce no drone-BS at all.
class EmptyDeploymentError : public ValidationError {
 public:
  explicit EmptyDeploymentError(const std::string& what) : ValidationError(what) {}
};

/// The association problem has no finite-latency solution (e.g. a voxel no
/// station can reach with a positive rate).
class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}

}  // namespace detail
}  // namespace aether3d
