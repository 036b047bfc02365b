#pragma once

// Spatial density of drone-UEs: Gaussian kernel density estimate with
// per-axis bandwidths picked by leave-one-out likelihood, plus the
// truncated-Gaussian ground truth used for synthetic scenarios.
//
// Bandwidths are variances (m^2): the kernel is
//   (2 pi)^-3/2 (hx hy hz)^-1/2 exp(-[dx^2/(2hx) + dy^2/(2hy) + dz^2/(2hz)])
// which integrates to one over R^3.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "aether3d/error.hpp"
#include "aether3d/geometry.hpp"
#include "aether3d/grid.hpp"

namespace aether3d {

struct Bandwidth {
  double hx = 1e4;
  double hy = 1e4;
  double hz = 1e4;

  static Bandwidth symmetric(double h) { return {h, h, h}; }
  double operator[](int axis) const { return axis == 0 ? hx : (axis == 1 ? hy : hz); }
  bool positive() const { return hx > 0.0 && hy > 0.0 && hz > 0.0; }
  friend bool operator==(const Bandwidth&, const Bandwidth&) = default;
};

struct SampleSet {
  std::vector<Vec3> points;
  double window_seconds = 0.0;  // reporting period T, informational

  std::size_t size() const { return points.size(); }
};

namespace detail {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Probability mass of N(mean, var) inside [lo, hi].
inline double interval_mass(double mean, double var, double lo, double hi) {
  const double s = std::sqrt(var);
  return normal_cdf((hi - mean) / s) - normal_cdf((lo - mean) / s);
}

inline double log_sum_exp(std::span<const double> v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - m);
  return m + std::log(acc);
}

}  // namespace detail

/// Gaussian KDE renormalized to integrate to one over its box.
class DensityModel {
 public:
  DensityModel() = default;

  DensityModel(SampleSet samples, Bandwidth h, Box box)
      : samples_(std::move(samples)), h_(h), box_(box) {
    detail::require(!samples_.points.empty(), "density model needs at least one sample");
    detail::require(h_.positive(), "bandwidths must be > 0");
    box_.validate();
    kernel_scale_ = 1.0 / std::sqrt(std::pow(2.0 * std::numbers::pi, 3) * h_.hx * h_.hy * h_.hz);
    double inside = 0.0;
    for (const auto& p : samples_.points) {
      double mass = 1.0;
      for (int a = 0; a < 3; ++a) mass *= detail::interval_mass(p[a], h_[a], box_.lo[a], box_.hi[a]);
      inside += mass;
    }
    inside /= static_cast<double>(samples_.size());
    detail::require(inside > 0.0, "kernel mixture has no mass inside the box");
    normalization_ = 1.0 / inside;
  }

  /// Untruncated mixture (1/L) sum_i K_h(p - X_i).
  double mixture(const Vec3& p) const {
    double acc = 0.0;
    for (const auto& s : samples_.points) {
      const Vec3 d = p - s;
      acc += std::exp(-(d.x * d.x / (2.0 * h_.hx) + d.y * d.y / (2.0 * h_.hy) + d.z * d.z / (2.0 * h_.hz)));
    }
    return kernel_scale_ * acc / static_cast<double>(samples_.size());
  }

  /// f-hat at p (1/m^3); zero outside the box.
  double operator()(const Vec3& p) const { return box_.contains(p) ? normalization_ * mixture(p) : 0.0; }

  /// f-hat at every voxel center, using per-axis kernel tables.
  std::vector<double> evaluate_on_grid(const VoxelGrid& grid) const {
    const std::size_t L = samples_.size();
    std::array<std::vector<double>, 3> tables;
    for (int a = 0; a < 3; ++a) {
      const auto centers = grid.axis_centers(a);
      auto& t = tables[static_cast<std::size_t>(a)];
      t.resize(centers.size() * L);
      for (std::size_t i = 0; i < centers.size(); ++i) {
        for (std::size_t s = 0; s < L; ++s) {
          const double d = centers[i] - samples_.points[s][a];
          t[i * L + s] = std::exp(-d * d / (2.0 * h_[a]));
        }
      }
    }
    const auto [nx, ny, nz] = grid.resolution;
    const double scale = normalization_ * kernel_scale_ / static_cast<double>(L);
    std::vector<double> out(grid.size());
    std::vector<double> xy(L);
    for (int ix = 0; ix < nx; ++ix) {
      for (int iy = 0; iy < ny; ++iy) {
        for (std::size_t s = 0; s < L; ++s) xy[s] = tables[0][ix * L + s] * tables[1][iy * L + s];
        for (int iz = 0; iz < nz; ++iz) {
          const double* tz = &tables[2][static_cast<std::size_t>(iz) * L];
          double acc = 0.0;
          for (std::size_t s = 0; s < L; ++s) acc += xy[s] * tz[s];
          out[grid.index(ix, iy, iz)] = scale * acc;
        }
      }
    }
    return out;
  }

  const SampleSet& samples() const { return samples_; }
  const Bandwidth& bandwidth() const { return h_; }
  const Box& box() const { return box_; }
  double normalization() const { return normalization_; }

 private:
  SampleSet samples_;
  Bandwidth h_;
  Box box_;
  double kernel_scale_ = 0.0;
  double normalization_ = 1.0;
};

/// Negative mean leave-one-out log-likelihood of the untruncated KDE.
/// Returns +infinity when some held-out density vanishes.
inline double loocv_score(const SampleSet& samples, const Bandwidth& h) {
  const std::size_t L = samples.size();
  detail::require(L >= 2, "leave-one-out scoring needs at least two samples");
  detail::require(h.positive(), "bandwidths must be > 0");
  const double log_scale = -0.5 * (3.0 * std::log(2.0 * std::numbers::pi) + std::log(h.hx) + std::log(h.hy) +
                                   std::log(h.hz)) -
                           std::log(static_cast<double>(L - 1));
  std::vector<double> exponents(L - 1);
  double total = 0.0;
  for (std::size_t j = 0; j < L; ++j) {
    std::size_t k = 0;
    for (std::size_t i = 0; i < L; ++i) {
      if (i == j) continue;
      const Vec3 d = samples.points[j] - samples.points[i];
      exponents[k++] = -(d.x * d.x / (2.0 * h.hx) + d.y * d.y / (2.0 * h.hy) + d.z * d.z / (2.0 * h.hz));
    }
    total += log_scale + detail::log_sum_exp(exponents);
  }
  const double score = -total / static_cast<double>(L);
  return std::isfinite(score) ? score : std::numeric_limits<double>::infinity();
}

/// `count` symmetric triples log-spaced over [lo, hi] m^2.
inline std::vector<Bandwidth> default_bandwidth_candidates(std::size_t count = 15, double lo = 1e2,
                                                           double hi = 1e6) {
  detail::require(count >= 1 && lo > 0.0 && hi >= lo, "invalid bandwidth candidate range");
  std::vector<Bandwidth> out;
  for (std::size_t i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    out.push_back(Bandwidth::symmetric(lo * std::pow(hi / lo, t)));
  }
  return out;
}

struct BandwidthSelection {
  DensityModel model;
  std::size_t chosen = 0;
  std::vector<double> scores;  // one per candidate
};

/// Leave-one-out likelihood sweep; the first candidate wins ties.
inline BandwidthSelection select_bandwidth_detailed(const SampleSet& samples, std::span<const Bandwidth> candidates,
                                                    const Box& box) {
  detail::require(!candidates.empty(), "bandwidth candidate list is empty");
  BandwidthSelection out;
  out.scores.reserve(candidates.size());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double s = loocv_score(samples, candidates[i]);
    out.scores.push_back(s);
    if (s < best) {
      best = s;
      out.chosen = i;
    }
  }
  out.model = DensityModel(samples, candidates[out.chosen], box);
  return out;
}

inline DensityModel select_bandwidth(const SampleSet& samples, std::span<const Bandwidth> candidates,
                                     const Box& box) {
  return select_bandwidth_detailed(samples, candidates, box).model;
}

/// Componentwise Gaussian restricted to a box.
struct TruncatedGaussianSpec {
  Vec3 mean{1000.0, 1000.0, 1000.0};
  Vec3 stddev{600.0, 600.0, 600.0};
  Box box{{0.0, 0.0, 0.0}, {3000.0, 3000.0, 3000.0}};
  double drift_m_per_min = 10.0;  // nu

  void validate() const {
    for (int a = 0; a < 3; ++a) detail::require(stddev[a] > 0.0, "truncated Gaussian stddev must be > 0");
    box.validate();
  }

  /// Same distribution after the mean moved by nu * minutes on every axis.
  TruncatedGaussianSpec drifted(double minutes) const {
    TruncatedGaussianSpec out = *this;
    const double shift = drift_m_per_min * minutes;
    out.mean += Vec3{shift, shift, shift};
    return out;
  }

  double pdf(const Vec3& p) const {
    if (!box.contains(p)) return 0.0;
    double value = 1.0;
    for (int a = 0; a < 3; ++a) {
      const double s = stddev[a];
      const double z = (p[a] - mean[a]) / s;
      const double mass = detail::interval_mass(mean[a], s * s, box.lo[a], box.hi[a]);
      value *= std::exp(-0.5 * z * z) / (s * std::sqrt(2.0 * std::numbers::pi) * mass);
    }
    return value;
  }

  std::vector<double> evaluate_on_grid(const VoxelGrid& grid) const {
    std::vector<double> out(grid.size());
    for (std::size_t v = 0; v < out.size(); ++v) out[v] = pdf(grid.center(v));
    return out;
  }
};

/// L i.i.d. draws by rejecting componentwise Gaussian points outside the box.
inline SampleSet sample_truncated_gaussian(const TruncatedGaussianSpec& spec, std::size_t count,
                                           std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  SampleSet out;
  out.points.reserve(count);
  std::size_t attempts = 0;
  const std::size_t max_attempts = 1000 * count + 100000;
  while (out.points.size() < count) {
    if (++attempts > max_attempts) throw ValidationError("truncated Gaussian has negligible mass in the box");
    const Vec3 p{spec.mean.x + spec.stddev.x * normal(rng), spec.mean.y + spec.stddev.y * normal(rng),
                 spec.mean.z + spec.stddev.z * normal(rng)};
    if (spec.box.contains(p)) out.points.push_back(p);
  }
  return out;
}

/// Monte-Carlo estimate of the integrated squared error int_V (f-hat - f)^2
/// over `mc_points` uniform points of the truth's box.
inline double mise(const DensityModel& model, const TruncatedGaussianSpec& truth, std::size_t mc_points,
                   std::uint64_t seed = 1) {
  detail::require(mc_points > 0, "mc_points must be > 0");
  std::mt19937_64 rng(seed);
  const Box& box = truth.box;
  std::uniform_real_distribution<double> ux(box.lo.x, box.hi.x);
  std::uniform_real_distribution<double> uy(box.lo.y, box.hi.y);
  std::uniform_real_distribution<double> uz(box.lo.z, box.hi.z);
  double acc = 0.0;
  for (std::size_t i = 0; i < mc_points; ++i) {
    const Vec3 p{ux(rng), uy(rng), uz(rng)};
    const double e = model(p) - truth.pdf(p);
    acc += e * e;
  }
  return box.volume() * acc / static_cast<double>(mc_points);
}

/// MISE averaged over independent sample-set realizations drawn from the
/// truth, for a fixed bandwidth.
inline double mise_over_realizations(const TruncatedGaussianSpec& truth, std::size_t sample_count,
                                     const Bandwidth& h, std::size_t realizations, std::size_t mc_points,
                                     std::uint64_t seed) {
  detail::require(realizations > 0, "realizations must be > 0");
  double acc = 0.0;
  for (std::size_t r = 0; r < realizations; ++r) {
    const auto samples = sample_truncated_gaussian(truth, sample_count, seed + r);
    acc += mise(DensityModel(samples, h, truth.box), truth, mc_points, seed + 7919 * (r + 1));
  }
  return acc / static_cast<double>(realizations);
}

}  // namespace aether3d
