#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "aether3d/error.hpp"
#include "aether3d/geometry.hpp"
#include "aether3d/lattice.hpp"
#include "aether3d/spectrum.hpp"

namespace aether3d {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

inline double dbm_per_hz_to_watt_per_hz(double dbm_per_hz) { return std::pow(10.0, (dbm_per_hz - 30.0) / 10.0); }

struct DroneBS;

/// Link gain kappa for a (point, station) pair; must lie in (0, 1].
using LinkGain = std::function<double(const Vec3&, const DroneBS&)>;

struct ChannelParams {
  double carrier_frequency_hz = 2e9;  // informational only
  double path_loss_exponent = 2.0;    // alpha
  double path_loss_constant = 1.42e-4;  // eta
  double noise_psd = 1e-20;          // W/Hz (-170 dBm/Hz)
  double channel_gain = 1.0;          // kappa when no link_gain is set
  double packet_bits = 1e4;           // beta
  int reuse_factor = 1;
  LinkGain link_gain;

  double gain(const Vec3& p, const DroneBS& bs) const;

  void validate() const {
    detail::require(path_loss_exponent > 0.0, "channel.path_loss_exponent must be > 0");
    detail::require(path_loss_constant > 0.0, "channel.path_loss_constant must be > 0");
    detail::require(noise_psd > 0.0, "channel.noise_psd must be > 0");
    detail::require(channel_gain > 0.0 && channel_gain <= 1.0, "channel.channel_gain must be in (0, 1]");
    detail::require(packet_bits > 0.0, "channel.packet_bits must be > 0");
    detail::require(reuse_factor >= 1, "channel.reuse_factor must be >= 1");
  }
};

struct DroneBS {
  std::size_t id = 0;
  Vec3 position;
  double tx_power_w = 0.5;        // P_n; zero switches the station off
  double bandwidth_hz = 1e7;      // B_n
  double backhaul_bps = 101e6;    // C_n
  double compute_speed = 1e14;    // omega_n
  int frequency_group = 0;

  void validate() const {
    detail::require(tx_power_w >= 0.0, "station tx_power_w must be >= 0");
    detail::require(bandwidth_hz > 0.0, "station bandwidth_hz must be > 0");
    detail::require(backhaul_bps > 0.0, "station backhaul_bps must be > 0");
    detail::require(compute_speed > 0.0, "station compute_speed must be > 0");
  }
};

inline double ChannelParams::gain(const Vec3& p, const DroneBS& bs) const {
  return link_gain ? link_gain(p, bs) : channel_gain;
}

/// Computation latency g(u) for u bits of load and its derivative g'(u).
/// Both take the station's compute constant; g must be non-decreasing.
struct ComputeModel {
  std::function<double(double bits, double speed)> latency;
  std::function<double(double bits, double speed)> derivative;

  /// g(u) = u^2 / omega
  static ComputeModel quadratic() {
    return {[](double u, double w) { return u * u / w; }, [](double u, double w) { return 2.0 * u / w; }};
  }
};

struct LatencyBreakdown {
  double transmission = 0.0;
  double backhaul = 0.0;
  double computation = 0.0;
  double total = 0.0;
};

/// eta kappa P (1 + d)^-alpha; finite at d = 0.
inline double received_power(const Vec3& point, const DroneBS& bs, const ChannelParams& params) {
  const double d = distance(point, bs.position);
  const double attenuation = params.path_loss_exponent == 2.0 ? 1.0 / ((1.0 + d) * (1.0 + d))
                                                              : std::pow(1.0 + d, -params.path_loss_exponent);
  return params.path_loss_constant * params.gain(point, bs) * bs.tx_power_w * attenuation;
}

inline double sinr(const Vec3& point, const DroneBS& serving, std::span<const DroneBS> interferers,
                   const ChannelParams& params) {
  double interference = 0.0;
  for (const auto& u : interferers) interference += received_power(point, u, params);
  return received_power(point, serving, params) / (interference + params.noise_psd * serving.bandwidth_hz);
}

/// Share of the FDMA bandwidth a visiting UE gets when the cell expects K
/// users. Cells with fewer than one expected user hand over the full band.
inline constexpr double kMinUsersPerCell = 1.0;

inline double per_ue_rate(const DroneBS& serving, double expected_users, double sinr_value) {
  detail::require(expected_users >= 0.0, "expected user count must be >= 0");
  return serving.bandwidth_hz / std::max(expected_users, kMinUsersPerCell) * std::log2(1.0 + sinr_value);
}

/// beta / R_n; +infinity when the rate is zero.
inline double transmission_latency(double rate_bps, const ChannelParams& params) {
  return rate_bps > 0.0 ? params.packet_bits / rate_bps : kInfinity;
}

inline double transmission_latency(const Vec3& point, const DroneBS& serving, std::span<const DroneBS> interferers,
                                   double expected_users, const ChannelParams& params) {
  return transmission_latency(per_ue_rate(serving, expected_users, sinr(point, serving, interferers, params)),
                              params);
}

inline double backhaul_latency(double expected_users, const DroneBS& serving, const ChannelParams& params) {
  return params.packet_bits * expected_users / serving.backhaul_bps;
}

inline double computation_latency(double expected_users, const DroneBS& serving, const ChannelParams& params,
                                  const ComputeModel& model = ComputeModel::quadratic()) {
  return model.latency(params.packet_bits * expected_users, serving.compute_speed);
}

inline LatencyBreakdown latency_breakdown(const Vec3& point, const DroneBS& serving,
                                          std::span<const DroneBS> interferers, double expected_users,
                                          const ChannelParams& params,
                                          const ComputeModel& model = ComputeModel::quadratic()) {
  LatencyBreakdown out;
  out.transmission = transmission_latency(point, serving, interferers, expected_users, params);
  out.backhaul = backhaul_latency(expected_users, serving, params);
  out.computation = computation_latency(expected_users, serving, params, model);
  out.total = out.transmission + out.backhaul + out.computation;
  return out;
}

/// Drone-BS fleet with the co-channel sets used for SINR.
struct Network {
  std::vector<DroneBS> stations;
  std::vector<std::vector<std::size_t>> interferers;  // per station
  ComputeModel compute = ComputeModel::quadratic();

  std::size_t size() const { return stations.size(); }

  std::vector<DroneBS> interferers_of(std::size_t n) const {
    std::vector<DroneBS> out;
    out.reserve(interferers[n].size());
    for (auto u : interferers[n]) out.push_back(stations[u]);
    return out;
  }

  double sinr_at(const Vec3& point, std::size_t n, const ChannelParams& params) const {
    double interference = 0.0;
    for (auto u : interferers[n]) interference += received_power(point, stations[u], params);
    return received_power(point, stations[n], params) /
           (interference + params.noise_psd * stations[n].bandwidth_hz);
  }

  void validate() const {
    detail::require(!stations.empty(), "network has no stations");
    detail::require(interferers.size() == stations.size(), "interferer table size mismatch");
    for (std::size_t n = 0; n < stations.size(); ++n) {
      stations[n].validate();
      for (auto u : interferers[n]) {
        detail::require(u < stations.size() && u != n, "invalid interferer index");
      }
    }
    detail::require(static_cast<bool>(compute.latency) && static_cast<bool>(compute.derivative),
                    "compute model needs both g and g'");
  }
};

/// Uniform per-station parameters; backhaul follows C_n = base + n * step
/// with n counted from 1.
struct StationDefaults {
  double tx_power_w = 0.5;
  double bandwidth_hz = 1e7;
  double backhaul_base_bps = 100e6;
  double backhaul_step_bps = 1e6;
  double compute_speed = 1e14;
};

/// Stations at the lattice positions, banded according to `plan`.
inline Network build_network(std::span<const BasePosition> positions, const CochannelPlan& plan,
                             const StationDefaults& defaults = {}) {
  detail::require(plan.color.size() == positions.size(), "co-channel plan does not match the deployment");
  Network net;
  net.stations.reserve(positions.size());
  for (std::size_t n = 0; n < positions.size(); ++n) {
    DroneBS bs;
    bs.id = n;
    bs.position = positions[n].position;
    bs.tx_power_w = defaults.tx_power_w;
    bs.bandwidth_hz = defaults.bandwidth_hz;
    bs.backhaul_bps = defaults.backhaul_base_bps + static_cast<double>(n + 1) * defaults.backhaul_step_bps;
    bs.compute_speed = defaults.compute_speed;
    bs.frequency_group = plan.color[n];
    net.stations.push_back(bs);
  }
  net.interferers.resize(positions.size());
  for (std::size_t n = 0; n < positions.size(); ++n) {
    for (auto u : plan.groups[static_cast<std::size_t>(plan.color[n])]) {
      if (u != n) net.interferers[n].push_back(u);
    }
  }
  return net;
}

}  // namespace aether3d
