#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "mecoff/errors.hpp"
#include "mecoff/rng.hpp"
#include "mecoff/task_graph.hpp"

namespace mecoff {

/// Radio and compute parameters of the device/server pair.
/// Defaults reproduce the reference simulation setup.
struct EnvParams {
  double bandwidth_hz = 2.0e6;        // W
  double noise_power_w = 1.0e-10;     // sigma^2
  double p_md_w = 0.1;                // device transmit power
  double p_ap_w = 1.0;                // access-point transmit power
  double antenna_gain = 4.11;         // A_d
  double carrier_hz = 915.0e6;        // f_c
  double distance_m = 20.0;           // d
  double pathloss_exp = 3.0;          // PL
  double rician_los_fraction = 0.6;   // LOS share of mean gain
  double ud_correlation = 0.7;        // uplink/downlink scatter correlation
  double f_edge_min_hz = 2.0e9;       // edge CPU frequency range
  double f_edge_max_hz = 50.0e9;
  double f_peak_hz = 0.01e9;          // device peak CPU frequency
  double kappa = 1.0e-26;             // switched capacitance
  double beta_e = 0.5;                // energy weight
  double beta_t = 0.5;                // time weight

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0)) throw ConfigError(std::string(name) + " must be positive");
    };
    positive(bandwidth_hz, "bandwidth_hz");
    positive(noise_power_w, "noise_power_w");
    positive(p_md_w, "p_md_w");
    positive(p_ap_w, "p_ap_w");
    positive(antenna_gain, "antenna_gain");
    positive(carrier_hz, "carrier_hz");
    positive(distance_m, "distance_m");
    positive(f_peak_hz, "f_peak_hz");
    positive(kappa, "kappa");
    if (pathloss_exp < 0.0) throw ConfigError("pathloss_exp must be non-negative");
    if (!(beta_e > 0.0 && beta_e < 1.0)) throw ConfigError("beta_e must lie in (0,1)");
    if (std::abs(beta_e + beta_t - 1.0) > 1e-12) throw ConfigError("beta_t must equal 1 - beta_e");
    if (rician_los_fraction < 0.0 || rician_los_fraction > 1.0)
      throw ConfigError("rician_los_fraction must lie in [0,1]");
    if (std::abs(ud_correlation) > 1.0) throw ConfigError("|ud_correlation| must be <= 1");
    if (!(f_edge_min_hz > 0.0) || f_edge_min_hz > f_edge_max_hz)
      throw ConfigError("f_edge range must satisfy 0 < min <= max");
    if (f_edge_min_hz <= f_peak_hz)
      throw ConfigError("edge CPU range must lie entirely above f_peak_hz");
  }
};

/// One realization of the environment: per-edge power gains (indexed in
/// TaskGraph edge order) plus the edge server CPU frequency drawn for this
/// epoch. Immutable after sampling.
struct EnvState {
  std::vector<double> h_up;
  std::vector<double> h_down;
  double f_edge_hz = 0.0;
};

/// Mean channel power gain under the free-space path loss model.
inline double mean_gain(const EnvParams& p) {
  const double wave = 3.0e8 / (4.0 * 3.14159265358979323846 * p.carrier_hz * p.distance_m);
  return p.antenna_gain * std::pow(wave, p.pathloss_exp);
}

/// Draws per-edge Rician gains and the edge CPU frequency.
///
/// Each uplink gain is |c|^2 for c = sqrt(g h̄) + s_u with a deterministic
/// line-of-sight term of power g·h̄ (g = rician_los_fraction) and complex
/// Gaussian scatter of power (1-g)·h̄. The downlink shares the LOS term and
/// its scatter is correlated with the uplink scatter at the complex-component
/// level with coefficient ud_correlation. Deterministic given the seed.
inline EnvState sample_state(const EnvParams& params, const TaskGraph& graph,
                             std::uint64_t seed) {
  Prng rng(seed);
  const double hbar = mean_gain(params);
  const double los_amp = std::sqrt(params.rician_los_fraction * hbar);
  // Scatter power splits evenly between real and imaginary components.
  const double scatter_sigma = std::sqrt((1.0 - params.rician_los_fraction) * hbar / 2.0);
  const double rho = params.ud_correlation;
  const double rho_orth = std::sqrt(std::max(0.0, 1.0 - rho * rho));

  EnvState state;
  state.h_up.reserve(graph.edge_count());
  state.h_down.reserve(graph.edge_count());
  for (std::size_t e = 0; e < graph.edge_count(); ++e) {
    const double su_re = scatter_sigma * rng.normal();
    const double su_im = scatter_sigma * rng.normal();
    const double w_re = scatter_sigma * rng.normal();
    const double w_im = scatter_sigma * rng.normal();
    const double sd_re = rho * su_re + rho_orth * w_re;
    const double sd_im = rho * su_im + rho_orth * w_im;
    const double cu_re = los_amp + su_re;
    const double cd_re = los_amp + sd_re;
    state.h_up.push_back(cu_re * cu_re + su_im * su_im);
    state.h_down.push_back(cd_re * cd_re + sd_im * sd_im);
  }
  state.f_edge_hz = rng.uniform(params.f_edge_min_hz, params.f_edge_max_hz);
  return state;
}

/// Uplink data rate in bit/s for a given power gain.
inline double uplink_rate(const EnvParams& p, double gain) {
  return p.bandwidth_hz * std::log2(1.0 + p.p_md_w * gain / p.noise_power_w);
}

/// Downlink data rate in bit/s for a given power gain.
inline double downlink_rate(const EnvParams& p, double gain) {
  return p.bandwidth_hz * std::log2(1.0 + p.p_ap_w * gain / p.noise_power_w);
}

enum class TxDirection { up, down };

struct TxCost {
  double time_s = 0.0;
  double energy_j = 0.0;
};

/// Transmission time and device-side energy for moving `bits` at `rate`.
/// Only uplink costs the device energy; downlink power is paid by the AP.
inline TxCost tx_time_energy(const EnvParams& p, double bits, double rate, TxDirection dir) {
  if (bits <= 0.0) return {0.0, 0.0};
  if (!(rate > 0.0)) throw ZeroRate("transmission rate must be positive");
  const double t = bits / rate;
  return {t, dir == TxDirection::up ? t * p.p_md_w : 0.0};
}

}  // namespace mecoff
