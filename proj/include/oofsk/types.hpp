#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace oofsk {

// Receiver-side channel knowledge: coherent = realized fading known,
// noncoherent = only the fading statistics known.
enum class Scenario { kCoherent, kNoncoherent };

inline const char* to_string(Scenario s) {
  return s == Scenario::kCoherent ? "coherent" : "noncoherent";
}

// Combined per-tone energies R_m = sum_l |Y_{l,m}|^2, length M.
using EnergyVector = std::vector<double>;

// M orthogonal tones plus an off signal. A tone is sent with probability
// v/M each, the off signal with probability 1-v. Average symbol energy over
// noise density is 10^(snr_db/10); the peak power is that divided by v.
struct ModulationSpec {
  int num_tones = 2;       // M
  double duty_cycle = 1.0; // v in (0, 1]
  double snr_db = 0.0;

  double snr_linear() const { return std::pow(10.0, snr_db / 10.0); }
  double peak_power() const { return snr_linear() / duty_cycle; }     // A^2
  double peak_amplitude() const { return std::sqrt(peak_power()); }   // A

  void validate() const {
    if (num_tones < 2) throw std::invalid_argument("ModulationSpec: num_tones must be >= 2");
    if (!(duty_cycle > 0.0) || duty_cycle > 1.0)
      throw std::invalid_argument("ModulationSpec: duty_cycle must lie in (0, 1]");
    if (std::isnan(snr_db)) throw std::invalid_argument("ModulationSpec: snr_db is NaN");
  }
};

// L receive antennas with per-antenna Rician fading h_l ~ CN(d_l, sigma^2),
// normalized so E|h_l|^2 = 1: sigma^2 = 1/(1+K), |d_l|^2 = K/(1+K).
// correlation_rho = 0 means independent antennas; otherwise the scattered
// components are equicorrelated with coefficient rho.
struct AntennaChannelSpec {
  int num_antennas = 1;        // L
  double rician_k = 0.0;       // K = |d|^2 / sigma^2, per antenna
  double correlation_rho = 0.0;

  bool independent() const { return correlation_rho == 0.0; }

  double scatter_variance() const {  // sigma^2
    if (std::isinf(rician_k)) return 0.0;
    return 1.0 / (1.0 + rician_k);
  }
  double los_amplitude() const {     // |d_l|
    if (std::isinf(rician_k)) return 1.0;
    return std::sqrt(rician_k / (1.0 + rician_k));
  }
  double total_los_power() const {   // s^2 = sum_l |d_l|^2
    return num_antennas * (std::isinf(rician_k) ? 1.0 : rician_k / (1.0 + rician_k));
  }

  void validate() const {
    if (num_antennas < 1) throw std::invalid_argument("AntennaChannelSpec: num_antennas must be >= 1");
    if (std::isnan(rician_k) || rician_k < 0.0)
      throw std::invalid_argument("AntennaChannelSpec: rician_k must be >= 0");
    if (!(correlation_rho >= 0.0) || correlation_rho >= 1.0)
      throw std::invalid_argument("AntennaChannelSpec: correlation_rho must lie in [0, 1)");
  }
};

}  // namespace oofsk
