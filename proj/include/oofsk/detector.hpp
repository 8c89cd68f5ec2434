#pragma once

// MAP decision machinery: the log-domain decision statistics g1/g2, the
// threshold constants T/T2 inverted numerically to tau/tau2, and the final
// argmax-plus-threshold detect rule. All likelihood comparisons happen in
// log domain: T contains e^xi with xi proportional to L*SNR*|h|^2, which
// overflows doubles near 40 dB SNR with a few antennas.

#include <cmath>
#include <limits>
#include <stdexcept>

#include "oofsk/specfun.hpp"
#include "oofsk/types.hpp"

namespace oofsk {

// Everything the detect rule needs for one scenario. noncentrality is
// xi = A^2 sum_l |h_l|^2 (coherent, realized fading) or A^2 sum_l |d_l|^2
// (noncoherent, statistics only). tone_variance is sigma_y^2 = A^2 sigma^2 + 1,
// fixed to 1 in coherent mode. threshold is tau = g^{-1}(T), precomputed;
// +infinity encodes the degenerate always-off rule.
struct DetectionParams {
  Scenario scenario = Scenario::kCoherent;
  double noncentrality = 0.0;
  double tone_variance = 1.0;
  int num_antennas = 1;   // L
  int num_tones = 2;      // M
  double duty_cycle = 1.0;
  double threshold = 0.0;
};

// ln g1(x) = -((L-1)/2) ln x + ln I_{L-1}(2 sqrt(x xi)). Strictly increasing
// in x for xi > 0.
inline double g1_log(double x, double xi, int L) {
  if (!(x > 0.0)) throw std::domain_error("g1_log: x must be > 0");
  if (!(xi > 0.0)) throw std::domain_error("g1_log: xi must be > 0");
  if (L < 1) throw std::domain_error("g1_log: L must be >= 1");
  return -0.5 * (L - 1) * std::log(x) + log_bessel_i(L - 1, 2.0 * std::sqrt(x * xi));
}

namespace detail {

// ln g2 with the xi^{(L-1)/2} factor divided out when xi = 0, matching the
// same reduction of ln T2 so the threshold comparison stays finite in the
// Rayleigh case.
inline double g2_log_raw(double x, double xi, double sigma_y_sq, int L) {
  const double tilt = x * (sigma_y_sq - 1.0) / sigma_y_sq;
  if (xi == 0.0)
    return tilt - (L - 1) * std::log(sigma_y_sq) - log_factorial(L - 1);
  return -0.5 * (L - 1) * std::log(x) + tilt +
         log_bessel_i(L - 1, 2.0 * std::sqrt(x * xi) / sigma_y_sq);
}

// Shared threshold inversion. Coherent thresholds are the sigma_y_sq = 1
// case. Returns +infinity for the degenerate prior-only always-off rule.
inline double invert_threshold(double xi, double sigma_y_sq, int L, int M, double v) {
  if (std::isnan(xi) || xi < 0.0) throw std::domain_error("threshold: xi must be >= 0");
  if (!(sigma_y_sq >= 1.0)) throw std::domain_error("threshold: sigma_y_sq must be >= 1");
  if (L < 1 || M < 2) throw std::domain_error("threshold: need L >= 1 and M >= 2");
  if (!(v > 0.0) || v > 1.0) throw std::domain_error("threshold: v must lie in (0, 1]");
  if (v == 1.0) return 0.0;  // T = 0 lies below inf g

  const double log_prior = std::log(M * (1.0 - v) / v);
  if (xi == 0.0) {
    // g2 reduces to a pure exponential tilt; invert in closed form.
    if (sigma_y_sq == 1.0)
      return log_prior > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    const double tau = sigma_y_sq / (sigma_y_sq - 1.0) *
                       (log_prior + L * std::log(sigma_y_sq));
    return std::max(0.0, tau);
  }

  const double log_t = log_prior + std::log(sigma_y_sq) + xi / sigma_y_sq +
                       0.5 * (L - 1) * std::log(xi) - log_factorial(L - 1);
  const double g_at_zero = 0.5 * (L - 1) * std::log(xi) -
                           (L - 1) * std::log(sigma_y_sq) - log_factorial(L - 1);
  if (log_t <= g_at_zero) return 0.0;

  auto g = [&](double x) { return g2_log_raw(x, xi, sigma_y_sq, L); };

  // Right bracket: coarse inversions of the large-argument behaviour
  // (g ~ 2 sqrt(x xi) when sigma_y_sq = 1, g ~ x (sigma_y_sq-1)/sigma_y_sq
  // otherwise), then doubling until g exceeds ln T.
  double hi = std::max(xi, 1.0);
  if (log_t > 0.0) {
    hi = std::max(hi, log_t * log_t / (4.0 * xi));
    if (sigma_y_sq > 1.0) hi = std::max(hi, log_t * sigma_y_sq / (sigma_y_sq - 1.0));
  }
  while (g(hi) <= log_t) hi *= 2.0;

  double lo = 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const double gm = g(mid);
    (gm < log_t ? lo : hi) = mid;
    if (hi - lo < 1e-10 && std::abs(gm - log_t) < 1e-9) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

// ln g2(x) for the noncoherent statistic; the exponential tilt
// x A^2 sigma^2 / sigma_y^2 distinguishes it from g1. At xi = 0 the Bessel
// factor degenerates and the analytic limit form is used (see detail).
inline double g2_log(double x, const DetectionParams& params) {
  if (params.scenario != Scenario::kNoncoherent)
    throw std::invalid_argument("g2_log: params must be noncoherent");
  if (!(x > 0.0)) throw std::domain_error("g2_log: x must be > 0");
  return detail::g2_log_raw(x, params.noncentrality, params.tone_variance, params.num_antennas);
}

// tau solving g1(tau) = T, T = M(1-v) e^xi xi^{(L-1)/2} / (v (L-1)!).
// Returns 0 when T falls at or below the x->0 limit of g1 (v = 1 included),
// +infinity for the xi = 0 deep-fade degenerate rule when the off-signal
// prior dominates.
inline double threshold_coherent(double xi, int L, int M, double v) {
  return detail::invert_threshold(xi, 1.0, L, M, v);
}

// tau2 solving g2(tau2) = T2, T2 = M(1-v) sigma_y^2 xi^{(L-1)/2}
// e^{xi/sigma_y^2} / (v Gamma(L)).
inline double threshold_noncoherent(double xi, double sigma_y_sq, int L, int M, double v) {
  return detail::invert_threshold(xi, sigma_y_sq, L, M, v);
}

// The detect rule: argmax index (1-based) if its energy clears the
// threshold, else 0 (off signal). Ties break to the lowest index.
inline int detect(const EnergyVector& energies, const DetectionParams& params) {
  int best = 0;
  const int m_count = static_cast<int>(energies.size());
  for (int m = 1; m < m_count; ++m)
    if (energies[m] > energies[best]) best = m;
  return energies[best] > params.threshold ? best + 1 : 0;
}

// Coherent detector inputs from the realized fading energy xi = A^2 sum|h_l|^2.
inline DetectionParams make_coherent_params(const ModulationSpec& spec, int num_antennas,
                                            double xi) {
  DetectionParams p;
  p.scenario = Scenario::kCoherent;
  p.noncentrality = xi;
  p.tone_variance = 1.0;
  p.num_antennas = num_antennas;
  p.num_tones = spec.num_tones;
  p.duty_cycle = spec.duty_cycle;
  p.threshold = threshold_coherent(xi, num_antennas, spec.num_tones, spec.duty_cycle);
  return p;
}

// Noncoherent detector inputs from channel statistics only: xi = A^2 s^2 and
// sigma_y^2 = A^2 sigma^2 + 1. Never sees a fading realization.
inline DetectionParams make_noncoherent_params(const ModulationSpec& spec,
                                               const AntennaChannelSpec& channel) {
  DetectionParams p;
  p.scenario = Scenario::kNoncoherent;
  p.noncentrality = spec.peak_power() * channel.total_los_power();
  p.tone_variance = spec.peak_power() * channel.scatter_variance() + 1.0;
  p.num_antennas = channel.num_antennas;
  p.num_tones = spec.num_tones;
  p.duty_cycle = spec.duty_cycle;
  p.threshold = threshold_noncoherent(p.noncentrality, p.tone_variance, p.num_antennas,
                                      p.num_tones, p.duty_cycle);
  return p;
}

}  // namespace oofsk
