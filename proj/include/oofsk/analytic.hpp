#pragma once

// Closed-form and quadrature evaluation of correct-detection and error
// probabilities: conditional and fading-averaged coherent results, and the
// noncoherent results. Every alternating series is paired with a direct
// quadrature twin that integrates the pre-expansion form; the twins serve as
// independent oracles for each other, and the series falls back to its twin
// automatically when binomial cancellation becomes catastrophic.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "oofsk/detector.hpp"
#include "oofsk/quadrature.hpp"
#include "oofsk/specfun.hpp"
#include "oofsk/types.hpp"

namespace oofsk {

// Parameters of the combined fading energy chi = sum_l |h_l|^2:
// per-antenna line-of-sight power adds up to s_sq, scattered variance is
// sigma_sq, giving a noncentral chi-square with 2L degrees of freedom.
struct ChannelEnergy {
  double chi = 0.0;
  double s_sq = 0.0;
  double sigma_sq = 1.0;
  int num_antennas = 1;
};

namespace detail {

inline constexpr double kSeriesRelTol = 1e-9;      // series correction integrals
inline constexpr double kQuadTwinRelTol = 1e-9;    // direct-quadrature twins
inline constexpr double kFadingRelTol = 1e-6;      // fading average
inline constexpr double kCancellationLimit = 1e8;  // series -> quadrature fallback

// ln pdf of the combined tone energy R_k given the tone was sent:
// noncentral chi-square with 2L degrees of freedom, noncentrality xi,
// per-tone complex variance sigma_y_sq (1 in the coherent case).
inline double log_tone_energy_pdf(double x, double xi, double sy2, int L) {
  if (std::isnan(x) || x < 0.0) return kNegInfinity;
  if (xi == 0.0) {
    if (x == 0.0) return L == 1 ? -std::log(sy2) : kNegInfinity;
    return (L - 1) * std::log(x) - x / sy2 - L * std::log(sy2) - log_factorial(L - 1);
  }
  if (x == 0.0) return L == 1 ? -std::log(sy2) - xi / sy2 : kNegInfinity;
  return -std::log(sy2) + 0.5 * (L - 1) * (std::log(x) - std::log(xi)) - (x + xi) / sy2 +
         log_bessel_i(L - 1, 2.0 * std::sqrt(x * xi) / sy2);
}

// ln of the binomial coefficient C(m, n).
inline double log_binomial(int m, int n) {
  return log_factorial(m) - log_factorial(n) - log_factorial(m - n);
}

// ln(1 - e^{-a}) for a >= 0.
inline double log1mexp(double a) {
  if (a <= 0.0) return kNegInfinity;
  return a > 0.6931471805599453 ? std::log1p(-std::exp(-a)) : std::log(-std::expm1(-a));
}

// ln of the full-range term J_{n,i} = int_0^inf x^i e^{-nx} f(x) dx with f the
// tone-energy pdf:
//   J = e^{-xi/sy2} (sy2)^i Gamma(i+L) / ((1+n sy2)^{i+L} Gamma(L))
//       * e^z F(-i, L; -z),   z = xi / (sy2 (1 + n sy2)).
inline double log_series_full_term(int n, int i, double xi, double sy2, int L) {
  const double z = xi / (sy2 * (1.0 + n * sy2));
  return -xi / sy2 + i * std::log(sy2) + log_factorial(i + L - 1) -
         (i + L) * std::log(1.0 + n * sy2) - log_factorial(L - 1) + z +
         log_hyp1f1_neg(i, L, z);
}

// ln of the finite correction int_0^tau x^i e^{-nx} f(x) dx, evaluated in the
// t-substituted form (x = t^2) so the sqrt-kernel is regular at 0.
inline double log_series_correction(int n, int i, double xi, double sy2, int L, double tau) {
  if (tau <= 0.0) return kNegInfinity;
  const double beta = (1.0 + n * sy2) / sy2;
  if (xi == 0.0) {
    const int power = i + L - 1;
    const double pref = -L * std::log(sy2) - log_factorial(L - 1);
    auto log_f = [&](double x) {
      if (x <= 0.0) return kNegInfinity;
      return pref + power * std::log(x) - beta * x;
    };
    const double peak = power / beta;
    // Mass beyond the clip point is < e^{-180} of the peak.
    const double upper = std::min(tau, peak + (180.0 + 20.0 * power) / beta);
    return integrate_log(log_f, 0.0, upper, kSeriesRelTol, {std::min(tau, peak)});
  }
  const double c = 2.0 * std::sqrt(xi) / sy2;
  const double pref = std::log(2.0) - xi / sy2 - 0.5 * (L - 1) * std::log(xi) - std::log(sy2);
  const int power = 2 * i + L;
  auto log_f = [&](double t) {
    if (t <= 0.0) return kNegInfinity;
    return pref + power * std::log(t) - beta * t * t + log_bessel_i(L - 1, c * t);
  };
  const double t_peak = (c + std::sqrt(c * c + 8.0 * beta * power)) / (4.0 * beta);
  const double upper =
      std::min(std::sqrt(tau), t_peak + std::sqrt((180.0 + 20.0 * power) / beta));
  const double t_switch = 30.0 / c;  // Bessel evaluation-regime seam
  return integrate_log(log_f, 0.0, upper, kSeriesRelTol, {t_peak, t_switch});
}

// Direct-quadrature P_{c,1}: int_tau^inf [1 - e^{-x} sum_{l<L} x^l/l!]^{M-1}
// f(x) dx with f the tone-energy pdf. Independent of the series route.
inline double pc1_quadrature_impl(double xi, double sy2, int L, int M, double tau) {
  if (std::isinf(tau)) return 0.0;
  auto log_f = [&](double x) {
    if (x <= 0.0) return kNegInfinity;
    double v = log_tone_energy_pdf(x, xi, sy2, L);
    if (M > 1) v += (M - 1) * log_regularized_gamma_lower(L, x);
    return v;
  };
  const double peak = xi + L * sy2;
  const double spread = sy2 * std::sqrt(2.0 * (L + 2.0 * xi / sy2)) + 1.0;
  const double scale = std::max({1.0, peak - tau, 4.0 * spread});
  std::vector<double> splits{static_cast<double>(L), 0.5 * peak, peak, 2.0 * peak};
  if (xi > 0.0) splits.push_back(225.0 * sy2 * sy2 / (4.0 * xi));  // Bessel seam
  const double log_val = integrate_log_semi_infinite(log_f, tau, scale, kQuadTwinRelTol, splits);
  return std::clamp(std::exp(log_val), 0.0, 1.0);
}

// Series P_{c,1} with signed-log accumulation; falls back to the quadrature
// twin when the binomial alternation cancels past kCancellationLimit.
inline double pc1_series_impl(double xi, double sy2, int L, int M, double tau) {
  if (std::isinf(tau)) return 0.0;
  std::vector<SignedLogTerm> terms;
  terms.reserve(static_cast<std::size_t>(M) * static_cast<std::size_t>((M - 1) * (L - 1) + 1));
  for (int n = 0; n < M; ++n) {
    const CoefficientTable table = multinomial_coeffs(n, L);
    const double log_binom = log_binomial(M - 1, n);
    for (int i = 0; i <= table.degree(); ++i) {
      const double log_full = log_series_full_term(n, i, xi, sy2, L);
      if (log_full == kNegInfinity) continue;
      const double log_corr = log_series_correction(n, i, xi, sy2, L, tau);
      const double log_diff = log_full + log1mexp(log_full - log_corr);
      if (log_diff == kNegInfinity) continue;
      terms.push_back({log_binom + std::log(table.at(i)) + log_diff, n % 2 == 0 ? 1 : -1});
    }
  }
  const SignedSumResult sum = signed_log_sum(std::move(terms));
  if (sum.cancellation > kCancellationLimit) return pc1_quadrature_impl(xi, sy2, L, M, tau);
  return std::clamp(sum.value, 0.0, 1.0);
}

inline void check_pc1_args(double xi, double sy2, int L, int M, double v, double tau) {
  if (std::isnan(xi) || xi < 0.0) throw std::domain_error("pc1: xi must be >= 0");
  if (!(sy2 >= 1.0)) throw std::domain_error("pc1: sigma_y_sq must be >= 1");
  if (L < 1 || M < 1) throw std::domain_error("pc1: need L >= 1 and M >= 1");
  if (!(v > 0.0) || v > 1.0) throw std::domain_error("pc1: v must lie in (0, 1]");
  if (std::isnan(tau) || tau < 0.0) throw std::domain_error("pc1: tau must be >= 0");
}

}  // namespace detail

// P(all M tone energies stay below tau | off signal) = (1 - Q(L, tau))^M.
inline double pc0(double tau, int L, int M) {
  if (std::isnan(tau) || tau < 0.0) throw std::domain_error("pc0: tau must be >= 0");
  if (L < 1 || M < 1) throw std::domain_error("pc0: need L >= 1 and M >= 1");
  return std::pow(1.0 - regularized_gamma_sum(L, tau), M);
}

// Correct-detection probability for a sent tone, coherent receiver, via the
// alternating binomial/multinomial series with exact full-range terms and
// quadrature corrections. `tau` must be threshold_coherent(xi, L, M, v).
inline double pc1_coherent_series(double xi, int L, int M, double v, double tau) {
  detail::check_pc1_args(xi, 1.0, L, M, v, tau);
  return detail::pc1_series_impl(xi, 1.0, L, M, tau);
}

// Independent oracle for pc1_coherent_series: direct integration of the
// pre-expansion form.
inline double pc1_direct_quadrature(double xi, int L, int M, double v, double tau) {
  detail::check_pc1_args(xi, 1.0, L, M, v, tau);
  return detail::pc1_quadrature_impl(xi, 1.0, L, M, tau);
}

// Noncoherent twins; sigma_y_sq = A^2 sigma^2 + 1 and tau must be
// threshold_noncoherent(xi, sigma_y_sq, L, M, v).
inline double pc1_noncoherent_series(double xi, double sigma_y_sq, int L, int M, double v,
                                     double tau) {
  detail::check_pc1_args(xi, sigma_y_sq, L, M, v, tau);
  return detail::pc1_series_impl(xi, sigma_y_sq, L, M, tau);
}

inline double pc1_noncoherent_quadrature(double xi, double sigma_y_sq, int L, int M, double v,
                                         double tau) {
  detail::check_pc1_args(xi, sigma_y_sq, L, M, v, tau);
  return detail::pc1_quadrature_impl(xi, sigma_y_sq, L, M, tau);
}

namespace detail {

inline double combine_error_probability(double v, double pc1_val, double pc0_val) {
  const double pe = 1.0 - (v * pc1_val + (1.0 - v) * pc0_val);
  if (pe < -1e-9 || pe > 1.0 + 1e-9)
    throw std::logic_error("error probability escaped [0, 1]");
  return std::clamp(pe, 0.0, 1.0);
}

}  // namespace detail

// Symbol error probability conditioned on the realized fading energy chi,
// coherent receiver with L antennas.
inline double pe_conditional_coherent(double chi, const ModulationSpec& spec, int L) {
  spec.validate();
  if (std::isnan(chi) || chi < 0.0) throw std::domain_error("pe_conditional_coherent: chi >= 0");
  if (L < 1) throw std::domain_error("pe_conditional_coherent: L >= 1");
  const double xi = spec.peak_power() * chi;
  const double tau = threshold_coherent(xi, L, spec.num_tones, spec.duty_cycle);
  double pc1_val = 0.0;
  double pc0_val = 1.0;
  if (!std::isinf(tau)) {
    pc1_val = detail::pc1_series_impl(xi, 1.0, L, spec.num_tones, tau);
    pc0_val = pc0(tau, L, spec.num_tones);
  }
  return detail::combine_error_probability(spec.duty_cycle, pc1_val, pc0_val);
}

// ln f_chi: pdf of chi = sum_l |h_l|^2 for independent antennas, noncentral
// chi-square with 2L degrees of freedom, noncentrality s^2, scale sigma^2.
inline double log_chi_pdf(double chi, const ChannelEnergy& energy) {
  const double s2 = energy.s_sq;
  const double sig2 = energy.sigma_sq;
  const int L = energy.num_antennas;
  if (!(sig2 > 0.0)) throw std::domain_error("log_chi_pdf: sigma_sq must be > 0");
  if (std::isnan(chi) || chi < 0.0) return kNegInfinity;
  if (s2 == 0.0) {
    if (chi == 0.0) return L == 1 ? -std::log(sig2) : kNegInfinity;
    return (L - 1) * std::log(chi) - chi / sig2 - L * std::log(sig2) -
           detail::log_factorial(L - 1);
  }
  if (chi == 0.0) return L == 1 ? -std::log(sig2) - s2 / sig2 : kNegInfinity;
  return -std::log(sig2) + 0.5 * (L - 1) * (std::log(chi) - std::log(s2)) -
         (chi + s2) / sig2 + log_bessel_i(L - 1, 2.0 * std::sqrt(chi * s2) / sig2);
}

// Average coherent error probability over the fading distribution,
// independent antennas only (correlated channels are simulation territory).
inline double pe_average_coherent(const ModulationSpec& spec, const AntennaChannelSpec& channel) {
  spec.validate();
  channel.validate();
  if (!channel.independent())
    throw std::invalid_argument("pe_average_coherent: correlated antennas not supported");
  const int L = channel.num_antennas;
  const ChannelEnergy energy{0.0, channel.total_los_power(), channel.scatter_variance(), L};
  if (energy.sigma_sq == 0.0) return pe_conditional_coherent(energy.s_sq, spec, L);

  auto log_f = [&](double chi) {
    if (chi <= 0.0) return kNegInfinity;
    const double pe = pe_conditional_coherent(chi, spec, L);
    if (pe <= 0.0) return kNegInfinity;
    ChannelEnergy at = energy;
    at.chi = chi;
    return std::log(pe) + log_chi_pdf(chi, at);
  };
  const double mean = static_cast<double>(L);  // E chi = L under the normalization
  const std::vector<double> splits{0.25 * mean, mean, 2.0 * mean, 4.0 * mean};
  const double log_val =
      integrate_log_semi_infinite(log_f, 0.0, mean + 4.0 * std::sqrt(mean),
                                  detail::kFadingRelTol, splits);
  return std::clamp(std::exp(log_val), 0.0, 1.0);
}

namespace detail {

inline double pe_noncoherent_impl(const ModulationSpec& spec, const AntennaChannelSpec& channel,
                                  bool use_series) {
  spec.validate();
  channel.validate();
  if (!channel.independent())
    throw std::invalid_argument("pe_noncoherent: correlated antennas not supported");
  const int L = channel.num_antennas;
  const double xi = spec.peak_power() * channel.total_los_power();
  const double sy2 = spec.peak_power() * channel.scatter_variance() + 1.0;
  const double tau = threshold_noncoherent(xi, sy2, L, spec.num_tones, spec.duty_cycle);
  double pc1_val = 0.0;
  double pc0_val = 1.0;
  if (!std::isinf(tau)) {
    pc1_val = use_series ? pc1_series_impl(xi, sy2, L, spec.num_tones, tau)
                         : pc1_quadrature_impl(xi, sy2, L, spec.num_tones, tau);
    pc0_val = pc0(tau, L, spec.num_tones);
  }
  return combine_error_probability(spec.duty_cycle, pc1_val, pc0_val);
}

}  // namespace detail

// Average noncoherent error probability (the noncoherent statistics already
// integrate the fading, so no outer average is needed).
inline double pe_noncoherent(const ModulationSpec& spec, const AntennaChannelSpec& channel) {
  return detail::pe_noncoherent_impl(spec, channel, /*use_series=*/true);
}

// Direct-quadrature twin of pe_noncoherent, for oracle testing.
inline double pe_noncoherent_quadrature(const ModulationSpec& spec,
                                        const AntennaChannelSpec& channel) {
  return detail::pe_noncoherent_impl(spec, channel, /*use_series=*/false);
}

}  // namespace oofsk
