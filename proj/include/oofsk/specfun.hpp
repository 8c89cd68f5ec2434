#pragma once

// Numerically safe special functions behind every closed-form expression in
// this library: log-scaled modified Bessel functions of the first kind,
// terminating confluent hypergeometric polynomials, regularized gamma sums,
// and the multinomial coefficient recursion. Everything here is a pure
// function; results are returned in log domain wherever the linear value can
// overflow for realistic SNRs.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace oofsk {

inline constexpr double kNegInfinity = -std::numeric_limits<double>::infinity();

namespace detail {

// ln(n!) with an exact-to-double table for the small arguments that dominate
// every hot path here.
inline double log_factorial(int n) {
  if (n < 0) throw std::domain_error("log_factorial: negative argument");
  static const std::vector<double> table = [] {
    std::vector<double> t(171);
    t[0] = 0.0;
    for (int k = 1; k < static_cast<int>(t.size()); ++k) t[k] = t[k - 1] + std::log(static_cast<double>(k));
    return t;
  }();
  if (n < static_cast<int>(table.size())) return table[n];
  return std::lgamma(static_cast<double>(n) + 1.0);
}

}  // namespace detail

// ln I_order(z) for integer order >= 0 and z >= 0. Power series with
// rescaling below the asymptotic regime, large-argument asymptotic expansion
// (optimally truncated) once z >= max(30, order^2). Returns -inf for
// I_order(0) with order >= 1.
inline double log_bessel_i(int order, double z) {
  if (order < 0) throw std::domain_error("log_bessel_i: order must be >= 0");
  if (std::isnan(z) || z < 0.0) throw std::domain_error("log_bessel_i: argument must be >= 0");
  if (z == 0.0) return order == 0 ? 0.0 : kNegInfinity;

  const double nu = static_cast<double>(order);
  if (z >= 30.0 && z >= nu * nu) {
    // I_nu(z) ~ e^z/sqrt(2 pi z) * [1 - (mu-1)/(8z) + ...], mu = 4 nu^2.
    const double mu = 4.0 * nu * nu;
    double sum = 1.0;
    double term = 1.0;
    double prev_mag = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 60; ++k) {
      const double odd = 2.0 * k - 1.0;
      term *= (odd * odd - mu) / (8.0 * z * static_cast<double>(k));
      const double mag = std::abs(term);
      if (mag >= prev_mag) break;  // smallest-term truncation
      sum += term;
      if (mag <= 1e-17 * std::abs(sum)) break;
      prev_mag = mag;
    }
    return z - 0.5 * std::log(2.0 * std::numbers::pi * z) + std::log(sum);
  }

  // Ascending series: I_nu(z) = (z/2)^nu / nu! * sum_k q^k nu!/(k! (k+nu)!),
  // q = z^2/4, accumulated with rescaling so large intermediate sums cannot
  // overflow.
  const double q = 0.25 * z * z;
  double sum = 1.0;
  double term = 1.0;
  double log_scale = 0.0;
  for (int k = 1; k <= 200000; ++k) {
    term *= q / (static_cast<double>(k) * (static_cast<double>(k) + nu));
    sum += term;
    if (term <= 1e-17 * sum) break;
    if (sum > 1e280) {
      sum *= 1e-280;
      term *= 1e-280;
      log_scale += std::log(1e280);
    }
  }
  return nu * std::log(0.5 * z) - detail::log_factorial(order) + log_scale + std::log(sum);
}

// F(-i, c; x): the confluent hypergeometric function with nonpositive integer
// first parameter, i.e. the degree-i polynomial
//   sum_{k=0}^{i} (-i)_k / ((c)_k k!) x^k.
// Pochhammer factors are built iteratively so the terminating structure is
// exact.
inline double hyp1f1_poly(int i, int c, double x) {
  if (i < 0) throw std::domain_error("hyp1f1_poly: i must be >= 0");
  if (c < 1) throw std::domain_error("hyp1f1_poly: c must be >= 1");
  double sum = 1.0;
  double term = 1.0;
  for (int k = 0; k < i; ++k) {
    term *= static_cast<double>(-i + k) * x /
            (static_cast<double>(c + k) * static_cast<double>(k + 1));
    sum += term;
  }
  return sum;
}

// ln F(-i, c; -y) for y >= 0. All series terms are nonnegative in this case,
// so the sum can be carried with rescaling and returned in log domain; used
// where F itself would overflow (large y with large i).
inline double log_hyp1f1_neg(int i, int c, double y) {
  if (i < 0) throw std::domain_error("log_hyp1f1_neg: i must be >= 0");
  if (c < 1) throw std::domain_error("log_hyp1f1_neg: c must be >= 1");
  if (std::isnan(y) || y < 0.0) throw std::domain_error("log_hyp1f1_neg: y must be >= 0");
  double sum = 1.0;
  double term = 1.0;
  double log_scale = 0.0;
  for (int k = 0; k < i; ++k) {
    term *= static_cast<double>(i - k) * y /
            (static_cast<double>(c + k) * static_cast<double>(k + 1));
    sum += term;
    if (sum > 1e280) {
      sum *= 1e-280;
      term *= 1e-280;
      log_scale += std::log(1e280);
    }
  }
  return log_scale + std::log(sum);
}

// e^{-x} sum_{l=0}^{L-1} x^l / l!  -- the upper tail Q(L, x) of a unit-scale
// Erlang / chi-square with 2L degrees of freedom. Accumulated in log domain
// so large x cannot overflow the powers.
inline double regularized_gamma_sum(int L, double x) {
  if (L < 1) throw std::domain_error("regularized_gamma_sum: L must be >= 1");
  if (std::isnan(x) || x < 0.0) throw std::domain_error("regularized_gamma_sum: x must be >= 0");
  if (x == 0.0) return 1.0;
  const double lx = std::log(x);
  double peak = 0.0;  // l = 0 term
  for (int l = 1; l < L; ++l)
    peak = std::max(peak, static_cast<double>(l) * lx - detail::log_factorial(l));
  double sum = 0.0;
  for (int l = 0; l < L; ++l)
    sum += std::exp(static_cast<double>(l) * lx - detail::log_factorial(l) - peak);
  const double value = std::exp(-x + peak + std::log(sum));
  return std::clamp(value, 0.0, 1.0);
}

// ln(1 - regularized_gamma_sum(L, x)) = ln P(L, x), the lower regularized
// gamma. Switches to the tail series e^{-x} sum_{l>=L} x^l/l! when the
// direct complement would cancel.
inline double log_regularized_gamma_lower(int L, double x) {
  if (L < 1) throw std::domain_error("log_regularized_gamma_lower: L must be >= 1");
  if (std::isnan(x) || x < 0.0) throw std::domain_error("log_regularized_gamma_lower: x must be >= 0");
  if (x == 0.0) return kNegInfinity;
  const double q = regularized_gamma_sum(L, x);
  if (q < 0.5) return std::log1p(-q);
  // Here x is at most a few times L, so the tail series is short.
  const double lx = std::log(x);
  const int l_peak = std::max(L, static_cast<int>(x));
  const double peak = static_cast<double>(l_peak) * lx - detail::log_factorial(l_peak);
  double sum = 0.0;
  for (int l = L; l < L + 2000; ++l) {
    const double t = std::exp(static_cast<double>(l) * lx - detail::log_factorial(l) - peak);
    sum += t;
    if (l > l_peak && t <= 1e-18 * sum) break;
  }
  return -x + peak + std::log(sum);
}

// Coefficients c_{in} of [sum_{l=0}^{L-1} x^l/l!]^n = sum_i c_{in} x^i,
// i = 0 .. n(L-1).
struct CoefficientTable {
  int n = 0;      // outer power
  int order = 1;  // L
  std::vector<double> coeffs;

  double at(int i) const { return coeffs.at(static_cast<std::size_t>(i)); }
  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
};

// Builds the table by the recursion
//   c_{in} = sum_{q=i-L+1}^{i} c_{q(n-1)} / (i-q)!   for q in [0, (n-1)(L-1)].
inline CoefficientTable multinomial_coeffs(int n, int L) {
  if (n < 0) throw std::domain_error("multinomial_coeffs: n must be >= 0");
  if (L < 1) throw std::domain_error("multinomial_coeffs: L must be >= 1");
  std::vector<double> inv_factorial(L);
  for (int j = 0; j < L; ++j) inv_factorial[j] = std::exp(-detail::log_factorial(j));
  std::vector<double> c{1.0};  // n = 0
  for (int step = 1; step <= n; ++step) {
    const int prev_deg = (step - 1) * (L - 1);
    std::vector<double> next(static_cast<std::size_t>(step * (L - 1)) + 1, 0.0);
    for (int i = 0; i <= step * (L - 1); ++i) {
      double acc = 0.0;
      const int q_lo = std::max(0, i - L + 1);
      const int q_hi = std::min(i, prev_deg);
      for (int q = q_lo; q <= q_hi; ++q) acc += c[static_cast<std::size_t>(q)] * inv_factorial[i - q];
      next[static_cast<std::size_t>(i)] = acc;
    }
    c = std::move(next);
  }
  return CoefficientTable{n, L, std::move(c)};
}

// One term of an alternating sum kept as sign + log magnitude.
struct SignedLogTerm {
  double log_abs = kNegInfinity;
  int sign = 1;
};

struct SignedSumResult {
  double value = 0.0;          // linear-domain total
  double max_log_abs = kNegInfinity;
  double cancellation = 0.0;   // max|term| / |sum|; large means heavy loss
};

// Sums signed log-magnitude terms largest-first so the cancellation level of
// an alternating series is measurable by the caller.
inline SignedSumResult signed_log_sum(std::vector<SignedLogTerm> terms) {
  SignedSumResult out;
  std::sort(terms.begin(), terms.end(),
            [](const SignedLogTerm& a, const SignedLogTerm& b) { return a.log_abs > b.log_abs; });
  if (terms.empty() || terms.front().log_abs == kNegInfinity) return out;
  const double m = terms.front().log_abs;
  double acc = 0.0;
  double comp = 0.0;  // Kahan compensation
  for (const auto& t : terms) {
    if (t.log_abs == kNegInfinity) break;
    const double y = static_cast<double>(t.sign) * std::exp(t.log_abs - m) - comp;
    const double s = acc + y;
    comp = (s - acc) - y;
    acc = s;
  }
  out.max_log_abs = m;
  out.value = acc * std::exp(m);
  out.cancellation = acc == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / std::abs(acc);
  return out;
}

}  // namespace oofsk
