#pragma once

// Adaptive Gauss-Kronrod (15/7) quadrature operating on log-domain
// integrands: the integrand callback returns ln f(x) and the routines return
// ln of the integral. This keeps sharply peaked noncentral densities and
// Bessel-weighted kernels representable far outside double range.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "oofsk/specfun.hpp"

namespace oofsk {

class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double achieved_rel_error)
      : std::runtime_error(what), achieved_rel_error_(achieved_rel_error) {}
  double achieved_rel_error() const { return achieved_rel_error_; }

 private:
  double achieved_rel_error_;
};

namespace detail {

// QUADPACK dqk15 abscissae/weights on [-1, 1].
inline constexpr double kGk15Nodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000};
inline constexpr double kGk15Weights[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr double kGauss7Weights[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct Panel {
  double a = 0.0;
  double b = 0.0;
  double log_value = kNegInfinity;
  double log_error = kNegInfinity;
};

template <typename LogF>
Panel evaluate_panel(LogF&& log_f, double a, double b) {
  Panel p;
  p.a = a;
  p.b = b;
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  double flog[15];
  double peak = kNegInfinity;
  for (int j = 0; j < 7; ++j) {
    flog[2 * j] = log_f(center - half * kGk15Nodes[j]);
    flog[2 * j + 1] = log_f(center + half * kGk15Nodes[j]);
    peak = std::max({peak, flog[2 * j], flog[2 * j + 1]});
  }
  flog[14] = log_f(center);
  peak = std::max(peak, flog[14]);
  if (peak == kNegInfinity || half <= 0.0) return p;

  double kronrod = 0.0;
  double gauss = 0.0;
  for (int j = 0; j < 7; ++j) {
    const double pair = std::exp(flog[2 * j] - peak) + std::exp(flog[2 * j + 1] - peak);
    kronrod += kGk15Weights[j] * pair;
    if (j % 2 == 1) gauss += kGauss7Weights[(j - 1) / 2] * pair;
  }
  const double fc = std::exp(flog[14] - peak);
  kronrod += kGk15Weights[7] * fc;
  gauss += kGauss7Weights[3] * fc;

  p.log_value = peak + std::log(kronrod * half);
  const double diff = std::abs(kronrod - gauss) * half;
  p.log_error = diff > 0.0 ? peak + std::log(diff) : kNegInfinity;
  return p;
}

inline double log_sum(const std::vector<Panel>& panels, bool errors) {
  double peak = kNegInfinity;
  for (const auto& p : panels) peak = std::max(peak, errors ? p.log_error : p.log_value);
  if (peak == kNegInfinity) return kNegInfinity;
  double acc = 0.0;
  for (const auto& p : panels) acc += std::exp((errors ? p.log_error : p.log_value) - peak);
  return peak + std::log(acc);
}

}  // namespace detail

// ln of integral over [a, b] of exp(log_f(x)). `splits` seeds interior panel
// seams (e.g. at a Bessel evaluation-regime switch or a density peak).
template <typename LogF>
double integrate_log(LogF&& log_f, double a, double b, double rel_tol,
                     const std::vector<double>& splits = {}, int max_panels = 4000) {
  if (!(b > a)) return kNegInfinity;

  std::vector<double> seams{a};
  for (double s : splits)
    if (s > a && s < b) seams.push_back(s);
  seams.push_back(b);
  std::sort(seams.begin(), seams.end());
  seams.erase(std::unique(seams.begin(), seams.end()), seams.end());

  std::vector<detail::Panel> panels;
  panels.reserve(static_cast<std::size_t>(max_panels));
  for (std::size_t i = 0; i + 1 < seams.size(); ++i)
    panels.push_back(detail::evaluate_panel(log_f, seams[i], seams[i + 1]));

  const double min_width = (b - a) * 1e-13;
  const double log_rel_tol = std::log(rel_tol);
  double log_total = kNegInfinity;
  double log_err = kNegInfinity;
  while (true) {
    log_total = detail::log_sum(panels, false);
    log_err = detail::log_sum(panels, true);
    if (log_total == kNegInfinity) return kNegInfinity;
    if (log_err <= log_total + log_rel_tol) return log_total;

    std::size_t worst = 0;
    for (std::size_t i = 1; i < panels.size(); ++i)
      if (panels[i].log_error > panels[worst].log_error) worst = i;
    const detail::Panel split_me = panels[worst];
    if (static_cast<int>(panels.size()) >= max_panels || split_me.b - split_me.a < min_width)
      throw QuadratureError("integrate_log: tolerance not reached",
                            std::exp(log_err - log_total));
    const double mid = 0.5 * (split_me.a + split_me.b);
    panels[worst] = detail::evaluate_panel(log_f, split_me.a, mid);
    panels.push_back(detail::evaluate_panel(log_f, mid, split_me.b));
  }
}

// ln of integral over [a, inf) of exp(log_f(x)), via x = a + scale*t/(1-t).
// `x_splits` are seam hints in x space; `scale` should be on the order of
// the integrand's support width past a.
template <typename LogF>
double integrate_log_semi_infinite(LogF&& log_f, double a, double scale, double rel_tol,
                                   const std::vector<double>& x_splits = {},
                                   int max_panels = 4000) {
  if (scale <= 0.0) scale = 1.0;
  auto mapped = [&](double t) {
    if (t <= 0.0) return log_f(a) + std::log(scale);
    if (t >= 1.0) return kNegInfinity;
    const double one_minus = 1.0 - t;
    const double x = a + scale * t / one_minus;
    return log_f(x) + std::log(scale) - 2.0 * std::log(one_minus);
  };
  std::vector<double> t_splits;
  for (double x : x_splits) {
    if (x <= a) continue;
    const double u = x - a;
    t_splits.push_back(u / (scale + u));
  }
  // A default seam keeps the first panel from straddling the mapped peak.
  t_splits.push_back(0.5);
  return integrate_log(mapped, 0.0, 1.0, rel_tol, t_splits, max_panels);
}

}  // namespace oofsk
