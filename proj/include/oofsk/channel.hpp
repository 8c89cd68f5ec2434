#pragma once

// Monte Carlo engine for the physical model: correlated Rician fading
// generation, the correlator-output model, equal gain combining, and error
// counting with Wilson confidence intervals. Trials are grouped into batches
// of 2^16; each batch owns an independent Philox stream derived from
// (seed, batch index), so results are bit-identical for a given seed
// regardless of how batches are scheduled.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <future>
#include <numbers>
#include <stdexcept>
#include <thread>
#include <vector>

#include "oofsk/detector.hpp"
#include "oofsk/rng.hpp"
#include "oofsk/types.hpp"

namespace oofsk {

// L x M correlator outputs Y_{l,m}, row-major by antenna.
struct CorrelatorMatrix {
  int num_antennas = 0;
  int num_tones = 0;
  std::vector<std::complex<double>> samples;

  std::complex<double>& at(int antenna, int tone) {
    return samples[static_cast<std::size_t>(antenna) * num_tones + tone];
  }
  const std::complex<double>& at(int antenna, int tone) const {
    return samples[static_cast<std::size_t>(antenna) * num_tones + tone];
  }
};

// R_m = sum_l |Y_{l,m}|^2.
inline EnergyVector combine_energies(const CorrelatorMatrix& outputs) {
  EnergyVector energies(static_cast<std::size_t>(outputs.num_tones), 0.0);
  for (int l = 0; l < outputs.num_antennas; ++l)
    for (int m = 0; m < outputs.num_tones; ++m)
      energies[static_cast<std::size_t>(m)] += std::norm(outputs.at(l, m));
  return energies;
}

namespace detail {

// Lower-triangular Cholesky factor of the scattered-component covariance
// sigma^2 [(1-rho) I + rho  11^T], row-major L x L.
inline std::vector<double> covariance_cholesky(const AntennaChannelSpec& channel) {
  const int n = channel.num_antennas;
  const double sig2 = channel.scatter_variance();
  const double rho = channel.correlation_rho;
  std::vector<double> a(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      a[static_cast<std::size_t>(i) * n + j] = sig2 * (i == j ? 1.0 : rho);
  std::vector<double> chol(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double acc = a[static_cast<std::size_t>(i) * n + j];
      for (int k = 0; k < j; ++k)
        acc -= chol[static_cast<std::size_t>(i) * n + k] * chol[static_cast<std::size_t>(j) * n + k];
      if (i == j) {
        if (sig2 > 0.0 && acc <= 0.0)
          throw std::invalid_argument("covariance_cholesky: correlation matrix not positive definite");
        chol[static_cast<std::size_t>(i) * n + i] = acc > 0.0 ? std::sqrt(acc) : 0.0;
      } else {
        const double diag = chol[static_cast<std::size_t>(j) * n + j];
        chol[static_cast<std::size_t>(i) * n + j] = diag > 0.0 ? acc / diag : 0.0;
      }
    }
  }
  return chol;
}

}  // namespace detail

// One fading realization h = d + C z, z i.i.d. standard circular complex
// Gaussian, C the Cholesky factor of the scattered covariance. sigma^2 = 0
// degenerates to h = d.
inline std::vector<std::complex<double>> gen_fading(const AntennaChannelSpec& channel,
                                                    Philox4x32& rng) {
  const int n = channel.num_antennas;
  const std::vector<double> chol = detail::covariance_cholesky(channel);
  std::vector<std::complex<double>> z(static_cast<std::size_t>(n));
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  for (int l = 0; l < n; ++l) {
    const double re = rng.next_gaussian();
    const double im = rng.next_gaussian();
    z[static_cast<std::size_t>(l)] = {re * inv_sqrt2, im * inv_sqrt2};
  }
  const double d = channel.los_amplitude();
  std::vector<std::complex<double>> h(static_cast<std::size_t>(n), {d, 0.0});
  for (int l = 0; l < n; ++l)
    for (int k = 0; k <= l; ++k)
      h[static_cast<std::size_t>(l)] += chol[static_cast<std::size_t>(l) * n + k] * z[static_cast<std::size_t>(k)];
  return h;
}

// 0 with probability 1-v, each of the M tones with probability v/M.
inline int draw_symbol(const ModulationSpec& spec, Philox4x32& rng) {
  const double u = rng.next_double();
  const double off_mass = 1.0 - spec.duty_cycle;
  if (u < off_mass) return 0;
  const int tone = 1 + static_cast<int>((u - off_mass) * spec.num_tones / spec.duty_cycle);
  return std::min(tone, spec.num_tones);
}

// Y_{l,m} = A h_l e^{j theta} + n_{l,m} in the sent tone's column, pure noise
// elsewhere; n i.i.d. circular complex Gaussian with total variance 1. theta
// is drawn uniform per symbol (it cannot affect the energies; the simulation
// stays honest about phase ignorance). `add_noise = false` is a test hook.
inline CorrelatorMatrix gen_correlator_outputs(const std::vector<std::complex<double>>& h,
                                               int symbol, const ModulationSpec& spec,
                                               Philox4x32& rng, bool add_noise = true) {
  const int n_ant = static_cast<int>(h.size());
  const int n_tones = spec.num_tones;
  if (symbol < 0 || symbol > n_tones)
    throw std::invalid_argument("gen_correlator_outputs: symbol out of range");
  CorrelatorMatrix out;
  out.num_antennas = n_ant;
  out.num_tones = n_tones;
  out.samples.assign(static_cast<std::size_t>(n_ant) * n_tones, {0.0, 0.0});

  const double theta = 2.0 * std::numbers::pi * rng.next_double();
  const std::complex<double> phase{std::cos(theta), std::sin(theta)};
  const double amp = spec.peak_amplitude();
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  for (int l = 0; l < n_ant; ++l) {
    for (int m = 0; m < n_tones; ++m) {
      std::complex<double> y{0.0, 0.0};
      if (add_noise) {
        const double re = rng.next_gaussian();
        const double im = rng.next_gaussian();
        y = {re * inv_sqrt2, im * inv_sqrt2};
      }
      if (symbol != 0 && m == symbol - 1) y += amp * h[static_cast<std::size_t>(l)] * phase;
      out.at(l, m) = y;
    }
  }
  return out;
}

// Counted symbol errors plus the full (M+1) x (M+1) confusion matrix,
// mergeable across batches.
struct ErrorStats {
  std::uint64_t trials = 0;
  std::uint64_t errors = 0;
  int num_tones = 0;
  std::vector<std::uint64_t> confusion;  // (M+1)^2, row = sent, col = detected

  static ErrorStats zero(int num_tones) {
    ErrorStats s;
    s.num_tones = num_tones;
    s.confusion.assign(static_cast<std::size_t>(num_tones + 1) * (num_tones + 1), 0);
    return s;
  }

  void record(int sent, int detected) {
    ++trials;
    if (sent != detected) ++errors;
    ++confusion[static_cast<std::size_t>(sent) * (num_tones + 1) + detected];
  }

  std::uint64_t confusion_at(int sent, int detected) const {
    return confusion[static_cast<std::size_t>(sent) * (num_tones + 1) + detected];
  }

  double p_hat() const {
    return trials == 0 ? 0.0 : static_cast<double>(errors) / static_cast<double>(trials);
  }

  // Wilson 95% half-width for the symbol error proportion.
  double wilson_halfwidth() const {
    if (trials == 0) return 1.0;
    const double z = 1.959963984540054;
    const double n = static_cast<double>(trials);
    const double p = p_hat();
    const double denom = 1.0 + z * z / n;
    return z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
  }

  void merge(const ErrorStats& other) {
    if (confusion.empty()) *this = ErrorStats::zero(other.num_tones);
    if (other.num_tones != num_tones)
      throw std::invalid_argument("ErrorStats::merge: mismatched tone counts");
    trials += other.trials;
    errors += other.errors;
    for (std::size_t i = 0; i < confusion.size(); ++i) confusion[i] += other.confusion[i];
  }
};

struct McOptions {
  std::uint64_t trials = 0;
  std::uint64_t seed = 1;
  bool early_stop = false;                  // stop once the CI is tight; off by default
  double early_stop_rel_halfwidth = 0.05;   // target: halfwidth < 5% of p_hat
};

namespace detail {

inline constexpr std::uint64_t kBatchSize = std::uint64_t(1) << 16;

inline ErrorStats run_batch(const ModulationSpec& spec, const AntennaChannelSpec& channel,
                            Scenario scenario, const DetectionParams& noncoherent_params,
                            std::uint64_t seed, std::uint64_t batch_index,
                            std::uint64_t batch_trials) {
  Philox4x32 rng(seed, batch_index);
  ErrorStats stats = ErrorStats::zero(spec.num_tones);
  const double peak_power = spec.peak_power();
  for (std::uint64_t t = 0; t < batch_trials; ++t) {
    const auto h = gen_fading(channel, rng);
    const int sent = draw_symbol(spec, rng);
    const CorrelatorMatrix outputs = gen_correlator_outputs(h, sent, spec, rng);
    const EnergyVector energies = combine_energies(outputs);
    int detected;
    if (scenario == Scenario::kCoherent) {
      double fade_energy = 0.0;
      for (const auto& hl : h) fade_energy += std::norm(hl);
      const DetectionParams params =
          make_coherent_params(spec, channel.num_antennas, peak_power * fade_energy);
      detected = detect(energies, params);
    } else {
      detected = detect(energies, noncoherent_params);
    }
    stats.record(sent, detected);
  }
  return stats;
}

}  // namespace detail

// Runs the symbol-level simulation. Coherent detection rebuilds the
// threshold from the realized fading each trial; noncoherent detection uses
// one DetectionParams built from channel statistics before any fading is
// drawn (it structurally cannot see h, also when the true channel is
// correlated). Deterministic given (spec, channel, scenario, trials, seed).
inline ErrorStats run_monte_carlo(const ModulationSpec& spec, const AntennaChannelSpec& channel,
                                  Scenario scenario, const McOptions& options) {
  spec.validate();
  channel.validate();
  if (options.trials == 0) throw std::invalid_argument("run_monte_carlo: trials must be > 0");

  const DetectionParams noncoherent_params = make_noncoherent_params(spec, channel);
  const std::uint64_t n_batches =
      (options.trials + detail::kBatchSize - 1) / detail::kBatchSize;
  auto batch_trials = [&](std::uint64_t b) {
    return std::min(detail::kBatchSize, options.trials - b * detail::kBatchSize);
  };

  ErrorStats total = ErrorStats::zero(spec.num_tones);
  if (options.early_stop) {
    for (std::uint64_t b = 0; b < n_batches; ++b) {
      total.merge(detail::run_batch(spec, channel, scenario, noncoherent_params, options.seed,
                                    b, batch_trials(b)));
      if (total.errors > 0 &&
          total.wilson_halfwidth() < options.early_stop_rel_halfwidth * total.p_hat())
        break;
    }
    return total;
  }

  const unsigned workers = std::min<std::uint64_t>(
      std::max(1u, std::thread::hardware_concurrency()), n_batches);
  if (workers <= 1) {
    for (std::uint64_t b = 0; b < n_batches; ++b)
      total.merge(detail::run_batch(spec, channel, scenario, noncoherent_params, options.seed,
                                    b, batch_trials(b)));
    return total;
  }

  std::vector<ErrorStats> per_batch(n_batches);
  std::atomic<std::uint64_t> next{0};
  std::vector<std::future<void>> futures;
  futures.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    futures.push_back(std::async(std::launch::async, [&] {
      for (std::uint64_t b = next.fetch_add(1); b < n_batches; b = next.fetch_add(1))
        per_batch[b] = detail::run_batch(spec, channel, scenario, noncoherent_params,
                                         options.seed, b, batch_trials(b));
    }));
  }
  for (auto& f : futures) f.get();
  for (const auto& stats : per_batch) total.merge(stats);  // merge in batch order
  return total;
}

}  // namespace oofsk
