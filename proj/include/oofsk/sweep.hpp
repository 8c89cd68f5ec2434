#pragma once

// Batch front-end machinery: expand the manifest grid, run the analytic and
// Monte Carlo engines, render the CSV (schema-stable, full round-trip
// precision) and the compare report. Rows are emitted in deterministic grid
// order: L, then M, then v, then snr_db innermost, so each curve is a
// contiguous run of ascending SNR.

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "oofsk/analytic.hpp"
#include "oofsk/channel.hpp"
#include "oofsk/manifest.hpp"
#include "oofsk/types.hpp"

namespace oofsk {

struct SweepRow {
  Scenario scenario = Scenario::kCoherent;
  int num_tones = 0;
  int num_antennas = 0;
  double rician_k = 0.0;
  double correlation_rho = 0.0;
  double duty_cycle = 0.0;
  double snr_db = 0.0;
  std::optional<double> pe_analytic;
  std::optional<double> pe_mc;
  std::optional<double> mc_ci;
  std::optional<std::uint64_t> trials;
  std::optional<std::uint64_t> seed;
  bool flagged = false;  // compare mode: |analytic - mc| > 3 sigma
};

struct SweepResult {
  std::vector<SweepRow> rows;
  int flagged_count = 0;
};

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

inline const std::string& csv_header() {
  static const std::string header =
      "scenario,M,L,K,rho,v,snr_db,p_e_analytic,p_e_mc,mc_ci,trials,seed";
  return header;
}

inline std::string to_csv_line(const SweepRow& row) {
  std::string out;
  out += to_string(row.scenario);
  out += ',';
  out += std::to_string(row.num_tones);
  out += ',';
  out += std::to_string(row.num_antennas);
  out += ',';
  out += detail::format_double(row.rician_k);
  out += ',';
  out += detail::format_double(row.correlation_rho);
  out += ',';
  out += detail::format_double(row.duty_cycle);
  out += ',';
  out += detail::format_double(row.snr_db);
  out += ',';
  if (row.pe_analytic) out += detail::format_double(*row.pe_analytic);
  out += ',';
  if (row.pe_mc) out += detail::format_double(*row.pe_mc);
  out += ',';
  if (row.mc_ci) out += detail::format_double(*row.mc_ci);
  out += ',';
  if (row.trials) out += std::to_string(*row.trials);
  out += ',';
  if (row.seed) out += std::to_string(*row.seed);
  return out;
}

// Expands the grid and evaluates every point per the manifest mode. Throws
// ManifestError for invalid manifests and QuadratureError if an analytic
// point fails to converge.
inline SweepResult run_sweep(const RunManifest& manifest) {
  manifest.validate();
  SweepResult result;
  for (int l : manifest.antenna_counts) {
    for (int m : manifest.tone_counts) {
      AntennaChannelSpec channel;
      channel.num_antennas = l;
      channel.rician_k = manifest.rician_k;
      channel.correlation_rho = manifest.correlation_rho;
      for (double v : manifest.duty_cycles) {
        for (double snr : manifest.snr_db) {
          ModulationSpec spec;
          spec.num_tones = m;
          spec.duty_cycle = v;
          spec.snr_db = snr;

          SweepRow row;
          row.scenario = manifest.scenario;
          row.num_tones = m;
          row.num_antennas = l;
          row.rician_k = manifest.rician_k;
          row.correlation_rho = manifest.correlation_rho;
          row.duty_cycle = v;
          row.snr_db = snr;

          if (manifest.needs_analytic()) {
            row.pe_analytic = manifest.scenario == Scenario::kCoherent
                                  ? pe_average_coherent(spec, channel)
                                  : pe_noncoherent(spec, channel);
          }
          if (manifest.needs_mc()) {
            McOptions options;
            options.trials = manifest.trials;
            options.seed = manifest.seed;
            const ErrorStats stats =
                run_monte_carlo(spec, channel, manifest.scenario, options);
            row.pe_mc = stats.p_hat();
            row.mc_ci = stats.wilson_halfwidth();
            row.trials = stats.trials;
            row.seed = manifest.seed;
          }
          if (manifest.mode == RunManifest::Mode::kCompare) {
            const double pa = *row.pe_analytic;
            const double sigma =
                std::sqrt(std::max(pa * (1.0 - pa), 0.0) / static_cast<double>(*row.trials));
            row.flagged = std::abs(pa - *row.pe_mc) > 3.0 * sigma;
            if (row.flagged) ++result.flagged_count;
          }
          result.rows.push_back(row);
        }
      }
    }
  }
  return result;
}

inline std::string render_csv(const SweepResult& result) {
  std::string out = csv_header();
  out += '\n';
  for (const auto& row : result.rows) {
    out += to_csv_line(row);
    out += '\n';
  }
  return out;
}

// Compare report: one line per grid point with the 3-sigma verdict.
inline std::string render_compare_report(const SweepResult& result) {
  std::string out = "compare report: |p_e_analytic - p_e_mc| vs 3*sigma, "
                    "sigma = sqrt(p_a (1-p_a) / trials)\n";
  char buf[256];
  for (const auto& row : result.rows) {
    const double pa = row.pe_analytic.value_or(0.0);
    const double pm = row.pe_mc.value_or(0.0);
    const double sigma =
        std::sqrt(std::max(pa * (1.0 - pa), 0.0) /
                  static_cast<double>(row.trials.value_or(1)));
    std::snprintf(buf, sizeof(buf),
                  "%s M=%d L=%d K=%g rho=%g v=%g snr_db=%g: analytic=%.6e mc=%.6e "
                  "|diff|=%.3e 3sigma=%.3e %s\n",
                  to_string(row.scenario), row.num_tones, row.num_antennas, row.rician_k,
                  row.correlation_rho, row.duty_cycle, row.snr_db, pa, pm,
                  std::abs(pa - pm), 3.0 * sigma, row.flagged ? "FLAG" : "ok");
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "flagged %d of %zu points\n", result.flagged_count,
                result.rows.size());
  out += buf;
  return out;
}

inline std::string compare_report_path(const std::string& csv_path) {
  return csv_path + ".report.txt";
}

// Runs the manifest end to end and writes the artifacts. Returns the number
// of flagged compare points (0 for analytic/simulate).
inline int run(const RunManifest& manifest) {
  const SweepResult result = run_sweep(manifest);

  std::ofstream csv(manifest.output_path, std::ios::binary);
  if (!csv) throw std::runtime_error("cannot open output file: " + manifest.output_path);
  csv << render_csv(result);
  csv.close();

  if (manifest.mode == RunManifest::Mode::kCompare) {
    const std::string report_path = compare_report_path(manifest.output_path);
    std::ofstream report(report_path, std::ios::binary);
    if (!report) throw std::runtime_error("cannot open report file: " + report_path);
    report << render_compare_report(result);
  }
  return result.flagged_count;
}

}  // namespace oofsk
