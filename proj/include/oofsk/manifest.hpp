#pragma once

// Run manifest: a small key/value file with nested sections driving the
// batch front-end. Parse errors identify the file, line, and field.
//
//   mode = compare            # analytic | simulate | compare
//   scenario = coherent       # coherent | noncoherent
//
//   [grid]
//   snr_db = 5 10 15          # lists are whitespace- or comma-separated
//   v = 1 0.8 0.5 0.2
//   L = 2
//   M = 4
//
//   [channel]
//   K = 0.125
//   rho = 0                   # 0 = independent antennas
//
//   [mc]
//   trials = 1000000
//   seed = 1
//
//   [output]
//   path = results.csv

#include <cctype>
#include <cstdint>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "oofsk/types.hpp"

namespace oofsk {

class ManifestError : public std::runtime_error {
 public:
  explicit ManifestError(const std::string& what) : std::runtime_error(what) {}
};

struct RunManifest {
  enum class Mode { kAnalytic, kSimulate, kCompare };

  Mode mode = Mode::kAnalytic;
  Scenario scenario = Scenario::kCoherent;
  std::vector<double> snr_db;
  std::vector<double> duty_cycles;   // v
  std::vector<int> antenna_counts;   // L
  std::vector<int> tone_counts;      // M
  double rician_k = 0.0;
  double correlation_rho = 0.0;
  std::uint64_t trials = 1000000;
  std::uint64_t seed = 1;
  std::string output_path;

  bool needs_mc() const { return mode != Mode::kAnalytic; }
  bool needs_analytic() const { return mode != Mode::kSimulate; }

  static RunManifest parse(std::istream& in, const std::string& name);
  static RunManifest parse_file(const std::string& path);
  void validate(const std::string& name = "manifest") const;
};

inline const char* to_string(RunManifest::Mode m) {
  switch (m) {
    case RunManifest::Mode::kAnalytic: return "analytic";
    case RunManifest::Mode::kSimulate: return "simulate";
    default: return "compare";
  }
}

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (std::isspace(static_cast<unsigned char>(ch)) || ch == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

[[noreturn]] inline void manifest_fail(const std::string& name, int line, const std::string& what) {
  throw ManifestError(name + ":" + std::to_string(line) + ": " + what);
}

inline double parse_real(const std::string& name, int line, const std::string& field,
                         const std::string& token) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(token, &pos);
    if (pos != token.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    manifest_fail(name, line, field + ": expected a real number, got '" + token + "'");
  }
}

inline std::int64_t parse_int(const std::string& name, int line, const std::string& field,
                              const std::string& token) {
  try {
    std::size_t pos = 0;
    const std::int64_t v = std::stoll(token, &pos);
    if (pos != token.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    manifest_fail(name, line, field + ": expected an integer, got '" + token + "'");
  }
}

inline std::uint64_t parse_u64(const std::string& name, int line, const std::string& field,
                               const std::string& token) {
  try {
    std::size_t pos = 0;
    const std::uint64_t v = std::stoull(token, &pos);
    if (pos != token.size() || token.front() == '-') throw std::invalid_argument("bad");
    return v;
  } catch (const std::exception&) {
    manifest_fail(name, line, field + ": expected an unsigned integer, got '" + token + "'");
  }
}

}  // namespace detail

inline RunManifest RunManifest::parse(std::istream& in, const std::string& name) {
  RunManifest m;
  m.output_path.clear();
  bool saw_mode = false;
  bool saw_scenario = false;
  std::string section;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string text = detail::trim(raw);
    if (text.empty()) continue;

    if (text.front() == '[') {
      if (text.back() != ']')
        detail::manifest_fail(name, line, "unterminated section header '" + text + "'");
      section = detail::trim(text.substr(1, text.size() - 2));
      if (section != "grid" && section != "channel" && section != "mc" && section != "output")
        detail::manifest_fail(name, line, "unknown section [" + section + "]");
      continue;
    }

    const std::size_t eq = text.find('=');
    if (eq == std::string::npos)
      detail::manifest_fail(name, line, "expected 'key = value', got '" + text + "'");
    const std::string key = detail::trim(text.substr(0, eq));
    const std::string value = detail::trim(text.substr(eq + 1));
    if (key.empty()) detail::manifest_fail(name, line, "empty key");
    if (value.empty()) detail::manifest_fail(name, line, key + ": empty value");
    const std::vector<std::string> tokens = detail::split_list(value);
    const std::string field = section.empty() ? key : "[" + section + "] " + key;

    auto reals = [&] {
      std::vector<double> out;
      for (const auto& t : tokens) out.push_back(detail::parse_real(name, line, field, t));
      return out;
    };
    auto ints = [&] {
      std::vector<int> out;
      for (const auto& t : tokens)
        out.push_back(static_cast<int>(detail::parse_int(name, line, field, t)));
      return out;
    };
    auto single = [&]() -> const std::string& {
      if (tokens.size() != 1)
        detail::manifest_fail(name, line, field + ": expected a single value");
      return tokens.front();
    };

    if (section.empty()) {
      if (key == "mode") {
        const std::string& v = single();
        if (v == "analytic") m.mode = Mode::kAnalytic;
        else if (v == "simulate") m.mode = Mode::kSimulate;
        else if (v == "compare") m.mode = Mode::kCompare;
        else detail::manifest_fail(name, line, "mode: expected analytic|simulate|compare, got '" + v + "'");
        saw_mode = true;
      } else if (key == "scenario") {
        const std::string& v = single();
        if (v == "coherent") m.scenario = Scenario::kCoherent;
        else if (v == "noncoherent") m.scenario = Scenario::kNoncoherent;
        else detail::manifest_fail(name, line, "scenario: expected coherent|noncoherent, got '" + v + "'");
        saw_scenario = true;
      } else {
        detail::manifest_fail(name, line, "unknown top-level key '" + key + "'");
      }
    } else if (section == "grid") {
      if (key == "snr_db") m.snr_db = reals();
      else if (key == "v") m.duty_cycles = reals();
      else if (key == "L") m.antenna_counts = ints();
      else if (key == "M") m.tone_counts = ints();
      else detail::manifest_fail(name, line, "unknown [grid] key '" + key + "'");
    } else if (section == "channel") {
      if (key == "K") m.rician_k = detail::parse_real(name, line, field, single());
      else if (key == "rho") m.correlation_rho = detail::parse_real(name, line, field, single());
      else detail::manifest_fail(name, line, "unknown [channel] key '" + key + "'");
    } else if (section == "mc") {
      if (key == "trials") m.trials = detail::parse_u64(name, line, field, single());
      else if (key == "seed") m.seed = detail::parse_u64(name, line, field, single());
      else detail::manifest_fail(name, line, "unknown [mc] key '" + key + "'");
    } else {  // output
      if (key == "path") m.output_path = value;
      else detail::manifest_fail(name, line, "unknown [output] key '" + key + "'");
    }
  }
  if (!saw_mode) throw ManifestError(name + ": missing required key 'mode'");
  if (!saw_scenario) throw ManifestError(name + ": missing required key 'scenario'");
  return m;
}

inline RunManifest RunManifest::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ManifestError(path + ": cannot open manifest");
  return parse(in, path);
}

inline void RunManifest::validate(const std::string& name) const {
  auto fail = [&](const std::string& what) { throw ManifestError(name + ": " + what); };
  if (snr_db.empty()) fail("[grid] snr_db: empty grid");
  if (duty_cycles.empty()) fail("[grid] v: empty grid");
  if (antenna_counts.empty()) fail("[grid] L: empty grid");
  if (tone_counts.empty()) fail("[grid] M: empty grid");
  for (double v : duty_cycles)
    if (!(v > 0.0) || v > 1.0) fail("[grid] v: values must lie in (0, 1]");
  for (int l : antenna_counts)
    if (l < 1) fail("[grid] L: values must be >= 1");
  for (int m : tone_counts)
    if (m < 2) fail("[grid] M: values must be >= 2");
  for (double s : snr_db)
    if (std::isnan(s)) fail("[grid] snr_db: NaN entry");
  if (std::isnan(rician_k) || rician_k < 0.0) fail("[channel] K: must be >= 0");
  if (!(correlation_rho >= 0.0) || correlation_rho >= 1.0)
    fail("[channel] rho: must lie in [0, 1)");
  if (correlation_rho != 0.0 && needs_analytic())
    fail("[channel] rho: correlated antennas require mode = simulate "
         "(closed-form averages cover independent antennas only)");
  if (needs_mc() && trials == 0) fail("[mc] trials: must be >= 1");
  if (output_path.empty()) fail("[output] path: required (or pass --out)");
}

}  // namespace oofsk
