#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlhjb {

/// Config problem; the message carries the line number when there is one.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(int line, const std::string& what)
      : std::invalid_argument(line > 0 ? "config line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct RunConfig {
  std::string preset = "p1-isotropic-linear";
  int dim = 1;
  double sigma = 1.5;
  int grid_n = 32;
  int cell_n = 16;
  /// 0 accepts whatever the problem defines; otherwise must match it.
  int controls = 0;
  std::vector<double> ladder{1e-1, 1e-2, 1e-3, 1e-4};
  std::vector<double> eps_list{1.0 / 4, 1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64};
  double eps = 1.0 / 8;
  double tol = 1e-10;
  double effective_tol = 1e-9;
  std::string output_dir = "out";
  double schedule_exponent = 0.5;
  std::uint64_t seed = 20240607;
  double delta_ratio = 4.0;
  /// Evaluation point for cell, lp-verify and bounds-check, in [0, 1).
  double x = 0.0;
  double p = 0.0;
  int points_per_cell = 8;
  std::string anisotropy_table;
  std::string data_table;
  bool timing = false;

  bool operator==(const RunConfig&) const = default;
};

/**
 * Parses `key = value` lines. '#' starts a comment, lists are comma separated,
 * eps entries may be written as 1/k. Unknown keys, duplicates, malformed lines
 * and out-of-range values raise ConfigError with the offending line.
 */
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

/// Writes every key; parse_config(serialize_config(c)) == c.
void serialize_config(const RunConfig& config, std::ostream& out);
std::string serialize_config(const RunConfig& config);

/// FNV-1a hash of the serialized config, as 16 hex digits.
std::string config_hash(const RunConfig& config);

/// Range checks shared by the parser and programmatic callers.
void validate_config(const RunConfig& config);

}  // namespace nlhjb
