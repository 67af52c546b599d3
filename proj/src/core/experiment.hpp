#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "core/errors.hpp"

namespace bandloop {

/// Flat key=value configuration with typed access. The kind decides which
/// keys are legal; unknown keys are reported with their name. Execution
/// parameters (thread count, output path) live outside the config so that
/// reports depend only on (config, seed).
class ExperimentConfig {
 public:
  static const std::vector<std::string>& known_kinds();

  static ExperimentConfig from_file(const std::string& path);
  /// Parses "key = value" lines; '#' starts a comment.
  static ExperimentConfig from_text(const std::string& text);

  void set(const std::string& key, const std::string& value);
  void set_kind(const std::string& kind);
  const std::string& kind() const { return kind_; }

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  std::vector<double> get_double_list(const std::string& key,
                                      const std::vector<double>& fallback) const;
  std::vector<int> get_int_list(const std::string& key, const std::vector<int>& fallback) const;

  /// Validates the key set and basic ranges for the configured kind; throws
  /// ConfigError naming the offending key.
  void validate() const;

  /// Canonical "key = value" text, sorted; includes the kind. Round-trips
  /// through from_text without loss.
  std::string canonical_text() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::string kind_;
  std::map<std::string, std::string> values_;
};

using Cell = std::variant<double, std::string>;

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string comparison;  // "<=", ">=", "in", "strict-decrease"
};

/// Machine-readable result of one experiment. Everything except `timings`
/// and `threads_used` is a pure function of the config; reports re-run at a
/// different thread count are byte-identical once those fields are dropped.
struct ExperimentReport {
  std::string format_version = "bandloop-report/1";
  std::string kind;
  std::vector<std::pair<std::string, std::string>> config_echo;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::pair<std::string, double>> summary;
  std::vector<CheckResult> checks;
  std::vector<std::string> failures;  // quarantined per-sample errors
  std::vector<std::pair<std::string, double>> timings;
  int threads_used = 1;

  bool passed() const;
  std::string brief() const;  // one-line human summary per check
};

struct RunOptions {
  int threads = 1;
};

ExperimentReport run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

}  // namespace bandloop
