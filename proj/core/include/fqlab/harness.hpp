#pragma once

// Experiment registry, configuration, orchestration across (q, seed) and
// report emission.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fqlab/field.hpp"

namespace fqlab {

using Json = nlohmann::ordered_json;

struct ExperimentConfig {
  std::string experiment;
  std::optional<std::uint32_t> p;
  std::uint32_t k = 1;
  std::optional<double> density;
  std::optional<std::uint64_t> size;
  std::optional<std::uint64_t> subgroup;
  std::optional<double> epsilon;
  std::optional<std::uint32_t> lambda;
  std::optional<std::uint32_t> beta;
  std::vector<std::uint64_t> seeds{1};
  std::string out;
  std::string format = "json";
  bool slow = false;
  // Worker threads for the (q, seed) runs; 0 picks the hardware concurrency.
  unsigned threads = 0;
};

// Sets one key from its text value; keys are the CLI flag names without
// dashes. Throws kInvalidParameters naming the key on a bad key or value.
void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value);
// Flat "key = value" lines; '#' starts a comment.
ExperimentConfig parse_config_text(std::string_view text);
ExperimentConfig load_config_file(const std::string& path);

// {7, 11, 19}, plus {23, 31, 43} with slow, unless p is set.
std::vector<Field> resolve_fields(const ExperimentConfig& config);

struct ExperimentInfo {
  std::string name;
  std::string summary;
  std::string parameters;
  bool measurement_only = false;
  bool seeded = true;
};
const std::vector<ExperimentInfo>& experiment_registry();
// Throws kUnknownExperiment.
const ExperimentInfo& find_experiment(std::string_view name);

// Rounds to 12 significant digits.
double round12(double x);

struct Check {
  std::string name;
  std::string relation;  // "<=", ">=", "==", "true"
  Json lhs;
  Json rhs;
  bool pass = false;
};

struct RunRow {
  std::uint32_t p = 0, k = 0, q = 0;
  std::uint64_t seed = 0;
  Json values = Json::object();
  std::vector<Check> checks;
  bool pass = true;
  double seconds = 0.0;
};

struct Report {
  std::string experiment;
  bool measurement_only = false;
  Json config = Json::object();
  std::vector<RunRow> runs;
  std::vector<Check> aggregate;  // checks over all seeds of one q
  bool pass = true;
  double total_seconds = 0.0;

  // 0 when every asserted check passes or the experiment is measurement-only.
  int exit_code() const { return pass || measurement_only ? 0 : 1; }
};

// Validates the configuration (throws kUnknownExperiment, kInvalidParameters,
// kNotADivisor, ...) and runs every (q, seed) pair.
Report run_experiment(const ExperimentConfig& config);

Json report_to_json(const Report& report, bool with_timing = true);
Report report_from_json(const Json& j);
// One line per run: q, seed, the scalar values, pass.
std::string report_to_csv(const Report& report);

// Writes JSON or CSV to `path`, or to `fallback` when the path is empty.
// Throws kIo with the path on failure.
void emit_report(const Report& report, const std::string& format, const std::string& path, std::ostream& fallback);

}  // namespace fqlab
