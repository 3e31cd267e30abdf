// fqlab: run counting experiments over small finite fields.

#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "fqlab/error.hpp"
#include "fqlab/harness.hpp"

namespace {

constexpr int kUsage = 2;

int list_experiments() {
  for (const auto& e : fqlab::experiment_registry()) {
    std::cout << e.name << (e.measurement_only ? "  [measurement only]" : "") << "\n"
              << "    " << e.summary << "\n"
              << "    parameters: " << e.parameters << (e.seeded ? "; --seeds" : "; unseeded") << "\n";
  }
  return 0;
}

bool is_usage(fqlab::ErrorCode c) {
  using fqlab::ErrorCode;
  switch (c) {
    case ErrorCode::kConstructionFailed:
    case ErrorCode::kDivisionByZero:
      return false;
    default:
      return true;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact counting experiments for rectangles and additive energy over F_q"};
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list", "Print the experiment registry");
  auto* run = app.add_subcommand("run", "Run one experiment");

  // Flag text is applied after the config file, so flags win.
  std::vector<std::pair<std::string, std::string>> flags;
  std::string config_path;
  run->add_option("--config", config_path, "key=value config file");
  const std::pair<const char*, const char*> options[] = {
      {"experiment", "experiment name, see `fqlab list`"},
      {"p", "field characteristic; default runs q = 7, 11, 19"},
      {"k", "extension degree (default 1)"},
      {"density", "set size as a fraction of q^2"},
      {"size", "set size"},
      {"subgroup", "order of the multiplicative subgroup A"},
      {"epsilon", "regularity target for the box norm of h"},
      {"lambda", "side quadrance, canonical element index"},
      {"beta", "second side quadrance, canonical element index"},
      {"seeds", "comma-separated seeds (default 1)"},
      {"out", "output path (default stdout)"},
      {"format", "json or csv"},
      {"threads", "worker threads, 0 for all cores"},
  };
  for (const auto& [name, help] : options) {
    run->add_option_function<std::string>(
        std::string("--") + name, [&flags, name](const std::string& v) { flags.emplace_back(name, v); }, help);
  }
  run->add_flag_function("--slow", [&flags](std::int64_t) { flags.emplace_back("slow", "true"); },
                         "Add q = 23, 31, 43 to the default field list");
  run->get_option("--density")->excludes(run->get_option("--size"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  if (list->parsed()) return list_experiments();

  fqlab::ExperimentConfig config;
  fqlab::Report report;
  try {
    if (!config_path.empty()) config = fqlab::load_config_file(config_path);
    for (const auto& [key, value] : flags) fqlab::apply_setting(config, key, value);
    if (config.experiment.empty()) {
      std::cerr << "fqlab: --experiment is required (see 'fqlab list')\n";
      return kUsage;
    }
    report = fqlab::run_experiment(config);
  } catch (const fqlab::Error& e) {
    std::cerr << "fqlab: " << e.what() << "\n";
    return is_usage(e.code()) ? kUsage : 1;
  }

  try {
    fqlab::emit_report(report, config.format, config.out, std::cout);
  } catch (const fqlab::Error& e) {
    std::cerr << "fqlab: " << e.what() << "\n";
    return kUsage;
  }

  std::size_t checks = 0, failed = 0;
  for (const auto& r : report.runs) {
    for (const auto& c : r.checks) {
      ++checks;
      failed += c.pass ? 0 : 1;
    }
  }
  for (const auto& c : report.aggregate) {
    ++checks;
    failed += c.pass ? 0 : 1;
  }
  std::cerr << report.experiment << ": " << report.runs.size() << " runs, " << checks << " checks, " << failed
            << " failed" << (report.measurement_only ? " (measurement only)" : "") << "\n";
  return report.exit_code();
}
