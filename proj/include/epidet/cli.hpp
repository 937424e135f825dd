#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "epidet/io.hpp"
#include "epidet/strategy_eval.hpp"

namespace epidet::cli {

/// Invalid or incompatible configuration; maps to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum ExitCode : int { ok = 0, config_error = 2, runtime_error = 3 };

struct PolicySpec {
  PolicyKind kind = PolicyKind::threshold_p;
  double level = 0.8;
  std::size_t stage = 8;
  std::string map_path;  ///< map policies only
};

struct CostSweepEntry {
  double c_fa = 0.0;
  std::string map_path;
};

struct EvaluateSettings {
  ReducedState x0{1990, 10, 0.1};
  std::size_t n_paths = 1000;
  std::size_t horizon = 50;
  ModelVariant scenario_variant = ModelVariant::full3d;
  std::vector<PolicySpec> policies;
  std::vector<CostSweepEntry> c_fa_sweep;
  std::optional<std::pair<std::size_t, std::size_t>> threshold_t_sweep;
};

struct SimulateSettings {
  ReducedState x0{1990, 10, 0.1};
  std::size_t n_paths = 3;
  std::size_t horizon = 30;
  bool two_pool = false;
  std::vector<PoolState> two_pool_initial;  ///< one entry per pool
};

struct RunConfig {
  json document;  ///< effective config after command-line overrides
  std::string hash;
  std::uint64_t seed = 0;
  ModelVariant variant = ModelVariant::full3d;
  EpidemicParams epidemic;
  CostParams costs;
  SrmcConfig srmc;
  EvaluateSettings evaluate;
  SimulateSettings simulate;
  std::string out_dir = "out";
  std::size_t workers = 0;  ///< 0 = available cores
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::size_t> workers;
  std::optional<std::string> variant;
};

/// Validates every section; throws ConfigError. The seed is mandatory.
RunConfig parse_config(json document, const Overrides& overrides);

/// `# epidet config_hash=<hex> seed=<n>` header written at the top of CSVs.
std::string provenance_line(const std::string& hash, std::uint64_t seed);

void cmd_solve(const RunConfig& config, std::ostream& log);
void cmd_evaluate(const RunConfig& config, const std::vector<std::string>& map_paths,
                  bool allow_mismatch, std::ostream& log);
void cmd_simulate(const RunConfig& config, std::ostream& log);
void cmd_export_map(const std::string& map_path, const std::string& out_dir, std::ostream& log);

/// Entry point shared by the executable and the tests. Returns the exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace epidet::cli
