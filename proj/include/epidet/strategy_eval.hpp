#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "epidet/cost_model.hpp"
#include "epidet/reduced_model.hpp"
#include "epidet/srmc.hpp"

namespace epidet {

enum class PolicyKind { optimal_map, lp_map, threshold_p, threshold_t };

/// A detection rule. Map policies hold a stationary (converged) map; the LP
/// policy's map is built on (I1, P) and ignores S1.
struct Policy {
  PolicyKind kind = PolicyKind::threshold_p;
  double level = 0.8;        ///< threshold_p
  std::size_t stage = 8;     ///< threshold_t
  std::shared_ptr<const DetectionMap> map;
  std::string name;

  static Policy optimal(std::shared_ptr<const DetectionMap> map);
  static Policy large_population(std::shared_ptr<const DetectionMap> map);
  static Policy threshold_p(double level);
  static Policy threshold_t(std::size_t stage);

  /// Throws std::invalid_argument on a malformed policy.
  void validate() const;
};

/// Announce decision at period t in state x.
bool decide(const Policy& policy, const ReducedState& x, std::size_t t);

/// Full-horizon reduced-model paths shared by every policy under comparison.
struct FrozenScenarios {
  ReducedState x0;
  std::size_t horizon = 50;
  std::uint64_t master_seed = 0;
  ModelVariant variant = ModelVariant::full3d;
  EpidemicParams params;
  std::vector<std::vector<ReducedState>> paths;

  std::size_t size() const { return paths.size(); }
};

FrozenScenarios freeze_scenarios(const ReducedState& x0, std::size_t n_paths, std::size_t horizon,
                                 const EpidemicParams& params, ModelVariant variant,
                                 std::uint64_t master_seed, std::size_t workers = 1);

struct PathRecord {
  std::size_t tau = 0;
  double cost = 0.0;
  double p_tau = 0.0;
  bool capped = false;  ///< forced announcement at the horizon
};

struct StrategyReport {
  std::string policy;
  double mean_tau = 0.0;
  double sd_tau = 0.0;
  double mean_cost = 0.0;
  double sd_cost = 0.0;
  double pfa = 0.0;  ///< mean of 1 - P_tau
  std::size_t n_paths = 0;
  std::size_t cap_hits = 0;
  std::vector<PathRecord> records;
  // Identity of the scenario set, checked by paired_compare.
  std::uint64_t scenario_seed = 0;
  std::size_t horizon = 0;
  ReducedState x0;
};

StrategyReport evaluate(const Policy& policy, const FrozenScenarios& scenarios,
                        const CostParams& costs);
/// Convenience: freezes n_paths scenarios from `master_seed` and evaluates.
StrategyReport evaluate(const Policy& policy, const ReducedState& x0, std::size_t n_paths,
                        const EpidemicParams& params, const CostParams& costs,
                        ModelVariant variant, std::uint64_t master_seed,
                        std::size_t horizon = 50);

struct PairedComparison {
  std::vector<double> differences;  ///< cost_a - cost_b per scenario
  double mean_difference = 0.0;
  double se_difference = 0.0;
  double fraction_a_better = 0.0;   ///< strictly lower cost
  double fraction_ties = 0.0;
};

/// Scenario-by-scenario comparison. Throws std::invalid_argument if the two
/// reports were not computed on the same scenario set.
PairedComparison paired_compare(const StrategyReport& a, const StrategyReport& b);

/// Threshold-t reports for every stage in [first, last].
std::vector<StrategyReport> sweep_threshold_t(const FrozenScenarios& scenarios,
                                              const CostParams& costs, std::size_t first,
                                              std::size_t last);

void write_records_csv(std::ostream& out, const std::vector<StrategyReport>& reports);
void write_summary_csv(std::ostream& out, const std::vector<StrategyReport>& reports);

}  // namespace epidet
