#include "epidet/strategy_eval.hpp"

#include <cmath>
#include <iomanip>
#include <stdexcept>

#include "epidet/parallel.hpp"

namespace epidet {
namespace {

void summarize(StrategyReport& report) {
  const auto n = static_cast<double>(report.records.size());
  double tau_sum = 0.0;
  double cost_sum = 0.0;
  double fa_sum = 0.0;
  for (const auto& r : report.records) {
    tau_sum += static_cast<double>(r.tau);
    cost_sum += r.cost;
    fa_sum += 1.0 - r.p_tau;
  }
  report.mean_tau = tau_sum / n;
  report.mean_cost = cost_sum / n;
  report.pfa = fa_sum / n;
  double tau_ss = 0.0;
  double cost_ss = 0.0;
  for (const auto& r : report.records) {
    tau_ss += std::pow(static_cast<double>(r.tau) - report.mean_tau, 2);
    cost_ss += std::pow(r.cost - report.mean_cost, 2);
  }
  report.sd_tau = n > 1 ? std::sqrt(tau_ss / (n - 1)) : 0.0;
  report.sd_cost = n > 1 ? std::sqrt(cost_ss / (n - 1)) : 0.0;
}

}  // namespace

Policy Policy::optimal(std::shared_ptr<const DetectionMap> map) {
  Policy p;
  p.kind = PolicyKind::optimal_map;
  p.map = std::move(map);
  p.name = "Optimal";
  return p;
}

Policy Policy::large_population(std::shared_ptr<const DetectionMap> map) {
  Policy p;
  p.kind = PolicyKind::lp_map;
  p.map = std::move(map);
  p.name = "LP";
  return p;
}

Policy Policy::threshold_p(double level) {
  Policy p;
  p.kind = PolicyKind::threshold_p;
  p.level = level;
  p.name = "Threshold-P";
  return p;
}

Policy Policy::threshold_t(std::size_t stage) {
  Policy p;
  p.kind = PolicyKind::threshold_t;
  p.stage = stage;
  p.name = "Threshold-t";
  return p;
}

void Policy::validate() const {
  switch (kind) {
    case PolicyKind::optimal_map:
      if (!map) throw std::invalid_argument("optimal map policy without a map");
      break;
    case PolicyKind::lp_map:
      if (!map) throw std::invalid_argument("LP map policy without a map");
      if (map->variant() != ModelVariant::lp2d) {
        throw std::invalid_argument("LP map policy requires an lp2d map");
      }
      break;
    case PolicyKind::threshold_p:
      if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("threshold level must lie in (0, 1)");
      break;
    case PolicyKind::threshold_t:
      if (stage < 1) throw std::invalid_argument("threshold stage must be >= 1");
      break;
  }
}

bool decide(const Policy& policy, const ReducedState& x, std::size_t t) {
  switch (policy.kind) {
    case PolicyKind::optimal_map:
    case PolicyKind::lp_map:
      return policy.map->announce(x);
    case PolicyKind::threshold_p:
      return x.p >= policy.level;
    case PolicyKind::threshold_t:
      return t >= policy.stage;
  }
  return true;
}

FrozenScenarios freeze_scenarios(const ReducedState& x0, std::size_t n_paths, std::size_t horizon,
                                 const EpidemicParams& params, ModelVariant variant,
                                 std::uint64_t master_seed, std::size_t workers) {
  if (n_paths < 1) throw std::invalid_argument("freeze_scenarios: n_paths must be >= 1");
  params.validate();
  validate(x0, params);
  FrozenScenarios sc;
  sc.x0 = x0;
  sc.horizon = horizon;
  sc.master_seed = master_seed;
  sc.variant = variant;
  sc.params = params;
  sc.paths.resize(n_paths);
  parallel_for(n_paths, workers == 0 ? default_workers() : workers, [&](std::size_t n) {
    RngStream rng = RngStream::derive(master_seed, StreamLabel::evaluation, 0, n);
    sc.paths[n] = simulate_reduced(x0, horizon, params, variant, rng);
  });
  return sc;
}

StrategyReport evaluate(const Policy& policy, const FrozenScenarios& scenarios,
                        const CostParams& costs) {
  policy.validate();
  costs.validate();
  if (scenarios.paths.empty()) throw std::invalid_argument("evaluate: no scenarios");
  StrategyReport report;
  report.policy = policy.name;
  report.n_paths = scenarios.size();
  report.scenario_seed = scenarios.master_seed;
  report.horizon = scenarios.horizon;
  report.x0 = scenarios.x0;
  report.records.reserve(scenarios.size());
  std::vector<double> p_path;
  for (const auto& path : scenarios.paths) {
    PathRecord rec;
    rec.tau = scenarios.horizon;
    rec.capped = true;
    for (std::size_t t = 1; t <= scenarios.horizon; ++t) {
      if (decide(policy, path[t], t)) {
        rec.tau = t;
        rec.capped = false;
        break;
      }
    }
    p_path.clear();
    for (std::size_t s = 0; s <= rec.tau; ++s) p_path.push_back(path[s].p);
    rec.cost = pathwise_cost(p_path, rec.tau, costs);
    rec.p_tau = path[rec.tau].p;
    if (rec.capped) ++report.cap_hits;
    report.records.push_back(rec);
  }
  summarize(report);
  return report;
}

StrategyReport evaluate(const Policy& policy, const ReducedState& x0, std::size_t n_paths,
                        const EpidemicParams& params, const CostParams& costs,
                        ModelVariant variant, std::uint64_t master_seed, std::size_t horizon) {
  return evaluate(policy, freeze_scenarios(x0, n_paths, horizon, params, variant, master_seed),
                  costs);
}

PairedComparison paired_compare(const StrategyReport& a, const StrategyReport& b) {
  if (a.records.size() != b.records.size() || a.scenario_seed != b.scenario_seed ||
      a.horizon != b.horizon || !(a.x0 == b.x0)) {
    throw std::invalid_argument("paired_compare: reports use different scenario sets");
  }
  PairedComparison out;
  const std::size_t n = a.records.size();
  out.differences.reserve(n);
  std::size_t better = 0;
  std::size_t ties = 0;
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double diff = a.records[k].cost - b.records[k].cost;
    out.differences.push_back(diff);
    sum += diff;
    if (diff < 0.0) ++better;
    if (diff == 0.0) ++ties;
  }
  const auto nd = static_cast<double>(n);
  out.mean_difference = sum / nd;
  double ss = 0.0;
  for (double d : out.differences) ss += (d - out.mean_difference) * (d - out.mean_difference);
  out.se_difference = n > 1 ? std::sqrt(ss / (nd - 1) / nd) : 0.0;
  out.fraction_a_better = static_cast<double>(better) / nd;
  out.fraction_ties = static_cast<double>(ties) / nd;
  return out;
}

std::vector<StrategyReport> sweep_threshold_t(const FrozenScenarios& scenarios,
                                              const CostParams& costs, std::size_t first,
                                              std::size_t last) {
  std::vector<StrategyReport> out;
  for (std::size_t stage = std::max<std::size_t>(first, 1); stage <= last && stage <= scenarios.horizon;
       ++stage) {
    out.push_back(evaluate(Policy::threshold_t(stage), scenarios, costs));
  }
  return out;
}

void write_records_csv(std::ostream& out, const std::vector<StrategyReport>& reports) {
  out << "policy,path,tau,cost,p_tau,capped\n";
  out << std::setprecision(17);
  for (const auto& rep : reports) {
    for (std::size_t k = 0; k < rep.records.size(); ++k) {
      const auto& r = rep.records[k];
      out << rep.policy << ',' << k << ',' << r.tau << ',' << r.cost << ',' << r.p_tau << ','
          << (r.capped ? 1 : 0) << '\n';
    }
  }
}

void write_summary_csv(std::ostream& out, const std::vector<StrategyReport>& reports) {
  out << "policy,mean_tau,sd_tau,mean_cost,sd_cost,pfa,n_paths,cap_hits\n";
  out << std::setprecision(10);
  for (const auto& r : reports) {
    out << r.policy << ',' << r.mean_tau << ',' << r.sd_tau << ',' << r.mean_cost << ','
        << r.sd_cost << ',' << r.pfa << ',' << r.n_paths << ',' << r.cap_hits << '\n';
  }
}

}  // namespace epidet
