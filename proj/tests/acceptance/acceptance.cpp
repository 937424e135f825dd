// End-to-end acceptance runner. Prints one PASS/FAIL line per criterion and
// exits with the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>

#include "../support/oracles.hpp"
#include "../support/properties.hpp"
#include "epidet/parallel.hpp"
#include "epidet/srmc.hpp"
#include "epidet/strategy_eval.hpp"

using namespace epidet;

namespace {

constexpr std::uint64_t kSeed = 1;
const ReducedState kStart{1990, 10, 0.1};
constexpr std::size_t kPaths = 1000;
constexpr std::size_t kHorizon = 50;

struct Outcome {
  std::string name;
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

bool within(double value, double target, double tol) { return std::abs(value - target) <= tol; }

SolveResult timed_solve(const SrmcConfig& cfg, const CostParams& costs, ModelVariant variant,
                        const std::string& label) {
  const auto t0 = std::chrono::steady_clock::now();
  auto res = solve(cfg, EpidemicParams{}, costs, variant);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cerr << "  solved " << label << ": " << res.maps.size() << " iterations, "
            << fmt("%.1f", secs) << " s, converged=" << res.converged << '\n';
  return res;
}

SrmcConfig base_config() {
  SrmcConfig cfg;
  cfg.master_seed = kSeed;
  cfg.workers = default_workers();
  return cfg;
}

std::string describe(const StrategyReport& r) {
  std::ostringstream s;
  s << r.policy << " tau=" << fmt("%.2f", r.mean_tau) << " sd_tau=" << fmt("%.2f", r.sd_tau)
    << " cost=" << fmt("%.3f", r.mean_cost) << " pfa=" << fmt("%.1f%%", 100 * r.pfa);
  return s.str();
}

Outcome baseline_comparison(const StrategyReport& opt, const StrategyReport& thp,
                            const StrategyReport& tht) {
  Outcome o{"baseline comparison at C_FA=20"};
  std::ostringstream why;
  bool ok = true;
  auto need = [&](bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      why << " [miss: " << what << "]";
    }
  };
  need(within(opt.mean_cost, 6.53, 0.25), "Optimal cost 6.53+-0.25");
  need(within(opt.mean_tau, 8.86, 0.45), "Optimal tau 8.86+-0.45");
  need(within(opt.pfa, 0.082, 0.025), "Optimal PFA 8.2+-2.5pp");
  need(within(thp.mean_cost, 7.03, 0.25), "Threshold-P cost 7.03+-0.25");
  need(within(thp.pfa, 0.153, 0.03), "Threshold-P PFA 15.3+-3pp");
  need(within(tht.mean_cost, 7.18, 0.3), "Threshold-t cost 7.18+-0.3");
  need(tht.sd_tau == 0.0, "Threshold-t sd(tau)=0");
  need(opt.mean_cost < thp.mean_cost && thp.mean_cost < tht.mean_cost, "cost ordering");
  o.pass = ok;
  o.detail = describe(opt) + "; " + describe(thp) + "; " + describe(tht) + why.str();
  return o;
}

Outcome cost_sensitivity(const std::map<int, StrategyReport>& by_cfa) {
  Outcome o{"false-alarm cost sensitivity C_FA in {10,20,30}"};
  const std::map<int, std::pair<double, double>> target{{10, {6.84, 0.214}}, {20, {8.87, 0.083}},
                                                        {30, {9.61, 0.053}}};
  std::ostringstream s;
  bool ok = true;
  for (const auto& [cfa, t] : target) {
    const auto& r = by_cfa.at(cfa);
    const bool tau_ok = within(r.mean_tau, t.first, 0.5);
    const bool pfa_ok = within(r.pfa, t.second, 0.03);
    ok = ok && tau_ok && pfa_ok;
    s << "C_FA=" << cfa << " tau=" << fmt("%.2f", r.mean_tau) << (tau_ok ? "" : "(miss)")
      << " pfa=" << fmt("%.1f%%", 100 * r.pfa) << (pfa_ok ? "" : "(miss)") << "; ";
  }
  const auto &a = by_cfa.at(10), &b = by_cfa.at(20), &c = by_cfa.at(30);
  const bool mono = a.mean_tau < b.mean_tau && b.mean_tau < c.mean_tau && a.pfa > b.pfa && b.pfa > c.pfa;
  s << "monotone=" << (mono ? "yes" : "no");
  o.pass = ok && mono;
  o.detail = s.str();
  return o;
}

Outcome one_step_boundary(const SolveResult& lp) {
  Outcome o{"one-step boundary at I=10"};
  const auto b = extract_boundary(lp.maps.at(1), 1990, 10);
  const double analytic = oracle::one_step_boundary(10, 0.01, 0.75, 20, 1);
  o.pass = b.crossed && b.p >= 0.55 && b.p <= 0.65;
  o.detail = "fitted P=" + fmt("%.4f", b.p) + " analytic P*=" + fmt("%.4f", analytic) +
             " window [0.55, 0.65]";
  return o;
}

Outcome loess_oracle() {
  Outcome o{"loess vs dense weighted least squares"};
  auto rng = props::test_rng(100);
  double worst_mean = 0.0, worst_kernel = 0.0, worst_sum = 0.0;
  const int datasets = 40;
  for (int k = 0; k < datasets; ++k) {
    const auto d = static_cast<Eigen::Index>(1 + rng.below(3));
    const auto n = static_cast<Eigen::Index>(10 + rng.below(41));
    Eigen::MatrixXd X(n, d);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      double f = 0.0;
      for (Eigen::Index j = 0; j < d; ++j) {
        X(i, j) = (1.0 + 10.0 * j) * rng.uniform();
        f += std::cos(X(i, j));
      }
      y[i] = f + 0.2 * rng.normal();
    }
    LoessConfig cfg;
    cfg.span = 0.3 + 0.7 * rng.uniform();
    const auto model = LoessModel::fit(X, y, cfg);
    for (int q = 0; q < 25; ++q) {
      std::vector<double> x(static_cast<std::size_t>(d));
      for (Eigen::Index j = 0; j < d; ++j) x[static_cast<std::size_t>(j)] = (1.0 + 10.0 * j) * rng.uniform();
      const auto ref = oracle::dense_wls(X, y, x, cfg.span, cfg.degree);
      const auto l = model.equivalent_kernel(x);
      worst_mean = std::max(worst_mean, std::abs(model.predict(x).mean - ref.mean));
      worst_kernel = std::max(worst_kernel, (l - ref.kernel).cwiseAbs().maxCoeff());
      worst_sum = std::max(worst_sum, std::abs(l.sum() - 1.0));
    }
  }
  o.pass = worst_mean <= 1e-8 && worst_kernel <= 1e-8 && worst_sum <= 1e-10;
  o.detail = std::to_string(datasets) + " datasets: max|mean diff|=" + fmt("%.2e", worst_mean) +
             " max|kernel diff|=" + fmt("%.2e", worst_kernel) + " max|sum l - 1|=" +
             fmt("%.2e", worst_sum);
  return o;
}

Outcome boundary_convergence(const SolveResult& lp) {
  Outcome o{"boundary convergence, LP2D iterations 19 vs 20"};
  if (lp.traces.size() < 20) {
    o.detail = "solve stopped after " + std::to_string(lp.traces.size()) + " iterations";
    return o;
  }
  const double dist = boundary_distance(lp.traces[18], lp.traces[19]);
  // Also report where the largest shift sits.
  double worst_i = 0.0, worst = -1.0;
  for (std::size_t k = 0; k < lp.traces[19].points.size(); ++k) {
    const double gap = std::abs(lp.traces[18].points[k].p - lp.traces[19].points[k].p);
    if (gap > worst) {
      worst = gap;
      worst_i = lp.traces[19].points[k].i1;
    }
  }
  o.pass = dist <= 0.05;
  o.detail = "sup distance=" + fmt("%.4f", dist) + " (largest at I=" + fmt("%.0f", worst_i) +
             ") limit 0.05";
  return o;
}

Outcome property_suites() {
  Outcome o{"property suites"};
  const std::pair<const char*, props::Check (*)()> suites[] = {
      {"ssa", [] { return props::ssa_invariants(); }},
      {"p-absorption", [] { return props::p_absorption_and_clamping(); }},
      {"lhs-bins", [] { return props::lhs_marginal_bins(); }},
      {"acquisition-symmetry", [] { return props::acquisition_symmetry(); }},
      {"tau-range", [] { return props::tau_within_horizon(); }},
      {"pathwise-zero", [] { return props::pathwise_cost_at_zero(); }},
      {"bit-identical", [] { return props::bit_identical_reruns(); }},
  };
  std::ostringstream s;
  o.pass = true;
  for (const auto& [name, fn] : suites) {
    const auto c = fn();
    s << name << '=' << (c.ok ? "ok" : "FAIL(" + c.detail + ")") << ' ';
    o.pass = o.pass && c.ok;
  }
  o.detail = s.str();
  return o;
}

Outcome paired_claim(const StrategyReport& opt, const StrategyReport& thp) {
  Outcome o{"Optimal beats Threshold-P on > 70% of scenarios"};
  const auto cmp = paired_compare(opt, thp);
  o.pass = cmp.fraction_a_better > 0.70;
  o.detail = "better on " + fmt("%.1f%%", 100 * cmp.fraction_a_better) + ", ties " +
             fmt("%.1f%%", 100 * cmp.fraction_ties) + ", mean difference " +
             fmt("%.3f", cmp.mean_difference);
  return o;
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  std::cerr << "acceptance: seed " << kSeed << ", " << default_workers() << " worker(s)\n";

  // LP2D solve run to the full 20 iterations.
  auto lp_cfg = base_config();
  lp_cfg.tol = 0.0;
  const auto lp = timed_solve(lp_cfg, CostParams{}, ModelVariant::lp2d, "lp2d C_FA=20");

  // FULL3D solves at each false-alarm cost, default stopping rule.
  const auto scenarios = freeze_scenarios(kStart, kPaths, kHorizon, EpidemicParams{},
                                          ModelVariant::full3d, kSeed, default_workers());
  std::map<int, StrategyReport> optimal;
  for (int cfa : {10, 20, 30}) {
    const CostParams costs{double(cfa), 1.0};
    auto cfg = base_config();
    cfg.tol = 0.05 * costs.c_delay;
    const auto res = timed_solve(cfg, costs, ModelVariant::full3d, "full3d C_FA=" + std::to_string(cfa));
    auto policy = Policy::optimal(std::make_shared<const DetectionMap>(res.maps.back()));
    optimal.emplace(cfa, evaluate(policy, scenarios, costs));
  }
  const CostParams costs;
  const auto thp = evaluate(Policy::threshold_p(0.8), scenarios, costs);
  const auto tht = evaluate(Policy::threshold_t(8), scenarios, costs);

  const Outcome outcomes[] = {
      baseline_comparison(optimal.at(20), thp, tht),
      cost_sensitivity(optimal),
      one_step_boundary(lp),
      loess_oracle(),
      boundary_convergence(lp),
      property_suites(),
      paired_claim(optimal.at(20), thp),
  };

  int failed = 0;
  for (std::size_t k = 0; k < std::size(outcomes); ++k) {
    const auto& o = outcomes[k];
    std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << k + 1 << "] " << o.name << ": " << o.detail
              << '\n';
    failed += o.pass ? 0 : 1;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << (std::size(outcomes) - failed) << '/' << std::size(outcomes)
            << " criteria passed in " << fmt("%.0f", secs) << " s\n";
  return failed;
}
