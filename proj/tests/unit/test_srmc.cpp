#include <doctest.h>

#include <cmath>

#include "../support/oracles.hpp"
#include "../support/properties.hpp"
#include "epidet/io.hpp"
#include "epidet/srmc.hpp"

using namespace epidet;

namespace {

// q-hat == level everywhere, so the map announces iff C_FA (1 - P) < level.
DetectionMap constant_map(double level, std::size_t t) {
  Eigen::MatrixXd X(4, 2);
  X << 0, 0, 400, 0, 0, 0.999, 400, 0.999;
  LoessConfig cfg;
  cfg.degree = 0;
  cfg.span = 1.0;
  return DetectionMap(LoessModel::fit(X, Eigen::VectorXd::Constant(4, level), cfg), CostParams{},
                      ModelVariant::lp2d, t, case_study_box(ModelVariant::lp2d));
}

// Deterministic dynamics: P rises by 0.1 per period.
ReducedState ramp(const ReducedState& x, RngStream&) {
  return {x.s1, x.i1, std::min(1.0, x.p + 0.1)};
}

SrmcConfig small_config(std::uint64_t seed) {
  SrmcConfig cfg;
  cfg.n0 = 100;
  cfg.n_batch = 50;
  cfg.n_end = 200;
  cfg.d_candidates = 300;
  cfg.t_max = 5;
  cfg.tol = 0.0;
  cfg.master_seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("path_and_cost against a deterministic stub") {
  const CostParams costs;
  auto rng = props::test_rng(40);
  MapSequence maps;
  // Map at every stage announces once C_FA (1 - P) < 5, i.e. P > 0.75.
  for (std::size_t s = 1; s <= 10; ++s) maps.push_back(constant_map(5.0, s));
  const ReducedState x0{1990, 10, 0.2};

  // Path 0.2, 0.3, ..., announce on entering P > 0.75 at s = 6 (P = 0.8).
  auto pc = path_and_cost(x0, 10, maps, false, ramp, costs, rng);
  CHECK(pc.tau == 6);
  double expect = 0.0;
  for (int s = 0; s < 6; ++s) expect += 0.2 + 0.1 * s;
  expect += 20.0 * (1.0 - 0.8);
  CHECK(pc.cost == doctest::Approx(expect));

  // Forced stop at s = t.
  pc = path_and_cost(x0, 3, maps, false, ramp, costs, rng);
  CHECK(pc.tau == 3);
  CHECK(pc.cost == doctest::Approx(0.2 + 0.3 + 0.4 + 20.0 * 0.5));

  // t = 1 always stops after one step.
  pc = path_and_cost(x0, 1, MapSequence{}, false, ramp, costs, rng);
  CHECK(pc.tau == 1);
  CHECK(pc.cost == doctest::Approx(0.2 + 20.0 * 0.7));
}

TEST_CASE("path_and_cost rule indexing") {
  const CostParams costs;
  auto rng = props::test_rng(41);
  // Stage 1 map never announces, all other stages always announce.
  MapSequence maps;
  maps.push_back(constant_map(-100.0, 1));
  for (std::size_t s = 2; s <= 5; ++s) maps.push_back(constant_map(100.0, s));
  const ReducedState x0{1990, 10, 0.0};
  // Non-receding at t = 6: step s uses stage 6 - s, first stage >= 2 announces at s = 1.
  CHECK(path_and_cost(x0, 6, maps, false, ramp, costs, rng).tau == 1);
  // At t = 2 step 1 consults stage 1 (never announces), then s = t forces the stop.
  CHECK(path_and_cost(x0, 2, maps, false, ramp, costs, rng).tau == 2);
  // Receding horizon uses stage t - 1 at every step.
  MapSequence waits;
  for (std::size_t s = 1; s <= 5; ++s) waits.push_back(constant_map(s == 5 ? -100.0 : 100.0, s));
  CHECK(path_and_cost(x0, 6, waits, true, ramp, costs, rng).tau == 6);
  CHECK(path_and_cost(x0, 6, waits, false, ramp, costs, rng).tau == 2);
}

TEST_CASE("tau stays in [1, t]") {
  const auto c = props::tau_within_horizon();
  INFO(c.detail);
  CHECK(c.ok);
}

TEST_CASE("bit-identical reruns, including with parallel workers") {
  const auto c = props::bit_identical_reruns();
  INFO(c.detail);
  CHECK(c.ok);
}

TEST_CASE("one-step map matches the analytic boundary on a dense design") {
  EpidemicParams params;
  const CostParams costs;
  auto cfg = small_config(3);
  cfg.t_max = 1;
  cfg.n0 = 2000;
  cfg.n_end = 2000;
  const auto built = build_map(1, MapSequence{}, cfg, params, costs, ModelVariant::lp2d,
                               case_study_box(ModelVariant::lp2d));
  for (double i1 : {20.0, 40.0, 80.0}) {
    const auto b = extract_boundary(built.map, 2000 - i1, i1);
    CHECK(b.crossed);
    CHECK(b.p == doctest::Approx(oracle::one_step_boundary(i1, 0.01, 0.75, 20, 1)).epsilon(0.1));
  }
}

TEST_CASE("solve bookkeeping") {
  EpidemicParams params;
  const CostParams costs;
  auto cfg = small_config(4);
  std::vector<std::size_t> seen;
  const auto res = solve(cfg, params, costs, ModelVariant::lp2d,
                         [&](const IterationReport& r) { seen.push_back(r.t); });
  CHECK(res.maps.size() == 5);
  CHECK(res.traces.size() == 5);
  CHECK(seen == std::vector<std::size_t>{1, 2, 3, 4, 5});
  CHECK(std::isnan(res.iterations[0].q_change));
  CHECK_FALSE(res.converged);
  CHECK_FALSE(res.iterations[3].diagnostics.receding_horizon);
  CHECK(res.iterations[4].diagnostics.receding_horizon);
  for (const auto& r : res.iterations) CHECK(r.diagnostics.design_size == 200);
  CHECK(res.traces[0].points.size() == 50);

  cfg.tol = INFINITY;
  const auto quick = solve(cfg, params, costs, ModelVariant::lp2d);
  CHECK(quick.converged);
  CHECK(quick.maps.size() == 2);
}

TEST_CASE("audit grid and boundary lines") {
  EpidemicParams params;
  CHECK(audit_grid(case_study_box(ModelVariant::lp2d), ModelVariant::lp2d, params).size() == 2500);
  const auto grid = audit_grid(case_study_box(ModelVariant::full3d), ModelVariant::full3d, params);
  CHECK(grid.size() < 8000);
  for (const auto& g : grid) CHECK(g[0] + g[1] <= 2000);
}

TEST_CASE("state projection") {
  EpidemicParams params;
  const std::vector<double> over{1900, 300, 0.5};
  const auto x = to_state(over, ModelVariant::full3d, params);
  CHECK(x.s1 == 1700);
  CHECK(x.i1 == 300);
  const std::vector<double> lp{25, 0.5};
  CHECK(to_state(lp, ModelVariant::lp2d, params).s1 == 1975);
  CHECK(to_location({1990, 10, 0.1}, ModelVariant::lp2d) == Location{10, 0.1});
}

TEST_CASE("serialized maps reproduce predictions bit for bit") {
  EpidemicParams params;
  const CostParams costs;
  for (auto variant : {ModelVariant::lp2d, ModelVariant::full3d}) {
    auto cfg = small_config(5);
    cfg.t_max = 2;
    const auto res = solve(cfg, params, costs, variant);
    const auto& map = res.maps.back();
    const auto doc = map_to_json(map, params, cfg, Provenance{"abc", 5, "SRMC"});
    const auto loaded = map_from_json(json::parse(doc.dump()));
    CHECK(loaded.params == params);
    CHECK(loaded.config.n_end == cfg.n_end);
    CHECK(loaded.provenance.master_seed == 5);
    auto rng = props::test_rng(42);
    const auto box = case_study_box(variant);
    for (int k = 0; k < 1000; ++k) {
      Location loc;
      for (std::size_t j = 0; j < box.dim(); ++j) {
        loc.push_back(box.lower[j] + (box.upper[j] - box.lower[j]) * rng.uniform());
      }
      const auto x = to_state(loc, variant, params);
      const auto a = map.predict(x);
      const auto b = loaded.map.predict(x);
      REQUIRE(a.mean == b.mean);
      REQUIRE(a.std_error == b.std_error);
    }
  }
}

TEST_CASE("config validation") {
  SrmcConfig cfg;
  CHECK_NOTHROW(cfg.validate(ModelVariant::full3d));
  cfg.n_end = 100;
  CHECK_THROWS_AS(cfg.validate(ModelVariant::full3d), std::invalid_argument);
  cfg = SrmcConfig{};
  cfg.n_batch = 0;
  CHECK_THROWS_AS(cfg.validate(ModelVariant::lp2d), std::invalid_argument);
  cfg = SrmcConfig{};
  cfg.t_max = 0;
  CHECK_THROWS_AS(cfg.validate(ModelVariant::lp2d), std::invalid_argument);
}
