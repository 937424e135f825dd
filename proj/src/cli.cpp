#include "epidet/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "epidet/parallel.hpp"

namespace epidet::cli {
namespace fs = std::filesystem;

namespace {

ReducedState parse_state(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ConfigError("state must be [S1, I1, P]");
  return ReducedState{j[0].get<std::int64_t>(), j[1].get<std::int64_t>(), j[2].get<double>()};
}

json state_json(const ReducedState& x) { return json::array({x.s1, x.i1, x.p}); }

PolicySpec parse_policy(const json& j) {
  PolicySpec spec;
  const auto type = j.at("type").get<std::string>();
  if (type == "optimal") {
    spec.kind = PolicyKind::optimal_map;
  } else if (type == "lp") {
    spec.kind = PolicyKind::lp_map;
  } else if (type == "threshold_p") {
    spec.kind = PolicyKind::threshold_p;
    spec.level = j.value("level", spec.level);
  } else if (type == "threshold_t") {
    spec.kind = PolicyKind::threshold_t;
    spec.stage = j.value("stage", spec.stage);
  } else {
    throw ConfigError("unknown policy type '" + type + "'");
  }
  spec.map_path = j.value("map", std::string{});
  return spec;
}

bool uses_map(PolicyKind kind) {
  return kind == PolicyKind::optimal_map || kind == PolicyKind::lp_map;
}

std::string policy_name(const PolicySpec& spec) {
  std::ostringstream s;
  switch (spec.kind) {
    case PolicyKind::optimal_map: return "Optimal";
    case PolicyKind::lp_map: return "LP";
    case PolicyKind::threshold_p: s << "Threshold-P(" << spec.level << ')'; break;
    case PolicyKind::threshold_t: s << "Threshold-t(" << spec.stage << ')'; break;
  }
  return s.str();
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

json provenance_json(const RunConfig& c, const std::string& method = {}) {
  json p{{"config_hash", c.hash}, {"master_seed", c.seed}};
  if (!method.empty()) p["method"] = method;
  return p;
}

std::string coordinate_header(ModelVariant variant) {
  return variant == ModelVariant::lp2d ? "i1,p" : "s1,i1,p";
}

void write_boundary_rows(std::ostream& out, const BoundaryTrace& trace) {
  for (const auto& b : trace.points) {
    out << trace.t << ',' << b.s1 << ',' << b.i1 << ',' << b.p << ',' << (b.crossed ? 1 : 0)
        << '\n';
  }
}

void check_compatible(const LoadedMap& loaded, const std::string& path,
                      const EpidemicParams& params, const CostParams& costs, bool allow_mismatch) {
  if (allow_mismatch) return;
  if (loaded.params == params && loaded.map.costs() == costs) return;
  throw ConfigError("map " + path + " was built with epidemic " + json(loaded.params).dump() +
                    " costs " + json(loaded.map.costs()).dump() + " but the config has epidemic " +
                    json(params).dump() + " costs " + json(costs).dump() +
                    " (pass --allow-mismatch to override)");
}

LoadedMap load_map_or_fail(const std::string& path) {
  try {
    return load_map(path);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  } catch (const json::exception& e) {
    throw ConfigError("bad map document " + path + ": " + e.what());
  }
}

}  // namespace

std::string provenance_line(const std::string& hash, std::uint64_t seed) {
  return "# epidet config_hash=" + hash + " seed=" + std::to_string(seed);
}

RunConfig parse_config(json doc, const Overrides& overrides) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  if (overrides.seed) doc["seed"] = *overrides.seed;
  if (overrides.variant) doc["variant"] = *overrides.variant;
  if (overrides.out_dir) doc["output"]["dir"] = *overrides.out_dir;
  if (!doc.contains("seed")) throw ConfigError("missing seed: set \"seed\" or pass --seed");

  RunConfig c;
  try {
    c.seed = doc.at("seed").get<std::uint64_t>();
    c.variant = parse_variant(doc.value("variant", std::string("full3d")));
    c.epidemic = doc.value("epidemic", json::object()).get<EpidemicParams>();
    c.costs = doc.value("costs", json::object()).get<CostParams>();
    const json srmc = doc.value("srmc", json::object());
    c.srmc = srmc.get<SrmcConfig>();
    if (!srmc.contains("tol")) c.srmc.tol = 0.05 * c.costs.c_delay;
    c.srmc.master_seed = c.seed;

    const json ev = doc.value("evaluate", json::object());
    if (ev.contains("x0")) c.evaluate.x0 = parse_state(ev["x0"]);
    c.evaluate.n_paths = ev.value("n_paths", c.evaluate.n_paths);
    c.evaluate.horizon = ev.value("horizon", c.evaluate.horizon);
    c.evaluate.scenario_variant = parse_variant(ev.value("scenario_variant", std::string("full3d")));
    for (const auto& p : ev.value("policies", json::array())) {
      c.evaluate.policies.push_back(parse_policy(p));
    }
    for (const auto& e : ev.value("c_fa_sweep", json::array())) {
      c.evaluate.c_fa_sweep.push_back({e.at("c_fa").get<double>(), e.at("map").get<std::string>()});
    }
    if (ev.contains("threshold_t_sweep")) {
      const auto range = ev["threshold_t_sweep"].get<std::vector<std::size_t>>();
      if (range.size() != 2 || range[0] < 1 || range[0] > range[1]) {
        throw ConfigError("threshold_t_sweep must be [first, last] with 1 <= first <= last");
      }
      c.evaluate.threshold_t_sweep = std::make_pair(range[0], range[1]);
    }

    const json sim = doc.value("simulate", json::object());
    if (sim.contains("x0")) c.simulate.x0 = parse_state(sim["x0"]);
    c.simulate.n_paths = sim.value("n_paths", c.simulate.n_paths);
    c.simulate.horizon = sim.value("horizon", c.simulate.horizon);
    c.simulate.two_pool = sim.value("two_pool", false);
    if (sim.contains("two_pool_initial")) {
      for (const auto& pool : sim["two_pool_initial"]) {
        c.simulate.two_pool_initial.push_back(
            PoolState{pool.at(0).get<std::int64_t>(), pool.at(1).get<std::int64_t>()});
      }
    } else {
      c.simulate.two_pool_initial.push_back({c.simulate.x0.s1, c.simulate.x0.i1});
      for (std::size_t k = 1; k < c.epidemic.pool_sizes.size(); ++k) {
        c.simulate.two_pool_initial.push_back({c.epidemic.pool_sizes[k], 0});
      }
    }

    c.out_dir = doc.value("output", json::object()).value("dir", c.out_dir);
    c.workers = doc.value("workers", std::size_t{0});
    if (overrides.workers) c.workers = *overrides.workers;
    c.srmc.workers = c.workers;

    c.epidemic.validate();
    c.costs.validate();
    c.srmc.validate(c.variant);
    validate(c.evaluate.x0, c.epidemic);
    validate(c.simulate.x0, c.epidemic);
    if (c.evaluate.n_paths < 1 || c.evaluate.horizon < 1) {
      throw ConfigError("evaluate needs n_paths >= 1 and horizon >= 1");
    }
    if (c.simulate.horizon < 1) throw ConfigError("simulate needs horizon >= 1");
    if (c.simulate.two_pool_initial.size() != c.epidemic.pool_sizes.size()) {
      throw ConfigError("two_pool_initial needs one [S, I] pair per pool");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("bad config: ") + e.what());
  }
  c.document = std::move(doc);
  c.hash = config_hash(c.document);
  return c;
}

void cmd_solve(const RunConfig& c, std::ostream& log) {
  const fs::path out(c.out_dir);
  fs::create_directories(out / "maps");
  const std::string method = c.srmc.sequential() ? "SRMC" : "RMC (non-sequential)";
  log << method << " solve, variant " << to_string(c.variant) << ", seed " << c.seed << '\n';

  const auto result = solve(c.srmc, c.epidemic, c.costs, c.variant, [&](const IterationReport& r) {
    log << "  t=" << r.t << " q_change=" << r.q_change << " boundary_shift=" << r.boundary_shift
        << " (" << std::fixed << std::setprecision(1) << r.seconds << std::defaultfloat
        << std::setprecision(6) << " s)\n";
  });

  const Provenance prov{c.hash, c.seed, method};
  for (std::size_t t = 1; t <= result.maps.size(); ++t) {
    std::ostringstream name;
    name << "map_t" << std::setw(2) << std::setfill('0') << t << ".json";
    save_json((out / "maps" / name.str()).string(),
              map_to_json(result.maps.at(t), c.epidemic, c.srmc, prov));
  }
  save_json((out / "map_final.json").string(),
            map_to_json(result.maps.back(), c.epidemic, c.srmc, prov));

  auto csv = open_output(out / "boundaries.csv");
  csv << provenance_line(c.hash, c.seed) << '\n' << "t,s1,i1,p,crossed\n";
  for (const auto& trace : result.traces) write_boundary_rows(csv, trace);

  json iterations = json::array();
  for (const auto& r : result.iterations) {
    iterations.push_back({{"t", r.t},
                          {"q_change", r.q_change},
                          {"boundary_shift", r.boundary_shift},
                          {"seconds", r.seconds},
                          {"design_size", r.diagnostics.design_size},
                          {"rounds", r.diagnostics.rounds},
                          {"uniform_fallbacks", r.diagnostics.uniform_fallbacks},
                          {"boundary_band_fraction", r.diagnostics.boundary_band_fraction},
                          {"receding_horizon", r.diagnostics.receding_horizon}});
  }
  json summary{{"provenance", provenance_json(c, method)},
               {"variant", std::string(to_string(c.variant))},
               {"converged", result.converged},
               {"tol", c.srmc.tol},
               {"iterations", std::move(iterations)},
               {"config", c.document}};
  if (!result.converged) {
    summary["warning"] = "t_max reached before the q-hat change fell below tol";
    log << "warning: not converged after " << result.maps.size() << " iterations\n";
  }
  save_json((out / "convergence.json").string(), summary);
  log << "wrote " << result.maps.size() << " maps to " << out.string() << '\n';
}

void cmd_evaluate(const RunConfig& c, const std::vector<std::string>& map_paths,
                  bool allow_mismatch, std::ostream& log) {
  auto specs = c.evaluate.policies;
  if (specs.empty()) throw ConfigError("evaluate: empty policy list");
  if (!map_paths.empty()) {
    std::size_t next = 0;
    for (auto& s : specs) {
      if (!uses_map(s.kind)) continue;
      if (next == map_paths.size()) throw ConfigError("fewer --map paths than map policies");
      s.map_path = map_paths[next++];
    }
    if (next != map_paths.size()) throw ConfigError("more --map paths than map policies");
  }

  std::vector<Policy> policies;
  for (const auto& s : specs) {
    Policy p;
    if (uses_map(s.kind)) {
      if (s.map_path.empty()) throw ConfigError(policy_name(s) + " policy needs a map path");
      auto loaded = load_map_or_fail(s.map_path);
      check_compatible(loaded, s.map_path, c.epidemic, c.costs, allow_mismatch);
      auto map = std::make_shared<const DetectionMap>(std::move(loaded.map));
      p = s.kind == PolicyKind::optimal_map ? Policy::optimal(map) : Policy::large_population(map);
    } else {
      p = s.kind == PolicyKind::threshold_p ? Policy::threshold_p(s.level)
                                            : Policy::threshold_t(s.stage);
    }
    p.name = policy_name(s);
    try {
      p.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    policies.push_back(std::move(p));
  }

  const auto& ev = c.evaluate;
  const auto scenarios = freeze_scenarios(ev.x0, ev.n_paths, ev.horizon, c.epidemic,
                                          ev.scenario_variant, c.seed,
                                          c.workers == 0 ? default_workers() : c.workers);
  std::vector<StrategyReport> reports;
  for (const auto& p : policies) {
    reports.push_back(evaluate(p, scenarios, c.costs));
    const auto& r = reports.back();
    log << std::left << std::setw(18) << r.policy << std::right << " tau " << r.mean_tau << " ("
        << r.sd_tau << ")  cost " << r.mean_cost << " (" << r.sd_cost << ")  PFA " << r.pfa
        << '\n';
  }

  const fs::path out(c.out_dir);
  fs::create_directories(out);
  {
    auto csv = open_output(out / "summary.csv");
    csv << provenance_line(c.hash, c.seed) << '\n';
    write_summary_csv(csv, reports);
  }
  {
    auto csv = open_output(out / "records.csv");
    csv << provenance_line(c.hash, c.seed) << '\n';
    write_records_csv(csv, reports);
  }

  json rows = json::array();
  for (const auto& r : reports) {
    rows.push_back({{"policy", r.policy},
                    {"mean_tau", r.mean_tau},
                    {"sd_tau", r.sd_tau},
                    {"mean_cost", r.mean_cost},
                    {"sd_cost", r.sd_cost},
                    {"pfa", r.pfa},
                    {"n_paths", r.n_paths},
                    {"cap_hits", r.cap_hits}});
  }
  json comparisons = json::array();
  for (std::size_t a = 0; a < reports.size(); ++a) {
    if (!uses_map(specs[a].kind)) continue;
    for (std::size_t b = 0; b < reports.size(); ++b) {
      if (a == b) continue;
      const auto cmp = paired_compare(reports[a], reports[b]);
      comparisons.push_back({{"a", reports[a].policy},
                             {"b", reports[b].policy},
                             {"mean_difference", cmp.mean_difference},
                             {"se_difference", cmp.se_difference},
                             {"fraction_a_better", cmp.fraction_a_better},
                             {"fraction_ties", cmp.fraction_ties}});
      log << reports[a].policy << " beats " << reports[b].policy << " on "
          << 100.0 * cmp.fraction_a_better << "% of scenarios\n";
    }
  }
  json summary{{"provenance", provenance_json(c)},
               {"x0", state_json(ev.x0)},
               {"horizon", ev.horizon},
               {"scenario_variant", std::string(to_string(ev.scenario_variant))},
               {"policies", std::move(rows)},
               {"paired", std::move(comparisons)},
               {"config", c.document}};

  if (!ev.c_fa_sweep.empty()) {
    std::vector<StrategyReport> sweep;
    for (const auto& entry : ev.c_fa_sweep) {
      CostParams costs = c.costs;
      costs.c_fa = entry.c_fa;
      auto loaded = load_map_or_fail(entry.map_path);
      check_compatible(loaded, entry.map_path, c.epidemic, costs, allow_mismatch);
      auto policy = Policy::optimal(std::make_shared<const DetectionMap>(std::move(loaded.map)));
      std::ostringstream name;
      name << "Optimal(C_FA=" << entry.c_fa << ')';
      policy.name = name.str();
      sweep.push_back(evaluate(policy, scenarios, costs));
    }
    auto csv = open_output(out / "c_fa_sweep.csv");
    csv << provenance_line(c.hash, c.seed) << '\n';
    csv << "c_fa,mean_tau,sd_tau,mean_cost,sd_cost,pfa,n_paths,cap_hits\n" << std::setprecision(10);
    json t3 = json::array();
    for (std::size_t k = 0; k < sweep.size(); ++k) {
      const auto& r = sweep[k];
      csv << ev.c_fa_sweep[k].c_fa << ',' << r.mean_tau << ',' << r.sd_tau << ',' << r.mean_cost
          << ',' << r.sd_cost << ',' << r.pfa << ',' << r.n_paths << ',' << r.cap_hits << '\n';
      t3.push_back({{"c_fa", ev.c_fa_sweep[k].c_fa}, {"mean_tau", r.mean_tau}, {"pfa", r.pfa},
                    {"mean_cost", r.mean_cost}});
      log << r.policy << " tau " << r.mean_tau << " PFA " << r.pfa << '\n';
    }
    summary["c_fa_sweep"] = std::move(t3);
  }

  if (ev.threshold_t_sweep) {
    const auto sweep =
        sweep_threshold_t(scenarios, c.costs, ev.threshold_t_sweep->first, ev.threshold_t_sweep->second);
    auto csv = open_output(out / "threshold_t_sweep.csv");
    csv << provenance_line(c.hash, c.seed) << '\n' << "stage,mean_cost,pfa\n" << std::setprecision(10);
    for (std::size_t k = 0; k < sweep.size(); ++k) {
      csv << ev.threshold_t_sweep->first + k << ',' << sweep[k].mean_cost << ',' << sweep[k].pfa
          << '\n';
    }
  }
  save_json((out / "summary.json").string(), summary);
}

void cmd_simulate(const RunConfig& c, std::ostream& log) {
  const auto& sim = c.simulate;
  const fs::path out(c.out_dir);
  fs::create_directories(out);
  {
    auto csv = open_output(out / "trajectories.csv");
    csv << provenance_line(c.hash, c.seed) << '\n' << "path,t,s1,i1,p\n";
    for (std::size_t n = 0; n < sim.n_paths; ++n) {
      auto rng = RngStream::derive(c.seed, StreamLabel::simulation, 0, n);
      const auto path = simulate_reduced(sim.x0, sim.horizon, c.epidemic, c.variant, rng);
      for (std::size_t t = 0; t < path.size(); ++t) {
        csv << n << ',' << t << ',' << path[t].s1 << ',' << path[t].i1 << ',' << path[t].p << '\n';
      }
    }
  }
  log << "wrote " << sim.n_paths << " reduced trajectories\n";
  if (!sim.two_pool) return;

  auto csv = open_output(out / "ground_truth.csv");
  csv << provenance_line(c.hash, c.seed) << '\n' << "path,t";
  for (std::size_t k = 1; k <= sim.two_pool_initial.size(); ++k) csv << ",s" << k << ",i" << k;
  csv << ",theta\n";
  for (std::size_t n = 0; n < sim.n_paths; ++n) {
    auto rng = RngStream::derive(c.seed, StreamLabel::ground_truth, 0, n);
    const MultiPoolState initial{sim.two_pool_initial, 0.0};
    const auto traj = simulate_trajectory(initial, c.epidemic, sim.horizon, rng);
    const auto theta = outbreak_time(std::span<const MultiPoolState>(traj));
    for (std::size_t t = 0; t < traj.size(); ++t) {
      csv << n << ',' << t;
      for (const auto& pool : traj[t].pools) csv << ',' << pool.susceptible << ',' << pool.infected;
      csv << ',';
      if (theta) csv << *theta;
      csv << '\n';
    }
  }
  log << "wrote " << sim.n_paths << " multi-pool trajectories\n";
}

void cmd_export_map(const std::string& map_path, const std::string& out_dir, std::ostream& log) {
  const auto loaded = load_map_or_fail(map_path);
  const auto& map = loaded.map;
  const fs::path out(out_dir);
  fs::create_directories(out);
  const auto header = provenance_line(loaded.provenance.config_hash, loaded.provenance.master_seed);

  auto grid_csv = open_output(out / "grid.csv");
  grid_csv << header << '\n'
           << coordinate_header(map.variant()) << ",q_hat,std_error,d,margin,announce\n";
  for (const auto& loc : audit_grid(map.domain(), map.variant(), loaded.params)) {
    const auto x = to_state(loc, map.variant(), loaded.params);
    const auto pred = map.predict(x);
    const double d = immediate_cost(x, map.costs());
    for (double v : loc) grid_csv << v << ',';
    grid_csv << pred.mean << ',' << pred.std_error << ',' << d << ',' << pred.mean - d << ','
             << (pred.mean - d > 0.0 ? 1 : 0) << '\n';
  }

  auto boundary_csv = open_output(out / "boundary.csv");
  boundary_csv << header << '\n' << "t,s1,i1,p,crossed\n";
  write_boundary_rows(boundary_csv, boundary_trace(map, loaded.params));
  log << "exported map t=" << map.iteration() << " to " << out.string() << '\n';
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Optimal epidemic detection by sequential regression Monte Carlo", "epidet"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::size_t> workers;
  std::optional<std::string> variant;
  std::vector<std::string> maps;
  bool allow_mismatch = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", seed, "master seed (overrides config)");
    cmd->add_option("--out", out_dir, "output directory (overrides config)");
    cmd->add_option("--workers", workers, "worker threads (0 = all cores)");
    cmd->add_option("--variant", variant, "model variant")
        ->check(CLI::IsMember({"full3d", "lp2d"}));
  };
  auto* solve_cmd = app.add_subcommand("solve", "build detection maps");
  add_common(solve_cmd);
  auto* eval_cmd = app.add_subcommand("evaluate", "evaluate policies on frozen scenarios");
  add_common(eval_cmd);
  eval_cmd->add_option("--map", maps, "map file for each map policy, in config order");
  eval_cmd->add_flag("--allow-mismatch", allow_mismatch,
                     "accept maps built under different epidemic or cost parameters");
  auto* sim_cmd = app.add_subcommand("simulate", "sample reduced and multi-pool trajectories");
  add_common(sim_cmd);
  auto* export_cmd = app.add_subcommand("export-map", "tabulate a map on the audit grid");
  std::string map_path;
  std::string export_out = "out";
  export_cmd->add_option("--map", map_path, "map file")->required()->check(CLI::ExistingFile);
  export_cmd->add_option("--out", export_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ExitCode::ok : ExitCode::config_error;
  }

  try {
    if (export_cmd->parsed()) {
      cmd_export_map(map_path, export_out, out);
      return ExitCode::ok;
    }
    const auto config = parse_config(load_json(config_path), Overrides{seed, out_dir, workers, variant});
    if (solve_cmd->parsed()) cmd_solve(config, out);
    if (eval_cmd->parsed()) cmd_evaluate(config, maps, allow_mismatch, out);
    if (sim_cmd->parsed()) cmd_simulate(config, out);
    return ExitCode::ok;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return ExitCode::config_error;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return ExitCode::config_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return ExitCode::runtime_error;
  }
}

}  // namespace epidet::cli
