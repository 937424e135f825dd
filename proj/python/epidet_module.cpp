#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/iostream.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <vector>

#include "epidet/cli.hpp"
#include "epidet/io.hpp"
#include "epidet/srmc.hpp"
#include "epidet/strategy_eval.hpp"

namespace py = pybind11;
using namespace epidet;

namespace {

std::vector<ReducedState> simulate_reduced_seeded(const ReducedState& x0, std::size_t horizon,
                                                  const EpidemicParams& params,
                                                  ModelVariant variant, std::uint64_t seed,
                                                  std::uint64_t index) {
  auto rng = RngStream::derive(seed, StreamLabel::simulation, 0, index);
  return simulate_reduced(x0, horizon, params, variant, rng);
}

std::vector<MultiPoolState> simulate_trajectory_seeded(const MultiPoolState& initial,
                                                       const EpidemicParams& params,
                                                       std::size_t horizon, std::uint64_t seed,
                                                       std::uint64_t index) {
  auto rng = RngStream::derive(seed, StreamLabel::ground_truth, 0, index);
  return simulate_trajectory(initial, params, horizon, rng);
}

std::string map_dumps(const DetectionMap& map, const EpidemicParams& params,
                      const SrmcConfig& config) {
  return map_to_json(map, params, config, Provenance{"", config.master_seed, "SRMC"}).dump();
}

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "epidet");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  py::scoped_ostream_redirect out_redirect(std::cout, py::module_::import("sys").attr("stdout"));
  py::scoped_estream_redirect err_redirect(std::cerr, py::module_::import("sys").attr("stderr"));
  return cli::run(static_cast<int>(argv.size()), argv.data(), std::cout, std::cerr);
}

}  // namespace

PYBIND11_MODULE(_epidet, m) {
  m.doc() = "Optimal epidemic detection by sequential regression Monte Carlo";

  py::enum_<ModelVariant>(m, "ModelVariant")
      .value("full3d", ModelVariant::full3d)
      .value("lp2d", ModelVariant::lp2d);

  py::class_<EpidemicParams>(m, "EpidemicParams")
      .def(py::init<>())
      .def_readwrite("beta", &EpidemicParams::beta)
      .def_readwrite("gamma", &EpidemicParams::gamma)
      .def_readwrite("alpha", &EpidemicParams::alpha)
      .def_readwrite("pool_sizes", &EpidemicParams::pool_sizes)
      .def_readwrite("sigma_delta", &EpidemicParams::sigma_delta)
      .def("validate", &EpidemicParams::validate);

  py::class_<CostParams>(m, "CostParams")
      .def(py::init<>())
      .def(py::init([](double c_fa, double c_delay) { return CostParams{c_fa, c_delay}; }),
           py::arg("c_fa"), py::arg("c_delay") = 1.0)
      .def_readwrite("c_fa", &CostParams::c_fa)
      .def_readwrite("c_delay", &CostParams::c_delay);

  py::class_<ReducedState>(m, "ReducedState")
      .def(py::init([](std::int64_t s1, std::int64_t i1, double p) { return ReducedState{s1, i1, p}; }),
           py::arg("s1"), py::arg("i1"), py::arg("p"))
      .def_readwrite("s1", &ReducedState::s1)
      .def_readwrite("i1", &ReducedState::i1)
      .def_readwrite("p", &ReducedState::p)
      .def("__repr__", [](const ReducedState& x) {
        return "ReducedState(" + std::to_string(x.s1) + ", " + std::to_string(x.i1) + ", " +
               std::to_string(x.p) + ")";
      });

  py::class_<PoolState>(m, "PoolState")
      .def(py::init([](std::int64_t s, std::int64_t i) { return PoolState{s, i}; }))
      .def_readwrite("susceptible", &PoolState::susceptible)
      .def_readwrite("infected", &PoolState::infected);

  py::class_<MultiPoolState>(m, "MultiPoolState")
      .def(py::init([](std::vector<PoolState> pools) { return MultiPoolState{std::move(pools), 0.0}; }))
      .def_readwrite("pools", &MultiPoolState::pools)
      .def_readwrite("time", &MultiPoolState::time);

  m.def("simulate_reduced", &simulate_reduced_seeded, py::arg("x0"), py::arg("horizon"),
        py::arg("params"), py::arg("variant"), py::arg("seed"), py::arg("index") = 0);
  m.def("simulate_trajectory", &simulate_trajectory_seeded, py::arg("initial"), py::arg("params"),
        py::arg("horizon"), py::arg("seed"), py::arg("index") = 0);
  m.def("outbreak_time",
        [](const std::vector<MultiPoolState>& traj) {
          return outbreak_time(std::span<const MultiPoolState>(traj));
        });
  m.def("immediate_cost", py::overload_cast<double, const CostParams&>(&immediate_cost));
  m.def("pathwise_cost", [](const std::vector<double>& p_path, std::size_t tau,
                            const CostParams& costs) { return pathwise_cost(p_path, tau, costs); });

  py::class_<LoessConfig>(m, "LoessConfig")
      .def(py::init<>())
      .def_readwrite("span", &LoessConfig::span)
      .def_readwrite("degree", &LoessConfig::degree)
      .def_readwrite("min_neighbors", &LoessConfig::min_neighbors);

  py::class_<LoessPrediction>(m, "LoessPrediction")
      .def_readonly("mean", &LoessPrediction::mean)
      .def_readonly("std_error", &LoessPrediction::std_error)
      .def_readonly("degraded", &LoessPrediction::degraded);

  py::class_<LoessModel>(m, "LoessModel")
      .def_static("fit", &LoessModel::fit, py::arg("inputs"), py::arg("responses"),
                  py::arg("config") = LoessConfig{})
      .def("predict", [](const LoessModel& model, const std::vector<double>& x) { return model.predict(x); })
      .def("equivalent_kernel",
           [](const LoessModel& model, const std::vector<double>& x) { return model.equivalent_kernel(x); })
      .def_property_readonly("size", &LoessModel::size);

  py::class_<SrmcConfig>(m, "SrmcConfig")
      .def(py::init<>())
      .def_readwrite("n0", &SrmcConfig::n0)
      .def_readwrite("n_batch", &SrmcConfig::n_batch)
      .def_readwrite("n_end", &SrmcConfig::n_end)
      .def_readwrite("d_candidates", &SrmcConfig::d_candidates)
      .def_readwrite("t_max", &SrmcConfig::t_max)
      .def_readwrite("mpc_switch", &SrmcConfig::mpc_switch)
      .def_readwrite("tol", &SrmcConfig::tol)
      .def_readwrite("master_seed", &SrmcConfig::master_seed)
      .def_readwrite("loess", &SrmcConfig::loess)
      .def_readwrite("workers", &SrmcConfig::workers);

  py::class_<DetectionMap, std::shared_ptr<DetectionMap>>(m, "DetectionMap")
      .def("q_hat", &DetectionMap::q_hat)
      .def("margin", &DetectionMap::margin)
      .def("announce", &DetectionMap::announce)
      .def_property_readonly("iteration", &DetectionMap::iteration)
      .def_property_readonly("variant", &DetectionMap::variant)
      .def("to_json", &map_dumps, py::arg("params"), py::arg("config"))
      .def_static("from_json", [](const std::string& text) {
        return std::make_shared<DetectionMap>(map_from_json(json::parse(text)).map);
      });

  py::class_<BoundaryPoint>(m, "BoundaryPoint")
      .def_readonly("s1", &BoundaryPoint::s1)
      .def_readonly("i1", &BoundaryPoint::i1)
      .def_readonly("p", &BoundaryPoint::p)
      .def_readonly("crossed", &BoundaryPoint::crossed);
  m.def("extract_boundary", &extract_boundary, py::arg("map"), py::arg("s1"), py::arg("i1"));

  py::class_<IterationReport>(m, "IterationReport")
      .def_readonly("t", &IterationReport::t)
      .def_readonly("q_change", &IterationReport::q_change)
      .def_readonly("boundary_shift", &IterationReport::boundary_shift)
      .def_readonly("seconds", &IterationReport::seconds);

  m.def(
      "solve",
      [](const SrmcConfig& config, const EpidemicParams& params, const CostParams& costs,
         ModelVariant variant) {
        SolveResult result;
        {
          py::gil_scoped_release release;
          result = solve(config, params, costs, variant);
        }
        std::vector<std::shared_ptr<DetectionMap>> maps;
        for (std::size_t t = 1; t <= result.maps.size(); ++t) {
          maps.push_back(std::make_shared<DetectionMap>(result.maps.at(t)));
        }
        return py::make_tuple(maps, result.iterations, result.converged);
      },
      py::arg("config"), py::arg("params"), py::arg("costs"), py::arg("variant"),
      "Returns (maps, iteration_reports, converged).");

  py::class_<Policy>(m, "Policy")
      .def_static("optimal", [](std::shared_ptr<DetectionMap> map) { return Policy::optimal(map); })
      .def_static("large_population",
                  [](std::shared_ptr<DetectionMap> map) { return Policy::large_population(map); })
      .def_static("threshold_p", &Policy::threshold_p)
      .def_static("threshold_t", &Policy::threshold_t)
      .def_readwrite("name", &Policy::name);

  py::class_<FrozenScenarios>(m, "FrozenScenarios")
      .def_property_readonly("size", &FrozenScenarios::size)
      .def_readonly("paths", &FrozenScenarios::paths);
  m.def("freeze_scenarios", &freeze_scenarios, py::arg("x0"), py::arg("n_paths"),
        py::arg("horizon"), py::arg("params"), py::arg("variant"), py::arg("seed"),
        py::arg("workers") = 1);

  py::class_<StrategyReport>(m, "StrategyReport")
      .def_readonly("policy", &StrategyReport::policy)
      .def_readonly("mean_tau", &StrategyReport::mean_tau)
      .def_readonly("sd_tau", &StrategyReport::sd_tau)
      .def_readonly("mean_cost", &StrategyReport::mean_cost)
      .def_readonly("sd_cost", &StrategyReport::sd_cost)
      .def_readonly("pfa", &StrategyReport::pfa)
      .def_readonly("n_paths", &StrategyReport::n_paths)
      .def_readonly("cap_hits", &StrategyReport::cap_hits);
  m.def("evaluate",
        py::overload_cast<const Policy&, const FrozenScenarios&, const CostParams&>(&evaluate),
        py::arg("policy"), py::arg("scenarios"), py::arg("costs"));

  py::class_<PairedComparison>(m, "PairedComparison")
      .def_readonly("mean_difference", &PairedComparison::mean_difference)
      .def_readonly("se_difference", &PairedComparison::se_difference)
      .def_readonly("fraction_a_better", &PairedComparison::fraction_a_better)
      .def_readonly("fraction_ties", &PairedComparison::fraction_ties);
  m.def("paired_compare", &paired_compare);

  m.def("run_cli", &run_cli, py::arg("args"), "Runs the epidet command line; returns the exit code.");
}
