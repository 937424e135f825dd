#include "epidet/srmc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "epidet/parallel.hpp"

namespace epidet {
namespace {

constexpr double kBoundaryCoarseStep = 0.01;
constexpr double kBoundaryResolution = 1e-3;
constexpr double kBandThreshold = 0.1;

std::size_t workers_of(const SrmcConfig& config) {
  return config.workers == 0 ? default_workers() : config.workers;
}

Eigen::MatrixXd to_matrix(const std::vector<Location>& locations, std::size_t dim) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(locations.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < locations.size(); ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = locations[i][j];
    }
  }
  return m;
}

// Boundary lines: one per I1 value (lp2d) or per (S1, I1) pair (full3d).
std::vector<std::pair<double, double>> boundary_lines(const StateBox& box, ModelVariant variant,
                                                      const EpidemicParams& params) {
  std::vector<std::pair<double, double>> lines;
  const double m1 = static_cast<double>(params.pool_sizes.at(0));
  if (variant == ModelVariant::lp2d) {
    constexpr int n = 50;
    for (int a = 0; a < n; ++a) {
      const double i1 = std::round(box.lower[0] + (box.upper[0] - box.lower[0]) * a / (n - 1));
      lines.emplace_back(m1 - i1, i1);
    }
  } else {
    constexpr int n = 20;
    for (int a = 0; a < n; ++a) {
      const double s1 = std::round(box.lower[0] + (box.upper[0] - box.lower[0]) * a / (n - 1));
      for (int b = 0; b < n; ++b) {
        const double i1 = std::round(box.lower[1] + (box.upper[1] - box.lower[1]) * b / (n - 1));
        if (s1 + i1 <= m1) lines.emplace_back(s1, i1);
      }
    }
  }
  return lines;
}

}  // namespace

StateBox case_study_box(ModelVariant variant) {
  if (variant == ModelVariant::lp2d) return {{0.0, 0.0}, {400.0, 0.999}, {true, false}};
  return {{1000.0, 0.0, 0.0}, {2000.0, 400.0, 0.999}, {true, true, false}};
}

Location to_location(const ReducedState& x, ModelVariant variant) {
  if (variant == ModelVariant::lp2d) return {static_cast<double>(x.i1), x.p};
  return {static_cast<double>(x.s1), static_cast<double>(x.i1), x.p};
}

ReducedState to_state(std::span<const double> location, ModelVariant variant,
                      const EpidemicParams& params) {
  const std::int64_t m1 = params.pool_sizes.at(0);
  ReducedState x;
  if (variant == ModelVariant::lp2d) {
    x.i1 = std::clamp<std::int64_t>(std::llround(location[0]), 0, m1);
    x.s1 = m1 - x.i1;
    x.p = std::clamp(location[1], 0.0, 1.0);
  } else {
    x.i1 = std::clamp<std::int64_t>(std::llround(location[1]), 0, m1);
    x.s1 = std::clamp<std::int64_t>(std::llround(location[0]), 0, m1 - x.i1);
    x.p = std::clamp(location[2], 0.0, 1.0);
  }
  return x;
}

DetectionMap::DetectionMap(LoessModel surrogate, CostParams costs, ModelVariant variant,
                           std::size_t iteration, StateBox domain)
    : surrogate_(std::move(surrogate)),
      costs_(costs),
      variant_(variant),
      iteration_(iteration),
      domain_(std::move(domain)) {
  if (domain_.dim() != surrogate_.dim()) {
    throw std::invalid_argument("DetectionMap: domain and surrogate dimensions differ");
  }
}

LoessPrediction DetectionMap::predict(const ReducedState& x) const {
  Location loc = to_location(x, variant_);
  domain_.clamp(loc);
  return surrogate_.predict(loc);
}

double DetectionMap::margin(const ReducedState& x) const {
  return q_hat(x) - immediate_cost(x, costs_);
}

void MapSequence::push_back(DetectionMap map) { maps_.push_back(std::move(map)); }

const DetectionMap& MapSequence::at(std::size_t t) const {
  if (t == 0 || t > maps_.size()) {
    throw std::out_of_range("MapSequence: no map for iteration " + std::to_string(t));
  }
  return maps_[t - 1];
}

bool MapSequence::announce(std::size_t t, const ReducedState& x) const {
  return t == 0 || at(t).announce(x);
}

void SrmcConfig::validate(ModelVariant variant) const {
  const std::size_t dim = variant == ModelVariant::lp2d ? 2 : 3;
  const std::size_t r = basis_size(dim, loess.degree);
  if (n0 < r) throw std::invalid_argument("srmc: n0 below the number of loess basis terms");
  if (n_end < n0) throw std::invalid_argument("srmc: n_end must be >= n0");
  if (n_end > n0) {
    if (n_batch == 0) throw std::invalid_argument("srmc: n_batch must be positive");
    if ((n_end - n0) % n_batch != 0) {
      throw std::invalid_argument("srmc: n_end - n0 must be divisible by n_batch");
    }
    if (d_candidates == 0) throw std::invalid_argument("srmc: d_candidates must be positive");
  }
  if (t_max < 1) throw std::invalid_argument("srmc: t_max must be >= 1");
  if (mpc_switch < 1) throw std::invalid_argument("srmc: mpc_switch must be >= 1");
  if (!(tol >= 0.0)) throw std::invalid_argument("srmc: tol must be >= 0");
  if (!(loess.span > 0.0 && loess.span <= 1.0)) {
    throw std::invalid_argument("srmc: loess span must lie in (0, 1]");
  }
}

Stepper model_stepper(const EpidemicParams& params, ModelVariant variant) {
  return [params, variant](const ReducedState& x, RngStream& rng) {
    return step(x, params, variant, rng);
  };
}

PathCost path_and_cost(const ReducedState& x0, std::size_t t, const MapSequence& maps,
                       bool receding_horizon, const Stepper& stepper, const CostParams& costs,
                       RngStream& rng) {
  if (t < 1) throw std::invalid_argument("path_and_cost: t must be >= 1");
  if (maps.size() + 1 < t) throw std::invalid_argument("path_and_cost: maps 1..t-1 required");
  std::vector<double> p_path;
  p_path.reserve(t + 1);
  p_path.push_back(x0.p);
  ReducedState x = x0;
  std::size_t s = 1;
  for (;; ++s) {
    x = stepper(x, rng);
    p_path.push_back(x.p);
    if (s == t) break;
    const std::size_t rule = receding_horizon ? t - 1 : t - s;
    if (maps.announce(rule, x)) break;
  }
  return {s, pathwise_cost(p_path, s, costs)};
}

PathCost path_and_cost(const ReducedState& x0, std::size_t t, const MapSequence& maps,
                       bool receding_horizon, const EpidemicParams& params,
                       const CostParams& costs, ModelVariant variant, RngStream& rng) {
  return path_and_cost(x0, t, maps, receding_horizon, model_stepper(params, variant), costs, rng);
}

BuiltMap build_map(std::size_t t, const MapSequence& maps, const SrmcConfig& config,
                   const EpidemicParams& params, const CostParams& costs, ModelVariant variant,
                   const StateBox& box) {
  config.validate(variant);
  if (maps.size() + 1 < t) throw std::invalid_argument("build_map: maps 1..t-1 required");
  const std::size_t dim = box.dim();
  const std::size_t workers = workers_of(config);
  const bool receding = t >= config.mpc_switch && t > 1;
  const Stepper stepper = model_stepper(params, variant);

  std::vector<Location> design;
  std::vector<double> responses;
  design.reserve(config.n_end);
  responses.reserve(config.n_end);

  auto simulate_costs = [&](std::size_t first) {
    responses.resize(design.size());
    parallel_for(design.size() - first, workers, [&](std::size_t k) {
      const std::size_t n = first + k;
      RngStream rng = RngStream::derive(config.master_seed, StreamLabel::scenario, t, n);
      const ReducedState x0 = to_state(design[n], variant, params);
      responses[n] = path_and_cost(x0, t, maps, receding, stepper, costs, rng).cost;
    });
  };
  auto refit = [&] {
    Eigen::VectorXd q = Eigen::Map<const Eigen::VectorXd>(
        responses.data(), static_cast<Eigen::Index>(responses.size()));
    return LoessModel::fit(to_matrix(design, dim), q, config.loess);
  };

  {
    RngStream rng = RngStream::derive(config.master_seed, StreamLabel::initial_design, t, 0);
    design = lhs(box, config.n0, rng);
  }
  simulate_costs(0);
  LoessModel model = refit();

  BuildDiagnostics diag;
  diag.receding_horizon = receding;
  std::size_t in_band = 0;
  std::size_t augmented = 0;
  std::size_t round = 0;
  while (design.size() < config.n_end) {
    RngStream cand_rng = RngStream::derive(config.master_seed, StreamLabel::candidates, t, round);
    const std::vector<Location> candidates = lhs(box, config.d_candidates, cand_rng);
    std::vector<double> prob(candidates.size());
    std::vector<double> weights(candidates.size());
    parallel_for(candidates.size(), workers, [&](std::size_t c) {
      const LoessPrediction pred = model.predict(candidates[c]);
      const double d = immediate_cost(candidates[c][dim - 1], costs);
      prob[c] = boundary_probability(pred.mean, pred.std_error, d);
      weights[c] = acquisition_weight(prob[c], config.acquisition);
    });
    RngStream batch_rng = RngStream::derive(config.master_seed, StreamLabel::batch, t, round);
    const BatchDraw draw = sample_batch(weights, config.n_batch, batch_rng);
    if (draw.uniform_fallback) ++diag.uniform_fallbacks;
    const std::size_t first = design.size();
    for (auto c : draw.indices) {
      design.push_back(candidates[c]);
      if (prob[c] >= kBandThreshold) ++in_band;
      ++augmented;
    }
    simulate_costs(first);
    model = refit();
    ++round;
  }
  diag.design_size = design.size();
  diag.rounds = round;
  diag.boundary_band_fraction =
      augmented == 0 ? 0.0 : static_cast<double>(in_band) / static_cast<double>(augmented);
  return {DetectionMap(std::move(model), costs, variant, t, box), diag};
}

std::vector<Location> audit_grid(const StateBox& box, ModelVariant variant,
                                 const EpidemicParams& params) {
  const std::size_t n = variant == ModelVariant::lp2d ? 50 : 20;
  const std::size_t dim = box.dim();
  const double m1 = static_cast<double>(params.pool_sizes.at(0));
  std::vector<Location> grid;
  std::vector<std::size_t> idx(dim, 0);
  for (;;) {
    Location loc(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      loc[j] = box.lower[j] + (box.upper[j] - box.lower[j]) * static_cast<double>(idx[j]) /
                                  static_cast<double>(n - 1);
      if (box.integer[j]) loc[j] = std::round(loc[j]);
    }
    const bool feasible = variant == ModelVariant::lp2d || loc[0] + loc[1] <= m1;
    if (feasible) grid.push_back(std::move(loc));
    std::size_t j = 0;
    while (j < dim && ++idx[j] == n) idx[j++] = 0;
    if (j == dim) break;
  }
  return grid;
}

BoundaryPoint extract_boundary(const DetectionMap& map, double s1, double i1) {
  BoundaryPoint out{s1, i1, 0.0, true};
  ReducedState x{static_cast<std::int64_t>(s1), static_cast<std::int64_t>(i1), 1.0};
  if (!map.announce(x)) {
    out.p = 1.0;
    out.crossed = false;
    return out;
  }
  double announce_p = 1.0;
  const int steps = static_cast<int>(std::lround(1.0 / kBoundaryCoarseStep));
  for (int k = steps - 1; k >= 0; --k) {
    x.p = k * kBoundaryCoarseStep;
    if (!map.announce(x)) {
      double wait_p = x.p;
      while (announce_p - wait_p > kBoundaryResolution) {
        x.p = 0.5 * (announce_p + wait_p);
        (map.announce(x) ? announce_p : wait_p) = x.p;
      }
      out.p = 0.5 * (announce_p + wait_p);
      return out;
    }
    announce_p = x.p;
  }
  out.p = 0.0;
  return out;
}

BoundaryTrace boundary_trace(const DetectionMap& map, const EpidemicParams& params) {
  BoundaryTrace trace;
  trace.t = map.iteration();
  for (const auto& [s1, i1] : boundary_lines(map.domain(), map.variant(), params)) {
    trace.points.push_back(extract_boundary(map, s1, i1));
  }
  return trace;
}

double boundary_distance(const BoundaryTrace& a, const BoundaryTrace& b) {
  if (a.points.size() != b.points.size()) {
    throw std::invalid_argument("boundary_distance: traces cover different lines");
  }
  double sup = 0.0;
  for (std::size_t k = 0; k < a.points.size(); ++k) {
    sup = std::max(sup, std::abs(a.points[k].p - b.points[k].p));
  }
  return sup;
}

SolveResult solve(const SrmcConfig& config, const EpidemicParams& params, const CostParams& costs,
                  ModelVariant variant, const ProgressCallback& progress) {
  return solve(config, params, costs, variant, case_study_box(variant), progress);
}

SolveResult solve(const SrmcConfig& config, const EpidemicParams& params, const CostParams& costs,
                  ModelVariant variant, const StateBox& box, const ProgressCallback& progress) {
  params.validate();
  costs.validate();
  config.validate(variant);
  box.validate();
  const std::size_t workers = workers_of(config);
  const std::vector<Location> grid = audit_grid(box, variant, params);

  SolveResult result;
  std::vector<double> previous_q;
  for (std::size_t t = 1; t <= config.t_max; ++t) {
    const auto started = std::chrono::steady_clock::now();
    BuiltMap built = build_map(t, result.maps, config, params, costs, variant, box);

    std::vector<double> q(grid.size());
    parallel_for(grid.size(), workers,
                 [&](std::size_t g) { q[g] = built.map.surrogate().predict(grid[g]).mean; });

    IterationReport report;
    report.t = t;
    report.diagnostics = built.diagnostics;
    report.q_change = std::numeric_limits<double>::quiet_NaN();
    report.boundary_shift = std::numeric_limits<double>::quiet_NaN();
    if (!previous_q.empty()) {
      double sup = 0.0;
      for (std::size_t g = 0; g < q.size(); ++g) sup = std::max(sup, std::abs(q[g] - previous_q[g]));
      report.q_change = sup;
    }
    result.traces.push_back(boundary_trace(built.map, params));
    if (result.traces.size() > 1) {
      report.boundary_shift =
          boundary_distance(result.traces[result.traces.size() - 2], result.traces.back());
    }
    result.maps.push_back(std::move(built.map));
    previous_q = std::move(q);
    report.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    result.iterations.push_back(report);
    if (progress) progress(report);
    if (t > 1 && report.q_change < config.tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace epidet
