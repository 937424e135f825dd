#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "epidet/cost_model.hpp"
#include "epidet/design.hpp"
#include "epidet/epidemic.hpp"
#include "epidet/loess.hpp"
#include "epidet/reduced_model.hpp"

namespace epidet {

/// Default regression domain: I1 in {0..400}, S1 in {1000..2000},
/// P in [0, 0.999]. Coordinates are (S1, I1, P) for full3d, (I1, P) for lp2d.
StateBox case_study_box(ModelVariant variant);

Location to_location(const ReducedState& x, ModelVariant variant);
/// Inverse of to_location. Full3d locations with S1 + I1 > M1 are pulled onto
/// the face S1 = M1 - I1; lp2d states get S1 = M1 - I1.
ReducedState to_state(std::span<const double> location, ModelVariant variant,
                      const EpidemicParams& params);

/// Fitted surrogate for the continuation cost q(t, .) together with the cost
/// parameters that turn it into an announce/wait rule.
class DetectionMap {
 public:
  DetectionMap(LoessModel surrogate, CostParams costs, ModelVariant variant, std::size_t iteration,
               StateBox domain);

  /// Surrogate prediction at x, after projecting x into the regression domain.
  LoessPrediction predict(const ReducedState& x) const;
  double q_hat(const ReducedState& x) const { return predict(x).mean; }
  /// q_hat(x) - d(x); positive means announce.
  double margin(const ReducedState& x) const;
  bool announce(const ReducedState& x) const { return margin(x) > 0.0; }

  const LoessModel& surrogate() const { return surrogate_; }
  const CostParams& costs() const { return costs_; }
  ModelVariant variant() const { return variant_; }
  std::size_t iteration() const { return iteration_; }
  const StateBox& domain() const { return domain_; }

 private:
  LoessModel surrogate_;
  CostParams costs_;
  ModelVariant variant_;
  std::size_t iteration_;
  StateBox domain_;
};

/// Maps for iterations 1..T. Iteration 0 is the announce-everywhere rule.
class MapSequence {
 public:
  void push_back(DetectionMap map);
  std::size_t size() const { return maps_.size(); }
  bool empty() const { return maps_.empty(); }
  /// Map for iteration t >= 1.
  const DetectionMap& at(std::size_t t) const;
  const DetectionMap& back() const { return maps_.back(); }
  /// Announce decision of iteration t's rule; t == 0 always announces.
  bool announce(std::size_t t, const ReducedState& x) const;

 private:
  std::vector<DetectionMap> maps_;
};

struct SrmcConfig {
  std::size_t n0 = 200;
  std::size_t n_batch = 200;
  std::size_t n_end = 2000;
  std::size_t d_candidates = 2500;
  AcquisitionKind acquisition = AcquisitionKind::min;
  std::size_t t_max = 20;
  std::size_t mpc_switch = 5;  ///< receding-horizon paths from this iteration on
  double tol = 0.05;           ///< sup-norm tolerance on q-hat changes, cost units
  std::uint64_t master_seed = 0;
  LoessConfig loess{};
  std::size_t workers = 1;

  void validate(ModelVariant variant) const;
  bool sequential() const { return n_end > n0; }
  bool operator==(const SrmcConfig&) const = default;
};

/// Advances a reduced state by one period; lets tests substitute dynamics.
using Stepper = std::function<ReducedState(const ReducedState&, RngStream&)>;

Stepper model_stepper(const EpidemicParams& params, ModelVariant variant);

struct PathCost {
  std::size_t tau = 0;
  double cost = 0.0;
};

/// Simulates forward from x0 until the state enters the stopping set of
/// iteration t - s (or, with receding_horizon, of iteration t - 1), stopping
/// at s = t at the latest. Returns the stopping time and realized cost.
PathCost path_and_cost(const ReducedState& x0, std::size_t t, const MapSequence& maps,
                       bool receding_horizon, const Stepper& stepper, const CostParams& costs,
                       RngStream& rng);
PathCost path_and_cost(const ReducedState& x0, std::size_t t, const MapSequence& maps,
                       bool receding_horizon, const EpidemicParams& params,
                       const CostParams& costs, ModelVariant variant, RngStream& rng);

struct BuildDiagnostics {
  std::size_t design_size = 0;
  std::size_t rounds = 0;
  std::size_t uniform_fallbacks = 0;
  /// Share of augmented points whose misclassification probability under the
  /// fit they were drawn from was at least 0.1.
  double boundary_band_fraction = 0.0;
  bool receding_horizon = false;
};

struct BuiltMap {
  DetectionMap map;
  BuildDiagnostics diagnostics;
};

/// One outer iteration of sequential regression Monte Carlo. `maps` must hold
/// iterations 1..t-1.
BuiltMap build_map(std::size_t t, const MapSequence& maps, const SrmcConfig& config,
                   const EpidemicParams& params, const CostParams& costs, ModelVariant variant,
                   const StateBox& box);

/// Fixed lattice used for convergence checks: 50x50 (lp2d) or 20x20x20
/// (full3d, infeasible S1 + I1 > M1 nodes dropped).
std::vector<Location> audit_grid(const StateBox& box, ModelVariant variant,
                                 const EpidemicParams& params);

/// Boundary location in P along a line of fixed (S1, I1).
struct BoundaryPoint {
  double s1 = 0.0;
  double i1 = 0.0;
  double p = 0.0;
  bool crossed = false;  ///< false when the whole line waits
};

struct BoundaryTrace {
  std::size_t t = 0;
  std::vector<BoundaryPoint> points;
};

/// Scans P downward from 1 in steps of 0.01 until the first wait state, then
/// bisects to 1e-3. A line that announces everywhere reports p = 0.
BoundaryPoint extract_boundary(const DetectionMap& map, double s1, double i1);
BoundaryTrace boundary_trace(const DetectionMap& map, const EpidemicParams& params);

/// sup over lines of |p_a - p_b|; traces must share the same lines.
double boundary_distance(const BoundaryTrace& a, const BoundaryTrace& b);

struct IterationReport {
  std::size_t t = 0;
  double q_change = 0.0;         ///< sup |q_t - q_{t-1}| on the audit grid (NaN at t = 1)
  double boundary_shift = 0.0;   ///< boundary_distance to t - 1 (NaN at t = 1)
  double seconds = 0.0;
  BuildDiagnostics diagnostics;
};

struct SolveResult {
  MapSequence maps;
  std::vector<BoundaryTrace> traces;
  std::vector<IterationReport> iterations;
  bool converged = false;
};

using ProgressCallback = std::function<void(const IterationReport&)>;

/// Builds maps for t = 1, 2, ... until the audit-grid sup-norm change in q-hat
/// drops below config.tol or t_max is reached (converged == false).
SolveResult solve(const SrmcConfig& config, const EpidemicParams& params, const CostParams& costs,
                  ModelVariant variant, const ProgressCallback& progress = {});
SolveResult solve(const SrmcConfig& config, const EpidemicParams& params, const CostParams& costs,
                  ModelVariant variant, const StateBox& box, const ProgressCallback& progress = {});

}  // namespace epidet
