#pragma once

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "epidet/epidemic.hpp"
#include "epidet/rng.hpp"

namespace epidet {

/// Detection state (S1, I1, P): Pool-1 counts plus the pseudo-posterior
/// probability that Pool 2 is infected. P == 1 is absorbing.
struct ReducedState {
  std::int64_t s1 = 0;
  std::int64_t i1 = 0;
  double p = 0.0;

  bool operator==(const ReducedState&) const = default;
};

/// full3d: SIR dynamics in Pool 1. lp2d: branching approximation, S1 frozen.
enum class ModelVariant { full3d, lp2d };

std::string_view to_string(ModelVariant v);
/// Accepts "full3d" / "lp2d"; throws std::invalid_argument otherwise.
ModelVariant parse_variant(std::string_view name);

/// Throws std::invalid_argument if the state is outside its domain.
void validate(const ReducedState& x, const EpidemicParams& params);

/// Expected one-period increase of P: alpha * beta * I1 * (1 - P).
double drift(const ReducedState& x, const EpidemicParams& params);

using NoiseSampler = std::function<double(RngStream&)>;

/// Centered Gaussian noise with standard deviation sigma.
NoiseSampler gaussian_noise(double sigma);

/// Linear birth-death process (birth beta, death gamma per infected) over one
/// interval of length `duration`.
std::int64_t simulate_branching_interval(std::int64_t infected, double beta, double gamma,
                                         double duration, RngStream& rng);

/// Advances the detection state by one period. Pool 1 is simulated first,
/// then P is updated from the pre-step I1 and P.
ReducedState step(const ReducedState& x, const EpidemicParams& params, ModelVariant variant,
                  RngStream& rng);
ReducedState step(const ReducedState& x, const EpidemicParams& params, ModelVariant variant,
                  RngStream& rng, const NoiseSampler& noise);

/// Trajectory of length horizon + 1 starting at x0. horizon must be >= 1.
std::vector<ReducedState> simulate_reduced(const ReducedState& x0, std::size_t horizon,
                                           const EpidemicParams& params, ModelVariant variant,
                                           RngStream& rng);

}  // namespace epidet
