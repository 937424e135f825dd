#include "epidet/reduced_model.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace epidet {

std::string_view to_string(ModelVariant v) {
  return v == ModelVariant::full3d ? "full3d" : "lp2d";
}

ModelVariant parse_variant(std::string_view name) {
  if (name == "full3d") return ModelVariant::full3d;
  if (name == "lp2d") return ModelVariant::lp2d;
  throw std::invalid_argument("unknown model variant '" + std::string(name) +
                              "' (expected full3d or lp2d)");
}

void validate(const ReducedState& x, const EpidemicParams& params) {
  if (x.s1 < 0 || x.i1 < 0) throw std::invalid_argument("reduced state counts must be >= 0");
  if (x.s1 + x.i1 > params.pool_sizes.at(0)) {
    throw std::invalid_argument("reduced state violates s1 + i1 <= M1");
  }
  if (!(x.p >= 0.0 && x.p <= 1.0)) throw std::invalid_argument("reduced state p must lie in [0, 1]");
}

double drift(const ReducedState& x, const EpidemicParams& params) {
  return params.alpha * params.beta * static_cast<double>(x.i1) * (1.0 - x.p);
}

NoiseSampler gaussian_noise(double sigma) {
  return [sigma](RngStream& rng) { return sigma * rng.normal(); };
}

std::int64_t simulate_branching_interval(std::int64_t infected, double beta, double gamma,
                                         double duration, RngStream& rng) {
  const double birth_share = beta / (beta + gamma);
  double now = 0.0;
  while (infected > 0) {
    now += rng.exponential((beta + gamma) * static_cast<double>(infected));
    if (now > duration) break;
    if (rng.uniform() < birth_share) {
      ++infected;
    } else {
      --infected;
    }
  }
  return infected;
}

ReducedState step(const ReducedState& x, const EpidemicParams& params, ModelVariant variant,
                  RngStream& rng, const NoiseSampler& noise) {
  ReducedState next = x;
  if (variant == ModelVariant::full3d) {
    const PoolState pool = simulate_pool_interval({x.s1, x.i1}, params.pool_sizes.at(0),
                                                  params.beta, params.gamma, 1.0, rng);
    next.s1 = pool.susceptible;
    next.i1 = pool.infected;
  } else {
    next.i1 = simulate_branching_interval(x.i1, params.beta, params.gamma, 1.0, rng);
  }
  if (x.p == 1.0) {
    next.p = 1.0;
  } else {
    next.p = std::clamp(x.p + drift(x, params) + noise(rng), 0.0, 1.0);
  }
  return next;
}

ReducedState step(const ReducedState& x, const EpidemicParams& params, ModelVariant variant,
                  RngStream& rng) {
  const double sigma = params.sigma_delta;
  return step(x, params, variant, rng, [sigma](RngStream& r) { return sigma * r.normal(); });
}

std::vector<ReducedState> simulate_reduced(const ReducedState& x0, std::size_t horizon,
                                           const EpidemicParams& params, ModelVariant variant,
                                           RngStream& rng) {
  if (horizon < 1) throw std::invalid_argument("simulate_reduced: horizon must be >= 1");
  std::vector<ReducedState> path;
  path.reserve(horizon + 1);
  path.push_back(x0);
  for (std::size_t t = 0; t < horizon; ++t) path.push_back(step(path.back(), params, variant, rng));
  return path;
}

}  // namespace epidet
