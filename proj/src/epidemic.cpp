#include "epidet/epidemic.hpp"

#include <stdexcept>
#include <string>

namespace epidet {

void EpidemicParams::validate() const {
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
  if (pool_sizes.empty()) throw std::invalid_argument("at least one pool is required");
  for (auto m : pool_sizes) {
    if (m < 1) throw std::invalid_argument("pool sizes must be >= 1");
  }
  if (!(sigma_delta >= 0.0)) throw std::invalid_argument("sigma_delta must be >= 0");
}

std::vector<Channel> transition_rates(const MultiPoolState& state, const EpidemicParams& params) {
  const std::size_t k_pools = state.pools.size();
  std::vector<Channel> channels;
  channels.reserve(2 * k_pools + k_pools * (k_pools - 1));
  for (std::size_t k = 0; k < k_pools; ++k) {
    const auto& p = state.pools[k];
    const double m = static_cast<double>(params.pool_sizes[k]);
    channels.push_back({ChannelKind::infection, k, k,
                        params.beta * static_cast<double>(p.infected) *
                            static_cast<double>(p.susceptible) / m});
  }
  const double cross_beta = params.alpha * params.beta;
  for (std::size_t k = 0; k < k_pools; ++k) {
    const double m = static_cast<double>(params.pool_sizes[k]);
    for (std::size_t src = 0; src < k_pools; ++src) {
      if (src == k) continue;
      channels.push_back({ChannelKind::transmission, k, src,
                          cross_beta * static_cast<double>(state.pools[src].infected) *
                              static_cast<double>(state.pools[k].susceptible) / m});
    }
  }
  for (std::size_t k = 0; k < k_pools; ++k) {
    channels.push_back(
        {ChannelKind::recovery, k, k, params.gamma * static_cast<double>(state.pools[k].infected)});
  }
  return channels;
}

void apply_channel(MultiPoolState& state, const Channel& channel, const EpidemicParams& params) {
  auto& pool = state.pools.at(channel.pool);
  switch (channel.kind) {
    case ChannelKind::infection:
    case ChannelKind::transmission:
      --pool.susceptible;
      ++pool.infected;
      break;
    case ChannelKind::recovery:
      --pool.infected;
      break;
  }
  if (pool.susceptible < 0 || pool.infected < 0 ||
      pool.susceptible + pool.infected > params.pool_sizes[channel.pool]) {
    throw std::logic_error("conservation violated in pool " + std::to_string(channel.pool));
  }
}

MultiPoolState simulate_interval(MultiPoolState state, const EpidemicParams& params,
                                 double duration, RngStream& rng) {
  if (!(duration > 0.0)) throw std::invalid_argument("simulate_interval: duration must be > 0");
  if (state.pools.size() != params.pool_sizes.size()) {
    throw std::invalid_argument("simulate_interval: state/pool_sizes length mismatch");
  }
  double elapsed = 0.0;
  for (;;) {
    const auto channels = transition_rates(state, params);
    double total = 0.0;
    for (const auto& c : channels) total += c.rate;
    if (total <= 0.0) break;
    elapsed += rng.exponential(total);
    if (elapsed > duration) break;
    const double target = rng.uniform() * total;
    double acc = 0.0;
    std::size_t chosen = channels.size() - 1;
    for (std::size_t j = 0; j < channels.size(); ++j) {
      acc += channels[j].rate;
      if (target < acc && channels[j].rate > 0.0) {
        chosen = j;
        break;
      }
    }
    // Round-off can leave target >= acc; fall back to the last live channel.
    while (channels[chosen].rate <= 0.0) --chosen;
    apply_channel(state, channels[chosen], params);
  }
  state.time += duration;
  return state;
}

PoolState simulate_pool_interval(PoolState pool, std::int64_t pool_size, double beta,
                                 double gamma, double duration, RngStream& rng) {
  if (!(duration > 0.0)) throw std::invalid_argument("simulate_pool_interval: duration must be > 0");
  const double m = static_cast<double>(pool_size);
  double now = 0.0;
  for (;;) {
    const double infection =
        beta * static_cast<double>(pool.infected) * static_cast<double>(pool.susceptible) / m;
    const double recovery = gamma * static_cast<double>(pool.infected);
    const double total = infection + recovery;
    if (total <= 0.0) break;
    now += rng.exponential(total);
    if (now > duration) break;
    const double target = rng.uniform() * total;
    if ((target < infection && infection > 0.0) || recovery <= 0.0) {
      --pool.susceptible;
      ++pool.infected;
    } else {
      --pool.infected;
    }
  }
  return pool;
}

std::optional<std::size_t> outbreak_time(std::span<const std::int64_t> pool2_infected) {
  if (pool2_infected.empty()) return std::nullopt;
  if (pool2_infected[0] > 0) return 0;
  for (std::size_t t = 1; t < pool2_infected.size(); ++t) {
    if (pool2_infected[t - 1] == 0 && pool2_infected[t] > 0) return t;
  }
  return std::nullopt;
}

std::optional<std::size_t> outbreak_time(std::span<const MultiPoolState> trajectory) {
  std::vector<std::int64_t> infected;
  infected.reserve(trajectory.size());
  for (const auto& s : trajectory) infected.push_back(s.pools.at(1).infected);
  return outbreak_time(std::span<const std::int64_t>(infected));
}

std::vector<MultiPoolState> simulate_trajectory(const MultiPoolState& initial,
                                                const EpidemicParams& params, std::size_t horizon,
                                                RngStream& rng) {
  std::vector<MultiPoolState> path;
  path.reserve(horizon + 1);
  path.push_back(initial);
  for (std::size_t t = 0; t < horizon; ++t) {
    path.push_back(simulate_interval(path.back(), params, 1.0, rng));
  }
  return path;
}

}  // namespace epidet
