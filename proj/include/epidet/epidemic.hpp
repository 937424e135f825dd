#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "epidet/rng.hpp"

namespace epidet {

/// Rates and pool sizes of the K-pool SIR model. sigma_delta is only read by
/// the reduced detection model.
struct EpidemicParams {
  double beta = 0.75;
  double gamma = 0.5;
  double alpha = 0.01;
  std::vector<std::int64_t> pool_sizes{2000, 2000};
  double sigma_delta = 0.01;

  /// Throws std::invalid_argument on a violated invariant.
  void validate() const;

  /// Two pools of 2000 with the case-study outbreak parameters.
  static EpidemicParams case_study() { return {}; }

  bool operator==(const EpidemicParams&) const = default;
};

/// Recovered count is implicit: M - susceptible - infected.
struct PoolState {
  std::int64_t susceptible = 0;
  std::int64_t infected = 0;

  bool operator==(const PoolState&) const = default;
};

struct MultiPoolState {
  std::vector<PoolState> pools;
  double time = 0.0;

  bool operator==(const MultiPoolState&) const = default;
};

enum class ChannelKind { infection, transmission, recovery };

/// One reaction channel. For transmission, `pool` receives the infection and
/// `source` is the pool of the infecting individual; otherwise source == pool.
struct Channel {
  ChannelKind kind;
  std::size_t pool;
  std::size_t source;
  double rate;
};

/// All 2K + K(K-1) channel rates, ordered: K infections, then transmissions
/// (k, k') in row-major order skipping k' == k, then K recoveries.
std::vector<Channel> transition_rates(const MultiPoolState& state, const EpidemicParams& params);

/// Applies one channel event in place. Throws std::logic_error if conservation
/// would break, which indicates a corrupted state.
void apply_channel(MultiPoolState& state, const Channel& channel, const EpidemicParams& params);

/// Exact (Gillespie direct method) simulation of the K-pool model over
/// [state.time, state.time + duration].
MultiPoolState simulate_interval(MultiPoolState state, const EpidemicParams& params,
                                 double duration, RngStream& rng);

/// Single-pool SIR over one interval. Consumes draws in exactly the order
/// simulate_interval does for K = 1, so both routes agree bit-for-bit.
PoolState simulate_pool_interval(PoolState pool, std::int64_t pool_size, double beta,
                                 double gamma, double duration, RngStream& rng);

/// Outbreak time in Pool 2 (index 1) for a trajectory sampled at t = 0, 1, ...
/// Returns 0 when Pool 2 is already infected at t = 0.
std::optional<std::size_t> outbreak_time(std::span<const MultiPoolState> trajectory);
std::optional<std::size_t> outbreak_time(std::span<const std::int64_t> pool2_infected);

/// Integer-epoch trajectory t = 0..horizon of the full model.
std::vector<MultiPoolState> simulate_trajectory(const MultiPoolState& initial,
                                                const EpidemicParams& params, std::size_t horizon,
                                                RngStream& rng);

}  // namespace epidet
