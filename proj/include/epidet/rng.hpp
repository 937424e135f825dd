#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace epidet {

/// Purpose tags for stream derivation. Distinct tags never share draws.
enum class StreamLabel : std::uint32_t {
  scenario = 1,
  initial_design = 2,
  candidates = 3,
  batch = 4,
  evaluation = 5,
  simulation = 6,
  ground_truth = 7,
  test = 99,
};

/// Philox4x32-10 counter-based generator.
///
/// A stream is addressed by (master_seed, label, iteration, index); the block
/// counter is the only mutable part. Two streams with the same address yield
/// the same draws no matter which thread creates them or in what order, which
/// is what makes parallel scenario generation reproducible.
class RngStream {
 public:
  using result_type = std::uint64_t;

  static RngStream derive(std::uint64_t master_seed, StreamLabel label, std::uint64_t iteration,
                          std::uint64_t index);

  /// Raw Philox4x32-10 block function, exposed for known-answer tests.
  static std::array<std::uint32_t, 4> philox_block(std::array<std::uint32_t, 4> counter,
                                                   std::array<std::uint32_t, 2> key);

  std::uint64_t next_u64();

  /// Uniform on the open interval (0, 1).
  double uniform();
  double exponential(double rate);
  double normal();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next_u64(); }

 private:
  RngStream(std::array<std::uint32_t, 2> key, std::array<std::uint32_t, 4> counter);
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> counter_;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
};

}  // namespace epidet
