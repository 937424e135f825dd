#include "epidet/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace epidet {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint32_t low32(std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xFFFFFFFFu); }

}  // namespace

RngStream::RngStream(std::array<std::uint32_t, 2> key, std::array<std::uint32_t, 4> counter)
    : key_(key), counter_(counter) {}

RngStream RngStream::derive(std::uint64_t master_seed, StreamLabel label, std::uint64_t iteration,
                            std::uint64_t index) {
  if (iteration > 0xFFFFFFFFull || index > 0xFFFFFFFFull) {
    throw std::out_of_range("RngStream::derive: iteration and index must fit in 32 bits");
  }
  const std::uint64_t k = splitmix64(master_seed);
  // counter_[0] is the block counter; the remaining words carry the address.
  return RngStream({low32(k), low32(k >> 32)},
                   {0u, low32(index), low32(iteration), static_cast<std::uint32_t>(label)});
}

std::array<std::uint32_t, 4> RngStream::philox_block(std::array<std::uint32_t, 4> ctr,
                                                     std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    ctr = {low32(p1 >> 32) ^ ctr[1] ^ key[0], low32(p1), low32(p0 >> 32) ^ ctr[3] ^ key[1],
           low32(p0)};
  }
  return ctr;
}

void RngStream::refill() {
  buffer_ = philox_block(counter_, key_);
  if (++counter_[0] == 0) {
    throw std::overflow_error("RngStream: block counter exhausted");
  }
  used_ = 0;
}

std::uint64_t RngStream::next_u64() {
  if (used_ > 2) refill();
  const std::uint64_t lo = buffer_[used_];
  const std::uint64_t hi = buffer_[used_ + 1];
  used_ += 2;
  return (hi << 32) | lo;
}

double RngStream::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::exponential(double rate) { return -std::log(uniform()) / rate; }

double RngStream::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t RngStream::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("RngStream::below: n must be positive");
  // Lemire's multiply-shift with rejection.
  std::uint64_t x = next_u64();
  __uint128_t m = static_cast<__uint128_t>(x) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      x = next_u64();
      m = static_cast<__uint128_t>(x) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace epidet
