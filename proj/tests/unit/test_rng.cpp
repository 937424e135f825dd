#include <doctest.h>

#include <cmath>
#include <set>
#include <stdexcept>

#include "epidet/rng.hpp"

using epidet::RngStream;
using epidet::StreamLabel;

TEST_CASE("philox4x32-10 known answers") {
  using Block = std::array<std::uint32_t, 4>;
  CHECK(RngStream::philox_block({0, 0, 0, 0}, {0, 0}) ==
        Block{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(RngStream::philox_block({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                                {0xffffffff, 0xffffffff}) ==
        Block{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(RngStream::philox_block({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                                {0xa4093822, 0x299f31d0}) ==
        Block{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are reproducible and distinct") {
  auto a = RngStream::derive(7, StreamLabel::scenario, 3, 11);
  auto b = RngStream::derive(7, StreamLabel::scenario, 3, 11);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  std::set<std::uint64_t> firsts;
  for (auto label : {StreamLabel::scenario, StreamLabel::batch, StreamLabel::evaluation}) {
    for (std::uint64_t it = 0; it < 5; ++it) {
      for (std::uint64_t idx = 0; idx < 5; ++idx) {
        firsts.insert(RngStream::derive(7, label, it, idx).next_u64());
      }
    }
  }
  CHECK(firsts.size() == 75);
  CHECK(RngStream::derive(7, StreamLabel::test, 0, 0).next_u64() !=
        RngStream::derive(8, StreamLabel::test, 0, 0).next_u64());
}

TEST_CASE("stream coordinates are limited to 32 bits") {
  CHECK_THROWS_AS(RngStream::derive(1, StreamLabel::test, 1ull << 32, 0), std::out_of_range);
  CHECK_THROWS_AS(RngStream::derive(1, StreamLabel::test, 0, 1ull << 32), std::out_of_range);
}

TEST_CASE("uniform, exponential and normal moments") {
  auto rng = RngStream::derive(1, StreamLabel::test, 0, 0);
  const int n = 200000;
  double su = 0, su2 = 0, se = 0, sn = 0, sn2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    su += u;
    su2 += u * u;
    se += rng.exponential(2.0);
    const double z = rng.normal();
    sn += z;
    sn2 += z * z;
  }
  CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(su2 / n - std::pow(su / n, 2) == doctest::Approx(1.0 / 12).epsilon(0.02));
  CHECK(se / n == doctest::Approx(0.5).epsilon(0.02));
  CHECK(std::abs(sn / n) < 0.01);
  CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("below is unbiased over a small range") {
  auto rng = RngStream::derive(2, StreamLabel::test, 0, 0);
  std::array<int, 6> counts{};
  const int n = 60000;
  for (int i = 0; i < n; ++i) ++counts[rng.below(6)];
  for (int c : counts) CHECK(std::abs(c - n / 6) < 5 * std::sqrt(n / 6.0));
}
