#include <doctest.h>

#include <cmath>
#include <set>

#include "amlmc/random.hpp"

using namespace amlmc;

TEST_CASE("philox known-answer vectors") {
  using C = Philox4x32::Counter;
  CHECK(Philox4x32::block(C{0, 0, 0, 0}, {0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::block(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::block(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("unit interval conversion") {
  CHECK(to_unit_interval(0, 0) == 0.0);
  CHECK(to_unit_interval(0xffffffff, 0xffffffff) < 1.0);
  CHECK(to_unit_interval(0x80000000, 0) == 0.5);
}

TEST_CASE("identical paths reproduce, distinct paths differ") {
  const SeedPath p{7, 3, 11, 2, StreamTag::production};
  CHECK(uniform_pair(p) == uniform_pair(p));
  std::set<std::array<double, 2>> seen;
  for (SeedPath q : {p, SeedPath{8, 3, 11, 2, StreamTag::production}, SeedPath{7, 4, 11, 2, StreamTag::production},
                     SeedPath{7, 3, 12, 2, StreamTag::production}, SeedPath{7, 3, 11, 3, StreamTag::production},
                     SeedPath{7, 3, 11, 2, StreamTag::calibration}}) {
    seen.insert(uniform_pair(q));
  }
  CHECK(seen.size() == 6);
}

TEST_CASE("draws are uniform-looking and uncorrelated across sample indices") {
  const int n = 10000;
  double s = 0, s2 = 0, sxy = 0;
  double prev = uniform_pair({1, 1, 0, 0, StreamTag::test})[0];
  double sp = 0, sp2 = 0;
  for (int i = 1; i <= n; ++i) {
    const auto u = uniform_pair({1, 1, static_cast<std::uint64_t>(i), 0, StreamTag::test});
    REQUIRE(u[0] >= 0.0);
    REQUIRE(u[0] < 1.0);
    s += u[0];
    s2 += u[0] * u[0];
    sp += prev;
    sp2 += prev * prev;
    sxy += u[0] * prev;
    prev = u[0];
  }
  const double mean = s / n;
  CHECK(mean == doctest::Approx(0.5).epsilon(0.02));
  CHECK(s2 / n - mean * mean == doctest::Approx(1.0 / 12).epsilon(0.05));
  const double mp = sp / n;
  const double cov = sxy / n - mean * mp;
  const double corr = cov / std::sqrt((s2 / n - mean * mean) * (sp2 / n - mp * mp));
  CHECK(std::abs(corr) <= 0.05);
}
