#include "amlmc/random.hpp"

namespace amlmc {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  lo = static_cast<std::uint32_t>(product);
  hi = static_cast<std::uint32_t>(product >> 32);
}

}  // namespace

Philox4x32::Counter Philox4x32::block(Counter ctr, Key key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t lo0, hi0, lo1, hi1;
    mulhilo(kPhiloxM0, ctr[0], lo0, hi0);
    mulhilo(kPhiloxM1, ctr[2], lo1, hi1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return ctr;
}

double to_unit_interval(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32 | lo) >> 11;
  return static_cast<double>(bits) * 0x1.0p-53;
}

std::array<double, 2> uniform_pair(const SeedPath& path) {
  const Philox4x32::Key key{static_cast<std::uint32_t>(path.seed),
                            static_cast<std::uint32_t>(path.seed >> 32)};
  const Philox4x32::Counter ctr{
      static_cast<std::uint32_t>(path.sample), static_cast<std::uint32_t>(path.sample >> 32),
      (static_cast<std::uint32_t>(path.level) & 0xFFFFu) |
          static_cast<std::uint32_t>(path.tag) << 16,
      static_cast<std::uint32_t>(path.replica)};
  const auto out = Philox4x32::block(ctr, key);
  return {to_unit_interval(out[0], out[1]), to_unit_interval(out[2], out[3])};
}

}  // namespace amlmc
