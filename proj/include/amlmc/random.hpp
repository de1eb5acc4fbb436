#pragma once

#include <array>
#include <cstdint>

namespace amlmc {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// Stateless: every output block is a pure function of (counter, key), which
/// is what makes per-sample streams reproducible and independent of the
/// order in which samples are evaluated.
class Philox4x32 {
public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter counter, Key key);
};

/// Which consumer a random draw belongs to.  Distinct tags never share
/// counters, so calibration draws cannot alias production draws.
enum class StreamTag : std::uint8_t {
  calibration = 1,
  production = 2,
  dof_study = 3,
  test = 4,
};

/// Address of one random realization omega.
struct SeedPath {
  std::uint64_t seed = 0;
  int level = 1;
  std::uint64_t sample = 0;
  int replica = 0;
  StreamTag tag = StreamTag::production;

  friend bool operator==(const SeedPath&, const SeedPath&) = default;
};

/// Converts two 32-bit words to a double in [0, 1) with 53 random bits.
double to_unit_interval(std::uint32_t hi, std::uint32_t lo);

/// Two independent U[0,1) variates for the given path.
std::array<double, 2> uniform_pair(const SeedPath& path);

}  // namespace amlmc
