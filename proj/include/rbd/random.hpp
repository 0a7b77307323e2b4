#pragma once

#include <array>
#include <cstdint>

namespace rbd {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// Stateless: the output is a pure function of (counter, key), so any
/// (seed, trial, instance) triple maps to the same variate no matter
/// which thread draws it or in which order.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Counter generate(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      ctr = single_round(ctr, key);
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85;

  static constexpr Counter single_round(const Counter& c, const Key& k) {
    std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
    std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
    auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    auto lo0 = static_cast<std::uint32_t>(p0);
    auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

/// Uniform variate in the open interval (0, 1) keyed by
/// (seed, trial, stream). 53 bits of resolution; never 0 or 1.
constexpr double keyed_uniform(std::uint64_t seed, std::uint64_t trial,
                               std::uint32_t stream) {
  Philox4x32::Counter ctr{static_cast<std::uint32_t>(trial),
                          static_cast<std::uint32_t>(trial >> 32), stream, 0};
  Philox4x32::Key key{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32)};
  auto out = Philox4x32::generate(ctr, key);
  std::uint64_t bits = (std::uint64_t{out[0]} << 32) | out[1];
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace rbd
