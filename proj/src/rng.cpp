#include "smp/rng.hpp"

#include <cmath>

namespace smp {
namespace philox {

namespace {
constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}
}  // namespace

Block round10(Block c, std::array<std::uint32_t, 2> key) {
  for (int r = 0; r < 10; ++r) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kM0, c[0], hi0, lo0);
    mulhilo(kM1, c[2], hi1, lo1);
    c = Block{hi1 ^ c[1] ^ key[0], lo1, hi0 ^ c[3] ^ key[1], lo0};
    key[0] += kW0;
    key[1] += kW1;
  }
  return c;
}

}  // namespace philox

double normal_draw(std::uint64_t seed, std::uint64_t path, std::uint32_t step,
                   std::uint32_t slot) {
  const auto b = philox::block(seed, path, step, slot, 0);
  const double u1 = philox::u01(b[0], b[1]);
  const double u2 = philox::u01(b[2], b[3]);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double uniform_draw(std::uint64_t seed, std::uint64_t path, std::uint32_t step,
                    std::uint32_t slot) {
  const auto b = philox::block(seed, path, step, slot, 1);
  return philox::u01(b[0], b[1]);
}

}  // namespace smp
