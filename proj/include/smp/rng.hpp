#pragma once

#include <array>
#include <cstdint>

namespace smp {

// Philox4x32-10 counter-based generator.  Streams are indexed by
// (path, step, slot, draw) under one master key, so any draw can be produced
// independently of evaluation order; parallel reductions stay bit-identical.
namespace philox {

using Block = std::array<std::uint32_t, 4>;

Block round10(Block counter, std::array<std::uint32_t, 2> key);

inline Block block(std::uint64_t seed, std::uint64_t path, std::uint32_t step,
                   std::uint32_t slot, std::uint32_t draw) {
  const Block ctr{static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32),
                  step, (static_cast<std::uint32_t>(slot) << 16) ^ draw};
  const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(seed),
                                         static_cast<std::uint32_t>(seed >> 32)};
  return round10(ctr, key);
}

inline double u01(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t x = (static_cast<std::uint64_t>(hi) << 32) | lo;
  return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;  // in (0,1)
}

}  // namespace philox

// Standard normal draw, one per (seed, path, step, slot) key (Box-Muller on
// one Philox block).
double normal_draw(std::uint64_t seed, std::uint64_t path, std::uint32_t step,
                   std::uint32_t slot);

// Uniform draw in (0,1) for auxiliary sampling (validators, tests).
double uniform_draw(std::uint64_t seed, std::uint64_t path, std::uint32_t step,
                    std::uint32_t slot);

}  // namespace smp
