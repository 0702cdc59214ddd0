#pragma once

#include <cstdint>
#include <random>

namespace spinres {

/// Seeded uniform stream on [-1, 1).
///
/// Generator: std::mt19937_64, whose output sequence is fixed by the C++
/// standard (the 10000th output of a default-seeded engine is
/// 9981545732273789042). Each draw takes the top 53 bits of one engine
/// output, u = (x >> 11) * 2^-53 in [0, 1), and returns 2u - 1. No
/// implementation-defined distribution objects are involved, so a seed
/// reproduces the same doubles on every conforming platform.
class RngStream {
 public:
  static constexpr const char* kAlgorithm = "mt19937_64/top53";

  explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  double uniform_pm1() {
    ++draws_;
    const std::uint64_t x = engine_();
    const double u = static_cast<double>(x >> 11) * 0x1.0p-53;
    return 2.0 * u - 1.0;
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t draws() const noexcept { return draws_; }

 private:
  std::uint64_t seed_;
  std::uint64_t draws_ = 0;
  std::mt19937_64 engine_;
};

}  // namespace spinres
