#pragma once

#include <cstdint>
#include <random>

namespace t4reg {

// Portable seeded generator: mt19937_64 words mapped to doubles by hand so
// draws match across standard libraries (std distributions are
// implementation-defined).
//   uniform(): top 53 bits of one word, in [0, 1)
//   normal():  Box-Muller on two uniform() draws, cosine branch only
class Rng {
 public:
  static constexpr const char* kAlgorithm = "mt19937_64/53-bit-uniform/box-muller-cos";

  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Uniform on [lo, hi); returns lo exactly when the interval is empty but
  // still consumes a draw so the stream position does not depend on widths.
  double uniform(double lo, double hi) {
    const double u = uniform();
    return hi == lo ? lo : lo + (hi - lo) * u;
  }

  double normal();

 private:
  std::mt19937_64 eng_;
};

}  // namespace t4reg
