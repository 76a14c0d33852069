#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace xsteer {

// Gaussian sampler with a pinned algorithm. std::normal_distribution is
// implementation-defined, so weight generation uses an explicit Box-Muller
// transform over mt19937_64: identical seeds give identical weights on every
// platform.
class GaussianRng {
 public:
  explicit GaussianRng(std::uint64_t seed) : gen_(seed) {}

  // Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller, cosine branch. Two engine draws per
  // sample; the sine twin is discarded so the sequence is a pure function of
  // how many normals have been drawn.
  double normal() {
    double u1 = uniform();
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    return r * std::cos(theta);
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace xsteer
