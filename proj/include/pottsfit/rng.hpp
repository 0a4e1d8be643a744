#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace pottsfit {

// All randomness in the library flows from one master seed. Substreams are
// derived by hashing (master, purpose tag, index); the tag convention is
// documented in docs/formats.md so runs are reproducible across platforms.
uint64_t derive_seed(uint64_t master, std::string_view tag, uint64_t index = 0);

// mt19937_64 with hand-rolled uniform/normal transforms so that results are
// bit-identical wherever IEEE doubles behave the same.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // uniform on [0, 1), 53-bit resolution
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // uniform on (0, 1], safe as a log() argument
  double uniform_pos() {
    return static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53;
  }

  // unbiased integer in [0, n) via rejection
  uint32_t uniform_below(uint32_t n);

  // Box-Muller, no cached spare: every call consumes exactly two uniforms,
  // which keeps call sites reproducible regardless of interleaving.
  double normal() {
    double u1 = uniform_pos();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace pottsfit
