#include "pottsfit/rng.hpp"

namespace pottsfit {

namespace {

constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ull;

uint64_t mix64(uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

}  // namespace

uint64_t derive_seed(uint64_t master, std::string_view tag, uint64_t index) {
  uint64_t h = mix64(master ^ fnv1a64(tag));
  return mix64(h ^ (index * kGolden));
}

uint32_t Rng::uniform_below(uint32_t n) {
  // rejection over the top 32 bits; bias-free for any n >= 1
  uint64_t limit = (0x100000000ull / n) * n;
  for (;;) {
    uint64_t x = gen_() >> 32;
    if (x < limit) return static_cast<uint32_t>(x % n);
  }
}

}  // namespace pottsfit
