#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace binreg {

// Seeded generator with platform-independent bounded draws.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the
// standard. Bounded integers come from rejection sampling on the raw 64-bit
// output instead of std::uniform_int_distribution, whose algorithm differs
// between standard library implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  // Uniform integer in [0, n). n must be positive.
  uint64_t below(uint64_t n) {
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t draw;
    do {
      draw = engine_();
    } while (draw >= limit);
    return draw % n;
  }

  // Fisher-Yates.
  template <typename T>
  void shuffle(std::span<T> items) {
    for (size_t i = items.size(); i > 1; --i) {
      const size_t j = below(i);
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace binreg
