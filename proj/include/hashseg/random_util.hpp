// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef HASHSEG_RANDOM_UTIL_HPP
#define HASHSEG_RANDOM_UTIL_HPP

#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace hashseg {

// Seeded PRNG whose draw sequence does not depend on the standard library
// implementation (std::shuffle and the distribution classes are unspecified
// across vendors; mt19937 itself is pinned by the standard).
class DetRng {
 public:
  explicit DetRng(uint32_t seed) : gen_(seed) {}

  // Uniform integer in [lo, hi], inclusive. Modulo draw; the bias is
  // negligible for the small ranges used here and the sequence is stable.
  uint64_t uniform(uint64_t lo, uint64_t hi) {
    uint64_t span = hi - lo + 1;
    uint64_t raw = (static_cast<uint64_t>(gen_()) << 32) | gen_();
    return lo + raw % span;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(uniform(0, i - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

  std::vector<size_t> permutation(size_t n) {
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), size_t{0});
    shuffle(idx);
    return idx;
  }

  uint32_t raw() { return gen_(); }

 private:
  std::mt19937 gen_;
};

}  // namespace hashseg

#endif
