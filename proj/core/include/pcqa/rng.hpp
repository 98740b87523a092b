#ifndef PCQA_RNG_HPP
#define PCQA_RNG_HPP

#include <cmath>
#include <cstdint>
#include <cstring>
#include <string_view>
#include <utility>
#include <vector>

namespace pcqa {

// Deterministic 64-bit generator (splitmix64). Used everywhere randomness is
// needed so that results are bit-identical across platforms and standard
// library versions; std:: distributions are implementation-defined and must
// not be used.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound). Modulo bias is far below any tolerance the
  // pipeline relies on; determinism is what matters here.
  uint64_t next_below(uint64_t bound) { return bound == 0 ? 0 : next_u64() % bound; }

  // Standard normal via Box-Muller (deterministic, two uniforms per pair).
  double next_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = next_double();
    double u2 = next_double();
    // avoid log(0)
    if (u1 < 1e-300) u1 = 1e-300;
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    if (v.size() < 2) return;
    for (size_t i = v.size() - 1; i > 0; --i) {
      size_t j = static_cast<size_t>(next_below(i + 1));
      std::swap(v[i], v[j]);
    }
  }

 private:
  uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// FNV-1a, used for cache keys and seed derivation.
inline uint64_t fnv1a64(const void* data, size_t len, uint64_t h = 0xcbf29ce484222325ull) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline uint64_t fnv1a64(std::string_view s, uint64_t h = 0xcbf29ce484222325ull) {
  return fnv1a64(s.data(), s.size(), h);
}

// Derives an independent stream seed from a base seed and a purpose tag, so
// e.g. epoch shuffling and dropout masks never share a stream.
inline uint64_t derive_seed(uint64_t base, std::string_view tag, uint64_t index = 0) {
  uint64_t h = fnv1a64(tag);
  h = fnv1a64(&base, sizeof(base), h);
  h = fnv1a64(&index, sizeof(index), h);
  return h;
}

}  // namespace pcqa

#endif  // PCQA_RNG_HPP
