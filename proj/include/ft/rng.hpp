#pragma once
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

// Deterministic RNG with named sub-streams. The standard distributions are
// implementation-defined, so gaussians are produced by an explicit Box-Muller
// transform to keep outputs byte-identical across toolchains.

namespace ft {

inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline uint64_t fnv1a64(std::string_view s, uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  // independent stream derived from a root seed and a purpose label
  static Rng substream(uint64_t root, std::string_view name) {
    uint64_t s = fnv1a64(name) ^ (root * 0x9e3779b97f4a7c15ull);
    splitmix64(s);  // decorrelate nearby roots
    return Rng(s);
  }

  uint64_t next_u64() { return splitmix64(state_); }

  // uniform in [0, 1)
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // u1 in (0,1] so log is finite
    double u1 = double((next_u64() >> 11) + 1) * 0x1.0p-53;
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  uint64_t state() const { return state_; }

 private:
  uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// counter-based gaussian: value depends only on (stream, counter), so
// per-sample noise can be generated in any order or in parallel
inline double gaussian_at(uint64_t stream, uint64_t counter) {
  uint64_t s = stream ^ (counter * 0xd1342543de82ef95ull + 0x2545f4914f6cdd1dull);
  uint64_t a = splitmix64(s);
  uint64_t b = splitmix64(s);
  double u1 = double((a >> 11) + 1) * 0x1.0p-53;
  double u2 = double(b >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace ft
