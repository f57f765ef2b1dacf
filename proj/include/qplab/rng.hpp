#pragma once

// Splittable seeded random streams. A stream is identified by a 64-bit key;
// derive() mixes a stable text label into the key so each consumer draws from
// its own reproducible sequence.

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace qplab {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : key_(splitmix64(seed)), engine_(key_) {}

  RandomStream derive(std::string_view label) const {
    RandomStream child(0);
    child.key_ = splitmix64(key_ ^ fnv1a(label));
    child.engine_.seed(child.key_);
    return child;
  }
  RandomStream derive(std::string_view label, std::uint64_t index) const {
    RandomStream child = derive(label);
    child.key_ = splitmix64(child.key_ + index);
    child.engine_.seed(child.key_);
    return child;
  }

  std::uint64_t key() const noexcept { return key_; }

  // Uniform in [0,1) with 53 random bits; independent of the standard
  // library's distribution implementations.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Standard normal by Box-Muller.
  double normal() {
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  }

 private:
  std::uint64_t key_;
  std::mt19937_64 engine_;
};

}  // namespace qplab
