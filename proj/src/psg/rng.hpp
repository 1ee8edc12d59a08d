#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace psg {

// SplitMix64 output function (Steele, Lea, Flood 2014).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// Output number `counter` (0-based) of a SplitMix64 stream whose state starts at `seed`.
constexpr std::uint64_t counter_bits(std::uint64_t seed, std::uint64_t counter) noexcept {
  return mix64(seed + kGolden * (counter + 1));
}

// Replica splitting rule: the child seed of replica i is output i of the SplitMix64
// stream started at the root seed, so any replica can be rebuilt on its own.
constexpr std::uint64_t child_seed(std::uint64_t root, std::uint64_t index) noexcept {
  return counter_bits(root, index);
}

// Top 53 bits scaled to [0, 1).
constexpr double bits_to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Standard normal draw number `index` of the counter-based generator keyed by `seed`.
// Draws come in Box-Muller pairs: draws 2p and 2p+1 share uniforms u1 = 1 - U(2p) and
// u2 = U(2p+1); the even draw takes the cosine branch, the odd one the sine branch.
double counter_normal(std::uint64_t seed, std::uint64_t index);

// Sequential generator for Markov chains. The engine is std::mt19937_64 (fully specified
// by the standard); uniform transforms are done here so streams are portable.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }
  double uniform() { return bits_to_unit(engine_()); }
  // Unbiased integer in [0, n) by rejection.
  std::uint64_t below(std::uint64_t n);

  std::string state() const;
  void set_state(const std::string& text);

  bool operator==(const Rng& other) const { return engine_ == other.engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace psg
