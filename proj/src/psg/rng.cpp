#include "psg/rng.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "psg/error.hpp"

namespace psg {

double counter_normal(std::uint64_t seed, std::uint64_t index) {
  const std::uint64_t pair = index / 2;
  const double u1 = 1.0 - bits_to_unit(counter_bits(seed, 2 * pair));
  const double u2 = bits_to_unit(counter_bits(seed, 2 * pair + 1));
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return (index % 2 == 0) ? radius * std::cos(angle) : radius * std::sin(angle);
}

std::uint64_t Rng::below(std::uint64_t n) {
  require(n > 0, ErrorCode::invalid_argument, "Rng::below: n must be positive");
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t x = engine_();
    if (x >= threshold) return x % n;
  }
}

std::string Rng::state() const {
  std::ostringstream os;
  os << engine_;
  return os.str();
}

void Rng::set_state(const std::string& text) {
  std::istringstream is(text);
  is >> engine_;
  require(!is.fail(), ErrorCode::invalid_argument, "Rng::set_state: malformed engine state");
}

}  // namespace psg
