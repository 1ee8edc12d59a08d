#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace psg {

// Running-max log-sum-exp; never exponentiates an unshifted term.
class LogSumExp {
 public:
  void add(double x) {
    if (x == -std::numeric_limits<double>::infinity()) return;
    if (x <= max_) {
      sum_ += std::exp(x - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - x) + 1.0;
      max_ = x;
    }
  }
  double value() const {
    return sum_ == 0.0 ? -std::numeric_limits<double>::infinity() : max_ + std::log(sum_);
  }

 private:
  double max_ = -std::numeric_limits<double>::infinity();
  double sum_ = 0.0;
};

// Gibbs averages of a fixed set of observables over a stream of (energy, values).
// beta = +inf gives the uniform measure on the maximizers; energies within
// kTieTolerance * (1 + |max|) of the running maximum count as ties.
class GibbsAccumulator {
 public:
  static constexpr double kTieTolerance = 1e-10;

  GibbsAccumulator(double beta, std::size_t observables)
      : beta_(beta), infinite_(std::isinf(beta)), sums_(observables, 0.0) {}

  void add(double energy, std::span<const double> values) {
    if (infinite_) {
      add_ground(energy, values);
      return;
    }
    const double x = beta_ * energy;
    if (x <= max_) {
      const double w = std::exp(x - max_);
      total_ += w;
      for (std::size_t k = 0; k < sums_.size(); ++k) sums_[k] += w * values[k];
    } else {
      const double shrink = std::exp(max_ - x);
      total_ = total_ * shrink + 1.0;
      for (std::size_t k = 0; k < sums_.size(); ++k) sums_[k] = sums_[k] * shrink + values[k];
      max_ = x;
    }
    ++visited_;
  }

  std::vector<double> expectations() const {
    std::vector<double> out(sums_.size());
    for (std::size_t k = 0; k < sums_.size(); ++k) out[k] = sums_[k] / total_;
    return out;
  }
  // log sum_sigma exp(beta H); finite beta only.
  double log_partition() const { return max_ + std::log(total_); }
  double max_energy() const { return infinite_ ? ground_ : max_ / beta_; }
  std::uint64_t ties() const { return static_cast<std::uint64_t>(total_); }
  std::uint64_t visited() const { return visited_; }

 private:
  void add_ground(double energy, std::span<const double> values) {
    ++visited_;
    const double tol = kTieTolerance * (1.0 + std::abs(ground_));
    if (total_ > 0 && energy < ground_ - tol) return;
    if (total_ == 0 || energy > ground_ + tol) {
      ground_ = energy;
      total_ = 0.0;
      std::fill(sums_.begin(), sums_.end(), 0.0);
    } else if (energy > ground_) {
      ground_ = energy;
    }
    total_ += 1.0;
    for (std::size_t k = 0; k < sums_.size(); ++k) sums_[k] += values[k];
  }

  double beta_;
  bool infinite_;
  double max_ = -std::numeric_limits<double>::infinity();
  double ground_ = -std::numeric_limits<double>::infinity();
  double total_ = 0.0;
  std::uint64_t visited_ = 0;
  std::vector<double> sums_;
};

}  // namespace psg
