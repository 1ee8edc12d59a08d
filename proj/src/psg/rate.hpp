#pragma once

// Rate functions on the transportation polytope and the closed-form thresholds.

#include <cstdint>
#include <span>
#include <vector>

#include "psg/error.hpp"

namespace psg {

// kappa x kappa row-major matrix with nonnegative entries and every margin 1/kappa.
class PolytopePoint {
 public:
  static constexpr double kMarginTolerance = 1e-12;

  // Entries in [-1e-15, 0) are clamped to 0; anything else off the polytope throws.
  PolytopePoint(int kappa, std::vector<double> values);
  static PolytopePoint uniform(int kappa);

  int kappa() const noexcept { return kappa_; }
  double operator()(int a, int b) const { return r_[static_cast<std::size_t>(a) * kappa_ + b]; }
  std::span<const double> values() const noexcept { return r_; }

 private:
  int kappa_;
  std::vector<double> r_;
};

// D(r || u) = sum_ab r_ab log(kappa^2 r_ab), with 0 log 0 = 0.
double kl_to_uniform(const PolytopePoint& r);
// ||r - u||_F^2 with u = kappa^-2 11^T.
double frobenius_gap(const PolytopePoint& r);
double frobenius_norm_sq(const PolytopePoint& r);

enum class ExpansionStatus { ok, precondition_violated };

struct ExpansionCheck {
  ExpansionStatus status = ExpansionStatus::ok;
  double lhs_gap = 0.0;    // |D(p||q) - (1/2) sum (p-q)^2 / q|
  double rhs_bound = 0.0;  // 5 (min q)^-2 sum |p-q|^3
  bool holds = false;
};

// Requires min q > 0 and max |p - q| <= min q / 2; otherwise returns precondition_violated.
ExpansionCheck local_expansion_check(std::span<const double> p, std::span<const double> q);

// S(v) = sum_b v_b log(kappa v_b) - (beta^2 / kappa) sum_b v_b^2 on the simplex.
double ew90_row_objective(std::span<const double> v, double beta);
// D(r||u) - beta^2 ||r||_F^2, evaluated directly.
double rate_objective_raw(const PolytopePoint& r, double beta);
// kappa^-1 sum_a S(kappa r_a.), the row-decomposed form of the same quantity.
double rate_objective_rows(const PolytopePoint& r, double beta);
// D(r||u) - beta^2 ||r - u||_F^2
double exponent_objective(const PolytopePoint& r, double beta);

struct GapOptions {
  int restarts = 64;
  int max_iterations = 4000;
  std::uint64_t seed = 1;
  int workers = 1;
  // Pitch of the boundary grid used to seed extra starts at kappa = 3; 0 disables it.
  int seed_grid = 60;
};

struct GapResult {
  double minimum = 0.0;
  std::vector<double> argmin;  // row-major kappa x kappa
  double argmin_gap = 0.0;     // ||argmin - u||_F^2
  double delta = 0.0;
  double beta = 0.0;
  int kappa = 0;
  int restarts = 0;
  long iterations = 0;
  double grid_best = 0.0;  // best seed-grid value, NaN when no grid was used
  bool converged = false;
};

// min { D(r||u) - beta^2 ||r-u||^2 : r on the polytope, ||r-u||^2 >= delta }.
// delta must lie in (0, (kappa-1)/kappa^2]; larger values throw ErrorCode::infeasible.
GapResult exponent_gap(int kappa, double beta, double delta, const GapOptions& options = {});

double max_frobenius_gap(int kappa);

// Alternating row/column rescaling onto the margins 1/kappa. Returns the final max margin error.
double fit_margins(int kappa, std::vector<double>& r, double tolerance = 1e-14, int max_sweeps = 10000);

enum class ThresholdBranch { first, second, tie };

struct BetaKappa {
  double value = 0.0;
  double first = 0.0;   // sqrt(kappa(kappa-1)log(kappa-1)) (kappa-2)^{-1/2}
  double second = 0.0;  // sqrt(kappa(kappa-1)log(kappa-1)) sqrt(2)/(kappa-2)
  ThresholdBranch branch = ThresholdBranch::first;
};

BetaKappa beta_kappa(int kappa);
const char* to_string(ThresholdBranch branch);

// log kappa + beta^2 (kappa-1) / (2 kappa^2)
double annealed_limit(int kappa, double beta);
// 2 (kappa-1) log(kappa-1) / (kappa-2)
double ew90_critical(int kappa);
// 1 - 2/kappa
double a_kappa(int kappa);

struct FerroCheck {
  bool holds = false;
  double threshold = 0.0;   // sqrt(2 kappa (kappa-1) log(kappa-1)) / (kappa-2)
  double form_gap = 0.0;    // relative disagreement of the two algebraic forms
};

FerroCheck ferro_reduction_check(int kappa, double beta);

struct ZeroTempBounds {
  double balanced_upper = 0.0;       // sqrt(2 (kappa-1) log kappa / kappa^2)
  double unconstrained_lower = 0.0;  // 2 / (3 sqrt(pi))
  bool breaks = false;
};

ZeroTempBounds zero_temp_bounds(int kappa);
int min_breaking_kappa();

struct ThresholdRow {
  int kappa = 0;
  BetaKappa beta;
  double ew90 = 0.0;
  ZeroTempBounds zero_temp;
};

std::vector<ThresholdRow> threshold_table(int kappa_max);

}  // namespace psg
