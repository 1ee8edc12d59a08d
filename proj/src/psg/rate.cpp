#include "psg/rate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "psg/parallel.hpp"
#include "psg/rng.hpp"

namespace psg {

namespace {

constexpr double kZeroEntry = 1e-300;

double xlogy_kl(double x, double scale) { return x < kZeroEntry ? 0.0 : x * std::log(scale * x); }

void check_kappa(int kappa, int min, const char* where) {
  require(kappa >= min, ErrorCode::invalid_argument,
          std::string(where) + ": kappa must be >= " + std::to_string(min));
}

double gap_of(int kappa, std::span<const double> r) {
  const double u = 1.0 / (static_cast<double>(kappa) * kappa);
  double s = 0.0;
  for (double x : r) s += (x - u) * (x - u);
  return s;
}

double objective_of(int kappa, std::span<const double> r, double beta) {
  const double k2 = static_cast<double>(kappa) * kappa;
  double kl = 0.0;
  for (double x : r) kl += xlogy_kl(x, k2);
  return kl - beta * beta * gap_of(kappa, r);
}

// Projects a kappa x kappa matrix onto matrices with zero row and column sums.
void double_center(int kappa, std::vector<double>& m) {
  std::vector<double> row(static_cast<std::size_t>(kappa), 0.0), col(static_cast<std::size_t>(kappa), 0.0);
  double total = 0.0;
  for (int a = 0; a < kappa; ++a)
    for (int b = 0; b < kappa; ++b) {
      const double x = m[static_cast<std::size_t>(a) * kappa + b];
      row[a] += x;
      col[b] += x;
      total += x;
    }
  for (int a = 0; a < kappa; ++a)
    for (int b = 0; b < kappa; ++b)
      m[static_cast<std::size_t>(a) * kappa + b] += total / (kappa * kappa) - (row[a] + col[b]) / kappa;
}

// Pushes r radially away from u until ||r - u||^2 >= delta, clamping and re-fitting
// margins whenever the rescale leaves the nonnegative orthant.
bool push_to_shell(int kappa, std::vector<double>& r, double delta) {
  const double u = 1.0 / (static_cast<double>(kappa) * kappa);
  for (int pass = 0; pass < 200; ++pass) {
    const double gap = gap_of(kappa, r);
    if (gap >= delta) return true;
    if (gap < 1e-300) return false;
    const double scale = std::sqrt(delta / gap) * (1.0 + 1e-12);
    bool clamped = false;
    for (double& x : r) {
      x = u + (x - u) * scale;
      if (x < 0.0) {
        x = 0.0;
        clamped = true;
      }
    }
    if (clamped) fit_margins(kappa, r);
  }
  return gap_of(kappa, r) >= delta;
}

struct LocalRun {
  double value = std::numeric_limits<double>::infinity();
  std::vector<double> point;
  long iterations = 0;
  bool converged = false;
  bool feasible = false;
};

// Projected gradient descent in the margin-preserving subspace, with the step's radial
// component removed while the shell constraint is active, and backtracking on the objective.
LocalRun descend(int kappa, double beta, double delta, std::vector<double> r, int max_iterations) {
  LocalRun out;
  const double u = 1.0 / (static_cast<double>(kappa) * kappa);
  const double k2 = static_cast<double>(kappa) * kappa;
  if (!push_to_shell(kappa, r, delta)) return out;
  double value = objective_of(kappa, r, beta);
  double step = 0.1 / k2;
  std::vector<double> dir(r.size()), cand(r.size());
  int quiet = 0;
  for (long it = 0; it < max_iterations; ++it) {
    out.iterations = it + 1;
    for (std::size_t k = 0; k < r.size(); ++k)
      dir[k] = -(std::log(k2 * std::max(r[k], kZeroEntry)) + 1.0 - 2.0 * beta * beta * (r[k] - u));
    double_center(kappa, dir);
    const double gap = gap_of(kappa, r);
    if (gap <= delta * (1.0 + 1e-9)) {
      double dot = 0.0;
      for (std::size_t k = 0; k < r.size(); ++k) dot += dir[k] * (r[k] - u);
      if (dot < 0.0)
        for (std::size_t k = 0; k < r.size(); ++k) dir[k] -= dot / gap * (r[k] - u);
    }
    double dnorm = 0.0;
    for (double d : dir) dnorm = std::max(dnorm, std::abs(d));
    if (dnorm < 1e-11) {
      out.converged = true;
      break;
    }
    bool accepted = false;
    while (step * dnorm > 1e-16) {
      bool negative = false;
      for (std::size_t k = 0; k < r.size(); ++k) {
        cand[k] = r[k] + step * dir[k];
        if (cand[k] < 0.0) negative = true;
      }
      if (negative) {
        step *= 0.5;
        continue;
      }
      fit_margins(kappa, cand);
      if (!push_to_shell(kappa, cand, delta)) {
        step *= 0.5;
        continue;
      }
      const double v = objective_of(kappa, cand, beta);
      if (v < value) {
        quiet = value - v < 1e-15 * (1.0 + std::abs(value)) ? quiet + 1 : 0;
        r.swap(cand);
        value = v;
        step *= 1.5;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted || quiet >= 20) {
      out.converged = true;
      break;
    }
  }
  out.value = value;
  out.point = std::move(r);
  out.feasible = gap_of(kappa, out.point) >= delta - 1e-12;
  return out;
}

double row_objective(std::span<const double> v, double beta) {
  const double kappa = static_cast<double>(v.size());
  double ent = 0.0, sq = 0.0;
  for (double x : v) {
    ent += xlogy_kl(std::max(x, 0.0), kappa);
    sq += x * x;
  }
  return ent - beta * beta / kappa * sq;
}

std::vector<double> dirichlet_start(int kappa, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> r(static_cast<std::size_t>(kappa) * kappa);
  for (double& x : r) x = -std::log(1.0 - rng.uniform()) + 1e-12;
  fit_margins(kappa, r);
  return r;
}

// Best `keep` points of the pitch-1/(3m) grid on the kappa = 3 polytope with gap >= delta.
std::vector<std::pair<double, std::vector<double>>> grid_seeds(double beta, double delta, int m, std::size_t keep) {
  std::vector<std::pair<double, std::vector<double>>> best;
  const double total = 3.0 * m;
  std::vector<double> r(9);
  for (int a = 0; a <= m; ++a)
    for (int b = 0; a + b <= m; ++b)
      for (int d = 0; d <= m; ++d)
        for (int e = 0; d + e <= m; ++e) {
          const int g = m - a - d, h = m - b - e;
          if (g < 0 || h < 0) continue;
          const int c = m - a - b, f = m - d - e, i = m - g - h;
          if (i < 0 || c + f + i != m) continue;
          const int cells[9] = {a, b, c, d, e, f, g, h, i};
          for (int k = 0; k < 9; ++k) r[k] = cells[k] / total;
          if (gap_of(3, r) < delta) continue;
          const double v = objective_of(3, r, beta);
          if (best.size() < keep || v < best.back().first) {
            best.emplace_back(v, r);
            std::sort(best.begin(), best.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
            if (best.size() > keep) best.pop_back();
          }
        }
  return best;
}

}  // namespace

PolytopePoint::PolytopePoint(int kappa, std::vector<double> values) : kappa_(kappa), r_(std::move(values)) {
  check_kappa(kappa, 2, "PolytopePoint");
  require(r_.size() == static_cast<std::size_t>(kappa) * kappa, ErrorCode::dimension_mismatch,
          "PolytopePoint: expected kappa*kappa entries");
  for (double& x : r_) {
    require(std::isfinite(x) && x >= -1e-15, ErrorCode::invalid_argument, "PolytopePoint: negative entry");
    if (x < 0.0) x = 0.0;
  }
  const double margin = 1.0 / kappa;
  for (int a = 0; a < kappa; ++a) {
    double row = 0.0, col = 0.0;
    for (int b = 0; b < kappa; ++b) {
      row += (*this)(a, b);
      col += (*this)(b, a);
    }
    require(std::abs(row - margin) <= kMarginTolerance && std::abs(col - margin) <= kMarginTolerance,
            ErrorCode::invalid_argument, "PolytopePoint: margins must equal 1/kappa within 1e-12");
  }
}

PolytopePoint PolytopePoint::uniform(int kappa) {
  return PolytopePoint(kappa, std::vector<double>(static_cast<std::size_t>(kappa) * kappa,
                                                  1.0 / (static_cast<double>(kappa) * kappa)));
}

double kl_to_uniform(const PolytopePoint& r) {
  const double k2 = static_cast<double>(r.kappa()) * r.kappa();
  double s = 0.0;
  for (double x : r.values()) s += xlogy_kl(x, k2);
  return s;
}

double frobenius_gap(const PolytopePoint& r) { return gap_of(r.kappa(), r.values()); }

double frobenius_norm_sq(const PolytopePoint& r) {
  double s = 0.0;
  for (double x : r.values()) s += x * x;
  return s;
}

namespace {

// (1+t) log(1+t) - t - t^2/2 for |t| <= 1/2, by its alternating series near 0.
double expansion_remainder(double t) {
  if (std::abs(t) >= 0.1) return (1.0 + t) * std::log1p(t) - t - 0.5 * t * t;
  double sum = 0.0, power = t * t;
  for (int k = 3; k <= 24; ++k) {
    power *= -t;
    sum += power / (static_cast<double>(k) * (k - 1));
  }
  return sum;
}

}  // namespace

ExpansionCheck local_expansion_check(std::span<const double> p, std::span<const double> q) {
  require(p.size() == q.size() && !p.empty(), ErrorCode::dimension_mismatch,
          "local_expansion_check: p and q must have the same nonzero length");
  ExpansionCheck out;
  const double qmin = *std::min_element(q.begin(), q.end());
  double maxdiff = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) maxdiff = std::max(maxdiff, std::abs(p[i] - q[i]));
  if (!(qmin > 0.0) || maxdiff > 0.5 * qmin) {
    out.status = ExpansionStatus::precondition_violated;
    return out;
  }
  // Termwise D - chi^2/2 = sum q phi(d/q) once the linear term sum (p - q) = 0 is dropped.
  double remainder = 0.0, cube = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i] - q[i];
    remainder += q[i] * expansion_remainder(d / q[i]);
    cube += std::abs(d) * d * d;
  }
  out.lhs_gap = std::abs(remainder);
  out.rhs_bound = 5.0 * cube / (qmin * qmin);
  out.holds = out.lhs_gap <= out.rhs_bound;
  return out;
}

double ew90_row_objective(std::span<const double> v, double beta) {
  require(!v.empty(), ErrorCode::invalid_argument, "ew90_row_objective: empty vector");
  double total = 0.0;
  for (double x : v) {
    require(x >= -1e-15, ErrorCode::invalid_argument, "ew90_row_objective: negative entry");
    total += x;
  }
  require(std::abs(total - 1.0) <= 1e-12, ErrorCode::invalid_argument,
          "ew90_row_objective: entries must sum to 1");
  return row_objective(v, beta);
}

double rate_objective_raw(const PolytopePoint& r, double beta) {
  return kl_to_uniform(r) - beta * beta * frobenius_norm_sq(r);
}

double rate_objective_rows(const PolytopePoint& r, double beta) {
  const int kappa = r.kappa();
  std::vector<double> v(static_cast<std::size_t>(kappa));
  double s = 0.0;
  for (int a = 0; a < kappa; ++a) {
    for (int b = 0; b < kappa; ++b) v[b] = kappa * r(a, b);
    s += row_objective(v, beta);
  }
  return s / kappa;
}

double exponent_objective(const PolytopePoint& r, double beta) { return objective_of(r.kappa(), r.values(), beta); }

double max_frobenius_gap(int kappa) { return (kappa - 1.0) / (static_cast<double>(kappa) * kappa); }

double fit_margins(int kappa, std::vector<double>& r, double tolerance, int max_sweeps) {
  const double margin = 1.0 / kappa;
  double err = std::numeric_limits<double>::infinity();
  for (int sweep = 0; sweep < max_sweeps && err > tolerance; ++sweep) {
    for (int a = 0; a < kappa; ++a) {
      double row = 0.0;
      for (int b = 0; b < kappa; ++b) row += r[static_cast<std::size_t>(a) * kappa + b];
      if (row > 0.0)
        for (int b = 0; b < kappa; ++b) r[static_cast<std::size_t>(a) * kappa + b] *= margin / row;
    }
    err = 0.0;
    for (int b = 0; b < kappa; ++b) {
      double col = 0.0;
      for (int a = 0; a < kappa; ++a) col += r[static_cast<std::size_t>(a) * kappa + b];
      if (col > 0.0)
        for (int a = 0; a < kappa; ++a) r[static_cast<std::size_t>(a) * kappa + b] *= margin / col;
    }
    for (int a = 0; a < kappa; ++a) {
      double row = 0.0;
      for (int b = 0; b < kappa; ++b) row += r[static_cast<std::size_t>(a) * kappa + b];
      err = std::max(err, std::abs(row - margin));
    }
  }
  return err;
}

GapResult exponent_gap(int kappa, double beta, double delta, const GapOptions& options) {
  check_kappa(kappa, 2, "exponent_gap");
  require(beta >= 0.0 && std::isfinite(beta), ErrorCode::invalid_argument, "exponent_gap: beta must be finite and >= 0");
  require(options.restarts >= 1, ErrorCode::invalid_argument, "exponent_gap: restarts must be >= 1");
  require(delta > 0.0, ErrorCode::invalid_argument, "exponent_gap: delta must be > 0");
  require(delta <= max_frobenius_gap(kappa) * (1.0 + 1e-12), ErrorCode::infeasible,
          "exponent_gap: delta exceeds the maximal gap (kappa-1)/kappa^2 = " +
              std::to_string(max_frobenius_gap(kappa)));

  std::vector<std::vector<double>> starts;
  for (int i = 0; i < options.restarts; ++i)
    starts.push_back(dirichlet_start(kappa, child_seed(options.seed, static_cast<std::uint64_t>(i))));
  GapResult out;
  out.grid_best = std::numeric_limits<double>::quiet_NaN();
  if (kappa == 3 && options.seed_grid > 0) {
    const auto seeds = grid_seeds(beta, delta, options.seed_grid, 8);
    if (!seeds.empty()) out.grid_best = seeds.front().first;
    const double u = 1.0 / 9.0;
    for (const auto& [value, point] : seeds) {
      std::vector<double> r = point;
      for (double& x : r) x = (1.0 - 1e-6) * x + 1e-6 * u;
      starts.push_back(std::move(r));
    }
  }

  std::vector<LocalRun> runs(starts.size());
  parallel_for(starts.size(), options.workers, [&](std::size_t i) {
    runs[i] = descend(kappa, beta, delta, starts[i], options.max_iterations);
  });

  out.kappa = kappa;
  out.beta = beta;
  out.delta = delta;
  out.restarts = static_cast<int>(runs.size());
  out.minimum = std::numeric_limits<double>::infinity();
  for (const auto& run : runs) {
    out.iterations += run.iterations;
    if (run.feasible && run.value < out.minimum) {
      out.minimum = run.value;
      out.argmin = run.point;
      out.converged = run.converged;
    }
  }
  require(!out.argmin.empty(), ErrorCode::not_converged, "exponent_gap: no start reached the feasible shell");
  out.argmin_gap = gap_of(kappa, out.argmin);
  return out;
}

BetaKappa beta_kappa(int kappa) {
  check_kappa(kappa, 3, "beta_kappa");
  const double k = kappa;
  const double root = std::sqrt(k * (k - 1.0) * std::log(k - 1.0));
  BetaKappa out;
  out.first = root / std::sqrt(k - 2.0);
  out.second = root * std::numbers::sqrt2 / (k - 2.0);
  if (std::abs(out.first - out.second) <= 1e-12 * out.first) {
    out.branch = ThresholdBranch::tie;
    out.value = std::min(out.first, out.second);
  } else if (out.first < out.second) {
    out.branch = ThresholdBranch::first;
    out.value = out.first;
  } else {
    out.branch = ThresholdBranch::second;
    out.value = out.second;
  }
  return out;
}

const char* to_string(ThresholdBranch branch) {
  switch (branch) {
    case ThresholdBranch::first:
      return "first";
    case ThresholdBranch::second:
      return "second";
    case ThresholdBranch::tie:
      return "tie";
  }
  return "?";
}

double annealed_limit(int kappa, double beta) {
  check_kappa(kappa, 2, "annealed_limit");
  require(beta >= 0.0, ErrorCode::invalid_argument, "annealed_limit: beta must be >= 0");
  const double k = kappa;
  return std::log(k) + beta * beta * (k - 1.0) / (2.0 * k * k);
}

double ew90_critical(int kappa) {
  check_kappa(kappa, 3, "ew90_critical");
  const double k = kappa;
  return 2.0 * (k - 1.0) * std::log(k - 1.0) / (k - 2.0);
}

double a_kappa(int kappa) {
  check_kappa(kappa, 2, "a_kappa");
  return 1.0 - 2.0 / kappa;
}

FerroCheck ferro_reduction_check(int kappa, double beta) {
  check_kappa(kappa, 3, "ferro_reduction_check");
  const double k = kappa;
  FerroCheck out;
  out.threshold = std::sqrt(2.0 * k * (k - 1.0) * std::log(k - 1.0)) / (k - 2.0);
  // beta^2 a_kappa < 2 (kappa-1) log(kappa-1) / (kappa-2), solved for beta.
  const double other = std::sqrt(ew90_critical(kappa) / a_kappa(kappa));
  out.form_gap = std::abs(other - out.threshold) / out.threshold;
  out.holds = beta < out.threshold;
  return out;
}

ZeroTempBounds zero_temp_bounds(int kappa) {
  check_kappa(kappa, 2, "zero_temp_bounds");
  const double k = kappa;
  ZeroTempBounds out;
  out.balanced_upper = std::sqrt(2.0 * (k - 1.0) * std::log(k) / (k * k));
  out.unconstrained_lower = 2.0 / (3.0 * std::sqrt(std::numbers::pi));
  out.breaks = out.balanced_upper < out.unconstrained_lower;
  return out;
}

int min_breaking_kappa() {
  for (int kappa = 2;; ++kappa)
    if (zero_temp_bounds(kappa).breaks) return kappa;
}

std::vector<ThresholdRow> threshold_table(int kappa_max) {
  require(kappa_max >= 3, ErrorCode::invalid_argument, "threshold_table: kappa_max must be >= 3");
  std::vector<ThresholdRow> rows;
  for (int kappa = 3; kappa <= kappa_max; ++kappa)
    rows.push_back(ThresholdRow{kappa, beta_kappa(kappa), ew90_critical(kappa), zero_temp_bounds(kappa)});
  return rows;
}

}  // namespace psg
