#include "psg/exact.hpp"

#include <cmath>
#include <limits>

#include "psg/accumulate.hpp"
#include "psg/parallel.hpp"
#include "psg/rng.hpp"

namespace psg {

namespace {

void check_beta(double beta, const char* where, bool allow_infinite = false) {
  require(beta >= 0.0 && !std::isnan(beta) && (allow_infinite || std::isfinite(beta)),
          ErrorCode::invalid_argument, std::string(where) + ": beta must be a nonnegative number");
}

void check_balanced(int n, int kappa, const char* where) {
  require(kappa >= 2 && kappa <= kMaxColors, ErrorCode::invalid_argument,
          std::string(where) + ": kappa must lie in [2, 255]");
  require(n >= 1 && n % kappa == 0, ErrorCode::divisibility,
          std::string(where) + ": balanced overlaps require kappa | N (kappa=" + std::to_string(kappa) +
              ", N=" + std::to_string(n) + ")");
}

// log(k!) for k = 0..n.
std::vector<double> log_factorials(int n) {
  std::vector<double> out(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) out[k] = std::lgamma(k + 1.0);
  return out;
}

class TableBudget {
 public:
  TableBudget(const EnumerationLimits& limits, const char* where) : cap_(limits.cap), where_(where) {}
  void tick() {
    if (++visited_ > cap_)
      fail(ErrorCode::cap_exceeded,
           std::string(where_) + ": more than " + std::to_string(static_cast<long long>(cap_)) +
               " overlap tables; raise the enumeration cap");
  }

 private:
  double cap_;
  const char* where_;
  double visited_ = 0;
};

void table_recurse(std::span<const int> rows, std::vector<int>& colrem, std::vector<int>& cells, int row,
                   int col, int rowrem, const std::function<void(std::span<const int>)>& fn) {
  const int k = static_cast<int>(rows.size());
  const int m = static_cast<int>(colrem.size());
  if (row == k - 1) {
    // Last row is forced by the remaining column sums.
    for (int b = 0; b < m; ++b) cells[static_cast<std::size_t>(row) * m + b] = colrem[b];
    fn(cells);
    return;
  }
  if (col == m - 1) {
    if (rowrem > colrem[col]) return;
    cells[static_cast<std::size_t>(row) * m + col] = rowrem;
    colrem[col] -= rowrem;
    table_recurse(rows, colrem, cells, row + 1, 0, rows[row + 1], fn);
    colrem[col] += rowrem;
    return;
  }
  // Leave enough room in later columns of this row.
  int later = 0;
  for (int b = col + 1; b < m; ++b) later += colrem[b];
  const int lo = std::max(0, rowrem - later);
  const int hi = std::min(rowrem, colrem[col]);
  for (int x = lo; x <= hi; ++x) {
    cells[static_cast<std::size_t>(row) * m + col] = x;
    colrem[col] -= x;
    table_recurse(rows, colrem, cells, row, col + 1, rowrem - x, fn);
    colrem[col] += x;
  }
}

// Every kappa x kappa nonnegative table with total n (free margins).
void composition_recurse(std::vector<int>& cells, std::size_t pos, int remaining,
                         const std::function<void(std::span<const int>)>& fn) {
  if (pos + 1 == cells.size()) {
    cells[pos] = remaining;
    fn(cells);
    return;
  }
  for (int x = 0; x <= remaining; ++x) {
    cells[pos] = x;
    composition_recurse(cells, pos + 1, remaining - x, fn);
  }
}

}  // namespace

void check_enumeration_cap(int n, int kappa, const Sector& sector, const EnumerationLimits& limits) {
  const double size = sector_size(n, kappa, sector);
  require(size <= limits.cap, ErrorCode::cap_exceeded,
          "enumeration of " + std::to_string(static_cast<long double>(size)) +
              " configurations exceeds the cap of " + std::to_string(static_cast<long long>(limits.cap)));
}

// ---------------------------------------------------------------------------
// Partition functions and Gibbs averages
// ---------------------------------------------------------------------------

FreeEnergySample log_partition(const CouplingMatrix& g, double beta, int kappa, const Sector& sector,
                               HamiltonianKind kind, const EnumerationLimits& limits) {
  check_beta(beta, "log_partition");
  const int n = g.size();
  sector.validate(n, kappa);
  check_enumeration_cap(n, kappa, sector, limits);
  const EnergyModel model(g, kappa, kind);
  LogSumExp acc;
  for_each_config(n, kappa, sector, [&](std::span<const Color> c) { acc.add(beta * model.energy(c)); });
  return FreeEnergySample{acc.value(), n, kappa, beta, g.seed(), sector, kind};
}

QuenchedEstimate quenched_free_energy(const DisorderSpec& spec) {
  require(spec.replicas >= 2, ErrorCode::invalid_argument, "quenched_free_energy: need at least 2 replicas");
  spec.sector.validate(spec.n, spec.kappa);
  check_enumeration_cap(spec.n, spec.kappa, spec.sector, spec.limits);
  QuenchedEstimate out;
  out.samples.resize(static_cast<std::size_t>(spec.replicas));
  parallel_for(out.samples.size(), spec.workers, [&](std::size_t r) {
    const auto g = CouplingMatrix::gaussian(spec.n, child_seed(spec.root_seed, r));
    out.samples[r] = log_partition(g, spec.beta, spec.kappa, spec.sector, spec.kind, spec.limits);
  });
  double sum = 0.0;
  for (const auto& s : out.samples) sum += s.free_energy();
  out.mean = sum / spec.replicas;
  double ss = 0.0;
  for (const auto& s : out.samples) ss += (s.free_energy() - out.mean) * (s.free_energy() - out.mean);
  out.std_error = std::sqrt(ss / (spec.replicas - 1) / spec.replicas);
  return out;
}

double annealed_log_partition(int n, double beta, int kappa, const Sector& sector, HamiltonianKind kind,
                              const EnumerationLimits& limits) {
  check_beta(beta, "annealed_log_partition");
  check_enumeration_cap(n, kappa, sector, limits);
  LogSumExp acc;
  for_each_config(n, kappa, sector, [&](std::span<const Color> c) {
    const SpinConfig sigma(kappa, std::vector<Color>(c.begin(), c.end()));
    const double variance =
        kind == HamiltonianKind::raw ? covariance_raw(sigma, sigma) : covariance_centered(sigma, sigma);
    acc.add(0.5 * beta * beta * variance);
  });
  return acc.value();
}

double gibbs_expectation(const CouplingMatrix& g, double beta, int kappa, const Observable& f,
                         const Sector& sector, HamiltonianKind kind, const EnumerationLimits& limits) {
  check_beta(beta, "gibbs_expectation", true);
  const int n = g.size();
  check_enumeration_cap(n, kappa, sector, limits);
  const EnergyModel model(g, kappa, kind);
  GibbsAccumulator acc(beta, 1);
  for_each_config(n, kappa, sector, [&](std::span<const Color> c) {
    const double value = f(SpinConfig(kappa, std::vector<Color>(c.begin(), c.end())));
    acc.add(model.energy(c), std::span<const double>(&value, 1));
  });
  return acc.expectations()[0];
}

GroundStateResult ground_state(const CouplingMatrix& g, int kappa, const Sector& sector, HamiltonianKind kind,
                               const EnumerationLimits& limits) {
  const int n = g.size();
  check_enumeration_cap(n, kappa, sector, limits);
  const EnergyModel model(g, kappa, kind);
  GroundStateResult out{-std::numeric_limits<double>::infinity(), 0, n, kappa, sector, {}};
  for_each_config(n, kappa, sector, [&](std::span<const Color> c) {
    const double e = model.energy(c);
    const double tol = GibbsAccumulator::kTieTolerance * (1.0 + std::abs(out.max_energy));
    if (out.maximizer_count == 0 || e > out.max_energy + tol) {
      out.max_energy = e;
      out.maximizer_count = 1;
      out.argmax.assign(c.begin(), c.end());
    } else if (e >= out.max_energy - tol) {
      ++out.maximizer_count;
      if (e > out.max_energy) out.max_energy = e;
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// Admissible matrices and the overlap law
// ---------------------------------------------------------------------------

AdmissibleMatrix::AdmissibleMatrix(int kappa, int n, std::vector<int> counts)
    : kappa_(kappa), n_(n), counts_(std::move(counts)) {
  check_balanced(n, kappa, "AdmissibleMatrix");
  require(counts_.size() == static_cast<std::size_t>(kappa) * kappa, ErrorCode::dimension_mismatch,
          "AdmissibleMatrix: expected kappa*kappa counts");
  const int margin = n / kappa;
  for (int a = 0; a < kappa; ++a) {
    int row = 0, col = 0;
    for (int b = 0; b < kappa; ++b) {
      require(count(a, b) >= 0 && count(b, a) >= 0, ErrorCode::invalid_argument,
              "AdmissibleMatrix: negative entry");
      row += count(a, b);
      col += count(b, a);
    }
    require(row == margin && col == margin, ErrorCode::invalid_argument,
            "AdmissibleMatrix: every row and column must sum to N/kappa = " + std::to_string(margin));
  }
}

std::vector<double> AdmissibleMatrix::values() const {
  std::vector<double> out(counts_.size());
  for (std::size_t k = 0; k < counts_.size(); ++k) out[k] = static_cast<double>(counts_[k]) / n_;
  return out;
}

std::int64_t AdmissibleMatrix::scaled_gap() const {
  const std::int64_t k2 = static_cast<std::int64_t>(kappa_) * kappa_;
  std::int64_t s = 0;
  for (int c : counts_) {
    const std::int64_t d = k2 * c - n_;
    s += d * d;
  }
  return s;
}

double AdmissibleMatrix::frobenius_gap() const {
  const double k2 = static_cast<double>(kappa_) * kappa_;
  return static_cast<double>(scaled_gap()) / (k2 * k2 * n_ * static_cast<double>(n_));
}

void for_each_table(std::span<const int> rows, std::span<const int> cols,
                    const std::function<void(std::span<const int>)>& fn) {
  require(!rows.empty() && !cols.empty(), ErrorCode::invalid_argument, "for_each_table: empty margins");
  long rs = 0, cs = 0;
  for (int r : rows) rs += r;
  for (int c : cols) cs += c;
  require(rs == cs, ErrorCode::invalid_argument, "for_each_table: row and column totals differ");
  std::vector<int> colrem(cols.begin(), cols.end());
  std::vector<int> cells(rows.size() * cols.size(), 0);
  table_recurse(rows, colrem, cells, 0, 0, rows[0], fn);
}

std::vector<AdmissibleMatrix> enumerate_admissible(int n, int kappa) {
  check_balanced(n, kappa, "enumerate_admissible");
  const std::vector<int> margins(static_cast<std::size_t>(kappa), n / kappa);
  std::vector<AdmissibleMatrix> out;
  for_each_table(margins, margins, [&](std::span<const int> cells) {
    out.emplace_back(kappa, n, std::vector<int>(cells.begin(), cells.end()));
  });
  return out;
}

std::uint64_t count_admissible(int n, int kappa) {
  check_balanced(n, kappa, "count_admissible");
  const std::vector<int> margins(static_cast<std::size_t>(kappa), n / kappa);
  std::uint64_t count = 0;
  for_each_table(margins, margins, [&](std::span<const int>) { ++count; });
  return count;
}

namespace {

double overlap_law_log_counts(int n, int kappa, std::span<const int> counts, const std::vector<double>& lf) {
  const int m = n / kappa;
  // -log(N! / (m!)^kappa) + sum_a [log m! - sum_b log c_ab!]
  double out = -(lf[n] - kappa * lf[m]) + kappa * lf[m];
  for (int c : counts) out -= lf[c];
  return out;
}

}  // namespace

double overlap_law_log(int n, int kappa, const AdmissibleMatrix& r) {
  require(r.n() == n && r.kappa() == kappa, ErrorCode::dimension_mismatch,
          "overlap_law: table does not match (N, kappa)");
  return overlap_law_log_counts(n, kappa, r.counts(), log_factorials(n));
}

double overlap_law_exact(int n, int kappa, const AdmissibleMatrix& r) { return std::exp(overlap_law_log(n, kappa, r)); }

double second_moment_log_ratio(int n, double beta, int kappa, const EnumerationLimits& limits) {
  check_balanced(n, kappa, "second_moment_ratio");
  check_beta(beta, "second_moment_ratio");
  const auto lf = log_factorials(n);
  const std::vector<int> margins(static_cast<std::size_t>(kappa), n / kappa);
  const double k4n = std::pow(static_cast<double>(kappa), 4) * n;
  const std::int64_t k2 = static_cast<std::int64_t>(kappa) * kappa;
  TableBudget budget(limits, "second_moment_ratio");
  LogSumExp acc;
  for_each_table(margins, margins, [&](std::span<const int> cells) {
    budget.tick();
    std::int64_t s = 0;
    for (int c : cells) s += (k2 * c - n) * (k2 * c - n);
    // beta^2 N ||r - u||^2 = beta^2 s / (kappa^4 N)
    acc.add(overlap_law_log_counts(n, kappa, cells, lf) + beta * beta * static_cast<double>(s) / k4n);
  });
  return acc.value();
}

double second_moment_ratio(int n, double beta, int kappa, const EnumerationLimits& limits) {
  return std::exp(second_moment_log_ratio(n, beta, kappa, limits));
}

LdpTerms ldp_log_probability(int n, int kappa, const AdmissibleMatrix& r) {
  LdpTerms out;
  out.exact_log_p = overlap_law_log(n, kappa, r);
  const double k2 = static_cast<double>(kappa) * kappa;
  double kl = 0.0, support = 0.0;
  for (double v : r.values()) {
    if (v <= 0.0) continue;
    kl += v * std::log(k2 * v);
    support += std::log(v);
  }
  out.asymptotic_log_p = -n * kl - 0.5 * (kappa - 1.0) * (kappa - 1.0) * std::log(static_cast<double>(n)) - 0.5 * support;
  return out;
}

std::vector<std::uint64_t> shell_counts(int n, int kappa) {
  check_balanced(n, kappa, "shell_count");
  std::vector<std::uint64_t> out(static_cast<std::size_t>(n), 0);
  const std::int64_t k2 = static_cast<std::int64_t>(kappa) * kappa;
  const std::int64_t unit = k2 * k2 * n;  // kappa^4 N^2 / N
  const std::vector<int> margins(static_cast<std::size_t>(kappa), n / kappa);
  for_each_table(margins, margins, [&](std::span<const int> cells) {
    std::int64_t s = 0;
    for (int c : cells) s += (k2 * c - n) * (k2 * c - n);
    // (l-1)/N <= s / (kappa^4 N^2) < l/N  <=>  l = floor(s / unit) + 1
    const std::int64_t l = s / unit + 1;
    require(l >= 1 && l <= n, ErrorCode::invalid_argument, "shell_count: table outside [0, 1) gap range");
    ++out[static_cast<std::size_t>(l - 1)];
  });
  return out;
}

std::uint64_t shell_count(int n, int kappa, int l) {
  check_balanced(n, kappa, "shell_count");
  require(l >= 1 && l <= n, ErrorCode::out_of_range, "shell_count: l must lie in [1, N]");
  return shell_counts(n, kappa)[static_cast<std::size_t>(l - 1)];
}

// ---------------------------------------------------------------------------
// Uncentered second moment
// ---------------------------------------------------------------------------
//
// For the raw Hamiltonian Var(H(s) + H(t)) = (sum_a d_a^2 + sum_b e_b^2 + 2 sum_ab c_ab^2) / N,
// where c is the overlap table of (s, t) with margins d and e. The number of pairs with
// table c is N! / prod c_ab!, so both moments reduce to sums over tables.

double uncentered_log_ratio(int n, double beta, int kappa, const Sector& sector, const EnumerationLimits& limits) {
  check_beta(beta, "uncentered_ratio");
  require(kappa >= 2 && kappa <= kMaxColors, ErrorCode::invalid_argument, "uncentered_ratio: bad kappa");
  require(n >= 1, ErrorCode::invalid_argument, "uncentered_ratio: N must be >= 1");
  sector.validate(n, kappa);
  const auto lf = log_factorials(n);
  const double half = 0.5 * beta * beta / n;
  TableBudget budget(limits, "uncentered_ratio");

  auto self_term = [&](std::span<const int> margins) {
    long sq = 0;
    for (int d : margins) sq += static_cast<long>(d) * d;
    return half * static_cast<double>(sq);
  };

  LogSumExp numerator;
  LogSumExp first;
  std::vector<int> rows(static_cast<std::size_t>(kappa)), cols(static_cast<std::size_t>(kappa));
  auto visit = [&](std::span<const int> cells) {
    budget.tick();
    std::fill(rows.begin(), rows.end(), 0);
    std::fill(cols.begin(), cols.end(), 0);
    double log_mult = lf[n];
    long sq = 0;
    for (int a = 0; a < kappa; ++a)
      for (int b = 0; b < kappa; ++b) {
        const int c = cells[static_cast<std::size_t>(a) * kappa + b];
        rows[a] += c;
        cols[b] += c;
        log_mult -= lf[c];
        sq += static_cast<long>(c) * c;
      }
    numerator.add(log_mult + self_term(rows) + self_term(cols) + 2.0 * half * static_cast<double>(sq));
  };

  if (sector.kind() == Sector::Kind::all) {
    std::vector<int> cells(static_cast<std::size_t>(kappa) * kappa, 0);
    composition_recurse(cells, 0, n, visit);
    std::vector<int> d(static_cast<std::size_t>(kappa), 0);
    std::function<void(std::size_t, int)> margins = [&](std::size_t pos, int remaining) {
      if (pos + 1 == d.size()) {
        d[pos] = remaining;
        double log_mult = lf[n];
        for (int x : d) log_mult -= lf[x];
        first.add(log_mult + self_term(d));
        return;
      }
      for (int x = 0; x <= remaining; ++x) {
        d[pos] = x;
        margins(pos + 1, remaining - x);
      }
    };
    margins(0, n);
  } else {
    const auto counts = sector.counts(n, kappa);
    for_each_table(counts, counts, visit);
    double log_mult = lf[n];
    for (int x : counts) log_mult -= lf[x];
    first.add(log_mult + self_term(counts));
  }
  return numerator.value() - 2.0 * first.value();
}

double uncentered_ratio(int n, double beta, int kappa, const Sector& sector, const EnumerationLimits& limits) {
  return std::exp(uncentered_log_ratio(n, beta, kappa, sector, limits));
}

double uncentered_log_lower_bound(int n, double beta, int kappa, const Sector& sector) {
  const double b2 = beta * beta;
  switch (sector.kind()) {
    case Sector::Kind::all:
      return b2 * (n - 1) / (static_cast<double>(kappa) * kappa);
    case Sector::Kind::balanced: {
      check_balanced(n, kappa, "uncentered_log_lower_bound");
      if (n == 1) return 0.0;
      const double p = (n - static_cast<double>(kappa)) / ((n - 1.0) * kappa);
      return b2 * (n - 1) * p * p;
    }
    case Sector::Kind::fixed:
      break;
  }
  fail(ErrorCode::invalid_argument, "uncentered_log_lower_bound: only the all and balanced sectors have a bound");
}

}  // namespace psg
