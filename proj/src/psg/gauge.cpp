#include "psg/gauge.hpp"

#include <cmath>
#include <limits>

#include "psg/accumulate.hpp"
#include "psg/parallel.hpp"
#include "psg/rng.hpp"

namespace psg {

namespace {

void check_sites(const CouplingMatrix& g, std::span<const int> sites, const char* where) {
  for (int s : sites)
    require(s >= 0 && s < g.size(), ErrorCode::out_of_range, std::string(where) + ": site index out of range");
}

// <f(c0)> where c0 is the number of sites with color 0, each config paired with its complement.
// f must satisfy the pairing contract: value(sigma) is combined as (f(c0) + f(N - c0)) / 2.
template <class F>
double paired_count_expectation(const CouplingMatrix& g, double beta, F&& f, const EnumerationLimits& limits) {
  const int n = g.size();
  check_enumeration_cap(n, 2, Sector::all(), limits);
  const EnergyModel model(g, 2, HamiltonianKind::raw);
  GibbsAccumulator acc(beta, 1);
  std::vector<Color> colors(static_cast<std::size_t>(n), 0);
  // Odometer over sites 1..N-1 with site 0 pinned to color 0; the complement covers the rest.
  for (;;) {
    int c0 = 0;
    for (Color c : colors) c0 += c == 0;
    const double value = 0.5 * (f(c0) + f(n - c0));
    acc.add(model.energy(colors), std::span<const double>(&value, 1));
    int pos = n - 1;
    while (pos >= 1 && colors[pos] == 1) colors[pos--] = 0;
    if (pos < 1) break;
    colors[pos] = 1;
  }
  return acc.expectations()[0];
}

std::vector<double> replicate(int n, int replicas, std::uint64_t seed, int workers,
                              const std::function<double(const CouplingMatrix&)>& per_disorder) {
  std::vector<double> samples(static_cast<std::size_t>(replicas));
  parallel_for(samples.size(), workers, [&](std::size_t r) {
    samples[r] = per_disorder(CouplingMatrix::gaussian(n, child_seed(seed, r)));
  });
  return samples;
}

}  // namespace

double spin_product_expectation(const CouplingMatrix& g, double beta, std::span<const int> sites,
                                const EnumerationLimits& limits) {
  check_sites(g, sites, "spin_product_expectation");
  const std::vector<int> chosen(sites.begin(), sites.end());
  return gibbs_expectation(
      g, beta, 2,
      [&](const SpinConfig& s) {
        double p = 1.0;
        for (int i : chosen) p *= s[static_cast<std::size_t>(i)] == 0 ? 1.0 : -1.0;
        return p;
      },
      Sector::all(), HamiltonianKind::raw, limits);
}

GaugeCheck gauge_pair_check(const CouplingMatrix& g, double beta, std::span<const int> sites,
                            const EnumerationLimits& limits) {
  require(!sites.empty(), ErrorCode::invalid_argument, "gauge_pair_check: empty site multiset");
  require(beta >= 0.0, ErrorCode::invalid_argument, "gauge_pair_check: beta must be >= 0");
  check_sites(g, sites, "gauge_pair_check");
  std::vector<int> degree(static_cast<std::size_t>(g.size()), 0);
  for (int s : sites) ++degree[s];
  GaugeCheck out;
  out.value = spin_product_expectation(g, beta, sites, limits);
  for (int s = 0; s < g.size(); ++s)
    if (degree[s] % 2 == 1) {
      out.flipped_site = s;
      break;
    }
  if (out.flipped_site < 0) {
    out.status = GaugeStatus::even_degree;
    out.value_flipped = std::numeric_limits<double>::quiet_NaN();
    out.sum = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  out.value_flipped = spin_product_expectation(g.gauge_flipped(out.flipped_site), beta, sites, limits);
  out.sum = out.value + out.value_flipped;
  return out;
}

double moment_bound(int n, int m) {
  require(m >= 0, ErrorCode::invalid_argument, "moment_bound: m must be >= 0");
  if (m % 2 == 1) return 0.0;
  // m! / (2^m (m/2)!) N^{-m/2}
  return std::exp(std::lgamma(m + 1.0) - m * std::log(2.0) - std::lgamma(m / 2 + 1.0) -
                  0.5 * m * std::log(static_cast<double>(n)));
}

double tail_bound(int n, double eps) { return 2.0 * std::exp(-eps * eps * n); }

DisorderAverage summarize(const std::vector<double>& samples, double bound) {
  DisorderAverage out;
  out.replicas = static_cast<int>(samples.size());
  out.bound = bound;
  double sum = 0.0;
  for (double x : samples) sum += x;
  out.estimate = sum / out.replicas;
  double ss = 0.0;
  for (double x : samples) ss += (x - out.estimate) * (x - out.estimate);
  out.std_error = out.replicas > 1 ? std::sqrt(ss / (out.replicas - 1) / out.replicas) : 0.0;
  out.satisfied = out.estimate <= bound + 3.0 * out.std_error;
  return out;
}

DisorderAverage magnetization_moment_exact(int n, double beta, int m, int replicas, std::uint64_t seed,
                                           int workers, const EnumerationLimits& limits) {
  require(m >= 1, ErrorCode::invalid_argument, "magnetization_moment: m must be >= 1");
  require(replicas >= 2, ErrorCode::invalid_argument, "magnetization_moment: need at least 2 replicas");
  require(beta >= 0.0, ErrorCode::invalid_argument, "magnetization_moment: beta must be >= 0");
  check_enumeration_cap(n, 2, Sector::all(), limits);
  const auto samples = replicate(n, replicas, seed, workers, [&](const CouplingMatrix& g) {
    return paired_count_expectation(
        g, beta, [&](int c0) { return std::pow((2.0 * c0 - n) / (2.0 * n), m); }, limits);
  });
  auto out = summarize(samples, moment_bound(n, m));
  if (m % 2 == 1) out.satisfied = out.estimate == 0.0;
  return out;
}

DisorderAverage exponential_moment_exact(int n, double beta, double lambda, int replicas, std::uint64_t seed,
                                         int workers, const EnumerationLimits& limits) {
  require(replicas >= 2, ErrorCode::invalid_argument, "exponential_moment: need at least 2 replicas");
  require(beta >= 0.0, ErrorCode::invalid_argument, "exponential_moment: beta must be >= 0");
  check_enumeration_cap(n, 2, Sector::all(), limits);
  const auto samples = replicate(n, replicas, seed, workers, [&](const CouplingMatrix& g) {
    return paired_count_expectation(
        g, beta, [&](int c0) { return std::exp(lambda * (2.0 * c0 - n) / (2.0 * n)); }, limits);
  });
  return summarize(samples, std::exp(lambda * lambda / (4.0 * n)));
}

DisorderAverage tail_probability_exact(int n, int kappa, double beta, double eps, int replicas,
                                       std::uint64_t seed, const Sector& sector, int workers,
                                       const EnumerationLimits& limits) {
  require(replicas >= 2, ErrorCode::invalid_argument, "tail_probability: need at least 2 replicas");
  require(eps > 0.0, ErrorCode::invalid_argument, "tail_probability: epsilon must be > 0");
  sector.validate(n, kappa);
  check_enumeration_cap(n, kappa, sector, limits);
  const auto samples = replicate(n, replicas, seed, workers, [&](const CouplingMatrix& g) {
    const EnergyModel model(g, kappa, HamiltonianKind::raw);
    GibbsAccumulator acc(beta, 1);
    for_each_config(n, kappa, sector, [&](std::span<const Color> c) {
      const double hit = magnetization(c, kappa).deviates_at_least(eps) ? 1.0 : 0.0;
      acc.add(model.energy(c), std::span<const double>(&hit, 1));
    });
    return acc.expectations()[0];
  });
  const double bound = kappa == 2 ? tail_bound(n, eps) : std::numeric_limits<double>::infinity();
  return summarize(samples, bound);
}

}  // namespace psg
