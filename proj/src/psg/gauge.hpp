#pragma once

// Two-color identities: gauge antisymmetry of multi-spin correlations, magnetization
// moments, the exponential moment and the tail of ||d - 1/2||_inf. All Gibbs averages
// here are exact enumerations; only the disorder average is sampled.

#include <cstdint>
#include <vector>

#include "psg/core.hpp"
#include "psg/exact.hpp"

namespace psg {

// tau_i = +1 for color 0 (external color 1) and -1 for color 1.
double spin_product_expectation(const CouplingMatrix& g, double beta, std::span<const int> sites,
                                const EnumerationLimits& limits = {});

enum class GaugeStatus { ok, even_degree };

struct GaugeCheck {
  GaugeStatus status = GaugeStatus::ok;
  int flipped_site = -1;       // 0-based; -1 when every degree is even
  double value = 0.0;          // <prod tau> under g
  double value_flipped = 0.0;  // same under g with the couplings at flipped_site negated
  double sum = 0.0;
};

// sites are 0-based and may repeat. beta may be +infinity. When every site has even
// degree the product is identically 1; value_flipped and sum are then NaN.
GaugeCheck gauge_pair_check(const CouplingMatrix& g, double beta, std::span<const int> sites,
                            const EnumerationLimits& limits = {});

struct DisorderAverage {
  double estimate = 0.0;
  double std_error = 0.0;
  double bound = 0.0;
  int replicas = 0;
  bool satisfied = false;  // estimate <= bound + 3 std_error
};

// E <X^m> with X = N^-1 sum_i 1{sigma_i = 1} - 1/2, against m! / (2^m (m/2)!) N^{-m/2}.
// Each config is evaluated together with its color complement, so odd m gives exactly 0.
DisorderAverage magnetization_moment_exact(int n, double beta, int m, int replicas, std::uint64_t seed,
                                           int workers = 0, const EnumerationLimits& limits = {});

// E <exp(lambda X)> against exp(lambda^2 / (4N)).
DisorderAverage exponential_moment_exact(int n, double beta, double lambda, int replicas, std::uint64_t seed,
                                         int workers = 0, const EnumerationLimits& limits = {});

// E G(max_a |d_a - 1/kappa| >= eps) by exact enumeration per disorder; beta may be +infinity.
// bound is 2 exp(-eps^2 N) for kappa = 2 and +infinity otherwise.
DisorderAverage tail_probability_exact(int n, int kappa, double beta, double eps, int replicas,
                                       std::uint64_t seed, const Sector& sector = Sector::all(),
                                       int workers = 0, const EnumerationLimits& limits = {});

double moment_bound(int n, int m);
double tail_bound(int n, double eps);

// Mean and standard error of the mean, with the 3-SE satisfaction flag against `bound`.
DisorderAverage summarize(const std::vector<double>& samples, double bound);

}  // namespace psg
