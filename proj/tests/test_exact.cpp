#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "psg/exact.hpp"
#include "psg/rate.hpp"
#include "psg/rng.hpp"

using namespace psg;

namespace {

std::vector<double> values_of(const CouplingMatrix& g) { return {g.values().begin(), g.values().end()}; }

}  // namespace

TEST(LogPartition, MatchesOracle) {
  for (int kappa : {2, 3}) {
    const int n = 6;
    const auto g = CouplingMatrix::gaussian(n, 21);
    for (double beta : {0.0, 0.7, 2.5}) {
      const auto all = log_partition(g, beta, kappa, Sector::all(), HamiltonianKind::raw);
      EXPECT_NEAR(all.log_partition,
                  oracle::log_partition(oracle::all_configs(n, kappa), values_of(g), kappa, beta, false), 1e-10);
      const auto bal = log_partition(g, beta, kappa, Sector::balanced(), HamiltonianKind::centered);
      EXPECT_NEAR(bal.log_partition,
                  oracle::log_partition(oracle::balanced_configs(n, kappa), values_of(g), kappa, beta, true), 1e-10);
    }
  }
}

TEST(LogPartition, BetaZeroIsSectorSize) {
  const auto g = CouplingMatrix::gaussian(6, 1);
  EXPECT_NEAR(log_partition(g, 0.0, 3, Sector::balanced(), HamiltonianKind::raw).log_partition, std::log(90.0),
              1e-12);
  EXPECT_THROW(log_partition(g, 1.0, 4, Sector::balanced(), HamiltonianKind::raw), Error);
}

TEST(LogPartition, CapIsEnforced) {
  const auto g = CouplingMatrix::gaussian(12, 1);
  try {
    log_partition(g, 1.0, 3, Sector::all(), HamiltonianKind::raw, EnumerationLimits{1e5});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::cap_exceeded);
  }
}

TEST(QuenchedFreeEnergy, IndependentOfWorkers) {
  DisorderSpec spec{.n = 6, .kappa = 3, .beta = 1.0, .sector = Sector::balanced(), .replicas = 12, .workers = 1};
  const auto a = quenched_free_energy(spec);
  spec.workers = 4;
  const auto b = quenched_free_energy(spec);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.std_error, b.std_error);
  ASSERT_EQ(a.samples.size(), 12u);
  EXPECT_EQ(a.samples[3].seed, child_seed(1, 3));
}

TEST(Annealed, BalancedCenteredClosedForm) {
  for (int n : {3, 6, 9}) {
    const double beta = 1.0;
    const double expect = std::log(sector_size(n, 3, Sector::balanced())) + n * beta * beta * 2.0 / 18.0;
    EXPECT_NEAR(annealed_log_partition(n, beta, 3, Sector::balanced(), HamiltonianKind::centered), expect, 1e-10);
  }
}

TEST(Gibbs, Examples) {
  const auto g = CouplingMatrix::gaussian(4, 5);
  EXPECT_NEAR(gibbs_expectation(g, 1.3, 3, [](const SpinConfig&) { return 1.0; }, Sector::all()), 1.0, 1e-14);
  EXPECT_NEAR(gibbs_expectation(g, 0.0, 3, [](const SpinConfig& s) { return s[0] == 0 ? 1.0 : 0.0; }, Sector::all()),
              1.0 / 3, 1e-14);
  const auto mono = [](const SpinConfig& s) { return magnetization(s).deviates_at_least(0.5) ? 1.0 : 0.0; };
  EXPECT_NEAR(gibbs_expectation(g, 0.0, 2, mono, Sector::all()), 0.125, 1e-14);
}

TEST(GroundState, Examples) {
  const auto ones = CouplingMatrix::from_values(4, std::vector<double>(16, 1.0));
  const auto all = ground_state(ones, 2, Sector::all());
  EXPECT_DOUBLE_EQ(all.max_energy, 8.0);
  EXPECT_EQ(all.maximizer_count, 2u);
  const auto bal = ground_state(ones, 2, Sector::balanced());
  EXPECT_DOUBLE_EQ(bal.max_energy, 4.0);
  const auto single = CouplingMatrix::from_values(1, {0.37});
  const auto one = ground_state(single, 3, Sector::all());
  EXPECT_DOUBLE_EQ(one.max_energy, 0.37);
  EXPECT_EQ(one.maximizer_count, 3u);
}

TEST(GroundState, InfiniteBetaGibbsIsUniformOnMaximizers) {
  const auto ones = CouplingMatrix::from_values(4, std::vector<double>(16, 1.0));
  const double p = gibbs_expectation(
      ones, std::numeric_limits<double>::infinity(), 2, [](const SpinConfig& s) { return s[0] == 0 ? 1.0 : 0.0; },
      Sector::all());
  EXPECT_DOUBLE_EQ(p, 0.5);
}

TEST(Admissible, CountsMatchBruteForce) {
  EXPECT_EQ(count_admissible(2, 2), 2u);
  EXPECT_EQ(count_admissible(3, 3), 6u);
  EXPECT_EQ(count_admissible(4, 2), 3u);
  for (int kappa : {2, 3, 4})
    for (int n = kappa; n <= 4 * kappa; n += kappa)
      EXPECT_EQ(count_admissible(n, kappa), oracle::count_admissible(n, kappa)) << n << " " << kappa;
  EXPECT_THROW(enumerate_admissible(5, 2), Error);
}

TEST(Admissible, EnumerationIsExhaustiveAndValid) {
  const auto tables = enumerate_admissible(6, 3);
  EXPECT_EQ(tables.size(), count_admissible(6, 3));
  for (const auto& t : tables) {
    for (int a = 0; a < 3; ++a) {
      int r = 0, c = 0;
      for (int b = 0; b < 3; ++b) {
        r += t.count(a, b);
        c += t.count(b, a);
      }
      EXPECT_EQ(r, 2);
      EXPECT_EQ(c, 2);
    }
  }
}

TEST(OverlapLaw, Examples) {
  EXPECT_NEAR(overlap_law_exact(4, 2, AdmissibleMatrix(2, 4, {2, 0, 0, 2})), 1.0 / 6, 1e-14);
  EXPECT_NEAR(overlap_law_exact(4, 2, AdmissibleMatrix(2, 4, {1, 1, 1, 1})), 4.0 / 6, 1e-14);
  EXPECT_NEAR(overlap_law_exact(3, 3, AdmissibleMatrix(3, 3, {0, 1, 0, 0, 0, 1, 1, 0, 0})), 1.0 / 6, 1e-14);
  EXPECT_THROW(AdmissibleMatrix(2, 4, {2, 1, 0, 1}), Error);
}

TEST(OverlapLaw, MatchesEmpiricalOverlapDistribution) {
  const int n = 6, kappa = 3;
  const auto configs = oracle::balanced_configs(n, kappa);
  const auto& sigma = configs[17];
  for (const auto& r : enumerate_admissible(n, kappa)) {
    int hits = 0;
    for (const auto& tau : configs) {
      std::vector<int> c(9, 0);
      for (int i = 0; i < n; ++i) ++c[sigma[i] * 3 + tau[i]];
      if (std::equal(c.begin(), c.end(), r.counts().begin())) ++hits;
    }
    EXPECT_NEAR(overlap_law_exact(n, kappa, r), static_cast<double>(hits) / configs.size(), 1e-12);
  }
}

TEST(SecondMoment, MatchesPairSumOracle) {
  for (int kappa : {2, 3})
    for (int n = kappa; n <= 6; n += kappa) {
      const auto configs = oracle::balanced_configs(n, kappa);
      for (double beta : {0.0, 0.5, 1.0, 2.0}) {
        const double expect = oracle::second_moment_log_ratio(configs, kappa, beta, true);
        EXPECT_NEAR(second_moment_log_ratio(n, beta, kappa), expect, 1e-9 * (1 + std::abs(expect)))
            << n << " " << kappa << " " << beta;
      }
    }
  EXPECT_DOUBLE_EQ(second_moment_ratio(6, 0.0, 3), 1.0);
}

TEST(UncenteredRatio, MatchesPairSumOracle) {
  for (int kappa : {2, 3})
    for (int n : {kappa, 2 * kappa}) {
      const auto all = oracle::all_configs(n, kappa);
      const auto bal = oracle::balanced_configs(n, kappa);
      for (double beta : {0.5, 1.0}) {
        EXPECT_NEAR(uncentered_log_ratio(n, beta, kappa, Sector::all()),
                    oracle::second_moment_log_ratio(all, kappa, beta, false), 1e-9);
        EXPECT_NEAR(uncentered_log_ratio(n, beta, kappa, Sector::balanced()),
                    oracle::second_moment_log_ratio(bal, kappa, beta, false), 1e-9);
      }
    }
}

TEST(UncenteredRatio, ExceedsLowerBounds) {
  for (int n : {3, 6, 9, 12}) {
    const double beta = 1.0;
    EXPECT_GE(uncentered_log_ratio(n, beta, 3, Sector::balanced()),
              uncentered_log_lower_bound(n, beta, 3, Sector::balanced()));
  }
  for (int n : {2, 4, 6}) EXPECT_GE(uncentered_log_ratio(n, 1.0, 3, Sector::all()) + 1e-12,
                                    uncentered_log_lower_bound(n, 1.0, 3, Sector::all()));
}

TEST(Ldp, GapIsBoundedAtUniformTable) {
  for (int kappa : {2, 3}) {
    double lo = 1e9, hi = -1e9;
    for (int n = kappa * kappa; n <= 10 * kappa * kappa; n += kappa * kappa) {
      std::vector<int> c(kappa * kappa, n / (kappa * kappa));
      const auto t = ldp_log_probability(n, kappa, AdmissibleMatrix(kappa, n, c));
      lo = std::min(lo, t.gap());
      hi = std::max(hi, t.gap());
    }
    EXPECT_LT(hi - lo, 1.0);
  }
}

TEST(Shell, CountsPartitionTheTables) {
  for (int kappa : {2, 3}) {
    const int n = 4 * kappa;
    const auto shells = shell_counts(n, kappa);
    std::uint64_t total = 0;
    for (auto c : shells) total += c;
    EXPECT_EQ(total, count_admissible(n, kappa));
    std::vector<std::uint64_t> direct(n, 0);
    for (const auto& t : enumerate_admissible(n, kappa)) {
      const auto l = t.scaled_gap() / (static_cast<std::int64_t>(kappa) * kappa * kappa * kappa * n) + 1;
      ++direct[l - 1];
    }
    EXPECT_EQ(shells, direct);
    EXPECT_EQ(shell_count(n, kappa, 1), shells[0]);
  }
}

TEST(AdmissibleProperty, ScaledGapMatchesFrobenius) {
  for (const auto& t : enumerate_admissible(9, 3)) {
    const double n = 9;
    EXPECT_NEAR(t.frobenius_gap(), static_cast<double>(t.scaled_gap()) / (81.0 * n * n), 1e-14);
    EXPECT_LE(t.frobenius_gap(), max_frobenius_gap(3) + 1e-14);
  }
}
