#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "psg/core.hpp"
#include "psg/rng.hpp"

using namespace psg;

namespace {

SpinConfig to_config(const oracle::Config& c, int kappa) {
  return SpinConfig(kappa, std::vector<Color>(c.begin(), c.end()));
}

}  // namespace

TEST(Rng, ChildSeedsAreDistinctAndStable) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(child_seed(42, i));
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_EQ(child_seed(42, 7), child_seed(42, 7));
  EXPECT_NE(child_seed(42, 7), child_seed(43, 7));
}

TEST(Rng, CounterNormalMoments) {
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = counter_normal(9, i);
    s += x;
    s2 += x * x;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(Rng, BelowIsInRangeAndStateRoundTrips) {
  Rng r(5);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(r.below(7), 7u);
  const std::string st = r.state();
  const auto a = r.bits();
  Rng q;
  q.set_state(st);
  EXPECT_EQ(q.bits(), a);
}

TEST(Sector, ParseAndValidate) {
  EXPECT_EQ(Sector::parse("all"), Sector::all());
  EXPECT_EQ(Sector::parse("balanced"), Sector::balanced());
  EXPECT_EQ(Sector::parse("fixed:2,1").fixed_counts(), (std::vector<int>{2, 1}));
  EXPECT_THROW(Sector::parse("bogus"), Error);
  try {
    Sector::balanced().validate(4, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::divisibility);
  }
  EXPECT_THROW(Sector::fixed({2, 2}).validate(5, 2), Error);
}

TEST(Sector, SizesMatchEnumeration) {
  EXPECT_EQ(sector_size(6, 3, Sector::balanced()), 90.0);
  EXPECT_EQ(sector_size(4, 2, Sector::all()), 16.0);
  EXPECT_EQ(enumerate_configs(6, 3, Sector::balanced()).size(), 90u);
  EXPECT_EQ(enumerate_configs(5, 2, Sector::fixed({3, 2})).size(), 10u);
  EXPECT_NEAR(log_sector_size(9, 3, Sector::balanced()), std::log(1680.0), 1e-12);
}

TEST(Sector, StreamMatchesForEach) {
  ConfigStream stream(4, 2, Sector::balanced());
  std::vector<std::vector<Color>> a, b;
  while (auto c = stream.next()) a.emplace_back(c->colors().begin(), c->colors().end());
  for_each_config(4, 2, Sector::balanced(),
                  [&](std::span<const Color> c) { b.emplace_back(c.begin(), c.end()); });
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.size(), 6u);
}

TEST(Hamiltonian, MatchesDoubleSum) {
  for (int kappa : {2, 3}) {
    const int n = 6;
    const auto g = CouplingMatrix::gaussian(n, 17);
    const std::vector<double> gv(g.values().begin(), g.values().end());
    const EnergyModel raw(g, kappa, HamiltonianKind::raw), cen(g, kappa, HamiltonianKind::centered);
    for (const auto& c : oracle::all_configs(n, kappa)) {
      const auto s = to_config(c, kappa);
      EXPECT_NEAR(hamiltonian_raw(s, g), oracle::energy(c, gv, kappa, false), 1e-12);
      EXPECT_NEAR(hamiltonian_centered(s, g), oracle::energy(c, gv, kappa, true), 1e-12);
      EXPECT_NEAR(raw.energy(s.colors()), oracle::energy(c, gv, kappa, false), 1e-12);
      EXPECT_NEAR(cen.energy(s.colors()), oracle::energy(c, gv, kappa, true), 1e-12);
      EXPECT_NEAR(hamiltonian_raw(s, g) - hamiltonian_centered(s, g), centering_shift(g, kappa), 1e-12);
    }
  }
}

TEST(Hamiltonian, AllOnesExample) {
  const auto g = CouplingMatrix::from_values(4, std::vector<double>(16, 1.0));
  EXPECT_DOUBLE_EQ(hamiltonian_raw(SpinConfig(2, {0, 0, 0, 0}), g), 8.0);
  EXPECT_DOUBLE_EQ(hamiltonian_raw(SpinConfig(2, {0, 0, 1, 1}), g), 4.0);
}

TEST(Hamiltonian, DeltaEnergyMatchesDifference) {
  const int n = 7, kappa = 3;
  const auto g = CouplingMatrix::gaussian(n, 3);
  const EnergyModel model(g, kappa, HamiltonianKind::centered);
  Rng rng(1);
  for (int t = 0; t < 500; ++t) {
    std::vector<Color> c(n);
    for (auto& x : c) x = static_cast<Color>(rng.below(kappa));
    const SpinConfig s(kappa, c);
    const int site = static_cast<int>(rng.below(n));
    const int color = static_cast<int>(rng.below(kappa));
    const double expect = hamiltonian_raw(s.recolored(site, static_cast<Color>(color)), g) - hamiltonian_raw(s, g);
    EXPECT_NEAR(delta_energy(s, g, site, color), expect, 1e-12);
    EXPECT_NEAR(model.delta(c, site, static_cast<Color>(color)), expect, 1e-12);
    const int j = static_cast<int>(rng.below(n));
    auto swapped = c;
    std::swap(swapped[site], swapped[j]);
    EXPECT_NEAR(model.swap_delta(c, site, j), model.energy(swapped) - model.energy(c), 1e-12);
  }
}

TEST(Overlap, MarginsEqualMagnetizations) {
  Rng rng(2);
  for (int t = 0; t < 200; ++t) {
    const int n = 9, kappa = 3;
    std::vector<Color> a(n), b(n);
    for (int i = 0; i < n; ++i) {
      a[i] = static_cast<Color>(rng.below(kappa));
      b[i] = static_cast<Color>(rng.below(kappa));
    }
    const SpinConfig s(kappa, a), u(kappa, b);
    const auto r = overlap(s, u);
    EXPECT_EQ(r.row_counts(), magnetization(s).counts);
    EXPECT_EQ(r.col_counts(), magnetization(u).counts);
    int total = 0;
    for (int x : r.counts()) total += x;
    EXPECT_EQ(total, n);
  }
}

TEST(Overlap, Examples) {
  const SpinConfig s(2, {0, 0, 1, 1});
  const auto r = overlap(s, s);
  EXPECT_EQ(r.count(0, 0), 2);
  EXPECT_EQ(r.count(0, 1), 0);
  EXPECT_DOUBLE_EQ(covariance_raw(s, s), 4.0 * (0.25 + 0.25));
  EXPECT_DOUBLE_EQ(covariance_centered(s, s), 4.0 * 4 * 0.0625);
}

TEST(Covariance, MatchesOracleOnRandomPairs) {
  Rng rng(11);
  for (int kappa : {2, 3, 4}) {
    for (int t = 0; t < 100; ++t) {
      const int n = 8;
      oracle::Config a(n), b(n);
      for (int i = 0; i < n; ++i) {
        a[i] = static_cast<int>(rng.below(kappa));
        b[i] = static_cast<int>(rng.below(kappa));
      }
      EXPECT_NEAR(covariance_raw(to_config(a, kappa), to_config(b, kappa)), oracle::covariance(a, b, kappa, false),
                  1e-10);
      EXPECT_NEAR(covariance_centered(to_config(a, kappa), to_config(b, kappa)),
                  oracle::covariance(a, b, kappa, true), 1e-10);
    }
  }
}

TEST(Magnetization, DeviationBoundaryIsExact) {
  const auto m = magnetization(SpinConfig(2, {0, 0, 0, 0}));
  EXPECT_TRUE(m.deviates_at_least(0.5));
  EXPECT_FALSE(magnetization(SpinConfig(2, {0, 0, 0, 1})).deviates_at_least(0.5));
  EXPECT_TRUE(magnetization(SpinConfig(2, {0, 0, 0, 1})).deviates_at_least(0.25));
  EXPECT_TRUE(magnetization(SpinConfig(2, {0, 0, 1, 1})).balanced());
}

TEST(Coupling, GaugeFlipNegatesOffDiagonalOfSite) {
  const auto g = CouplingMatrix::gaussian(5, 8);
  const auto h = g.gauge_flipped(2);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      const bool touched = (i == 2) != (j == 2);
      EXPECT_EQ(h(i, j), touched ? -g(i, j) : g(i, j));
    }
  EXPECT_THROW(CouplingMatrix::from_values(3, std::vector<double>(8, 0.0)), Error);
}

TEST(Projection, SandwichIsDoubleCentering) {
  const Projection p(3);
  std::vector<double> m = {1, 2, 3, 4, 5, 6, 7, 8, 10};
  const auto c = p.sandwich(m);
  for (int a = 0; a < 3; ++a) {
    double row = 0, col = 0;
    for (int b = 0; b < 3; ++b) {
      row += c[a * 3 + b];
      col += c[b * 3 + a];
    }
    EXPECT_NEAR(row, 0.0, 1e-12);
    EXPECT_NEAR(col, 0.0, 1e-12);
  }
}
