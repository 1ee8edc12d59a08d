#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <map>

#include "oracles.hpp"
#include "psg/montecarlo.hpp"

using namespace psg;

namespace {

std::vector<double> values_of(const CouplingMatrix& g) { return {g.values().begin(), g.values().end()}; }

// Observables: indicator of color 0 at each site.
Observe color0_indicators() {
  return [](std::span<const Color> c, std::span<double> out) {
    for (std::size_t i = 0; i < c.size(); ++i) out[i] = c[i] == 0 ? 1.0 : 0.0;
  };
}

void expect_marginals(const ChainEstimate& est, const std::vector<double>& exact, int kappa) {
  ASSERT_FALSE(est.flagged);
  for (std::size_t i = 0; i < est.mean.size(); ++i)
    EXPECT_LE(std::abs(est.mean[i] - exact[i * kappa]), 3 * est.std_error[i] + 1e-12)
        << "site " << i << " mean " << est.mean[i] << " exact " << exact[i * kappa] << " se " << est.std_error[i];
}

}  // namespace

TEST(Metropolis, CurrentColorProposalKeepsState) {
  const auto g = CouplingMatrix::gaussian(3, 1);
  const EnergyModel model(g, 2, HamiltonianKind::raw);
  const auto k = metropolis_kernel(model, 1.0);
  // Diagonal mass includes the 1/kappa chance of proposing the current color.
  for (std::size_t i = 0; i < 8; ++i) EXPECT_GE(k[i * 8 + i], 1.0 / 2 - 1e-15);
}

TEST(Metropolis, DetailedBalance) {
  for (int kappa : {2, 3}) {
    const int n = kappa == 2 ? 4 : 3;
    const auto g = CouplingMatrix::gaussian(n, 31);
    const EnergyModel model(g, kappa, HamiltonianKind::raw);
    const double beta = 1.3;
    const auto configs = oracle::all_configs(n, kappa);
    const auto p = metropolis_kernel(model, beta);
    const std::size_t m = configs.size();
    ASSERT_EQ(p.size(), m * m);
    std::vector<double> pi(m);
    double z = 0;
    for (std::size_t i = 0; i < m; ++i) z += pi[i] = std::exp(beta * oracle::energy(configs[i], values_of(g), kappa, false));
    for (auto& x : pi) x /= z;
    for (std::size_t i = 0; i < m; ++i) {
      double row = 0;
      for (std::size_t j = 0; j < m; ++j) {
        row += p[i * m + j];
        EXPECT_NEAR(pi[i] * p[i * m + j], pi[j] * p[j * m + i], 1e-10);
      }
      EXPECT_NEAR(row, 1.0, 1e-12);
    }
  }
}

TEST(Swap, DetailedBalanceOnSector) {
  const int n = 4, kappa = 2;
  const auto g = CouplingMatrix::gaussian(n, 8);
  const EnergyModel model(g, kappa, HamiltonianKind::centered);
  const auto configs = oracle::balanced_configs(n, kappa);
  const auto p = swap_kernel(model, 0.9, Sector::balanced());
  const std::size_t m = configs.size();
  ASSERT_EQ(p.size(), m * m);
  std::vector<double> pi(m);
  for (std::size_t i = 0; i < m; ++i) pi[i] = std::exp(0.9 * oracle::energy(configs[i], values_of(g), kappa, true));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) EXPECT_NEAR(pi[i] * p[i * m + j], pi[j] * p[j * m + i], 1e-10);
}

TEST(Swap, ConservesCounts) {
  const auto g = CouplingMatrix::gaussian(9, 2);
  const EnergyModel model(g, 3, HamiltonianKind::centered);
  auto state = make_chain(model, 2.0, Sector::balanced(), 5);
  for (int s = 0; s < 20000; ++s) {
    swap_sweep(state, model);
    ASSERT_EQ(magnetization(state.colors, 3).counts, (std::vector<int>{3, 3, 3}));
  }
  EXPECT_THROW(metropolis_sweep(state, model), Error);
  auto free_chain = make_chain(model, 1.0, Sector::all(), 1);
  EXPECT_THROW(swap_sweep(free_chain, model), Error);
}

TEST(Swap, UniformAtInfiniteTemperature) {
  const auto g = CouplingMatrix::gaussian(4, 2);
  const EnergyModel model(g, 2, HamiltonianKind::raw);
  auto state = make_chain(model, 0.0, Sector::balanced(), 9);
  std::map<std::vector<Color>, int> counts;
  const int sweeps = 100000;
  for (int s = 0; s < sweeps; ++s) {
    swap_sweep(state, model);
    ++counts[state.colors];
  }
  ASSERT_EQ(counts.size(), 6u);
  double chi2 = 0;
  for (const auto& [c, k] : counts) chi2 += std::pow(k - sweeps / 6.0, 2) / (sweeps / 6.0);
  EXPECT_LT(chi2, 20.5);  // chi-square 5 dof, p = 0.001
}

TEST(Metropolis, UniformMarginalsAtInfiniteTemperature) {
  const auto g = CouplingMatrix::gaussian(5, 2);
  const EnergyModel model(g, 3, HamiltonianKind::raw);
  auto state = make_chain(model, 0.0, Sector::all(), 4);
  std::vector<int> hits(3, 0);
  const int sweeps = 10000;
  for (int s = 0; s < sweeps; ++s) {
    metropolis_sweep(state, model);
    ++hits[state.colors[2]];
  }
  double chi2 = 0;
  for (int h : hits) chi2 += std::pow(h - sweeps / 3.0, 2) / (sweeps / 3.0);
  EXPECT_LT(chi2, 13.8);  // 2 dof, p = 0.001
}

TEST(Metropolis, MatchesExactMarginals) {
  const int n = 6, kappa = 2;
  const auto g = CouplingMatrix::gaussian(n, 44);
  const EnergyModel model(g, kappa, HamiltonianKind::raw);
  const double beta = 0.8;
  auto state = make_chain(model, beta, Sector::all(), 3);
  const McOptions opt{.burn_in = 1000, .samples = 20000, .thinning = 5, .audit_every = 100};
  const auto est = sample_chain(state, model, opt, n, color0_indicators());
  expect_marginals(est, oracle::gibbs_marginals(oracle::all_configs(n, kappa), values_of(g), kappa, beta, false), kappa);
}

TEST(Swap, MatchesExactBalancedMarginals) {
  const int n = 6, kappa = 3;
  const auto g = CouplingMatrix::gaussian(n, 45);
  const EnergyModel model(g, kappa, HamiltonianKind::centered);
  const double beta = 1.0;
  auto state = make_chain(model, beta, Sector::balanced(), 6);
  const McOptions opt{.burn_in = 1000, .samples = 20000, .thinning = 5, .audit_every = 100};
  const auto est = sample_chain(state, model, opt, n, color0_indicators());
  expect_marginals(est, oracle::gibbs_marginals(oracle::balanced_configs(n, kappa), values_of(g), kappa, beta, true),
                   kappa);
}

TEST(Tempering, EqualBetasAlwaysSwap) {
  EXPECT_EQ(replica_swap_acceptance(1.0, 3.0, 1.0, -2.0), 1.0);
  EXPECT_EQ(replica_swap_acceptance(0.5, 2.0, 1.5, 2.0), 1.0);
  EXPECT_NEAR(replica_swap_acceptance(0.5, 2.0, 1.5, 3.0), std::exp(-1.0), 1e-15);
  const auto g = CouplingMatrix::gaussian(4, 1);
  const EnergyModel model(g, 2, HamiltonianKind::raw);
  EXPECT_THROW(make_ladder(model, {1.0, 0.5}, Sector::all(), 1), Error);
  EXPECT_THROW(make_ladder(model, {}, Sector::all(), 1), Error);
}

TEST(Tempering, RungMarginalsMatchExact) {
  const int n = 5, kappa = 2;
  const auto g = CouplingMatrix::gaussian(n, 46);
  const EnergyModel model(g, kappa, HamiltonianKind::raw);
  auto ladder = make_ladder(model, {0.5, 1.5}, Sector::all(), 13);
  const McOptions opt{.burn_in = 1000, .samples = 20000, .thinning = 5, .audit_every = 100};
  const auto est = sample_ladder(ladder, model, opt, n, color0_indicators(), 1);
  ASSERT_EQ(est.size(), 2u);
  const auto configs = oracle::all_configs(n, kappa);
  expect_marginals(est[0], oracle::gibbs_marginals(configs, values_of(g), kappa, 0.5, false), kappa);
  expect_marginals(est[1], oracle::gibbs_marginals(configs, values_of(g), kappa, 1.5, false), kappa);
  EXPECT_GT(ladder.swap_proposed[0], 0u);
  EXPECT_GT(ladder.swap_accepted[0], 0u);
}

TEST(Tempering, IndependentOfWorkers) {
  const auto g = CouplingMatrix::gaussian(6, 3);
  const EnergyModel model(g, 3, HamiltonianKind::centered);
  auto a = make_ladder(model, {0.2, 0.6, 1.0, 1.4}, Sector::balanced(), 2);
  auto b = a;
  for (int s = 0; s < 200; ++s) {
    tempering_step(a, model, 1);
    tempering_step(b, model, 4);
  }
  for (std::size_t k = 0; k < a.rungs.size(); ++k) {
    EXPECT_EQ(a.rungs[k].colors, b.rungs[k].colors);
    EXPECT_EQ(a.rungs[k].energy, b.rungs[k].energy);
  }
  EXPECT_EQ(a.swap_accepted, b.swap_accepted);
}

TEST(Audit, DetectsDrift) {
  const auto g = CouplingMatrix::gaussian(4, 1);
  const EnergyModel model(g, 2, HamiltonianKind::raw);
  auto state = make_chain(model, 1.0, Sector::all(), 1);
  EXPECT_NO_THROW(audit_energy(state, model));
  state.energy += 1.0;
  try {
    audit_energy(state, model);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::not_converged);
  }
}

TEST(Tail, Examples) {
  SamplingSpec spec{.n = 8, .kappa = 2, .beta = 0.0, .replicas = 4, .workers = 1};
  spec.mc = McOptions{.burn_in = 200, .samples = 4000, .thinning = 5, .audit_every = 100};
  const auto t = estimate_tail(spec, 0.5);
  EXPECT_LE(std::abs(t.estimate - 2.0 / 256), 3 * t.std_error + 1e-12);
  spec.sector = Sector::balanced();
  const auto bal = estimate_tail(spec, 0.25);
  EXPECT_EQ(bal.estimate, 0.0);
  EXPECT_TRUE(bal.exact);
  spec.sector = Sector::all();
  spec.beta = std::numeric_limits<double>::infinity();
  const auto inf = estimate_tail(spec, 0.25);
  EXPECT_TRUE(inf.exact);
  EXPECT_LE(inf.estimate, 1.0);
}

TEST(Tail, LargeBetaRespectsBound) {
  SamplingSpec spec{.n = 16, .kappa = 2, .beta = 4.0, .replicas = 6, .workers = 0};
  spec.mc = McOptions{.burn_in = 1000, .samples = 1000, .thinning = 10, .audit_every = 100};
  const auto t = estimate_tail(spec, 0.25);
  EXPECT_NEAR(t.bound, 2 * std::exp(-1.0), 1e-15);
  EXPECT_LE(t.estimate, t.bound + 3 * t.std_error);
}

TEST(Tail, IndependentOfWorkers) {
  SamplingSpec spec{.n = 8, .kappa = 2, .beta = 1.0, .replicas = 5, .workers = 1};
  spec.mc = McOptions{.burn_in = 100, .samples = 500, .thinning = 2, .audit_every = 50};
  const auto a = estimate_tail(spec, 0.25);
  spec.workers = 3;
  const auto b = estimate_tail(spec, 0.25);
  EXPECT_EQ(a.estimate, b.estimate);
  EXPECT_EQ(a.std_error, b.std_error);
}

TEST(ThermodynamicIntegration, ZeroBetaIsSectorEntropy) {
  const auto g = CouplingMatrix::gaussian(6, 1);
  const auto r = free_energy_ti(g, 3, 0.0, 8, Sector::balanced(), HamiltonianKind::centered, 1, McOptions{});
  EXPECT_DOUBLE_EQ(r.estimate, std::log(90.0) / 6);
  EXPECT_THROW(free_energy_ti(g, 3, 1.0, 4, Sector::balanced(), HamiltonianKind::centered, 1, McOptions{}), Error);
}

TEST(ThermodynamicIntegration, MatchesExactAtSmallN) {
  const int n = 6, kappa = 3;
  const auto g = CouplingMatrix::gaussian(n, 77);
  const McOptions opt{.burn_in = 500, .samples = 4000, .thinning = 5, .audit_every = 100};
  const auto r = free_energy_ti(g, kappa, 1.0, 16, Sector::balanced(), HamiltonianKind::centered, 5, opt, 1);
  const double exact = log_partition(g, 1.0, kappa, Sector::balanced(), HamiltonianKind::centered).free_energy();
  EXPECT_LE(std::abs(r.estimate - exact), 3 * r.std_error + r.quadrature_error) << r.estimate << " vs " << exact;
  EXPECT_EQ(r.betas.size(), 17u);
}

TEST(Checkpoint, RoundTripResumesIdentically) {
  const auto g = CouplingMatrix::gaussian(6, 1);
  const EnergyModel model(g, 3, HamiltonianKind::centered);
  auto state = make_chain(model, 1.0, Sector::balanced(), 8);
  for (int s = 0; s < 10; ++s) sweep(state, model);
  const auto text = save_checkpoint(state, 8, 2);
  auto restored = load_checkpoint(text);
  EXPECT_EQ(restored.seed, 8u);
  EXPECT_EQ(restored.rung, 2);
  EXPECT_EQ(restored.state.sweeps, state.sweeps);
  for (int s = 0; s < 10; ++s) {
    sweep(state, model);
    sweep(restored.state, model);
  }
  EXPECT_EQ(state.colors, restored.state.colors);
  EXPECT_EQ(state.energy, restored.state.energy);
  EXPECT_THROW(load_checkpoint("{\"version\": 99}"), Error);
}
