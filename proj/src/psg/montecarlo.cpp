#include "psg/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "json.hpp"

#include "psg/gauge.hpp"
#include "psg/parallel.hpp"

namespace psg {

namespace {

bool metropolis_accept(Rng& rng, double beta, double delta) {
  if (delta >= 0.0) return true;
  return rng.uniform() < std::exp(beta * delta);
}

double metropolis_probability(double beta, double delta) { return delta >= 0.0 ? 1.0 : std::exp(beta * delta); }

void check_finite_beta(double beta, const char* where) {
  require(beta >= 0.0 && std::isfinite(beta), ErrorCode::invalid_argument,
          std::string(where) + ": beta must be finite and >= 0 (use exact enumeration at beta = inf)");
}

struct SeriesStats {
  double mean = 0.0;
  double std_error = 0.0;
};

SeriesStats batch_stats(const std::vector<double>& xs, std::size_t begin, std::size_t end, std::size_t batches) {
  SeriesStats out;
  const std::size_t len = end - begin;
  if (len == 0) return out;
  double sum = 0.0;
  for (std::size_t t = begin; t < end; ++t) sum += xs[t];
  out.mean = sum / static_cast<double>(len);
  batches = std::min(batches, len);
  if (batches < 2) return out;
  const std::size_t size = len / batches;
  std::vector<double> means(batches, 0.0);
  for (std::size_t b = 0; b < batches; ++b) {
    double s = 0.0;
    for (std::size_t t = 0; t < size; ++t) s += xs[begin + b * size + t];
    means[b] = s / static_cast<double>(size);
  }
  double m = 0.0;
  for (double x : means) m += x;
  m /= static_cast<double>(batches);
  double ss = 0.0;
  for (double x : means) ss += (x - m) * (x - m);
  out.std_error = std::sqrt(ss / static_cast<double>(batches - 1) / static_cast<double>(batches));
  return out;
}

ChainEstimate summarize_series(const std::vector<std::vector<double>>& series, std::uint64_t sweeps) {
  ChainEstimate out;
  out.sweeps = sweeps;
  for (const auto& xs : series) {
    const auto all = batch_stats(xs, 0, xs.size(), 20);
    const auto first = batch_stats(xs, 0, xs.size() / 2, 10);
    const auto second = batch_stats(xs, xs.size() / 2, xs.size(), 10);
    const double se = std::hypot(first.std_error, second.std_error);
    const double diff = std::abs(first.mean - second.mean);
    const double ratio = se > 0.0 ? diff / se : (diff > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    out.mean.push_back(all.mean);
    out.std_error.push_back(all.std_error);
    out.geweke.push_back(ratio);
    if (ratio > 3.0) out.flagged = true;
  }
  return out;
}

void check_options(const McOptions& o) {
  require(o.burn_in >= 0 && o.samples >= 2 && o.thinning >= 1 && o.audit_every >= 1, ErrorCode::invalid_argument,
          "mc options: need burn_in >= 0, samples >= 2, thinning >= 1, audit_every >= 1");
}

std::size_t lex_index(std::span<const Color> colors, int kappa) {
  std::size_t idx = 0;
  for (Color c : colors) idx = idx * static_cast<std::size_t>(kappa) + c;
  return idx;
}

}  // namespace

ChainState make_chain(const EnergyModel& model, double beta, const Sector& sector, std::uint64_t seed) {
  check_finite_beta(beta, "make_chain");
  const int n = model.size();
  const int kappa = model.kappa();
  sector.validate(n, kappa);
  ChainState s;
  s.kappa = kappa;
  s.beta = beta;
  s.sector = sector;
  s.rng = Rng(seed);
  s.colors.resize(static_cast<std::size_t>(n));
  if (sector.kind() == Sector::Kind::all) {
    for (auto& c : s.colors) c = static_cast<Color>(s.rng.below(static_cast<std::uint64_t>(kappa)));
  } else {
    const auto counts = sector.counts(n, kappa);
    std::size_t k = 0;
    for (int a = 0; a < kappa; ++a)
      for (int c = 0; c < counts[a]; ++c) s.colors[k++] = static_cast<Color>(a);
    for (std::size_t i = s.colors.size(); i > 1; --i) std::swap(s.colors[i - 1], s.colors[s.rng.below(i)]);
  }
  s.energy = model.energy(s.colors);
  return s;
}

void metropolis_sweep(ChainState& state, const EnergyModel& model) {
  require(state.sector.kind() == Sector::Kind::all, ErrorCode::invalid_argument,
          "metropolis_sweep: single-site moves leave the " + state.sector.name() + " sector; use swap_sweep");
  const int n = model.size();
  for (int step = 0; step < n; ++step) {
    const int site = static_cast<int>(state.rng.below(static_cast<std::uint64_t>(n)));
    const auto color = static_cast<Color>(state.rng.below(static_cast<std::uint64_t>(state.kappa)));
    ++state.proposed;
    if (color == state.colors[site]) {
      ++state.accepted;
      continue;
    }
    const double delta = model.delta(state.colors, site, color);
    if (metropolis_accept(state.rng, state.beta, delta)) {
      state.colors[site] = color;
      state.energy += delta;
      ++state.accepted;
    }
  }
  ++state.sweeps;
}

void swap_sweep(ChainState& state, const EnergyModel& model) {
  require(state.sector.kind() != Sector::Kind::all, ErrorCode::invalid_argument,
          "swap_sweep: requires a balanced or fixed sector");
  const int n = model.size();
  const bool movable =
      std::any_of(state.colors.begin(), state.colors.end(), [&](Color c) { return c != state.colors[0]; });
  for (int step = 0; step < n && movable; ++step) {
    int i = 0, j = 0;
    do {
      i = static_cast<int>(state.rng.below(static_cast<std::uint64_t>(n)));
      j = static_cast<int>(state.rng.below(static_cast<std::uint64_t>(n)));
    } while (state.colors[i] == state.colors[j]);
    ++state.proposed;
    const double delta = model.swap_delta(state.colors, i, j);
    if (metropolis_accept(state.rng, state.beta, delta)) {
      std::swap(state.colors[i], state.colors[j]);
      state.energy += delta;
      ++state.accepted;
    }
  }
  ++state.sweeps;
}

void sweep(ChainState& state, const EnergyModel& model) {
  if (state.sector.kind() == Sector::Kind::all)
    metropolis_sweep(state, model);
  else
    swap_sweep(state, model);
}

void audit_energy(ChainState& state, const EnergyModel& model) {
  const double fresh = model.energy(state.colors);
  require(std::abs(fresh - state.energy) <= 1e-6 * std::max(1.0, std::abs(fresh)), ErrorCode::not_converged,
          "energy audit: cached energy drifted from the full recomputation");
  state.energy = fresh;
}

std::vector<double> metropolis_kernel(const EnergyModel& model, double beta) {
  check_finite_beta(beta, "metropolis_kernel");
  const int n = model.size();
  const int kappa = model.kappa();
  const double states = sector_size(n, kappa, Sector::all());
  require(states <= 4096, ErrorCode::cap_exceeded, "metropolis_kernel: state space too large");
  const auto size = static_cast<std::size_t>(states);
  std::vector<double> p(size * size, 0.0);
  const double proposal = 1.0 / (static_cast<double>(n) * kappa);
  for_each_config(n, kappa, Sector::all(), [&](std::span<const Color> c) {
    const std::size_t from = lex_index(c, kappa);
    std::vector<Color> next(c.begin(), c.end());
    double stay = 1.0;
    for (int site = 0; site < n; ++site)
      for (int color = 0; color < kappa; ++color) {
        if (color == c[site]) continue;
        const double a = proposal * metropolis_probability(beta, model.delta(c, site, static_cast<Color>(color)));
        next[site] = static_cast<Color>(color);
        p[from * size + lex_index(next, kappa)] += a;
        next[site] = c[site];
        stay -= a;
      }
    p[from * size + from] += stay;
  });
  return p;
}

std::vector<double> swap_kernel(const EnergyModel& model, double beta, const Sector& sector) {
  check_finite_beta(beta, "swap_kernel");
  require(sector.kind() != Sector::Kind::all, ErrorCode::invalid_argument, "swap_kernel: requires a constrained sector");
  const int n = model.size();
  const int kappa = model.kappa();
  const auto configs = enumerate_configs(n, kappa, sector);
  require(configs.size() <= 4096, ErrorCode::cap_exceeded, "swap_kernel: state space too large");
  std::map<std::vector<Color>, std::size_t> index;
  for (std::size_t k = 0; k < configs.size(); ++k)
    index.emplace(std::vector<Color>(configs[k].colors().begin(), configs[k].colors().end()), k);
  const std::size_t size = configs.size();
  std::vector<double> p(size * size, 0.0);
  for (std::size_t from = 0; from < size; ++from) {
    const auto c = configs[from].colors();
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (c[i] != c[j]) pairs.emplace_back(i, j);
    double stay = 1.0;
    for (const auto& [i, j] : pairs) {
      const double a = metropolis_probability(beta, model.swap_delta(c, i, j)) / static_cast<double>(pairs.size());
      std::vector<Color> next(c.begin(), c.end());
      std::swap(next[i], next[j]);
      p[from * size + index.at(next)] += a;
      stay -= a;
    }
    p[from * size + from] += stay;
  }
  return p;
}

double replica_swap_acceptance(double beta_i, double energy_i, double beta_j, double energy_j) {
  const double x = (beta_i - beta_j) * (energy_j - energy_i);
  return x >= 0.0 ? 1.0 : std::exp(x);
}

TemperingLadder make_ladder(const EnergyModel& model, std::vector<double> betas, const Sector& sector,
                            std::uint64_t seed) {
  require(betas.size() >= 2, ErrorCode::invalid_argument, "tempering ladder: need at least 2 rungs");
  for (std::size_t k = 1; k < betas.size(); ++k)
    require(betas[k] > betas[k - 1], ErrorCode::invalid_argument, "tempering ladder: betas must increase strictly");
  TemperingLadder ladder;
  for (std::size_t k = 0; k < betas.size(); ++k)
    ladder.rungs.push_back(make_chain(model, betas[k], sector, child_seed(seed, k)));
  ladder.betas = std::move(betas);
  ladder.swap_proposed.assign(ladder.betas.size() - 1, 0);
  ladder.swap_accepted.assign(ladder.betas.size() - 1, 0);
  ladder.rng = Rng(child_seed(seed, ladder.betas.size()));
  return ladder;
}

void tempering_step(TemperingLadder& ladder, const EnergyModel& model, int workers) {
  require(ladder.rungs.size() >= 2, ErrorCode::invalid_argument, "tempering_step: empty ladder");
  parallel_for(ladder.rungs.size(), workers, [&](std::size_t k) { sweep(ladder.rungs[k], model); });
  for (std::size_t k = 0; k + 1 < ladder.rungs.size(); ++k) {
    auto& lo = ladder.rungs[k];
    auto& hi = ladder.rungs[k + 1];
    ++ladder.swap_proposed[k];
    const double a = replica_swap_acceptance(lo.beta, lo.energy, hi.beta, hi.energy);
    if (a >= 1.0 || ladder.rng.uniform() < a) {
      std::swap(lo.colors, hi.colors);
      std::swap(lo.energy, hi.energy);
      ++ladder.swap_accepted[k];
    }
  }
}

ChainEstimate sample_chain(ChainState& state, const EnergyModel& model, const McOptions& options,
                           std::size_t observables, const Observe& observe) {
  check_options(options);
  auto advance = [&] {
    sweep(state, model);
    if (state.sweeps % static_cast<std::uint64_t>(options.audit_every) == 0) audit_energy(state, model);
  };
  for (int t = 0; t < options.burn_in; ++t) advance();
  std::vector<std::vector<double>> series(observables, std::vector<double>(static_cast<std::size_t>(options.samples)));
  std::vector<double> values(observables);
  for (int s = 0; s < options.samples; ++s) {
    for (int t = 0; t < options.thinning; ++t) advance();
    observe(state.colors, values);
    for (std::size_t k = 0; k < observables; ++k) series[k][static_cast<std::size_t>(s)] = values[k];
  }
  return summarize_series(series, state.sweeps);
}

std::vector<ChainEstimate> sample_ladder(TemperingLadder& ladder, const EnergyModel& model,
                                         const McOptions& options, std::size_t observables,
                                         const Observe& observe, int workers) {
  check_options(options);
  std::uint64_t steps = 0;
  auto advance = [&] {
    tempering_step(ladder, model, workers);
    if (++steps % static_cast<std::uint64_t>(options.audit_every) == 0)
      for (auto& rung : ladder.rungs) audit_energy(rung, model);
  };
  for (int t = 0; t < options.burn_in; ++t) advance();
  const std::size_t rungs = ladder.rungs.size();
  std::vector<std::vector<std::vector<double>>> series(
      rungs, std::vector<std::vector<double>>(observables, std::vector<double>(static_cast<std::size_t>(options.samples))));
  std::vector<double> values(observables);
  for (int s = 0; s < options.samples; ++s) {
    for (int t = 0; t < options.thinning; ++t) advance();
    for (std::size_t k = 0; k < rungs; ++k) {
      observe(ladder.rungs[k].colors, values);
      for (std::size_t o = 0; o < observables; ++o) series[k][o][static_cast<std::size_t>(s)] = values[o];
    }
  }
  std::vector<ChainEstimate> out;
  for (std::size_t k = 0; k < rungs; ++k) out.push_back(summarize_series(series[k], steps));
  return out;
}

TailEstimate estimate_tail(const SamplingSpec& spec, double epsilon) {
  require(epsilon > 0.0, ErrorCode::invalid_argument, "estimate_tail: epsilon must be > 0");
  require(spec.replicas >= 2, ErrorCode::invalid_argument, "estimate_tail: need at least 2 replicas");
  require(spec.beta >= 0.0, ErrorCode::invalid_argument, "estimate_tail: beta must be >= 0");
  spec.sector.validate(spec.n, spec.kappa);
  TailEstimate out;
  out.bound = spec.kappa == 2 ? tail_bound(spec.n, epsilon) : std::numeric_limits<double>::infinity();
  if (spec.sector.kind() != Sector::Kind::all) {
    // Every config in a constrained sector has the same magnetization.
    const MagnetizationVector d{spec.sector.counts(spec.n, spec.kappa), spec.n};
    out.estimate = d.deviates_at_least(epsilon) ? 1.0 : 0.0;
    out.exact = true;
    return out;
  }
  if (std::isinf(spec.beta)) {
    const auto avg = tail_probability_exact(spec.n, spec.kappa, spec.beta, epsilon, spec.replicas, spec.root_seed,
                                            spec.sector, spec.workers, spec.limits);
    out.estimate = avg.estimate;
    out.std_error = avg.std_error;
    out.exact = true;
    return out;
  }
  std::vector<double> per(static_cast<std::size_t>(spec.replicas));
  std::vector<char> flagged(per.size(), 0);
  parallel_for(per.size(), spec.workers, [&](std::size_t r) {
    const auto g = CouplingMatrix::gaussian(spec.n, child_seed(spec.root_seed, r));
    const EnergyModel model(g, spec.kappa, spec.kind);
    auto chain = make_chain(model, spec.beta, spec.sector, child_seed(spec.root_seed ^ kChainSalt, r));
    const auto est = sample_chain(chain, model, spec.mc, 1, [&](std::span<const Color> c, std::span<double> v) {
      v[0] = magnetization(c, spec.kappa).deviates_at_least(epsilon) ? 1.0 : 0.0;
    });
    per[r] = est.mean[0];
    flagged[r] = est.flagged;
  });
  const auto avg = summarize(per, out.bound);
  out.estimate = avg.estimate;
  out.std_error = avg.std_error;
  out.flagged = std::any_of(flagged.begin(), flagged.end(), [](char f) { return f != 0; });
  return out;
}

TiResult free_energy_ti(const CouplingMatrix& g, int kappa, double beta_max, int n_grid, const Sector& sector,
                        HamiltonianKind kind, std::uint64_t seed, const McOptions& options, int workers) {
  require(n_grid >= 8, ErrorCode::invalid_argument, "free_energy_ti: n_grid must be >= 8");
  check_finite_beta(beta_max, "free_energy_ti");
  const int n = g.size();
  sector.validate(n, kappa);
  TiResult out;
  const double base = log_sector_size(n, kappa, sector) / n;
  if (beta_max == 0.0) {
    out.estimate = base;
    return out;
  }
  const EnergyModel model(g, kappa, kind);
  const double h = beta_max / n_grid;
  const std::size_t points = static_cast<std::size_t>(n_grid) + 1;
  out.betas.resize(points);
  out.mean_energy.resize(points);
  std::vector<double> se(points);
  std::vector<char> flagged(points, 0);
  for (std::size_t k = 0; k < points; ++k) out.betas[k] = h * static_cast<double>(k);
  parallel_for(points, workers, [&](std::size_t k) {
    auto chain = make_chain(model, out.betas[k], sector, child_seed(seed, k));
    const auto est = sample_chain(chain, model, options, 1,
                                  [&](std::span<const Color> c, std::span<double> v) { v[0] = model.energy(c); });
    out.mean_energy[k] = est.mean[0];
    se[k] = est.std_error[0];
    flagged[k] = est.flagged;
  });
  double fine = 0.0, var = 0.0;
  for (std::size_t k = 0; k < points; ++k) {
    const double w = (k == 0 || k + 1 == points) ? 0.5 * h : h;
    fine += w * out.mean_energy[k];
    var += w * w * se[k] * se[k];
  }
  // Coarse rule on the even points; an odd final interval keeps width h.
  const std::size_t last_even = (n_grid % 2 == 0) ? points - 1 : points - 2;
  double coarse = 0.0;
  for (std::size_t k = 0; k <= last_even; k += 2) {
    const double w = (k == 0 || k == last_even) ? h : 2.0 * h;
    coarse += w * out.mean_energy[k];
  }
  if (last_even != points - 1) coarse += 0.5 * h * (out.mean_energy[points - 2] + out.mean_energy[points - 1]);
  out.estimate = base + fine / n;
  out.std_error = std::sqrt(var) / n;
  out.quadrature_error = std::abs(fine - coarse) / 3.0 / n;
  out.flagged = std::any_of(flagged.begin(), flagged.end(), [](char f) { return f != 0; });
  return out;
}

std::string save_checkpoint(const ChainState& state, std::uint64_t seed, int rung) {
  nlohmann::json j;
  j["version"] = kCheckpointVersion;
  j["seed"] = seed;
  j["rung"] = rung;
  j["kappa"] = state.kappa;
  j["beta"] = state.beta;
  j["sector"] = state.sector.name();
  j["sweeps"] = state.sweeps;
  j["proposed"] = state.proposed;
  j["accepted"] = state.accepted;
  j["energy"] = state.energy;
  std::vector<int> colors;
  for (Color c : state.colors) colors.push_back(c + 1);
  j["colors"] = colors;
  j["rng"] = state.rng.state();
  return j.dump();
}

Checkpoint load_checkpoint(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::invalid_argument, std::string("checkpoint: ") + e.what());
  }
  require(j.value("version", 0) == kCheckpointVersion, ErrorCode::invalid_argument,
          "checkpoint: unsupported version");
  Checkpoint out;
  try {
    out.seed = j.at("seed").get<std::uint64_t>();
    out.rung = j.at("rung").get<int>();
    auto& s = out.state;
    s.kappa = j.at("kappa").get<int>();
    s.beta = j.at("beta").get<double>();
    s.sector = Sector::parse(j.at("sector").get<std::string>());
    s.sweeps = j.at("sweeps").get<std::uint64_t>();
    s.proposed = j.at("proposed").get<std::uint64_t>();
    s.accepted = j.at("accepted").get<std::uint64_t>();
    s.energy = j.at("energy").get<double>();
    const auto colors = j.at("colors").get<std::vector<int>>();
    const auto config = SpinConfig::from_one_based(s.kappa, colors);
    s.colors.assign(config.colors().begin(), config.colors().end());
    s.rng.set_state(j.at("rng").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::invalid_argument, std::string("checkpoint: ") + e.what());
  }
  return out;
}

}  // namespace psg
