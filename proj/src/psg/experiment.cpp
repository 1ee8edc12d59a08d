#include "psg/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "json.hpp"
#include "psg/core.hpp"
#include "psg/exact.hpp"
#include "psg/gauge.hpp"
#include "psg/montecarlo.hpp"
#include "psg/parallel.hpp"
#include "psg/rate.hpp"
#include "psg/rng.hpp"

namespace psg {

using json = nlohmann::json;

struct ExperimentSpec::Impl {
  json spec;
};

namespace {

constexpr std::uint64_t kSiteSalt = 0xD1B54A32D192ED03ULL;

std::vector<int> range_step(int from, int to, int step) {
  std::vector<int> out;
  for (int x = from; x <= to; x += step) out.push_back(x);
  return out;
}

json default_mc() { return json{{"burn_in", 1000}, {"samples", 2000}, {"thinning", 10}, {"audit_every", 100}}; }

// Defaults per command; the key set doubles as the list of accepted parameters.
json defaults_for(const std::string& command, const json& given) {
  const int kappa = given.contains("kappa") && given["kappa"].is_number_integer() ? given["kappa"].get<int>() : -1;
  auto k_or = [&](int fallback) { return kappa > 0 ? kappa : fallback; };
  json d{{"command", command}, {"format", "csv"}};
  if (command == "thresholds") {
    d["kappa_max"] = 100;
  } else if (command == "exact-free-energy") {
    d.update({{"kappa", 3}, {"n", {3, 6, 9}}, {"beta", json::array({1.0})}, {"sector", "balanced"}, {"hamiltonian", "centered"},
              {"seed", 1}, {"replicas", 200}, {"per_replica", false}, {"cap", 2e7}});
  } else if (command == "second-moment") {
    d.update({{"kappa", 3}, {"n", {3, 6, 9}}, {"beta", json::array({1.0})}, {"cap", 2e7}});
  } else if (command == "uncentered-ratio") {
    d.update({{"kappa", 3}, {"n", {3, 6, 9}}, {"beta", json::array({1.0})}, {"sector", "balanced"}, {"cap", 2e7}});
  } else if (command == "rate-gap") {
    d.update({{"kappa", 3}, {"beta", json::array({1.0})}, {"delta", 0.01}, {"restarts", 64}, {"seed", 1}});
  } else if (command == "kl-check") {
    d.update({{"samples", 100000}, {"seed", 1}, {"dim_min", 2}, {"dim_max", 9}});
  } else if (command == "ldp-check") {
    const int k = k_or(2);
    d.update({{"kappa", k}, {"n", range_step(k * k, 10 * k * k, k * k)}, {"base_counts", json::array()}});
  } else if (command == "shell-count") {
    const int k = k_or(2);
    d.update({{"kappa", k}, {"n", range_step(k, 12 * k, k)}});
  } else if (command == "gauge-check") {
    d.update({{"n", json::array({6})}, {"beta", json::array({1.0})}, {"trials", 1000}, {"seed", 1}, {"cap", 2e7}});
  } else if (command == "moment-check") {
    d.update({{"n", {4, 8}}, {"beta", json::array({1.0})}, {"m", {1, 2, 3, 4}}, {"lambda", json::array()}, {"replicas", 200},
              {"seed", 1}, {"cap", 2e7}});
  } else if (command == "tail-bound") {
    d.update({{"kappa", 2}, {"n", {4, 8, 12}}, {"beta", {0.0, 1.0, 4.0, "inf"}}, {"epsilon", {0.25, 0.5}},
              {"sector", "all"}, {"hamiltonian", "raw"}, {"replicas", 50}, {"seed", 1}, {"mc", default_mc()},
              {"cap", 2e7}});
  } else if (command == "mc-free-energy") {
    d.update({{"kappa", 3}, {"n", json::array({6})}, {"beta_max", 1.0}, {"n_grid", 16}, {"sector", "balanced"},
              {"hamiltonian", "centered"}, {"replicas", 1}, {"seed", 1}, {"mc", default_mc()},
              {"exact_check", true}, {"cap", 2e7}});
  } else {
    fail(ErrorCode::invalid_argument, "unknown command '" + command + "'");
  }
  return d;
}

double beta_value(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  }
  fail(ErrorCode::invalid_argument, "beta values must be numbers or \"inf\"");
}

std::vector<double> betas(const json& spec) {
  std::vector<double> out;
  for (const auto& v : spec.at("beta")) out.push_back(beta_value(v));
  return out;
}

template <class T>
std::vector<T> list(const json& spec, const char* key) {
  return spec.at(key).get<std::vector<T>>();
}

void check_type(const json& value, const json& like, const std::string& key) {
  auto same = [](const json& a, const json& b) {
    if (a.is_number() && b.is_number_float()) return true;
    if (a.is_number_integer() && b.is_number_integer()) return true;
    if (a.is_number_unsigned() && b.is_number_integer()) return true;
    return a.type() == b.type();
  };
  require(same(value, like), ErrorCode::invalid_argument, "spec: '" + key + "' has the wrong type");
}

json normalize(const json& given) {
  require(given.is_object(), ErrorCode::invalid_argument, "spec: expected a JSON object");
  require(given.contains("command") && given["command"].is_string(), ErrorCode::invalid_argument,
          "spec: missing string field 'command'");
  json spec = defaults_for(given["command"].get<std::string>(), given);
  for (const auto& [key, value] : given.items()) {
    require(spec.contains(key), ErrorCode::invalid_argument,
            "spec: unknown parameter '" + key + "' for command " + spec["command"].get<std::string>());
    if (key == "mc") {
      require(value.is_object(), ErrorCode::invalid_argument, "spec: 'mc' must be an object");
      for (const auto& [mk, mv] : value.items()) {
        require(spec["mc"].contains(mk), ErrorCode::invalid_argument, "spec: unknown mc parameter '" + mk + "'");
        require(mv.is_number_integer(), ErrorCode::invalid_argument, "spec: mc." + mk + " must be an integer");
        spec["mc"][mk] = mv;
      }
      continue;
    }
    if (key == "beta") {
      require(value.is_array() && !value.empty(), ErrorCode::invalid_argument, "spec: 'beta' must be a nonempty list");
      for (const auto& b : value) beta_value(b);
      spec[key] = value;
      continue;
    }
    if (spec[key].is_array()) {
      require(value.is_array(), ErrorCode::invalid_argument, "spec: '" + key + "' must be a list");
      for (const auto& item : value)
        require(item.is_number(), ErrorCode::invalid_argument, "spec: '" + key + "' must hold numbers");
      spec[key] = value;
      continue;
    }
    check_type(value, spec[key], key);
    spec[key] = value;
  }
  // Store floats as floats so the canonical text does not depend on how they were typed.
  for (const char* key : {"delta", "beta_max", "cap"})
    if (spec.contains(key)) spec[key] = spec[key].get<double>();
  for (const char* key : {"lambda", "epsilon"})
    if (spec.contains(key)) spec[key] = spec[key].get<std::vector<double>>();
  if (spec.contains("beta")) {
    json out = json::array();
    for (const auto& b : spec["beta"]) {
      const double v = beta_value(b);
      if (std::isinf(v))
        out.push_back("inf");
      else
        out.push_back(v);
    }
    spec["beta"] = out;
  }
  const auto format = spec["format"].get<std::string>();
  require(format == "csv" || format == "json", ErrorCode::invalid_argument, "spec: format must be csv or json");
  return spec;
}

void validate(const json& spec) {
  const auto command = spec["command"].get<std::string>();
  auto positive_list = [&](const char* key) {
    const auto xs = list<int>(spec, key);
    require(!xs.empty(), ErrorCode::invalid_argument, std::string("spec: '") + key + "' must be nonempty");
    for (int x : xs) require(x >= 1, ErrorCode::invalid_argument, std::string("spec: '") + key + "' entries must be >= 1");
    return xs;
  };
  const double cap = spec.contains("cap") ? spec["cap"].get<double>() : 2e7;
  require(cap >= 1.0, ErrorCode::invalid_argument, "spec: cap must be >= 1");
  const EnumerationLimits limits{cap};
  int kappa = spec.contains("kappa") ? spec["kappa"].get<int>() : 2;
  require(kappa >= 2 && kappa <= kMaxColors, ErrorCode::invalid_argument, "spec: kappa must lie in [2, 255]");
  if (spec.contains("beta"))
    for (double b : betas(spec)) require(b >= 0.0, ErrorCode::invalid_argument, "spec: beta must be >= 0");
  if (spec.contains("seed"))
    require(spec["seed"].is_number_unsigned() || spec["seed"].get<long long>() >= 0, ErrorCode::invalid_argument,
            "spec: seed must be a nonnegative integer");
  if (spec.contains("mc")) {
    const auto& mc = spec["mc"];
    require(mc["burn_in"].get<int>() >= 0 && mc["samples"].get<int>() >= 2 && mc["thinning"].get<int>() >= 1 &&
                mc["audit_every"].get<int>() >= 1,
            ErrorCode::invalid_argument, "spec: mc needs burn_in >= 0, samples >= 2, thinning >= 1, audit_every >= 1");
  }
  const bool finite_only = command != "gauge-check" && command != "tail-bound";
  if (spec.contains("beta") && finite_only)
    for (double b : betas(spec))
      require(std::isfinite(b), ErrorCode::invalid_argument, "spec: beta = inf is only supported by gauge-check and tail-bound");

  if (command == "thresholds") {
    require(spec["kappa_max"].get<int>() >= 3 && spec["kappa_max"].get<int>() <= 100000, ErrorCode::invalid_argument,
            "spec: kappa_max must lie in [3, 100000]");
  } else if (command == "exact-free-energy" || command == "uncentered-ratio") {
    const auto sector = Sector::parse(spec["sector"].get<std::string>());
    for (int n : positive_list("n")) {
      sector.validate(n, kappa);
      if (command == "exact-free-energy") check_enumeration_cap(n, kappa, sector, limits);
    }
    if (command == "exact-free-energy") {
      parse_hamiltonian_kind(spec["hamiltonian"].get<std::string>());
      require(spec["replicas"].get<int>() >= 2, ErrorCode::invalid_argument, "spec: replicas must be >= 2");
    }
  } else if (command == "second-moment" || command == "shell-count") {
    for (int n : positive_list("n")) Sector::balanced().validate(n, kappa);
  } else if (command == "rate-gap") {
    const double delta = spec["delta"].get<double>();
    require(delta > 0.0, ErrorCode::invalid_argument, "spec: delta must be > 0");
    require(delta <= max_frobenius_gap(kappa) * (1.0 + 1e-12), ErrorCode::infeasible,
            "spec: delta exceeds the maximal gap (kappa-1)/kappa^2");
    require(spec["restarts"].get<int>() >= 1, ErrorCode::invalid_argument, "spec: restarts must be >= 1");
  } else if (command == "kl-check") {
    const int lo = spec["dim_min"].get<int>(), hi = spec["dim_max"].get<int>();
    require(lo >= 2 && hi >= lo && hi <= 64, ErrorCode::invalid_argument, "spec: need 2 <= dim_min <= dim_max <= 64");
    require(spec["samples"].get<long long>() >= 1, ErrorCode::invalid_argument, "spec: samples must be >= 1");
  } else if (command == "ldp-check") {
    const auto base = list<int>(spec, "base_counts");
    int base_n = kappa * kappa;
    if (!base.empty()) {
      require(base.size() == static_cast<std::size_t>(kappa) * kappa, ErrorCode::dimension_mismatch,
              "spec: base_counts must have kappa^2 entries");
      base_n = 0;
      for (int c : base) base_n += c;
      AdmissibleMatrix(kappa, base_n, base);
    }
    for (int n : positive_list("n"))
      require(n % base_n == 0, ErrorCode::divisibility,
              "spec: every N must be a multiple of the base table size " + std::to_string(base_n));
  } else if (command == "gauge-check" || command == "moment-check") {
    for (int n : positive_list("n")) check_enumeration_cap(n, 2, Sector::all(), limits);
    if (command == "gauge-check") {
      require(spec["trials"].get<int>() >= 1, ErrorCode::invalid_argument, "spec: trials must be >= 1");
    } else {
      require(spec["replicas"].get<int>() >= 2, ErrorCode::invalid_argument, "spec: replicas must be >= 2");
      for (int m : list<int>(spec, "m")) require(m >= 1, ErrorCode::invalid_argument, "spec: m entries must be >= 1");
    }
  } else if (command == "tail-bound") {
    const auto sector = Sector::parse(spec["sector"].get<std::string>());
    parse_hamiltonian_kind(spec["hamiltonian"].get<std::string>());
    const bool zero_temp = std::ranges::any_of(betas(spec), [](double b) { return std::isinf(b); });
    for (int n : positive_list("n")) {
      sector.validate(n, kappa);
      if (zero_temp) check_enumeration_cap(n, kappa, sector, limits);
    }
    for (double e : list<double>(spec, "epsilon")) require(e > 0.0, ErrorCode::invalid_argument, "spec: epsilon must be > 0");
    require(spec["replicas"].get<int>() >= 2, ErrorCode::invalid_argument, "spec: replicas must be >= 2");
  } else if (command == "mc-free-energy") {
    const auto sector = Sector::parse(spec["sector"].get<std::string>());
    parse_hamiltonian_kind(spec["hamiltonian"].get<std::string>());
    for (int n : positive_list("n")) sector.validate(n, kappa);
    require(spec["n_grid"].get<int>() >= 8, ErrorCode::invalid_argument, "spec: n_grid must be >= 8");
    const double bmax = spec["beta_max"].get<double>();
    require(bmax >= 0.0 && std::isfinite(bmax), ErrorCode::invalid_argument, "spec: beta_max must be finite and >= 0");
    require(spec["replicas"].get<int>() >= 1, ErrorCode::invalid_argument, "spec: replicas must be >= 1");
  }
}

McOptions mc_options(const json& spec) {
  const auto& mc = spec.at("mc");
  return McOptions{mc["burn_in"].get<int>(), mc["samples"].get<int>(), mc["thinning"].get<int>(),
                   mc["audit_every"].get<int>()};
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

Table run_thresholds(const json& spec) {
  Table t({"kappa", "beta_kappa", "branch", "ew90_critical", "balanced_gse_upper", "unconstrained_gse_lower",
           "breaks_at_zero_temp"});
  for (const auto& row : threshold_table(spec["kappa_max"].get<int>()))
    t.add_row({std::int64_t{row.kappa}, row.beta.value, std::string(to_string(row.beta.branch)), row.ew90,
               row.zero_temp.balanced_upper, row.zero_temp.unconstrained_lower, row.zero_temp.breaks});
  return t;
}

Table run_exact_free_energy(const json& spec, int workers) {
  const int kappa = spec["kappa"].get<int>();
  const auto sector = Sector::parse(spec["sector"].get<std::string>());
  const auto kind = parse_hamiltonian_kind(spec["hamiltonian"].get<std::string>());
  const bool per_replica = spec["per_replica"].get<bool>();
  const EnumerationLimits limits{spec["cap"].get<double>()};
  Table t = per_replica ? Table({"n", "beta", "replica", "coupling_seed", "log_partition", "free_energy"})
                        : Table({"n", "beta", "mean", "std_error", "replicas", "annealed", "annealed_limit"});
  for (int n : list<int>(spec, "n"))
    for (double beta : betas(spec)) {
      DisorderSpec d{n, kappa, beta, sector, kind, spec["seed"].get<std::uint64_t>(), spec["replicas"].get<int>(),
                     workers, limits};
      const auto q = quenched_free_energy(d);
      if (per_replica) {
        for (std::size_t r = 0; r < q.samples.size(); ++r)
          t.add_row({std::int64_t{n}, beta, static_cast<std::int64_t>(r), std::to_string(q.samples[r].seed),
                     q.samples[r].log_partition, q.samples[r].free_energy()});
      } else {
        const double annealed = annealed_log_partition(n, beta, kappa, sector, kind, limits) / n;
        t.add_row({std::int64_t{n}, beta, q.mean, q.std_error, std::int64_t{d.replicas}, annealed,
                   annealed_limit(kappa, beta)});
      }
    }
  return t;
}

Table run_second_moment(const json& spec) {
  const int kappa = spec["kappa"].get<int>();
  const EnumerationLimits limits{spec["cap"].get<double>()};
  Table t({"n", "beta", "ratio", "log_ratio", "admissible_tables"});
  for (int n : list<int>(spec, "n"))
    for (double beta : betas(spec)) {
      const double lr = second_moment_log_ratio(n, beta, kappa, limits);
      t.add_row({std::int64_t{n}, beta, std::exp(lr), lr, static_cast<std::int64_t>(count_admissible(n, kappa))});
    }
  return t;
}

Table run_uncentered(const json& spec) {
  const int kappa = spec["kappa"].get<int>();
  const auto sector = Sector::parse(spec["sector"].get<std::string>());
  const EnumerationLimits limits{spec["cap"].get<double>()};
  Table t({"n", "beta", "ratio", "log_ratio", "log_lower_bound"});
  for (int n : list<int>(spec, "n"))
    for (double beta : betas(spec)) {
      const double lr = uncentered_log_ratio(n, beta, kappa, sector, limits);
      const double bound = sector.kind() == Sector::Kind::fixed ? std::numeric_limits<double>::quiet_NaN()
                                                                : uncentered_log_lower_bound(n, beta, kappa, sector);
      t.add_row({std::int64_t{n}, beta, std::exp(lr), lr, bound});
    }
  return t;
}

Table run_rate_gap(const json& spec, int workers) {
  const int kappa = spec["kappa"].get<int>();
  GapOptions options;
  options.restarts = spec["restarts"].get<int>();
  options.seed = spec["seed"].get<std::uint64_t>();
  options.workers = workers;
  Table t({"kappa", "beta", "delta", "minimum", "argmin_gap", "grid_best", "restarts", "iterations", "converged",
           "argmin"});
  for (double beta : betas(spec)) {
    const auto r = exponent_gap(kappa, beta, spec["delta"].get<double>(), options);
    std::string argmin;
    for (std::size_t k = 0; k < r.argmin.size(); ++k) argmin += (k ? " " : "") + format_double(r.argmin[k]);
    t.add_row({std::int64_t{kappa}, beta, r.delta, r.minimum, r.argmin_gap, r.grid_best, std::int64_t{r.restarts},
               static_cast<std::int64_t>(r.iterations), r.converged, argmin});
  }
  return t;
}

Table run_kl_check(const json& spec, int workers) {
  const int lo = spec["dim_min"].get<int>(), hi = spec["dim_max"].get<int>();
  const long long total = spec["samples"].get<long long>();
  const auto seed = spec["seed"].get<std::uint64_t>();
  const std::size_t dims = static_cast<std::size_t>(hi - lo + 1);
  struct Row {
    long long samples = 0, holds = 0, violations = 0;
    double max_ratio = 0.0;
  };
  std::vector<Row> rows(dims);
  parallel_for(dims, workers, [&](std::size_t k) {
    const int dim = lo + static_cast<int>(k);
    Rng rng(child_seed(seed, k));
    Row& row = rows[k];
    row.samples = total / static_cast<long long>(dims) + (static_cast<long long>(k) < total % static_cast<long long>(dims));
    std::vector<double> p(static_cast<std::size_t>(dim)), q(p.size()), z(p.size());
    for (long long s = 0; s < row.samples; ++s) {
      double sum = 0.0;
      for (double& x : q) sum += (x = -std::log(1.0 - rng.uniform()) + 1e-3);
      for (double& x : q) x /= sum;
      double mean = 0.0;
      for (double& x : z) mean += (x = 2.0 * rng.uniform() - 1.0);
      mean /= dim;
      double zmax = 0.0;
      for (double& x : z) zmax = std::max(zmax, std::abs(x -= mean));
      const double qmin = *std::min_element(q.begin(), q.end());
      const double scale = zmax > 0.0 ? rng.uniform() * 0.5 * qmin / zmax : 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) p[i] = q[i] + scale * z[i];
      const auto c = local_expansion_check(p, q);
      if (c.status != ExpansionStatus::ok) {
        ++row.violations;
        continue;
      }
      row.holds += c.holds;
      if (c.rhs_bound > 0.0) row.max_ratio = std::max(row.max_ratio, c.lhs_gap / c.rhs_bound);
    }
  });
  Table t({"dim", "samples", "holds", "precondition_violations", "max_ratio"});
  for (std::size_t k = 0; k < dims; ++k)
    t.add_row({std::int64_t{lo + static_cast<int>(k)}, std::int64_t{rows[k].samples}, std::int64_t{rows[k].holds},
               std::int64_t{rows[k].violations}, rows[k].max_ratio});
  return t;
}

Table run_ldp_check(const json& spec) {
  const int kappa = spec["kappa"].get<int>();
  auto base = list<int>(spec, "base_counts");
  if (base.empty()) base.assign(static_cast<std::size_t>(kappa) * kappa, 1);
  int base_n = 0;
  for (int c : base) base_n += c;
  Table t({"n", "exact_log_p", "asymptotic_log_p", "gap"});
  for (int n : list<int>(spec, "n")) {
    std::vector<int> counts(base);
    for (int& c : counts) c *= n / base_n;
    const auto terms = ldp_log_probability(n, kappa, AdmissibleMatrix(kappa, n, counts));
    t.add_row({std::int64_t{n}, terms.exact_log_p, terms.asymptotic_log_p, terms.gap()});
  }
  return t;
}

Table run_shell_count(const json& spec) {
  const int kappa = spec["kappa"].get<int>();
  const double power = 0.5 * (kappa - 1.0) * (kappa - 1.0);
  Table t({"n", "l", "count", "bound_ratio"});
  for (int n : list<int>(spec, "n")) {
    const auto counts = shell_counts(n, kappa);
    for (int l = 1; l <= n; ++l) {
      const auto c = counts[static_cast<std::size_t>(l - 1)];
      t.add_row({std::int64_t{n}, std::int64_t{l}, static_cast<std::int64_t>(c),
                 static_cast<double>(c) / std::pow(static_cast<double>(l) * n, power)});
    }
  }
  return t;
}

Table run_gauge_check(const json& spec, int workers) {
  const auto seed = spec["seed"].get<std::uint64_t>();
  const int trials = spec["trials"].get<int>();
  const EnumerationLimits limits{spec["cap"].get<double>()};
  Table t({"n", "beta", "trials", "max_abs_sum", "mean_abs_value", "passed"});
  for (int n : list<int>(spec, "n"))
    for (double beta : betas(spec)) {
      std::vector<double> sums(static_cast<std::size_t>(trials)), values(sums.size());
      parallel_for(sums.size(), workers, [&](std::size_t k) {
        const auto g = CouplingMatrix::gaussian(n, child_seed(seed, k));
        Rng rng(child_seed(seed ^ kSiteSalt, k));
        // An odd number of sites always leaves some site with odd degree.
        const auto size = 2 * rng.below(static_cast<std::uint64_t>(n)) + 1;
        std::vector<int> sites(size);
        for (int& s : sites) s = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
        const auto check = gauge_pair_check(g, beta, sites, limits);
        sums[k] = std::abs(check.sum);
        values[k] = std::abs(check.value);
      });
      double max_sum = 0.0, mean_value = 0.0;
      for (std::size_t k = 0; k < sums.size(); ++k) {
        max_sum = std::max(max_sum, sums[k]);
        mean_value += values[k];
      }
      mean_value /= trials;
      t.add_row({std::int64_t{n}, beta, std::int64_t{trials}, max_sum, mean_value, max_sum <= 1e-12});
    }
  return t;
}

Table run_moment_check(const json& spec, int workers) {
  const auto seed = spec["seed"].get<std::uint64_t>();
  const int replicas = spec["replicas"].get<int>();
  const EnumerationLimits limits{spec["cap"].get<double>()};
  Table t({"n", "beta", "kind", "order", "estimate", "std_error", "bound", "satisfied"});
  for (int n : list<int>(spec, "n"))
    for (double beta : betas(spec)) {
      for (int m : list<int>(spec, "m")) {
        const auto r = magnetization_moment_exact(n, beta, m, replicas, seed, workers, limits);
        t.add_row({std::int64_t{n}, beta, std::string("moment"), static_cast<double>(m), r.estimate, r.std_error,
                   r.bound, r.satisfied});
      }
      for (double lambda : list<double>(spec, "lambda")) {
        const auto r = exponential_moment_exact(n, beta, lambda, replicas, seed, workers, limits);
        t.add_row({std::int64_t{n}, beta, std::string("exponential"), lambda, r.estimate, r.std_error, r.bound,
                   r.satisfied});
      }
    }
  return t;
}

Table run_tail_bound(const json& spec, int workers) {
  SamplingSpec s;
  s.kappa = spec["kappa"].get<int>();
  s.sector = Sector::parse(spec["sector"].get<std::string>());
  s.kind = parse_hamiltonian_kind(spec["hamiltonian"].get<std::string>());
  s.root_seed = spec["seed"].get<std::uint64_t>();
  s.replicas = spec["replicas"].get<int>();
  s.workers = workers;
  s.mc = mc_options(spec);
  s.limits = EnumerationLimits{spec["cap"].get<double>()};
  Table t({"n", "beta", "epsilon", "estimate", "std_error", "bound", "method", "flagged", "satisfied"});
  for (int n : list<int>(spec, "n"))
    for (double beta : betas(spec))
      for (double eps : list<double>(spec, "epsilon")) {
        s.n = n;
        s.beta = beta;
        const auto r = estimate_tail(s, eps);
        t.add_row({std::int64_t{n}, beta, eps, r.estimate, r.std_error, r.bound,
                   std::string(r.exact ? "exact" : "mc"), r.flagged, r.estimate <= r.bound + 3.0 * r.std_error});
      }
  return t;
}

Table run_mc_free_energy(const json& spec, int workers) {
  const int kappa = spec["kappa"].get<int>();
  const auto sector = Sector::parse(spec["sector"].get<std::string>());
  const auto kind = parse_hamiltonian_kind(spec["hamiltonian"].get<std::string>());
  const auto seed = spec["seed"].get<std::uint64_t>();
  const int replicas = spec["replicas"].get<int>();
  const double beta_max = spec["beta_max"].get<double>();
  const int n_grid = spec["n_grid"].get<int>();
  const auto mc = mc_options(spec);
  const EnumerationLimits limits{spec["cap"].get<double>()};
  Table t({"n", "beta", "estimate", "std_error", "quadrature_error", "exact", "annealed_limit", "flagged"});
  for (int n : list<int>(spec, "n")) {
    std::vector<TiResult> runs(static_cast<std::size_t>(replicas));
    std::vector<double> exact(runs.size(), std::numeric_limits<double>::quiet_NaN());
    const bool enumerable = spec["exact_check"].get<bool>() && sector_size(n, kappa, sector) <= limits.cap;
    // Replicas run one after another; the grid points inside each run are parallel.
    for (std::size_t r = 0; r < runs.size(); ++r) {
      const auto g = CouplingMatrix::gaussian(n, child_seed(seed, r));
      runs[r] = free_energy_ti(g, kappa, beta_max, n_grid, sector, kind, child_seed(seed ^ kChainSalt, r), mc, workers);
      if (enumerable) exact[r] = log_partition(g, beta_max, kappa, sector, kind, limits).free_energy();
    }
    double mean = 0.0, se = 0.0, quad = 0.0, ex = 0.0;
    bool flagged = false;
    for (std::size_t r = 0; r < runs.size(); ++r) {
      mean += runs[r].estimate;
      quad += runs[r].quadrature_error;
      ex += exact[r];
      flagged = flagged || runs[r].flagged;
    }
    mean /= replicas;
    quad /= replicas;
    ex /= replicas;
    if (replicas >= 2) {
      std::vector<double> xs;
      for (const auto& run : runs) xs.push_back(run.estimate);
      se = summarize(xs, 0.0).std_error;
    } else {
      se = runs[0].std_error;
    }
    t.add_row({std::int64_t{n}, beta_max, mean, se, quad, ex, annealed_limit(kappa, beta_max), flagged});
  }
  return t;
}

}  // namespace

ExperimentSpec ExperimentSpec::parse(const std::string& json_text) {
  json given;
  try {
    given = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(ErrorCode::invalid_argument, std::string("spec: ") + e.what());
  }
  json spec;
  try {
    spec = normalize(given);
    validate(spec);
  } catch (const json::exception& e) {
    fail(ErrorCode::invalid_argument, std::string("spec: ") + e.what());
  }
  ExperimentSpec out;
  out.command_ = spec["command"].get<std::string>();
  out.impl_ = std::make_shared<const Impl>(Impl{std::move(spec)});
  return out;
}

std::string ExperimentSpec::canonical() const { return impl_->spec.dump(); }

std::string ExperimentSpec::format() const { return impl_->spec["format"].get<std::string>(); }

std::uint64_t ExperimentSpec::seed() const {
  return impl_->spec.contains("seed") ? impl_->spec["seed"].get<std::uint64_t>() : 0;
}

const std::vector<std::string>& experiment_commands() {
  static const std::vector<std::string> commands = {
      "thresholds", "exact-free-energy", "second-moment", "uncentered-ratio", "rate-gap",   "kl-check",
      "ldp-check",  "shell-count",       "gauge-check",   "moment-check",     "tail-bound", "mc-free-energy"};
  return commands;
}

std::string tool_version() { return PSG_VERSION_STRING; }

Table run_experiment(const ExperimentSpec& spec, int workers) {
  const json& s = spec.impl().spec;
  const auto& c = spec.command();
  Table t = [&] {
    try {
      if (c == "thresholds") return run_thresholds(s);
      if (c == "exact-free-energy") return run_exact_free_energy(s, workers);
      if (c == "second-moment") return run_second_moment(s);
      if (c == "uncentered-ratio") return run_uncentered(s);
      if (c == "rate-gap") return run_rate_gap(s, workers);
      if (c == "kl-check") return run_kl_check(s, workers);
      if (c == "ldp-check") return run_ldp_check(s);
      if (c == "shell-count") return run_shell_count(s);
      if (c == "gauge-check") return run_gauge_check(s, workers);
      if (c == "moment-check") return run_moment_check(s, workers);
      if (c == "tail-bound") return run_tail_bound(s, workers);
      if (c == "mc-free-energy") return run_mc_free_energy(s, workers);
    } catch (const json::exception& e) {
      fail(ErrorCode::invalid_argument, std::string("spec: ") + e.what());
    }
    fail(ErrorCode::invalid_argument, "unknown command '" + c + "'");
  }();
  t.set_meta("tool", "psg " + tool_version());
  t.set_meta("command", c);
  t.set_meta("seed", std::to_string(spec.seed()));
  t.set_spec(spec.canonical());
  return t;
}

}  // namespace psg
