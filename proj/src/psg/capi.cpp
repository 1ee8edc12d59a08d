#include "psg/psg.h"

#include <cstring>
#include <exception>
#include <new>
#include <optional>
#include <string>

#include "psg/core.hpp"
#include "psg/exact.hpp"
#include "psg/experiment.hpp"
#include "psg/rate.hpp"
#include "psg/rng.hpp"

struct psg_coupling {
  psg::CouplingMatrix g;
};

struct psg_config {
  psg::SpinConfig sigma;
};

struct psg_experiment {
  psg::ExperimentSpec spec;
};

struct psg_table {
  psg::Table table;
};

namespace {

thread_local std::string last_error;

template <class F>
psg_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return PSG_OK;
  } catch (const psg::Error& e) {
    last_error = e.what();
    return static_cast<psg_status>(static_cast<int>(e.code()));
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return PSG_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return PSG_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return PSG_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  psg::require(p != nullptr, psg::ErrorCode::invalid_argument, std::string(what) + " must not be NULL");
}

char* duplicate(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

psg::HamiltonianKind kind_of(psg_hamiltonian k) {
  switch (k) {
    case PSG_RAW:
      return psg::HamiltonianKind::raw;
    case PSG_CENTERED:
      return psg::HamiltonianKind::centered;
  }
  psg::fail(psg::ErrorCode::invalid_argument, "unknown hamiltonian kind");
}

psg::Sector sector_of(const char* text) {
  need(text, "sector");
  return psg::Sector::parse(text);
}

}  // namespace

extern "C" {

const char* psg_version(void) {
  static const std::string v = psg::tool_version();
  return v.c_str();
}

const char* psg_last_error(void) { return last_error.c_str(); }

const char* psg_status_name(psg_status status) {
  switch (status) {
    case PSG_OK:
      return "ok";
    case PSG_ERR_INVALID_ARGUMENT:
      return "invalid_argument";
    case PSG_ERR_DIMENSION_MISMATCH:
      return "dimension_mismatch";
    case PSG_ERR_OUT_OF_RANGE:
      return "out_of_range";
    case PSG_ERR_DIVISIBILITY:
      return "divisibility";
    case PSG_ERR_CAP_EXCEEDED:
      return "cap_exceeded";
    case PSG_ERR_INFEASIBLE:
      return "infeasible";
    case PSG_ERR_PRECONDITION:
      return "precondition";
    case PSG_ERR_NOT_CONVERGED:
      return "not_converged";
    case PSG_ERR_INTERNAL:
      return "internal";
  }
  return "unknown";
}

void psg_string_free(char* text) { std::free(text); }

psg_status psg_coupling_gaussian(int n, uint64_t seed, psg_coupling** out) {
  return guarded([&] {
    need(out, "out");
    *out = new psg_coupling{psg::CouplingMatrix::gaussian(n, seed)};
  });
}

psg_status psg_coupling_from_values(int n, const double* values, psg_coupling** out) {
  return guarded([&] {
    need(out, "out");
    need(values, "values");
    psg::require(n >= 1, psg::ErrorCode::invalid_argument, "n must be >= 1");
    std::vector<double> v(values, values + static_cast<std::size_t>(n) * n);
    *out = new psg_coupling{psg::CouplingMatrix::from_values(n, std::move(v))};
  });
}

void psg_coupling_free(psg_coupling* g) { delete g; }

int psg_coupling_size(const psg_coupling* g) { return g ? g->g.size() : 0; }

psg_status psg_coupling_values(const psg_coupling* g, double* out, size_t len) {
  return guarded([&] {
    need(g, "coupling");
    need(out, "out");
    const auto v = g->g.values();
    psg::require(len >= v.size(), psg::ErrorCode::dimension_mismatch, "output buffer smaller than N*N");
    std::copy(v.begin(), v.end(), out);
  });
}

uint64_t psg_child_seed(uint64_t root, uint64_t index) { return psg::child_seed(root, index); }

psg_status psg_config_create(int kappa, const int* colors, int n, psg_config** out) {
  return guarded([&] {
    need(out, "out");
    need(colors, "colors");
    psg::require(n >= 1, psg::ErrorCode::invalid_argument, "n must be >= 1");
    *out = new psg_config{psg::SpinConfig::from_one_based(kappa, std::span<const int>(colors, static_cast<std::size_t>(n)))};
  });
}

void psg_config_free(psg_config* sigma) { delete sigma; }

psg_status psg_hamiltonian_value(const psg_config* sigma, const psg_coupling* g, psg_hamiltonian kind, double* out) {
  return guarded([&] {
    need(sigma, "config");
    need(g, "coupling");
    need(out, "out");
    *out = psg::hamiltonian(kind_of(kind), sigma->sigma, g->g);
  });
}

psg_status psg_delta_energy(const psg_config* sigma, const psg_coupling* g, int site, int new_color, double* out) {
  return guarded([&] {
    need(sigma, "config");
    need(g, "coupling");
    need(out, "out");
    *out = psg::delta_energy(sigma->sigma, g->g, site - 1, new_color - 1);
  });
}

psg_status psg_covariance(const psg_config* sigma, const psg_config* tau, psg_hamiltonian kind, double* out) {
  return guarded([&] {
    need(sigma, "sigma");
    need(tau, "tau");
    need(out, "out");
    *out = kind_of(kind) == psg::HamiltonianKind::raw ? psg::covariance_raw(sigma->sigma, tau->sigma)
                                                      : psg::covariance_centered(sigma->sigma, tau->sigma);
  });
}

psg_status psg_overlap_counts(const psg_config* sigma, const psg_config* tau, int* out, size_t len) {
  return guarded([&] {
    need(sigma, "sigma");
    need(tau, "tau");
    need(out, "out");
    const auto r = psg::overlap(sigma->sigma, tau->sigma);
    psg::require(len >= r.counts().size(), psg::ErrorCode::dimension_mismatch, "output buffer smaller than kappa^2");
    std::copy(r.counts().begin(), r.counts().end(), out);
  });
}

psg_status psg_log_partition(const psg_coupling* g, double beta, int kappa, const char* sector, psg_hamiltonian kind,
                             double* out) {
  return guarded([&] {
    need(g, "coupling");
    need(out, "out");
    *out = psg::log_partition(g->g, beta, kappa, sector_of(sector), kind_of(kind)).log_partition;
  });
}

psg_status psg_second_moment_ratio(int n, double beta, int kappa, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = psg::second_moment_ratio(n, beta, kappa);
  });
}

psg_status psg_uncentered_log_ratio(int n, double beta, int kappa, const char* sector, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = psg::uncentered_log_ratio(n, beta, kappa, sector_of(sector));
  });
}

psg_status psg_overlap_law(int n, int kappa, const int* counts, double* out) {
  return guarded([&] {
    need(counts, "counts");
    need(out, "out");
    psg::require(kappa >= 2 && kappa <= psg::kMaxColors, psg::ErrorCode::invalid_argument, "kappa must lie in [2, 255]");
    const psg::AdmissibleMatrix r(kappa, n,
                                  std::vector<int>(counts, counts + static_cast<std::size_t>(kappa) * kappa));
    *out = psg::overlap_law_exact(n, kappa, r);
  });
}

psg_status psg_shell_count(int n, int kappa, int l, uint64_t* out) {
  return guarded([&] {
    need(out, "out");
    *out = psg::shell_count(n, kappa, l);
  });
}

psg_status psg_kl_to_uniform(int kappa, const double* r, double* out) {
  return guarded([&] {
    need(r, "r");
    need(out, "out");
    psg::require(kappa >= 2 && kappa <= 4096, psg::ErrorCode::invalid_argument, "kappa out of range");
    *out = psg::kl_to_uniform(
        psg::PolytopePoint(kappa, std::vector<double>(r, r + static_cast<std::size_t>(kappa) * kappa)));
  });
}

psg_status psg_beta_kappa(int kappa, double* value, psg_branch* branch) {
  return guarded([&] {
    need(value, "value");
    const auto b = psg::beta_kappa(kappa);
    *value = b.value;
    if (branch) *branch = static_cast<psg_branch>(static_cast<int>(b.branch));
  });
}

psg_status psg_annealed_limit(int kappa, double beta, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = psg::annealed_limit(kappa, beta);
  });
}

psg_status psg_ew90_critical(int kappa, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = psg::ew90_critical(kappa);
  });
}

psg_status psg_zero_temp_bounds(int kappa, double* balanced_upper, double* unconstrained_lower, int* breaks) {
  return guarded([&] {
    const auto z = psg::zero_temp_bounds(kappa);
    if (balanced_upper) *balanced_upper = z.balanced_upper;
    if (unconstrained_lower) *unconstrained_lower = z.unconstrained_lower;
    if (breaks) *breaks = z.breaks ? 1 : 0;
  });
}

int psg_min_breaking_kappa(void) { return psg::min_breaking_kappa(); }

psg_status psg_exponent_gap(int kappa, double beta, double delta, double* minimum, double* argmin) {
  return guarded([&] {
    need(minimum, "minimum");
    const auto r = psg::exponent_gap(kappa, beta, delta);
    *minimum = r.minimum;
    if (argmin) std::copy(r.argmin.begin(), r.argmin.end(), argmin);
  });
}

psg_status psg_experiment_parse(const char* spec_json, psg_experiment** out) {
  return guarded([&] {
    need(spec_json, "spec");
    need(out, "out");
    *out = new psg_experiment{psg::ExperimentSpec::parse(spec_json)};
  });
}

void psg_experiment_free(psg_experiment* spec) { delete spec; }

psg_status psg_experiment_canonical(const psg_experiment* spec, char** out) {
  return guarded([&] {
    need(spec, "spec");
    need(out, "out");
    *out = duplicate(spec->spec.canonical());
  });
}

psg_status psg_experiment_command(const psg_experiment* spec, char** out) {
  return guarded([&] {
    need(spec, "spec");
    need(out, "out");
    *out = duplicate(spec->spec.command());
  });
}

psg_status psg_experiment_format(const psg_experiment* spec, char** out) {
  return guarded([&] {
    need(spec, "spec");
    need(out, "out");
    *out = duplicate(spec->spec.format());
  });
}

psg_status psg_experiment_run(const psg_experiment* spec, int workers, psg_table** out) {
  return guarded([&] {
    need(spec, "spec");
    need(out, "out");
    *out = new psg_table{psg::run_experiment(spec->spec, workers)};
  });
}

psg_status psg_spec_from_output(const char* rendered, char** out) {
  return guarded([&] {
    need(rendered, "rendered");
    need(out, "out");
    *out = duplicate(psg::extract_spec(rendered));
  });
}

const char* const* psg_experiment_commands(void) {
  static const std::vector<const char*> names = [] {
    std::vector<const char*> v;
    for (const auto& c : psg::experiment_commands()) v.push_back(c.c_str());
    v.push_back(nullptr);
    return v;
  }();
  return names.data();
}

void psg_table_free(psg_table* table) { delete table; }

size_t psg_table_rows(const psg_table* table) { return table ? table->table.rows().size() : 0; }

size_t psg_table_columns(const psg_table* table) { return table ? table->table.columns().size() : 0; }

psg_status psg_table_to_csv(const psg_table* table, char** out) {
  return guarded([&] {
    need(table, "table");
    need(out, "out");
    *out = duplicate(table->table.to_csv());
  });
}

psg_status psg_table_to_json(const psg_table* table, char** out) {
  return guarded([&] {
    need(table, "table");
    need(out, "out");
    *out = duplicate(table->table.to_json());
  });
}

}  // extern "C"
