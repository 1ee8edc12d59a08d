#pragma once

// Brute-force exact engines for small N: partition functions, Gibbs averages,
// ground states, and the second-moment machinery of the balanced model.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "psg/core.hpp"

namespace psg {

struct EnumerationLimits {
  // Maximum number of configurations (or overlap tables) a single enumeration may visit.
  double cap = 2e7;
};

// Throws ErrorCode::cap_exceeded if the sector holds more than limits.cap configurations.
void check_enumeration_cap(int n, int kappa, const Sector& sector, const EnumerationLimits& limits);

struct FreeEnergySample {
  double log_partition = 0.0;  // nats
  int n = 0;
  int kappa = 0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  Sector sector = Sector::all();
  HamiltonianKind kind = HamiltonianKind::raw;

  double free_energy() const { return log_partition / n; }
};

FreeEnergySample log_partition(const CouplingMatrix& g, double beta, int kappa, const Sector& sector,
                               HamiltonianKind kind, const EnumerationLimits& limits = {});

// One disorder ensemble: replica r uses CouplingMatrix::gaussian(n, child_seed(root_seed, r)).
struct DisorderSpec {
  int n = 1;
  int kappa = 2;
  double beta = 0.0;
  Sector sector = Sector::all();
  HamiltonianKind kind = HamiltonianKind::centered;
  std::uint64_t root_seed = 1;
  int replicas = 2;
  int workers = 0;
  EnumerationLimits limits;
};

struct QuenchedEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::vector<FreeEnergySample> samples;
};

QuenchedEstimate quenched_free_energy(const DisorderSpec& spec);

// log E Z over the Gaussian disorder, exactly: log sum_sigma exp(beta^2 Var H(sigma) / 2).
double annealed_log_partition(int n, double beta, int kappa, const Sector& sector, HamiltonianKind kind,
                              const EnumerationLimits& limits = {});

using Observable = std::function<double(const SpinConfig&)>;

// <f> under the Gibbs measure of the sector; beta may be +infinity.
double gibbs_expectation(const CouplingMatrix& g, double beta, int kappa, const Observable& f,
                         const Sector& sector, HamiltonianKind kind = HamiltonianKind::raw,
                         const EnumerationLimits& limits = {});

struct GroundStateResult {
  double max_energy = 0.0;
  std::uint64_t maximizer_count = 0;
  int n = 0;
  int kappa = 0;
  Sector sector = Sector::all();
  std::vector<Color> argmax;  // first maximizer in enumeration order
};

GroundStateResult ground_state(const CouplingMatrix& g, int kappa, const Sector& sector,
                               HamiltonianKind kind = HamiltonianKind::raw,
                               const EnumerationLimits& limits = {});

// kappa x kappa table of overlap counts N r_ab with every margin equal to N / kappa.
class AdmissibleMatrix {
 public:
  AdmissibleMatrix(int kappa, int n, std::vector<int> counts);

  int kappa() const noexcept { return kappa_; }
  int n() const noexcept { return n_; }
  int count(int a, int b) const { return counts_[static_cast<std::size_t>(a) * kappa_ + b]; }
  std::span<const int> counts() const noexcept { return counts_; }
  std::vector<double> values() const;
  // sum_ab (kappa^2 c_ab - N)^2 = kappa^4 N^2 ||r - u||_F^2, exact.
  std::int64_t scaled_gap() const;
  double frobenius_gap() const;

  bool operator==(const AdmissibleMatrix&) const = default;

 private:
  int kappa_;
  int n_;
  std::vector<int> counts_;
};

// Visits every nonnegative integer table with the given row and column sums.
void for_each_table(std::span<const int> rows, std::span<const int> cols,
                    const std::function<void(std::span<const int>)>& fn);

std::vector<AdmissibleMatrix> enumerate_admissible(int n, int kappa);
std::uint64_t count_admissible(int n, int kappa);

// P_tau(R(sigma, tau) = r) for tau uniform on the balanced sector.
double overlap_law_log(int n, int kappa, const AdmissibleMatrix& r);
double overlap_law_exact(int n, int kappa, const AdmissibleMatrix& r);

// E (Z^bal)^2 / (E Z^bal)^2 for the centered Hamiltonian, summed over overlap tables.
double second_moment_log_ratio(int n, double beta, int kappa, const EnumerationLimits& limits = {});
double second_moment_ratio(int n, double beta, int kappa, const EnumerationLimits& limits = {});

struct LdpTerms {
  double exact_log_p = 0.0;
  double asymptotic_log_p = 0.0;
  double gap() const { return exact_log_p - asymptotic_log_p; }
};

// Exact log-probability of an overlap table next to its Stirling expansion
// -N D(r||u) - ((kappa-1)^2/2) log N - (1/2) sum_{r_ab != 0} log r_ab.
LdpTerms ldp_log_probability(int n, int kappa, const AdmissibleMatrix& r);

// Number of admissible tables with (l-1)/N <= ||r - u||_F^2 < l/N, for l in [1, N].
std::uint64_t shell_count(int n, int kappa, int l);
// All shells at once; entry l-1 holds shell l.
std::vector<std::uint64_t> shell_counts(int n, int kappa);

// E Z^2 / (E Z)^2 for the RAW Hamiltonian over a sector, grouped by overlap table.
double uncentered_log_ratio(int n, double beta, int kappa, const Sector& sector,
                            const EnumerationLimits& limits = {});
double uncentered_ratio(int n, double beta, int kappa, const Sector& sector,
                        const EnumerationLimits& limits = {});
// Lower bounds on the log of the ratio: beta^2 (N-1) / kappa^2 (all) and
// beta^2 (N-1) ((N-kappa) / ((N-1) kappa))^2 (balanced).
double uncentered_log_lower_bound(int n, double beta, int kappa, const Sector& sector);

}  // namespace psg
