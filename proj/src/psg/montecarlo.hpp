#pragma once

// Markov chain samplers: single-site Metropolis for the unconstrained sector, pair-swap
// (Kawasaki) moves for sectors with fixed color counts, and parallel tempering.
//
// Chain RNG streams: replica r of a run keyed by root seed s uses the coupling seed
// child_seed(s, r) and the chain seed child_seed(s ^ kChainSalt, r).

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "psg/core.hpp"
#include "psg/exact.hpp"
#include "psg/rng.hpp"

namespace psg {

inline constexpr std::uint64_t kChainSalt = 0x5851F42D4C957F2DULL;

struct ChainState {
  std::vector<Color> colors;
  int kappa = 2;
  double energy = 0.0;
  double beta = 0.0;
  Sector sector = Sector::all();
  Rng rng;
  std::uint64_t sweeps = 0;
  std::uint64_t proposed = 0;
  std::uint64_t accepted = 0;
};

// Uniform random start in the sector.
ChainState make_chain(const EnergyModel& model, double beta, const Sector& sector, std::uint64_t seed);

// One sweep = N single-site proposals (uniform site, uniform color among all kappa).
void metropolis_sweep(ChainState& state, const EnergyModel& model);
// One sweep = N proposals exchanging the colors of a uniform ordered pair of sites with
// different colors. Requires a balanced or fixed sector.
void swap_sweep(ChainState& state, const EnergyModel& model);
// metropolis_sweep for the `all` sector, swap_sweep otherwise.
void sweep(ChainState& state, const EnergyModel& model);
// Recomputes the energy; throws ErrorCode::not_converged if the cached value drifted by
// more than 1e-6 relative, and otherwise replaces the cache with the recomputed value.
void audit_energy(ChainState& state, const EnergyModel& model);

// Exact single-proposal transition matrix over the sector, in for_each_config order.
// Row-major, size |sector|^2. Intended for N <= 4.
std::vector<double> metropolis_kernel(const EnergyModel& model, double beta);
std::vector<double> swap_kernel(const EnergyModel& model, double beta, const Sector& sector);

// min(1, exp((beta_i - beta_j)(H_j - H_i)))
double replica_swap_acceptance(double beta_i, double energy_i, double beta_j, double energy_j);

struct TemperingLadder {
  std::vector<double> betas;
  std::vector<ChainState> rungs;
  std::vector<std::uint64_t> swap_proposed;  // per adjacent pair
  std::vector<std::uint64_t> swap_accepted;
  Rng rng;
};

TemperingLadder make_ladder(const EnergyModel& model, std::vector<double> betas, const Sector& sector,
                            std::uint64_t seed);
// One sweep per rung, then a swap proposal for every adjacent pair (0,1), (1,2), ...
void tempering_step(TemperingLadder& ladder, const EnergyModel& model, int workers = 1);

struct McOptions {
  int burn_in = 1000;
  int samples = 2000;  // recorded samples per chain
  int thinning = 10;
  int audit_every = 100;
};

// observe(colors, out) fills `out` with the observables of one configuration.
using Observe = std::function<void(std::span<const Color>, std::span<double>)>;

struct ChainEstimate {
  std::vector<double> mean;
  std::vector<double> std_error;  // 20-batch means
  std::vector<double> geweke;     // |first half - second half| / combined SE
  bool flagged = false;           // some geweke ratio > 3
  std::uint64_t sweeps = 0;
};

ChainEstimate sample_chain(ChainState& state, const EnergyModel& model, const McOptions& options,
                           std::size_t observables, const Observe& observe);
// Samples every rung of a ladder; entry k describes rung k.
std::vector<ChainEstimate> sample_ladder(TemperingLadder& ladder, const EnergyModel& model,
                                         const McOptions& options, std::size_t observables,
                                         const Observe& observe, int workers = 1);

struct SamplingSpec {
  int n = 4;
  int kappa = 2;
  double beta = 0.0;  // +infinity routes to exact enumeration
  Sector sector = Sector::all();
  HamiltonianKind kind = HamiltonianKind::raw;
  std::uint64_t root_seed = 1;
  int replicas = 8;
  int workers = 0;
  McOptions mc;
  EnumerationLimits limits;
};

struct TailEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  double bound = 0.0;  // 2 exp(-eps^2 N) for kappa = 2, +infinity otherwise
  bool exact = false;  // true for beta = +infinity and for sectors where the answer is forced
  bool flagged = false;
};

// Disorder-and-Gibbs average of 1{max_a |d_a - 1/kappa| >= eps}.
TailEstimate estimate_tail(const SamplingSpec& spec, double epsilon);

struct TiResult {
  double estimate = 0.0;          // N^-1 log Z(beta_max)
  double std_error = 0.0;
  double quadrature_error = 0.0;  // |T_h - T_2h| / 3
  bool flagged = false;
  std::vector<double> betas;
  std::vector<double> mean_energy;  // <H>_beta on the grid
};

// Thermodynamic integration from N^-1 log|sector| over n_grid trapezoid intervals.
TiResult free_energy_ti(const CouplingMatrix& g, int kappa, double beta_max, int n_grid, const Sector& sector,
                        HamiltonianKind kind, std::uint64_t seed, const McOptions& options, int workers = 1);

// Versioned JSON checkpoint of one chain (and its rung index within a ladder).
inline constexpr int kCheckpointVersion = 1;
std::string save_checkpoint(const ChainState& state, std::uint64_t seed, int rung = 0);
struct Checkpoint {
  ChainState state;
  std::uint64_t seed = 0;
  int rung = 0;
};
Checkpoint load_checkpoint(const std::string& text);

}  // namespace psg
