#pragma once

// Configurations, Gaussian disorder, Hamiltonians and overlap matrices.
//
// Conventions used throughout the library:
//  * Colors are 0-based internally (Color) and 1-based at the text/C boundary.
//  * Hamiltonian double sums run over ALL ordered pairs (i, j), including i == j.
//    Many spin-glass codes drop the diagonal; here g_ii contributes to every
//    configuration equally (raw) or with weight 1 - 1/kappa (centered).
//  * Magnetizations and overlaps are kept as integer counts over N so that margin
//    identities hold exactly; floating point starts at the energy/covariance layer.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "psg/error.hpp"

namespace psg {

using Color = std::uint8_t;
inline constexpr int kMaxColors = 255;

enum class HamiltonianKind { raw, centered };

std::string_view to_string(HamiltonianKind kind);
HamiltonianKind parse_hamiltonian_kind(std::string_view text);

class Sector {
 public:
  enum class Kind { all, balanced, fixed };

  static Sector all() { return Sector(Kind::all, {}); }
  static Sector balanced() { return Sector(Kind::balanced, {}); }
  // Per-color occupation counts N*d_a.
  static Sector fixed(std::vector<int> counts) { return Sector(Kind::fixed, std::move(counts)); }
  // "all", "balanced" or "fixed:c1,c2,...".
  static Sector parse(std::string_view text);

  Kind kind() const noexcept { return kind_; }
  const std::vector<int>& fixed_counts() const noexcept { return counts_; }

  // Throws ErrorCode::divisibility naming the violated constraint.
  void validate(int n, int kappa) const;
  // Color counts shared by every config in the sector (empty for `all`).
  std::vector<int> counts(int n, int kappa) const;
  bool contains(std::span<const Color> colors, int kappa) const;
  std::string name() const;

  bool operator==(const Sector&) const = default;

 private:
  Sector(Kind kind, std::vector<int> counts) : kind_(kind), counts_(std::move(counts)) {}
  Kind kind_;
  std::vector<int> counts_;
};

class SpinConfig {
 public:
  SpinConfig(int kappa, std::vector<Color> colors);
  static SpinConfig from_one_based(int kappa, std::span<const int> colors);

  int kappa() const noexcept { return kappa_; }
  int size() const noexcept { return static_cast<int>(colors_.size()); }
  Color operator[](std::size_t i) const { return colors_[i]; }
  std::span<const Color> colors() const noexcept { return colors_; }
  std::vector<int> one_based() const;
  SpinConfig recolored(int site, Color color) const;

  bool operator==(const SpinConfig&) const = default;

 private:
  int kappa_;
  std::vector<Color> colors_;
};

struct MagnetizationVector {
  std::vector<int> counts;
  int n = 0;

  int kappa() const noexcept { return static_cast<int>(counts.size()); }
  double operator[](std::size_t a) const { return static_cast<double>(counts[a]) / n; }
  bool balanced() const;
  // max_a |d_a - 1/kappa|
  double max_deviation() const;
  // max_a |d_a - 1/kappa| >= eps, evaluated on the integers |kappa*c_a - N| to avoid
  // rounding at exact boundary cases such as eps = 1/2, d = (1, 0).
  bool deviates_at_least(double eps) const;
};

// N x N quenched disorder. Gaussian matrices are entry k = i*N + j of counter_normal(seed, k).
class CouplingMatrix {
 public:
  static CouplingMatrix gaussian(int n, std::uint64_t seed);
  static CouplingMatrix from_values(int n, std::vector<double> values);

  int size() const noexcept { return n_; }
  std::uint64_t seed() const noexcept { return seed_; }
  bool seeded() const noexcept { return seeded_; }
  double operator()(int i, int j) const { return g_[static_cast<std::size_t>(i) * n_ + j]; }
  std::span<const double> values() const noexcept { return g_; }
  double total() const;
  // Copy with g_ij and g_ji negated for every j != site; g_{site,site} is kept.
  CouplingMatrix gauge_flipped(int site) const;

 private:
  CouplingMatrix(int n, std::vector<double> g, std::uint64_t seed, bool seeded)
      : n_(n), seed_(seed), seeded_(seeded), g_(std::move(g)) {}
  int n_;
  std::uint64_t seed_;
  bool seeded_;
  std::vector<double> g_;
};

class OverlapMatrix {
 public:
  OverlapMatrix(int kappa, int n, std::vector<int> counts);

  int kappa() const noexcept { return kappa_; }
  int n() const noexcept { return n_; }
  int count(int a, int b) const { return counts_[static_cast<std::size_t>(a) * kappa_ + b]; }
  double operator()(int a, int b) const { return static_cast<double>(count(a, b)) / n_; }
  std::span<const int> counts() const noexcept { return counts_; }
  std::vector<int> row_counts() const;
  std::vector<int> col_counts() const;
  std::vector<double> values() const;

  bool operator==(const OverlapMatrix&) const = default;

 private:
  int kappa_;
  int n_;
  std::vector<int> counts_;
};

// P = I - 11^T / kappa. Only materialized on request.
class Projection {
 public:
  explicit Projection(int kappa);
  int kappa() const noexcept { return kappa_; }
  std::vector<double> matrix() const;
  // P M P for a kappa x kappa row-major M (double centering).
  std::vector<double> sandwich(std::span<const double> m) const;

 private:
  int kappa_;
};

double hamiltonian_raw(const SpinConfig& sigma, const CouplingMatrix& g);
double hamiltonian_centered(const SpinConfig& sigma, const CouplingMatrix& g);
double hamiltonian(HamiltonianKind kind, const SpinConfig& sigma, const CouplingMatrix& g);
// hamiltonian_raw - hamiltonian_centered = sum_ij g_ij / (kappa sqrt(N)).
double centering_shift(const CouplingMatrix& g, int kappa);
// H(sigma') - H(sigma) for a single recoloring; identical for raw and centered.
double delta_energy(const SpinConfig& sigma, const CouplingMatrix& g, int site, int new_color);

MagnetizationVector magnetization(const SpinConfig& sigma);
MagnetizationVector magnetization(std::span<const Color> colors, int kappa);
OverlapMatrix overlap(const SpinConfig& sigma, const SpinConfig& tau);
// N ||R||_F^2
double covariance_raw(const SpinConfig& sigma, const SpinConfig& tau);
// N ||P R P||_F^2
double covariance_centered(const SpinConfig& sigma, const SpinConfig& tau);

// Fast evaluator over raw color spans, used by the enumeration and sampling engines.
// Stores the symmetrized couplings s_ij = g_ij + g_ji (i < j) and the diagonal sum.
class EnergyModel {
 public:
  EnergyModel(const CouplingMatrix& g, int kappa, HamiltonianKind kind);

  int size() const noexcept { return n_; }
  int kappa() const noexcept { return kappa_; }
  HamiltonianKind kind() const noexcept { return kind_; }
  double energy(std::span<const Color> colors) const;
  double delta(std::span<const Color> colors, int site, Color new_color) const;
  // Energy change when the colors of sites i and j are exchanged.
  double swap_delta(std::span<const Color> colors, int i, int j) const;

 private:
  int n_;
  int kappa_;
  HamiltonianKind kind_;
  double scale_;   // 1/sqrt(N)
  double offset_;  // diagonal sum minus centering shift, pre-scaled
  std::vector<double> sym_;  // full N x N symmetrized matrix with zero diagonal
};

// Number of configurations in a sector, as a double (exact below 2^53).
double sector_size(int n, int kappa, const Sector& sector);
double log_sector_size(int n, int kappa, const Sector& sector);

// Visits every configuration of the sector exactly once in lexicographic order.
template <class Fn>
void for_each_config(int n, int kappa, const Sector& sector, Fn&& fn) {
  require(n >= 1, ErrorCode::invalid_argument, "for_each_config: n must be >= 1");
  require(kappa >= 2 && kappa <= kMaxColors, ErrorCode::invalid_argument,
          "for_each_config: kappa must lie in [2, 255]");
  sector.validate(n, kappa);
  std::vector<Color> colors(static_cast<std::size_t>(n), 0);
  if (sector.kind() == Sector::Kind::all) {
    for (;;) {
      fn(std::span<const Color>(colors));
      int pos = n - 1;
      while (pos >= 0 && colors[pos] + 1 == kappa) colors[pos--] = 0;
      if (pos < 0) return;
      ++colors[pos];
    }
  }
  const std::vector<int> counts = sector.counts(n, kappa);
  std::size_t k = 0;
  for (int a = 0; a < kappa; ++a)
    for (int c = 0; c < counts[a]; ++c) colors[k++] = static_cast<Color>(a);
  do {
    fn(std::span<const Color>(colors));
  } while (std::next_permutation(colors.begin(), colors.end()));
}

// Single-consumer stream over a sector, same order as for_each_config.
class ConfigStream {
 public:
  ConfigStream(int n, int kappa, Sector sector);
  std::optional<SpinConfig> next();

 private:
  int n_;
  int kappa_;
  Sector sector_;
  std::vector<Color> colors_;
  bool started_ = false;
  bool done_ = false;
};

std::vector<SpinConfig> enumerate_configs(int n, int kappa, const Sector& sector);

}  // namespace psg
