#include "psg/core.hpp"

#include <cmath>
#include <charconv>
#include <numeric>
#include <sstream>

#include "psg/rng.hpp"

namespace psg {

namespace {

void check_kappa(int kappa, const char* where) {
  require(kappa >= 2 && kappa <= kMaxColors, ErrorCode::invalid_argument,
          std::string(where) + ": kappa must lie in [2, 255], got " + std::to_string(kappa));
}

void check_pair(const SpinConfig& sigma, const SpinConfig& tau, const char* where) {
  require(sigma.size() == tau.size() && sigma.kappa() == tau.kappa(), ErrorCode::dimension_mismatch,
          std::string(where) + ": configurations differ in N or kappa");
}

void check_coupling(const SpinConfig& sigma, const CouplingMatrix& g, const char* where) {
  require(sigma.size() == g.size(), ErrorCode::dimension_mismatch,
          std::string(where) + ": config has N=" + std::to_string(sigma.size()) +
              " but coupling matrix is " + std::to_string(g.size()) + "x" + std::to_string(g.size()));
}

std::vector<int> count_pairs(const SpinConfig& sigma, const SpinConfig& tau) {
  const int kappa = sigma.kappa();
  std::vector<int> counts(static_cast<std::size_t>(kappa) * kappa, 0);
  for (int i = 0; i < sigma.size(); ++i) ++counts[static_cast<std::size_t>(sigma[i]) * kappa + tau[i]];
  return counts;
}

}  // namespace

std::string_view to_string(HamiltonianKind kind) {
  return kind == HamiltonianKind::raw ? "raw" : "centered";
}

HamiltonianKind parse_hamiltonian_kind(std::string_view text) {
  if (text == "raw") return HamiltonianKind::raw;
  if (text == "centered") return HamiltonianKind::centered;
  fail(ErrorCode::invalid_argument, "unknown hamiltonian kind '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// Sector
// ---------------------------------------------------------------------------

Sector Sector::parse(std::string_view text) {
  if (text == "all") return all();
  if (text == "balanced") return balanced();
  constexpr std::string_view prefix = "fixed:";
  if (text.substr(0, prefix.size()) == prefix) {
    std::vector<int> counts;
    std::string_view rest = text.substr(prefix.size());
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const std::string_view item = rest.substr(0, comma);
      int value = 0;
      const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
      require(ec == std::errc() && ptr == item.data() + item.size(), ErrorCode::invalid_argument,
              "sector: bad count '" + std::string(item) + "'");
      counts.push_back(value);
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    return fixed(std::move(counts));
  }
  fail(ErrorCode::invalid_argument, "unknown sector '" + std::string(text) + "'");
}

void Sector::validate(int n, int kappa) const {
  switch (kind_) {
    case Kind::all:
      return;
    case Kind::balanced:
      require(n % kappa == 0, ErrorCode::divisibility,
              "balanced sector requires kappa | N (kappa=" + std::to_string(kappa) +
                  ", N=" + std::to_string(n) + ")");
      return;
    case Kind::fixed: {
      require(static_cast<int>(counts_.size()) == kappa, ErrorCode::divisibility,
              "fixed-magnetization sector needs one count per color");
      long total = 0;
      for (int c : counts_) {
        require(c >= 0, ErrorCode::divisibility, "fixed-magnetization sector: negative count");
        total += c;
      }
      require(total == n, ErrorCode::divisibility,
              "fixed-magnetization sector requires N*d integral with sum N (counts sum to " +
                  std::to_string(total) + ", N=" + std::to_string(n) + ")");
      return;
    }
  }
}

std::vector<int> Sector::counts(int n, int kappa) const {
  validate(n, kappa);
  switch (kind_) {
    case Kind::all:
      return {};
    case Kind::balanced:
      return std::vector<int>(static_cast<std::size_t>(kappa), n / kappa);
    case Kind::fixed:
      return counts_;
  }
  return {};
}

bool Sector::contains(std::span<const Color> colors, int kappa) const {
  if (kind_ == Kind::all) return true;
  const auto m = magnetization(colors, kappa);
  return m.counts == counts(static_cast<int>(colors.size()), kappa);
}

std::string Sector::name() const {
  switch (kind_) {
    case Kind::all:
      return "all";
    case Kind::balanced:
      return "balanced";
    case Kind::fixed: {
      std::string out = "fixed:";
      for (std::size_t a = 0; a < counts_.size(); ++a) {
        if (a) out += ',';
        out += std::to_string(counts_[a]);
      }
      return out;
    }
  }
  return {};
}

// ---------------------------------------------------------------------------
// SpinConfig and friends
// ---------------------------------------------------------------------------

SpinConfig::SpinConfig(int kappa, std::vector<Color> colors) : kappa_(kappa), colors_(std::move(colors)) {
  check_kappa(kappa, "SpinConfig");
  require(!colors_.empty(), ErrorCode::invalid_argument, "SpinConfig: N must be >= 1");
  for (Color c : colors_)
    require(c < kappa, ErrorCode::out_of_range, "SpinConfig: color out of range");
}

SpinConfig SpinConfig::from_one_based(int kappa, std::span<const int> colors) {
  check_kappa(kappa, "SpinConfig");
  std::vector<Color> internal;
  internal.reserve(colors.size());
  for (int c : colors) {
    require(c >= 1 && c <= kappa, ErrorCode::out_of_range,
            "SpinConfig: color " + std::to_string(c) + " outside [1, " + std::to_string(kappa) + "]");
    internal.push_back(static_cast<Color>(c - 1));
  }
  return SpinConfig(kappa, std::move(internal));
}

std::vector<int> SpinConfig::one_based() const {
  std::vector<int> out(colors_.size());
  std::transform(colors_.begin(), colors_.end(), out.begin(), [](Color c) { return int(c) + 1; });
  return out;
}

SpinConfig SpinConfig::recolored(int site, Color color) const {
  require(site >= 0 && site < size(), ErrorCode::out_of_range, "recolored: site out of range");
  require(color < kappa_, ErrorCode::out_of_range, "recolored: color out of range");
  auto copy = colors_;
  copy[site] = color;
  return SpinConfig(kappa_, std::move(copy));
}

bool MagnetizationVector::balanced() const {
  const int k = kappa();
  return std::all_of(counts.begin(), counts.end(), [&](int c) { return c * k == n; });
}

double MagnetizationVector::max_deviation() const {
  const int k = kappa();
  int worst = 0;
  for (int c : counts) worst = std::max(worst, std::abs(k * c - n));
  return static_cast<double>(worst) / (static_cast<double>(k) * n);
}

bool MagnetizationVector::deviates_at_least(double eps) const {
  const int k = kappa();
  int worst = 0;
  for (int c : counts) worst = std::max(worst, std::abs(k * c - n));
  // worst / (k n) >= eps, with a relative slack for eps given as a decimal.
  return static_cast<double>(worst) >= eps * k * n * (1.0 - 1e-12);
}

CouplingMatrix CouplingMatrix::gaussian(int n, std::uint64_t seed) {
  require(n >= 1, ErrorCode::invalid_argument, "CouplingMatrix: N must be >= 1");
  std::vector<double> g(static_cast<std::size_t>(n) * n);
  for (std::size_t k = 0; k < g.size(); ++k) g[k] = counter_normal(seed, k);
  return CouplingMatrix(n, std::move(g), seed, true);
}

CouplingMatrix CouplingMatrix::from_values(int n, std::vector<double> values) {
  require(n >= 1, ErrorCode::invalid_argument, "CouplingMatrix: N must be >= 1");
  require(values.size() == static_cast<std::size_t>(n) * n, ErrorCode::dimension_mismatch,
          "CouplingMatrix: expected N*N values");
  return CouplingMatrix(n, std::move(values), 0, false);
}

double CouplingMatrix::total() const { return std::accumulate(g_.begin(), g_.end(), 0.0); }

CouplingMatrix CouplingMatrix::gauge_flipped(int site) const {
  require(site >= 0 && site < n_, ErrorCode::out_of_range, "gauge_flipped: site out of range");
  auto g = g_;
  for (int j = 0; j < n_; ++j) {
    if (j == site) continue;
    g[static_cast<std::size_t>(site) * n_ + j] = -g[static_cast<std::size_t>(site) * n_ + j];
    g[static_cast<std::size_t>(j) * n_ + site] = -g[static_cast<std::size_t>(j) * n_ + site];
  }
  return CouplingMatrix(n_, std::move(g), seed_, seeded_);
}

OverlapMatrix::OverlapMatrix(int kappa, int n, std::vector<int> counts)
    : kappa_(kappa), n_(n), counts_(std::move(counts)) {
  check_kappa(kappa, "OverlapMatrix");
  require(counts_.size() == static_cast<std::size_t>(kappa) * kappa, ErrorCode::dimension_mismatch,
          "OverlapMatrix: expected kappa*kappa counts");
  long total = 0;
  for (int c : counts_) {
    require(c >= 0, ErrorCode::invalid_argument, "OverlapMatrix: negative count");
    total += c;
  }
  require(total == n, ErrorCode::invalid_argument, "OverlapMatrix: counts must sum to N");
}

std::vector<int> OverlapMatrix::row_counts() const {
  std::vector<int> rows(static_cast<std::size_t>(kappa_), 0);
  for (int a = 0; a < kappa_; ++a)
    for (int b = 0; b < kappa_; ++b) rows[a] += count(a, b);
  return rows;
}

std::vector<int> OverlapMatrix::col_counts() const {
  std::vector<int> cols(static_cast<std::size_t>(kappa_), 0);
  for (int a = 0; a < kappa_; ++a)
    for (int b = 0; b < kappa_; ++b) cols[b] += count(a, b);
  return cols;
}

std::vector<double> OverlapMatrix::values() const {
  std::vector<double> out(counts_.size());
  for (std::size_t k = 0; k < counts_.size(); ++k) out[k] = static_cast<double>(counts_[k]) / n_;
  return out;
}

Projection::Projection(int kappa) : kappa_(kappa) { check_kappa(kappa, "Projection"); }

std::vector<double> Projection::matrix() const {
  std::vector<double> p(static_cast<std::size_t>(kappa_) * kappa_, -1.0 / kappa_);
  for (int a = 0; a < kappa_; ++a) p[static_cast<std::size_t>(a) * kappa_ + a] += 1.0;
  return p;
}

std::vector<double> Projection::sandwich(std::span<const double> m) const {
  const int k = kappa_;
  require(m.size() == static_cast<std::size_t>(k) * k, ErrorCode::dimension_mismatch,
          "Projection::sandwich: expected kappa*kappa entries");
  std::vector<double> row_mean(k, 0.0), col_mean(k, 0.0);
  double grand = 0.0;
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) {
      const double v = m[static_cast<std::size_t>(a) * k + b];
      row_mean[a] += v;
      col_mean[b] += v;
      grand += v;
    }
  for (int a = 0; a < k; ++a) {
    row_mean[a] /= k;
    col_mean[a] /= k;
  }
  grand /= static_cast<double>(k) * k;
  std::vector<double> out(m.size());
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b)
      out[static_cast<std::size_t>(a) * k + b] =
          m[static_cast<std::size_t>(a) * k + b] - row_mean[a] - col_mean[b] + grand;
  return out;
}

// ---------------------------------------------------------------------------
// Hamiltonians and covariances
// ---------------------------------------------------------------------------

double hamiltonian_raw(const SpinConfig& sigma, const CouplingMatrix& g) {
  check_coupling(sigma, g, "hamiltonian_raw");
  const int n = g.size();
  double sum = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (sigma[i] == sigma[j]) sum += g(i, j);
  return sum / std::sqrt(static_cast<double>(n));
}

double centering_shift(const CouplingMatrix& g, int kappa) {
  return g.total() / (kappa * std::sqrt(static_cast<double>(g.size())));
}

double hamiltonian_centered(const SpinConfig& sigma, const CouplingMatrix& g) {
  check_coupling(sigma, g, "hamiltonian_centered");
  const int n = g.size();
  const double inv_k = 1.0 / sigma.kappa();
  double sum = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) sum += g(i, j) * ((sigma[i] == sigma[j] ? 1.0 : 0.0) - inv_k);
  return sum / std::sqrt(static_cast<double>(n));
}

double hamiltonian(HamiltonianKind kind, const SpinConfig& sigma, const CouplingMatrix& g) {
  return kind == HamiltonianKind::raw ? hamiltonian_raw(sigma, g) : hamiltonian_centered(sigma, g);
}

double delta_energy(const SpinConfig& sigma, const CouplingMatrix& g, int site, int new_color) {
  check_coupling(sigma, g, "delta_energy");
  const int n = g.size();
  require(site >= 0 && site < n, ErrorCode::out_of_range,
          "delta_energy: site " + std::to_string(site) + " outside [0, N)");
  require(new_color >= 0 && new_color < sigma.kappa(), ErrorCode::out_of_range,
          "delta_energy: color " + std::to_string(new_color) + " outside [0, kappa)");
  const int old_color = sigma[site];
  if (old_color == new_color) return 0.0;
  double sum = 0.0;
  for (int j = 0; j < n; ++j) {
    if (j == site) continue;
    const double s = g(site, j) + g(j, site);
    if (sigma[j] == new_color) sum += s;
    else if (sigma[j] == old_color) sum -= s;
  }
  return sum / std::sqrt(static_cast<double>(n));
}

MagnetizationVector magnetization(std::span<const Color> colors, int kappa) {
  MagnetizationVector m{std::vector<int>(static_cast<std::size_t>(kappa), 0), static_cast<int>(colors.size())};
  for (Color c : colors) ++m.counts[c];
  return m;
}

MagnetizationVector magnetization(const SpinConfig& sigma) { return magnetization(sigma.colors(), sigma.kappa()); }

OverlapMatrix overlap(const SpinConfig& sigma, const SpinConfig& tau) {
  check_pair(sigma, tau, "overlap");
  return OverlapMatrix(sigma.kappa(), sigma.size(), count_pairs(sigma, tau));
}

double covariance_raw(const SpinConfig& sigma, const SpinConfig& tau) {
  check_pair(sigma, tau, "covariance_raw");
  long sq = 0;
  for (int c : count_pairs(sigma, tau)) sq += static_cast<long>(c) * c;
  return static_cast<double>(sq) / sigma.size();
}

double covariance_centered(const SpinConfig& sigma, const SpinConfig& tau) {
  const OverlapMatrix r = overlap(sigma, tau);
  const auto centered = Projection(sigma.kappa()).sandwich(r.values());
  double sq = 0.0;
  for (double v : centered) sq += v * v;
  return sigma.size() * sq;
}

// ---------------------------------------------------------------------------
// EnergyModel
// ---------------------------------------------------------------------------

EnergyModel::EnergyModel(const CouplingMatrix& g, int kappa, HamiltonianKind kind)
    : n_(g.size()), kappa_(kappa), kind_(kind), scale_(1.0 / std::sqrt(static_cast<double>(g.size()))) {
  check_kappa(kappa, "EnergyModel");
  sym_.assign(static_cast<std::size_t>(n_) * n_, 0.0);
  double diag = 0.0;
  for (int i = 0; i < n_; ++i) {
    diag += g(i, i);
    for (int j = 0; j < n_; ++j)
      if (i != j) sym_[static_cast<std::size_t>(i) * n_ + j] = g(i, j) + g(j, i);
  }
  offset_ = diag * scale_;
  if (kind == HamiltonianKind::centered) offset_ -= centering_shift(g, kappa);
}

double EnergyModel::energy(std::span<const Color> colors) const {
  double sum = 0.0;
  for (int i = 0; i < n_; ++i) {
    const double* row = &sym_[static_cast<std::size_t>(i) * n_];
    const Color ci = colors[i];
    for (int j = i + 1; j < n_; ++j)
      if (colors[j] == ci) sum += row[j];
  }
  return sum * scale_ + offset_;
}

double EnergyModel::delta(std::span<const Color> colors, int site, Color new_color) const {
  const Color old_color = colors[site];
  if (old_color == new_color) return 0.0;
  const double* row = &sym_[static_cast<std::size_t>(site) * n_];
  double sum = 0.0;
  for (int j = 0; j < n_; ++j) {
    const Color c = colors[j];
    if (c == new_color) sum += row[j];
    else if (c == old_color) sum -= row[j];
  }
  // row[site] is zero, so the site itself never contributes.
  return sum * scale_;
}

double EnergyModel::swap_delta(std::span<const Color> colors, int i, int j) const {
  const Color a = colors[i];
  const Color b = colors[j];
  if (a == b) return 0.0;
  const double* row_i = &sym_[static_cast<std::size_t>(i) * n_];
  const double* row_j = &sym_[static_cast<std::size_t>(j) * n_];
  double sum = 0.0;
  for (int k = 0; k < n_; ++k) {
    if (k == i || k == j) continue;
    const Color c = colors[k];
    if (c == b) sum += row_i[k] - row_j[k];
    else if (c == a) sum += row_j[k] - row_i[k];
  }
  // The (i, j) pair itself stays unequal after the exchange.
  return sum * scale_;
}

// ---------------------------------------------------------------------------
// Enumeration
// ---------------------------------------------------------------------------

double log_sector_size(int n, int kappa, const Sector& sector) {
  sector.validate(n, kappa);
  if (sector.kind() == Sector::Kind::all) return n * std::log(static_cast<double>(kappa));
  double out = std::lgamma(n + 1.0);
  for (int c : sector.counts(n, kappa)) out -= std::lgamma(c + 1.0);
  return out;
}

double sector_size(int n, int kappa, const Sector& sector) {
  sector.validate(n, kappa);
  if (sector.kind() == Sector::Kind::all) return std::pow(static_cast<double>(kappa), n);
  // Multinomial by incremental binomials; exact while the result fits in 53 bits.
  double out = 1.0;
  int placed = 0;
  for (int c : sector.counts(n, kappa)) {
    for (int t = 1; t <= c; ++t) out = out * (placed + t) / t;
    placed += c;
  }
  return std::round(out);
}

ConfigStream::ConfigStream(int n, int kappa, Sector sector) : n_(n), kappa_(kappa), sector_(std::move(sector)) {
  require(n >= 1, ErrorCode::invalid_argument, "ConfigStream: n must be >= 1");
  check_kappa(kappa, "ConfigStream");
  sector_.validate(n, kappa);
  colors_.assign(static_cast<std::size_t>(n), 0);
  if (sector_.kind() != Sector::Kind::all) {
    const auto counts = sector_.counts(n, kappa);
    std::size_t k = 0;
    for (int a = 0; a < kappa; ++a)
      for (int c = 0; c < counts[a]; ++c) colors_[k++] = static_cast<Color>(a);
  }
}

std::optional<SpinConfig> ConfigStream::next() {
  if (done_) return std::nullopt;
  if (!started_) {
    started_ = true;
    return SpinConfig(kappa_, colors_);
  }
  if (sector_.kind() == Sector::Kind::all) {
    int pos = n_ - 1;
    while (pos >= 0 && colors_[pos] + 1 == kappa_) colors_[pos--] = 0;
    if (pos < 0) {
      done_ = true;
      return std::nullopt;
    }
    ++colors_[pos];
  } else if (!std::next_permutation(colors_.begin(), colors_.end())) {
    done_ = true;
    return std::nullopt;
  }
  return SpinConfig(kappa_, colors_);
}

std::vector<SpinConfig> enumerate_configs(int n, int kappa, const Sector& sector) {
  std::vector<SpinConfig> out;
  for_each_config(n, kappa, sector, [&](std::span<const Color> c) {
    out.emplace_back(kappa, std::vector<Color>(c.begin(), c.end()));
  });
  return out;
}

}  // namespace psg
