#pragma once

// Independent brute-force reference implementations. Nothing here calls into the
// library's numerical code; configurations are plain int vectors.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace oracle {

using Config = std::vector<int>;

inline std::vector<Config> all_configs(int n, int kappa) {
  std::vector<Config> out;
  Config c(n, 0);
  for (;;) {
    out.push_back(c);
    int p = n - 1;
    while (p >= 0 && c[p] == kappa - 1) c[p--] = 0;
    if (p < 0) return out;
    ++c[p];
  }
}

inline std::vector<Config> balanced_configs(int n, int kappa) {
  std::vector<Config> out;
  for (auto& c : all_configs(n, kappa)) {
    std::vector<int> counts(kappa, 0);
    for (int x : c) ++counts[x];
    if (std::all_of(counts.begin(), counts.end(), [&](int v) { return v * kappa == n; })) out.push_back(c);
  }
  return out;
}

// Direct double sum over all ordered pairs, diagonal included.
inline double energy(const Config& s, const std::vector<double>& g, int kappa, bool centered) {
  const int n = static_cast<int>(s.size());
  double h = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double ind = s[i] == s[j] ? 1.0 : 0.0;
      if (centered) ind -= 1.0 / kappa;
      h += g[i * n + j] * ind;
    }
  return h / std::sqrt(static_cast<double>(n));
}

// E H(s) H(t) over standard Gaussian g.
inline double covariance(const Config& s, const Config& t, int kappa, bool centered) {
  const int n = static_cast<int>(s.size());
  double c = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double a = s[i] == s[j] ? 1.0 : 0.0;
      double b = t[i] == t[j] ? 1.0 : 0.0;
      if (centered) {
        a -= 1.0 / kappa;
        b -= 1.0 / kappa;
      }
      c += a * b;
    }
  return c / n;
}

inline double log_sum_exp(const std::vector<double>& xs) {
  const double m = *std::max_element(xs.begin(), xs.end());
  double s = 0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

inline double log_partition(const std::vector<Config>& configs, const std::vector<double>& g, int kappa,
                            double beta, bool centered) {
  std::vector<double> xs;
  xs.reserve(configs.size());
  for (const auto& s : configs) xs.push_back(beta * energy(s, g, kappa, centered));
  return log_sum_exp(xs);
}

// log E Z^2 - 2 log E Z by the double sum over configuration pairs.
inline double second_moment_log_ratio(const std::vector<Config>& configs, int kappa, double beta, bool centered) {
  const double b2 = beta * beta;
  std::vector<double> var(configs.size());
  for (std::size_t i = 0; i < configs.size(); ++i) var[i] = covariance(configs[i], configs[i], kappa, centered);
  std::vector<double> first(configs.size());
  for (std::size_t i = 0; i < configs.size(); ++i) first[i] = 0.5 * b2 * var[i];
  std::vector<double> pairs;
  pairs.reserve(configs.size() * configs.size());
  for (std::size_t i = 0; i < configs.size(); ++i)
    for (std::size_t j = 0; j < configs.size(); ++j)
      pairs.push_back(0.5 * b2 * (var[i] + var[j]) + b2 * covariance(configs[i], configs[j], kappa, centered));
  return log_sum_exp(pairs) - 2 * log_sum_exp(first);
}

// Tables with nonnegative entries and all margins n / kappa, by filling every cell.
inline std::uint64_t count_admissible(int n, int kappa) {
  const int m = n / kappa;
  std::vector<int> row(kappa, 0), col(kappa, 0);
  std::uint64_t count = 0;
  std::function<void(int)> fill = [&](int cell) {
    if (cell == kappa * kappa) {
      for (int a = 0; a < kappa; ++a)
        if (row[a] != m || col[a] != m) return;
      ++count;
      return;
    }
    const int a = cell / kappa, b = cell % kappa;
    for (int x = 0; x <= m; ++x) {
      if (row[a] + x > m || col[b] + x > m) break;
      row[a] += x;
      col[b] += x;
      fill(cell + 1);
      row[a] -= x;
      col[b] -= x;
    }
  };
  fill(0);
  return count;
}

// D(r||u) - beta^2 ||r - u||^2 minimized over the kappa = 3 polytope points with entries
// in (1/M) Z and gap >= delta. M must be a multiple of 3.
inline double exponent_gap_grid(double beta, double delta, int M) {
  const int t = M / 3;
  std::vector<double> xlogx(t + 1);
  for (int k = 0; k <= t; ++k) {
    const double x = static_cast<double>(k) / M;
    xlogx[k] = k == 0 ? 0.0 : x * std::log(9.0 * x);
  }
  std::vector<double> sq(t + 1);
  for (int k = 0; k <= t; ++k) {
    const double x = static_cast<double>(k) / M - 1.0 / 9.0;
    sq[k] = x * x;
  }
  const double b2 = beta * beta;
  double best = std::numeric_limits<double>::infinity();
  for (int a = 0; a <= t; ++a)
    for (int b = 0; a + b <= t; ++b) {
      const int r13 = t - a - b;
      for (int c = 0; a + c <= t; ++c) {
        const int r31 = t - a - c;
        for (int d = 0; c + d <= t && b + d <= t; ++d) {
          const int r23 = t - c - d;
          const int r32 = t - b - d;
          const int r33 = t - r31 - r32;
          if (r33 < 0 || r13 + r23 + r33 != t) continue;
          const int cells[9] = {a, b, r13, c, d, r23, r31, r32, r33};
          double kl = 0, gap = 0;
          for (int k : cells) {
            kl += xlogx[k];
            gap += sq[k];
          }
          if (gap < delta - 1e-12) continue;
          best = std::min(best, kl - b2 * gap);
        }
      }
    }
  return best;
}

// sum_b p_b log(p_b / q_b)
inline double kl(const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0) s += p[i] * std::log(p[i] / q[i]);
  return s;
}

// Exact Gibbs marginals P(sigma_i = a), row-major n x kappa.
inline std::vector<double> gibbs_marginals(const std::vector<Config>& configs, const std::vector<double>& g,
                                           int kappa, double beta, bool centered) {
  const int n = static_cast<int>(configs.front().size());
  std::vector<double> e(configs.size());
  for (std::size_t k = 0; k < configs.size(); ++k) e[k] = beta * energy(configs[k], g, kappa, centered);
  const double m = *std::max_element(e.begin(), e.end());
  std::vector<double> out(static_cast<std::size_t>(n) * kappa, 0.0);
  double z = 0;
  for (std::size_t k = 0; k < configs.size(); ++k) {
    const double w = std::exp(e[k] - m);
    z += w;
    for (int i = 0; i < n; ++i) out[i * kappa + configs[k][i]] += w;
  }
  for (double& x : out) x /= z;
  return out;
}

}  // namespace oracle
