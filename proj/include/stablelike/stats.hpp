#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace stablelike::stats {

inline double mean(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("mean of empty sample");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double variance(std::span<const double> v) {
  double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

inline double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
  double pos = q * static_cast<double>(sorted.size() - 1);
  std::size_t lo = static_cast<std::size_t>(pos);
  std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  double t = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - t) + sorted[hi] * t;
}

inline double quantile(std::span<const double> v, double q) {
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  return quantile_sorted(s, q);
}

inline double median(std::span<const double> v) { return quantile(v, 0.5); }

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 1.0;
};

inline LinearFit ols(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("ols: need matching samples of size >= 2");
  double mx = mean(x), my = mean(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit f;
  if (sxx == 0.0) throw std::invalid_argument("ols: degenerate abscissae");
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

// Average ranks with tie sharing.
inline std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    double shared = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = shared;
    i = j + 1;
  }
  return r;
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
  double mx = mean(x), my = mean(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

inline double spearman(std::span<const double> x, std::span<const double> y) {
  auto rx = ranks(x);
  auto ry = ranks(y);
  return pearson(rx, ry);
}

// Kolmogorov distance between a sample and a reference CDF.
inline double ks_distance(std::span<const double> sample,
                          const std::function<double(double)>& cdf) {
  std::vector<double> s(sample.begin(), sample.end());
  std::sort(s.begin(), s.end());
  double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    double f = cdf(s[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(f - static_cast<double>(i + 1) / n));
  }
  return d;
}

// Gaussian KDE in one dimension, binned evaluation. Bandwidth is Silverman's
// rule computed on the central 98% of the sample so heavy tails do not
// inflate it.
struct Kde1D {
  double bandwidth = 0.0;
  double grid_lo = 0.0, grid_hi = 0.0;
  std::vector<double> grid;
  std::vector<double> density;

  double sup() const {
    double m = 0.0;
    for (double v : density) m = std::max(m, v);
    return m;
  }

  // Trapezoid mass over the evaluated grid; close to 1 when the grid covers
  // the bulk.
  double mass() const {
    if (grid.size() < 2) return 0.0;
    double h = grid[1] - grid[0];
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
      s += 0.5 * (density[i] + density[i + 1]) * h;
    return s;
  }
};

inline Kde1D kde1d(std::span<const double> sample, std::size_t n_grid = 2048) {
  if (sample.size() < 16) throw std::invalid_argument("kde1d: sample too small");
  std::vector<double> s(sample.begin(), sample.end());
  std::sort(s.begin(), s.end());
  std::size_t cut = static_cast<std::size_t>(0.01 * static_cast<double>(s.size()));
  std::span<const double> core(s.data() + cut, s.size() - 2 * cut);
  double sd = std::sqrt(variance(core));
  double iqr = quantile_sorted(core, 0.75) - quantile_sorted(core, 0.25);
  double sigma = std::min(sd, iqr / 1.349);
  if (sigma <= 0.0) sigma = sd > 0.0 ? sd : 1e-12;
  double n = static_cast<double>(sample.size());
  Kde1D k;
  k.bandwidth = 0.9 * sigma * std::pow(n, -0.2);

  k.grid_lo = core.front() - 6.0 * k.bandwidth;
  k.grid_hi = core.back() + 6.0 * k.bandwidth;
  double step = (k.grid_hi - k.grid_lo) / static_cast<double>(n_grid - 1);
  k.grid.resize(n_grid);
  for (std::size_t i = 0; i < n_grid; ++i) k.grid[i] = k.grid_lo + step * static_cast<double>(i);

  // histogram pass, then smooth with a truncated Gaussian
  std::vector<double> hist(n_grid, 0.0);
  for (double x : s) {
    if (x < k.grid_lo || x > k.grid_hi) continue;  // outlier kernels are flat ~0 on the grid
    auto b = static_cast<std::size_t>((x - k.grid_lo) / step + 0.5);
    if (b >= n_grid) b = n_grid - 1;
    hist[b] += 1.0;
  }
  int half = static_cast<int>(6.0 * k.bandwidth / step) + 1;
  const double norm = 1.0 / (n * k.bandwidth * std::sqrt(2.0 * 3.14159265358979323846));
  k.density.assign(n_grid, 0.0);
  for (std::size_t b = 0; b < n_grid; ++b) {
    if (hist[b] == 0.0) continue;
    int lo = std::max<int>(0, static_cast<int>(b) - half);
    int hi = std::min<int>(static_cast<int>(n_grid) - 1, static_cast<int>(b) + half);
    for (int g = lo; g <= hi; ++g) {
      double z = (k.grid[g] - k.grid[b]) / k.bandwidth;
      k.density[g] += hist[b] * norm * std::exp(-0.5 * z * z);
    }
  }
  return k;
}

}  // namespace stablelike::stats
