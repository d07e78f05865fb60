#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "stablelike/core.hpp"
#include "stablelike/stats.hpp"

namespace stablelike::fractal {

struct DimensionEstimate {
  std::vector<double> scales;   // decreasing box sides
  std::vector<double> counts;   // N_delta per scale
  double slope = 0.0;
  double fit_r2 = 1.0;
  double window_lo = 0.0;       // finest delta used in the fit
  double window_hi = 0.0;       // coarsest delta used
  bool degenerate = false;      // single-point range
  bool poor_fit = false;        // R^2 below 0.98
};

namespace detail {

inline void fit_dimension(DimensionEstimate& est, std::span<const double> log_inv_scale,
                          int trim_coarse, int trim_fine) {
  std::size_t n = est.counts.size();
  std::size_t lo = static_cast<std::size_t>(trim_coarse);
  std::size_t hi = n - static_cast<std::size_t>(trim_fine);
  if (hi <= lo + 1) {  // not enough points after trimming, use everything
    lo = 0;
    hi = n;
  }
  std::vector<double> xs, ys;
  for (std::size_t i = lo; i < hi; ++i) {
    xs.push_back(log_inv_scale[i]);
    ys.push_back(std::log(est.counts[i]));
  }
  auto fit = stats::ols(xs, ys);
  est.slope = fit.slope;
  est.fit_r2 = fit.r2;
  est.window_hi = est.scales[lo];
  est.window_lo = est.scales[hi - 1];
  est.poor_fit = fit.r2 < 0.98;
}

// Distinct-cell count for a set of d-dimensional points at box side delta.
// Cells are sorted packed integer tuples, so counts are exact and
// deterministic.
inline double count_cells(const SamplePath& p, double delta, double offset) {
  const int d = p.dim;
  const std::size_t n = p.size();
  if (d == 1) {
    std::vector<double> vals(p.states.begin(), p.states.end());
    std::sort(vals.begin(), vals.end());
    double count = 0.0;
    long long prev = 0;
    bool first = true;
    for (double v : vals) {
      auto cell = static_cast<long long>(std::floor((v - offset) / delta));
      if (first || cell != prev) count += 1.0;
      prev = cell;
      first = false;
    }
    return count;
  }
  if (d == 2) {
    std::vector<std::uint64_t> keys(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto cx = static_cast<std::int64_t>(std::floor((p.states[2 * i] - offset) / delta));
      auto cy = static_cast<std::int64_t>(std::floor((p.states[2 * i + 1] - offset) / delta));
      keys[i] = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(cx)) << 32) |
                static_cast<std::uint64_t>(static_cast<std::uint32_t>(cy));
    }
    std::sort(keys.begin(), keys.end());
    return static_cast<double>(std::unique(keys.begin(), keys.end()) - keys.begin());
  }
  // generic d: lexicographic sort of quantized tuples
  std::vector<std::vector<std::int64_t>> cells(n, std::vector<std::int64_t>(d));
  for (std::size_t i = 0; i < n; ++i)
    for (int c = 0; c < d; ++c)
      cells[i][c] = static_cast<std::int64_t>(
          std::floor((p.states[i * d + c] - offset) / delta));
  std::sort(cells.begin(), cells.end());
  return static_cast<double>(std::unique(cells.begin(), cells.end()) - cells.begin());
}

}  // namespace detail

// Grid box counting of the range. Counts the distinct cells of side delta
// hit by the stored states, then fits log N against log 1/delta by ordinary
// least squares over the trimmed scale window.
inline DimensionEstimate box_count_range(const SamplePath& p,
                                         std::span<const double> scales,
                                         int trim_coarse = 2, int trim_fine = 2,
                                         double grid_offset = 0.0) {
  if (p.size() == 0) throw std::invalid_argument("box_count_range: empty path");
  if (scales.size() < 2)
    throw std::invalid_argument("box_count_range: need at least two scales");
  for (std::size_t i = 1; i < scales.size(); ++i)
    if (!(scales[i] < scales[i - 1]))
      throw std::invalid_argument("box_count_range: scales must decrease strictly");

  DimensionEstimate est;
  est.scales.assign(scales.begin(), scales.end());
  std::vector<double> log_inv;
  for (double s : scales) {
    est.counts.push_back(detail::count_cells(p, s, grid_offset));
    log_inv.push_back(std::log(1.0 / s));
  }
  // degenerate range: every scale sees a single cell
  bool all_one = true;
  for (double c : est.counts)
    if (c > 1.0) all_one = false;
  if (all_one) {
    est.degenerate = true;
    est.slope = 0.0;
    est.fit_r2 = 1.0;
    est.window_hi = est.scales.front();
    est.window_lo = est.scales.back();
    return est;
  }
  detail::fit_dimension(est, log_inv, trim_coarse, trim_fine);
  return est;
}

// Graph box counting at dyadic levels j (time rescaled to [0,1]).
//
// d = 1 uses the oscillation covering
//     N_j = sum_k ( ceil(2^j Osc(M, I_{j,k})) + 2 ),
// computed in one sweep per level; the slope is fitted on (j log 2, log N_j).
//
// d >= 2 covers the graph with cubes of side 2^{-j} directly: the path is
// piecewise constant, so the graph over an event interval is a horizontal
// segment and the exact cover is the number of distinct
// (time cell, space cell) pairs.
inline DimensionEstimate box_count_graph(const SamplePath& p,
                                         std::span<const int> levels,
                                         int trim_coarse = 2, int trim_fine = 2) {
  if (p.size() == 0) throw std::invalid_argument("box_count_graph: empty path");
  if (levels.size() < 2)
    throw std::invalid_argument("box_count_graph: need at least two levels");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] < 0 || levels[i] > 24)
      throw std::invalid_argument("box_count_graph: levels must lie in [0,24]");
    if (i > 0 && levels[i] <= levels[i - 1])
      throw std::invalid_argument("box_count_graph: levels must increase");
  }
  DimensionEstimate est;
  std::vector<double> log_inv;
  const double T = p.horizon;
  for (int j : levels) {
    const std::uint64_t cells = 1ull << j;
    const double dt = T / static_cast<double>(cells);
    double nj = 0.0;
    if (p.dim == 1) {
      std::size_t k = 0;  // state index entering the current interval
      for (std::uint64_t c = 0; c < cells; ++c) {
        const double right = (c + 1 == cells) ? T : dt * static_cast<double>(c + 1);
        double mn = p.states[k], mx = p.states[k];
        while (k + 1 < p.size() && p.times[k + 1] <= right) {
          ++k;
          mn = std::min(mn, p.states[k]);
          mx = std::max(mx, p.states[k]);
        }
        nj += std::ceil(static_cast<double>(cells) * (mx - mn) / T) + 2.0;
      }
    } else {
      // exact (time cell, space cell) pair count; event intervals are
      // right-open, the final one closes at T
      std::vector<std::vector<std::int64_t>> keys;
      keys.reserve(p.size() + cells);
      const double inv_side = static_cast<double>(cells) / T;
      for (std::size_t i = 0; i < p.size(); ++i) {
        double t0 = p.times[i];
        double t1 = (i + 1 < p.size()) ? p.times[i + 1] : T;
        auto c0 = std::min<std::int64_t>(
            static_cast<std::int64_t>(std::floor(t0 * inv_side)),
            static_cast<std::int64_t>(cells) - 1);
        std::int64_t c1;
        if (i + 1 == p.size() || t1 >= T) {
          c1 = static_cast<std::int64_t>(cells) - 1;
        } else {
          double f1 = t1 * inv_side;
          c1 = static_cast<std::int64_t>(std::floor(f1));
          if (f1 == std::floor(f1)) --c1;  // value at an exact boundary is post-jump
          c1 = std::max(c1, c0);
        }
        std::vector<std::int64_t> key(1 + p.dim);
        for (int c = 0; c < p.dim; ++c)
          key[1 + c] = static_cast<std::int64_t>(std::floor(p.states[i * p.dim + c] * inv_side));
        for (std::int64_t tc = c0; tc <= c1; ++tc) {
          key[0] = tc;
          keys.push_back(key);
        }
      }
      std::sort(keys.begin(), keys.end());
      nj = static_cast<double>(std::unique(keys.begin(), keys.end()) - keys.begin());
    }
    est.counts.push_back(nj);
    est.scales.push_back(std::pow(2.0, -j));
    log_inv.push_back(static_cast<double>(j) * std::log(2.0));
  }
  detail::fit_dimension(est, log_inv, trim_coarse, trim_fine);
  return est;
}

// Exact grid box count of the graph for any d, used as the brute-force
// oracle against the d=1 oscillation-covering formula.
inline std::vector<double> graph_grid_counts(const SamplePath& p,
                                             std::span<const int> levels) {
  std::vector<double> out;
  const double T = p.horizon;
  for (int j : levels) {
    const std::uint64_t cells = 1ull << j;
    const double inv_side = static_cast<double>(cells) / T;
    std::vector<std::pair<std::int64_t, std::int64_t>> keys;  // (time cell, value cell)
    keys.reserve(p.size() + cells);
    for (std::size_t i = 0; i < p.size(); ++i) {
      double t0 = p.times[i];
      double t1 = (i + 1 < p.size()) ? p.times[i + 1] : T;
      auto c0 = std::min<std::int64_t>(static_cast<std::int64_t>(std::floor(t0 * inv_side)),
                                       static_cast<std::int64_t>(cells) - 1);
      std::int64_t c1;
      if (i + 1 == p.size() || t1 >= T) {
        c1 = static_cast<std::int64_t>(cells) - 1;
      } else {
        double f1 = t1 * inv_side;
        c1 = static_cast<std::int64_t>(std::floor(f1));
        if (f1 == std::floor(f1)) --c1;
        c1 = std::max(c1, c0);
      }
      if (p.dim != 1)
        throw std::invalid_argument("graph_grid_counts: oracle is 1-d");
      auto vc = static_cast<std::int64_t>(std::floor(p.states[i] * inv_side));
      for (std::int64_t tc = c0; tc <= c1; ++tc) keys.emplace_back(tc, vc);
    }
    std::sort(keys.begin(), keys.end());
    out.push_back(static_cast<double>(std::unique(keys.begin(), keys.end()) - keys.begin()));
  }
  return out;
}

// On a path with finitely many jumps V_p approaches the jump sum S_p from
// below along refinements, so exact non-increase never fires; "stabilized"
// therefore means non-increasing up to this per-level slack.
inline constexpr double kStabilizationSlack = 0.04;

struct PVariationProfile {
  std::vector<double> p_grid;
  std::vector<int> depths;
  // v_values[di][pi]: V_p over the dyadic partition at depths[di]
  std::vector<std::vector<double>> v_values;
  std::vector<double> s_values;  // S_p over recorded jumps, per p

  // stabilization: V_p non-increasing (up to slack) over the last three depths
  bool stabilized(std::size_t pi) const {
    std::size_t nd = depths.size();
    if (nd < 3) return false;
    double a = v_values[nd - 3][pi], b = v_values[nd - 2][pi], c = v_values[nd - 1][pi];
    return b <= a * (1.0 + kStabilizationSlack) && c <= b * (1.0 + kStabilizationSlack);
  }

  bool strictly_growing(std::size_t pi) const {
    std::size_t nd = depths.size();
    if (nd < 3) return false;
    double a = v_values[nd - 3][pi], b = v_values[nd - 2][pi], c = v_values[nd - 1][pi];
    return b > a && c > b;
  }

  // smallest grid p whose V_p sequence stabilizes; NaN if none does
  double variation_index() const {
    for (std::size_t pi = 0; pi < p_grid.size(); ++pi)
      if (stabilized(pi)) return p_grid[pi];
    return std::nan("");
  }
};

// V_p over nested dyadic partitions plus the exact jump sums S_p.
inline PVariationProfile p_variation(const SamplePath& p,
                                     std::span<const double> p_grid,
                                     std::span<const int> depths) {
  for (int j : depths)
    if (j < 0 || j > 24) throw std::invalid_argument("p_variation: depth outside [0,24]");
  PVariationProfile prof;
  prof.p_grid.assign(p_grid.begin(), p_grid.end());
  prof.depths.assign(depths.begin(), depths.end());
  const double T = p.horizon;
  const int d = p.dim;

  for (int j : depths) {
    const std::uint64_t n = 1ull << j;
    std::vector<double> vp(p_grid.size(), 0.0);
    std::size_t k = 0;
    std::vector<double> prev(p.state(0).begin(), p.state(0).end());
    for (std::uint64_t i = 1; i <= n; ++i) {
      const double t = (i == n) ? T : T * static_cast<double>(i) / static_cast<double>(n);
      while (k + 1 < p.size() && p.times[k + 1] <= t) ++k;
      double inc2 = 0.0;
      for (int c = 0; c < d; ++c) {
        double dv = p.states[k * d + c] - prev[c];
        inc2 += dv * dv;
      }
      if (inc2 > 0.0) {
        double inc = std::sqrt(inc2);
        for (std::size_t pi = 0; pi < p_grid.size(); ++pi)
          vp[pi] += std::pow(inc, p_grid[pi]);
      }
      for (int c = 0; c < d; ++c) prev[c] = p.states[k * d + c];
    }
    prof.v_values.push_back(std::move(vp));
  }

  prof.s_values.assign(p_grid.size(), 0.0);
  for (std::size_t k = 1; k < p.size(); ++k) {
    if (!p.jump_flags[k]) continue;
    double mag = euclidean_distance(p.state(k - 1), p.state(k));
    if (mag <= 0.0) continue;
    for (std::size_t pi = 0; pi < p_grid.size(); ++pi)
      prof.s_values[pi] += std::pow(mag, p_grid[pi]);
  }
  return prof;
}

struct SojournStats {
  double t0 = 0.0;
  double a = 0.0;
  double s = 0.0;
  double value = 0.0;  // Lebesgue time within distance a of the t0 position
};

// T_{t0}(a,s) = int_{t0}^{t0+s} 1_{|M_t - M_{t0}| <= a} dt, exact for the
// piecewise-constant path.
inline SojournStats sojourn(const SamplePath& p, double t0, double a, double s) {
  if (!(a >= 0.0) || !(s >= 0.0)) throw std::invalid_argument("sojourn: need a,s >= 0");
  if (!(t0 >= 0.0) || t0 + s > p.horizon + 1e-15)
    throw std::out_of_range("sojourn: window outside [0, horizon]");
  SojournStats st{t0, a, s, 0.0};
  std::vector<double> center(p.value_at(t0).begin(), p.value_at(t0).end());
  const double end = t0 + s;
  std::size_t k = p.index_at(t0);
  double cur = t0;
  while (cur < end) {
    double next = (k + 1 < p.size()) ? std::min(p.times[k + 1], end) : end;
    if (euclidean_distance(p.state(k), center) <= a) st.value += next - cur;
    cur = next;
    ++k;
  }
  return st;
}

inline double predicted_range_dimension(double sup_beta, int d) {
  return std::min(static_cast<double>(d), sup_beta);
}

inline double predicted_graph_dimension(double sup_beta, int d) {
  if (d >= 2) return std::max(1.0, sup_beta);
  return std::max(1.0, 2.0 - 1.0 / sup_beta);
}

struct PredictionReport {
  double mean_absolute_error = 0.0;
  double rank_correlation = 0.0;
  double mean_estimate = 0.0;
  double mean_prediction = 0.0;
  std::size_t n = 0;
};

// Predicted (from sup of beta along each path) vs estimated dimensions.
inline PredictionReport dimension_vs_prediction(std::span<const double> predicted,
                                                std::span<const double> estimated) {
  if (predicted.size() != estimated.size() || predicted.empty())
    throw std::invalid_argument("dimension_vs_prediction: mismatched samples");
  PredictionReport rep;
  rep.n = predicted.size();
  double mae = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i)
    mae += std::abs(predicted[i] - estimated[i]);
  rep.mean_absolute_error = mae / static_cast<double>(predicted.size());
  rep.rank_correlation = stats::spearman(predicted, estimated);
  rep.mean_estimate = stats::mean(estimated);
  rep.mean_prediction = stats::mean(predicted);
  return rep;
}

}  // namespace stablelike::fractal
