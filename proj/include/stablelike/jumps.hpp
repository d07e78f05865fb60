#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "stablelike/csv.hpp"
#include "stablelike/rng.hpp"

namespace stablelike {

// One realization of the Poisson random measure N on
// [0,T] x S^{d-1} x (epsilon, infinity) with intensity dt ⊗ H ⊗ r^{-2}dr,
// truncated to radial marks r > epsilon. pi((eps,inf)) = 1/eps, so the
// event count is Poisson(T/eps). Events with r >= 1 are the non-compensated
// large jumps; they live in the same ordered stream (one-stream
// interlacement) and are recognized by their r value.
struct JumpStream {
  int dim = 1;
  double horizon = 0.0;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> times;       // sorted ascending
  std::vector<double> radii;       // all > epsilon
  std::vector<double> directions;  // flattened unit vectors, size()*dim

  std::size_t size() const { return times.size(); }

  std::span<const double> direction(std::size_t i) const {
    return {directions.data() + i * static_cast<std::size_t>(dim),
            static_cast<std::size_t>(dim)};
  }
};

// Radial mark by inverse CDF: under pi restricted to (eps,inf) and
// normalized, P(r > m) = eps/m, so r = eps/U with U uniform(0,1).
inline double radial_from_uniform(double epsilon, double u) {
  return epsilon / u;
}

inline JumpStream sample_stream(double horizon, double epsilon, int d,
                                std::uint64_t seed) {
  if (!(horizon > 0.0)) throw std::invalid_argument("sample_stream: horizon <= 0");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("sample_stream: epsilon must lie in (0,1)");
  if (d < 1) throw std::invalid_argument("sample_stream: d < 1");

  Rng rng(seed);
  JumpStream s;
  s.dim = d;
  s.horizon = horizon;
  s.epsilon = epsilon;
  s.seed = seed;

  // Count first, then times as uniform order statistics (one sort), then the
  // independent marks.
  auto n = static_cast<std::size_t>(rng.poisson(horizon / epsilon));
  s.times.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.times[i] = horizon * rng.uniform_open01();
  std::sort(s.times.begin(), s.times.end());

  s.radii.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    s.radii[i] = radial_from_uniform(epsilon, rng.uniform_open01());

  s.directions.resize(n * static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < n; ++i)
    sample_direction(rng, d, {s.directions.data() + i * d, static_cast<std::size_t>(d)});
  return s;
}

// First event time with r >= 1 (the stopping time tau_{>=1}), if any.
// Large jumps arrive at rate pi([1,inf)) = 1, so over [0,T] this is an
// Exponential(1) truncated at T.
inline std::optional<double> first_large_jump_time(const JumpStream& s) {
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s.radii[i] >= 1.0) return s.times[i];
  return std::nullopt;
}

// Stream serialization: a single CSV with a 2-row meta preamble followed by
// the event table. Enough to replay a coupling experiment bit-exactly.
inline void write_stream_csv(const JumpStream& s, std::ostream& os) {
  csv::Writer w(os);
  w.row("horizon", "epsilon", "d", "seed", "count");
  w.field(s.horizon);
  w.field(s.epsilon);
  w.field(s.dim);
  w.field(s.seed);
  w.field(static_cast<std::uint64_t>(s.size()));
  w.end_row();
  w.field("t");
  w.field("r");
  for (int c = 0; c < s.dim; ++c) w.field("theta" + std::to_string(c + 1));
  w.end_row();
  for (std::size_t i = 0; i < s.size(); ++i) {
    w.field(s.times[i]);
    w.field(s.radii[i]);
    for (int c = 0; c < s.dim; ++c) w.field(s.directions[i * s.dim + c]);
    w.end_row();
  }
}

inline JumpStream read_stream_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("stream csv: empty file");
  if (!std::getline(is, line)) throw std::runtime_error("stream csv: missing meta row");
  auto meta = csv::split_row(line);
  if (meta.size() != 5) throw std::runtime_error("stream csv: bad meta row");
  JumpStream s;
  s.horizon = csv::parse_double(meta[0]);
  s.epsilon = csv::parse_double(meta[1]);
  s.dim = static_cast<int>(csv::parse_u64(meta[2]));
  s.seed = csv::parse_u64(meta[3]);
  auto n = static_cast<std::size_t>(csv::parse_u64(meta[4]));
  if (!std::getline(is, line)) throw std::runtime_error("stream csv: missing header");
  s.times.reserve(n);
  s.radii.reserve(n);
  s.directions.reserve(n * s.dim);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto f = csv::split_row(line);
    if (f.size() != 2 + static_cast<std::size_t>(s.dim))
      throw std::runtime_error("stream csv: bad event row");
    s.times.push_back(csv::parse_double(f[0]));
    s.radii.push_back(csv::parse_double(f[1]));
    for (int c = 0; c < s.dim; ++c)
      s.directions.push_back(csv::parse_double(f[2 + c]));
  }
  if (s.size() != n) throw std::runtime_error("stream csv: row count mismatch");
  for (std::size_t i = 1; i < s.size(); ++i)
    if (s.times[i] < s.times[i - 1])
      throw std::runtime_error("stream csv: times not sorted");
  for (double r : s.radii)
    if (!(r > s.epsilon))
      throw std::runtime_error("stream csv: radial mark <= epsilon");
  return s;
}

}  // namespace stablelike
