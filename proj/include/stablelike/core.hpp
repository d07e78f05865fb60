#pragma once

#include <algorithm>
#include <cassert>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace stablelike {

// Spatially varying jump index beta: R^d -> (0,2). Immutable after
// construction, cheap to copy (shared node), safe to share across threads.
//
// The built-in catalogue:
//   constant(alpha)            beta(x) = alpha
//   rational_bump(lo, hi)      beta(x) = lo + (hi-lo)/(1+|x|^2), peak at 0
//   clamp(base, a)             beta(x) = max(base(x), a)
//   radial_table(r, v, L)      piecewise-linear in |x|, constant beyond the
//                              last knot; L is the user-declared Lipschitz
//                              constant of the profile
//
// The Lipschitz constant is exact for the built-ins and user-declared for
// tables; it is a contract, spot-checked on probe grids rather than proved.
class IndexFunction {
public:
  enum class Kind { Constant, RationalBump, Clamp, RadialTable };

  static IndexFunction constant(double alpha) {
    require_in_range(alpha, "constant index");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Constant;
    n->a = alpha;
    n->beta_min = n->beta_max = alpha;
    n->lipschitz = 0.0;
    return IndexFunction(std::move(n));
  }

  // lo + (hi-lo)/(1+|x|^2): range (lo, hi], exact Lipschitz constant
  // (hi-lo) * 3*sqrt(3)/8 (max of |d/dt (1+t^2)^-1|).
  static IndexFunction rational_bump(double lo, double hi) {
    require_in_range(lo, "rational_bump lo");
    require_in_range(hi, "rational_bump hi");
    if (!(lo < hi)) throw std::invalid_argument("rational_bump: need lo < hi");
    auto n = std::make_shared<Node>();
    n->kind = Kind::RationalBump;
    n->a = lo;
    n->b = hi;
    n->beta_min = lo;
    n->beta_max = hi;
    n->lipschitz = (hi - lo) * 3.0 * std::sqrt(3.0) / 8.0;
    return IndexFunction(std::move(n));
  }

  // max(base(x), floor_value). Houses the coupled process index beta ∨ a.
  static IndexFunction clamp(IndexFunction base, double floor_value) {
    require_in_range(floor_value, "clamp floor");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Clamp;
    n->a = floor_value;
    n->base = base.node_;
    n->beta_min = std::max(base.beta_min(), floor_value);
    n->beta_max = std::max(base.beta_max(), floor_value);
    n->lipschitz = base.lipschitz();
    return IndexFunction(std::move(n));
  }

  static IndexFunction radial_table(std::vector<double> knots,
                                    std::vector<double> values,
                                    double lipschitz) {
    if (knots.size() != values.size() || knots.size() < 2)
      throw std::invalid_argument("radial_table: need >= 2 matching knots/values");
    for (std::size_t i = 1; i < knots.size(); ++i)
      if (!(knots[i] > knots[i - 1]))
        throw std::invalid_argument("radial_table: knots must be increasing");
    if (knots.front() < 0.0)
      throw std::invalid_argument("radial_table: knots are radii, must be >= 0");
    if (!(lipschitz >= 0.0))
      throw std::invalid_argument("radial_table: lipschitz must be >= 0");
    double lo = values[0], hi = values[0];
    for (double v : values) {
      require_in_range(v, "radial_table value");
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    auto n = std::make_shared<Node>();
    n->kind = Kind::RadialTable;
    n->knots = std::move(knots);
    n->values = std::move(values);
    n->beta_min = lo;
    n->beta_max = hi;
    n->lipschitz = lipschitz;
    return IndexFunction(std::move(n));
  }

  double operator()(std::span<const double> x) const {
    for (double c : x)
      if (!std::isfinite(c))
        throw std::invalid_argument("IndexFunction: non-finite evaluation point");
    double v = node_->eval(x);
    assert(v >= node_->beta_min && v <= node_->beta_max);
    return v;
  }

  double operator()(double x) const { return (*this)(std::span<const double>(&x, 1)); }

  double beta_min() const { return node_->beta_min; }
  double beta_max() const { return node_->beta_max; }
  double lipschitz() const { return node_->lipschitz; }
  Kind kind() const { return node_->kind; }

  // Round-trippable textual descriptor, e.g. "clamp(bump(0.6,1.4),1)".
  std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    describe_node(*node_, os);
    return os.str();
  }

  static IndexFunction parse(std::string_view text);

private:
  struct Node {
    Kind kind = Kind::Constant;
    double a = 0, b = 0;
    std::shared_ptr<const Node> base;
    std::vector<double> knots, values;
    double beta_min = 0, beta_max = 0, lipschitz = 0;

    double eval(std::span<const double> x) const {
      switch (kind) {
        case Kind::Constant:
          return a;
        case Kind::RationalBump: {
          double r2 = 0.0;
          for (double c : x) r2 += c * c;
          return a + (b - a) / (1.0 + r2);
        }
        case Kind::Clamp:
          return std::max(base->eval(x), a);
        case Kind::RadialTable: {
          double r2 = 0.0;
          for (double c : x) r2 += c * c;
          double r = std::sqrt(r2);
          if (r <= knots.front()) return values.front();
          if (r >= knots.back()) return values.back();
          auto it = std::upper_bound(knots.begin(), knots.end(), r);
          std::size_t i = static_cast<std::size_t>(it - knots.begin());
          double t = (r - knots[i - 1]) / (knots[i] - knots[i - 1]);
          return values[i - 1] + t * (values[i] - values[i - 1]);
        }
      }
      return a;
    }
  };

  explicit IndexFunction(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  static void require_in_range(double v, const char* what) {
    if (!(v > 0.0 && v < 2.0)) {
      throw std::invalid_argument(std::string(what) +
                                  ": index values must lie in (0,2)");
    }
  }

  static void describe_node(const Node& n, std::ostringstream& os) {
    switch (n.kind) {
      case Kind::Constant:
        os << "constant(" << n.a << ")";
        break;
      case Kind::RationalBump:
        os << "bump(" << n.a << "," << n.b << ")";
        break;
      case Kind::Clamp:
        os << "clamp(";
        describe_node(*n.base, os);
        os << "," << n.a << ")";
        break;
      case Kind::RadialTable:
        os << "table(";
        for (std::size_t i = 0; i < n.knots.size(); ++i) {
          if (i) os << ",";
          os << n.knots[i] << ":" << n.values[i];
        }
        os << ";" << n.lipschitz << ")";
        break;
    }
  }

  std::shared_ptr<const Node> node_;
};

namespace detail {

inline void skip_ws(std::string_view& s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
}

inline bool consume(std::string_view& s, char c) {
  skip_ws(s);
  if (s.empty() || s.front() != c) return false;
  s.remove_prefix(1);
  return true;
}

inline double parse_number(std::string_view& s) {
  skip_ws(s);
  std::size_t i = 0;
  while (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) ||
                          s[i] == '+' || s[i] == '-' || s[i] == '.' ||
                          s[i] == 'e' || s[i] == 'E'))
    ++i;
  if (i == 0) throw std::invalid_argument("index descriptor: expected number");
  double v = std::stod(std::string(s.substr(0, i)));
  s.remove_prefix(i);
  return v;
}

inline IndexFunction parse_descriptor(std::string_view& s) {
  skip_ws(s);
  std::size_t i = 0;
  while (i < s.size() && (std::isalpha(static_cast<unsigned char>(s[i])) ||
                          s[i] == '_' || s[i] == '-'))
    ++i;
  std::string name(s.substr(0, i));
  s.remove_prefix(i);
  if (!consume(s, '('))
    throw std::invalid_argument("index descriptor: expected '(' after " + name);
  if (name == "constant") {
    double a = parse_number(s);
    if (!consume(s, ')')) throw std::invalid_argument("constant: expected ')'");
    return IndexFunction::constant(a);
  }
  if (name == "bump" || name == "rational-bump" || name == "rational_bump") {
    double lo = parse_number(s);
    if (!consume(s, ',')) throw std::invalid_argument("bump: expected ','");
    double hi = parse_number(s);
    if (!consume(s, ')')) throw std::invalid_argument("bump: expected ')'");
    return IndexFunction::rational_bump(lo, hi);
  }
  if (name == "clamp") {
    IndexFunction base = parse_descriptor(s);
    if (!consume(s, ',')) throw std::invalid_argument("clamp: expected ','");
    double a = parse_number(s);
    if (!consume(s, ')')) throw std::invalid_argument("clamp: expected ')'");
    return IndexFunction::clamp(base, a);
  }
  if (name == "table") {
    std::vector<double> knots, values;
    for (;;) {
      knots.push_back(parse_number(s));
      if (!consume(s, ':')) throw std::invalid_argument("table: expected ':'");
      values.push_back(parse_number(s));
      skip_ws(s);
      if (!s.empty() && s.front() == ',') {
        s.remove_prefix(1);
        continue;
      }
      break;
    }
    if (!consume(s, ';')) throw std::invalid_argument("table: expected ';L'");
    double lip = parse_number(s);
    if (!consume(s, ')')) throw std::invalid_argument("table: expected ')'");
    return IndexFunction::radial_table(std::move(knots), std::move(values), lip);
  }
  throw std::invalid_argument("unknown index descriptor: " + name);
}

}  // namespace detail

inline IndexFunction IndexFunction::parse(std::string_view text) {
  std::string_view s = text;
  IndexFunction f = detail::parse_descriptor(s);
  detail::skip_ws(s);
  if (!s.empty())
    throw std::invalid_argument("index descriptor: trailing characters");
  return f;
}

// A cadlag piecewise-constant path in R^d: one entry per state change plus
// the initial state. value at t = states[k] for the largest k with
// times[k] <= t.
struct SamplePath {
  int dim = 1;
  double horizon = 0.0;
  std::vector<double> times;        // strictly increasing, times[0] == 0
  std::vector<double> states;       // flattened, size() * dim
  std::vector<std::uint8_t> jump_flags;

  std::size_t size() const { return times.size(); }

  std::span<const double> state(std::size_t k) const {
    return {states.data() + k * static_cast<std::size_t>(dim),
            static_cast<std::size_t>(dim)};
  }

  // Largest k with times[k] <= t (cadlag lookup).
  std::size_t index_at(double t) const {
    if (!(t >= 0.0 && t <= horizon))
      throw std::out_of_range("SamplePath: t outside [0, horizon]");
    auto it = std::upper_bound(times.begin(), times.end(), t);
    return static_cast<std::size_t>(it - times.begin()) - 1;
  }

  std::span<const double> value_at(double t) const { return state(index_at(t)); }

  double value_at1(double t) const {
    if (dim != 1) throw std::logic_error("value_at1 requires dim == 1");
    return states[index_at(t)];
  }
};

inline double path_value1(const SamplePath& p, double t) { return p.value_at1(t); }

inline double euclidean_distance(std::span<const double> a,
                                 std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

// sup_{u,v in [s,t]} |path(u) - path(v)|, exact for piecewise-constant paths:
// the sup runs over the states recorded inside (s,t] plus the value entering
// at s. d=1 is max-min; d>=2 compares all pairs (estimators only use d=1 on
// short intervals).
inline double oscillation(const SamplePath& p, double s, double t) {
  if (!(s <= t)) throw std::invalid_argument("oscillation: reversed interval");
  std::size_t lo = p.index_at(s);
  std::size_t hi = p.index_at(t);
  if (p.dim == 1) {
    double mn = p.states[lo], mx = p.states[lo];
    for (std::size_t k = lo + 1; k <= hi; ++k) {
      mn = std::min(mn, p.states[k]);
      mx = std::max(mx, p.states[k]);
    }
    return mx - mn;
  }
  double best = 0.0;
  for (std::size_t i = lo; i <= hi; ++i)
    for (std::size_t j = i + 1; j <= hi; ++j)
      best = std::max(best, euclidean_distance(p.state(i), p.state(j)));
  return best;
}

// sup of beta along the path over [s,t]; exact because the path is piecewise
// constant, so the sup is attained at a stored state.
inline double sup_index_along(const SamplePath& p, const IndexFunction& beta,
                              double s, double t) {
  if (!(s <= t)) throw std::invalid_argument("sup_index_along: reversed interval");
  std::size_t lo = p.index_at(s);
  std::size_t hi = p.index_at(t);
  double best = beta(p.state(lo));
  for (std::size_t k = lo + 1; k <= hi; ++k) best = std::max(best, beta(p.state(k)));
  return best;
}

// Low-discrepancy points for probe-grid contract checks (R_d sequence:
// additive recurrence with the generalized golden ratio).
inline std::vector<double> probe_grid(int d, std::size_t n,
                                      std::span<const double> box_lo,
                                      std::span<const double> box_hi) {
  double phi = 2.0;
  for (int it = 0; it < 64; ++it) phi = std::pow(1.0 + phi, 1.0 / (d + 1));
  std::vector<double> alpha(d);
  for (int j = 0; j < d; ++j) alpha[j] = std::fmod(std::pow(1.0 / phi, j + 1), 1.0);
  std::vector<double> pts(n * static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) {
      double u = std::fmod(0.5 + alpha[j] * static_cast<double>(i + 1), 1.0);
      pts[i * d + j] = box_lo[j] + (box_hi[j] - box_lo[j]) * u;
    }
  }
  return pts;
}

struct ProbeReport {
  bool range_ok = true;          // 0 < beta_min <= eval <= beta_max < 2
  bool lipschitz_ok = true;      // |eval(x)-eval(y)| <= L |x-y| on probe pairs
  double min_seen = 2.0;
  double max_seen = 0.0;
  double worst_lipschitz_ratio = 0.0;
};

inline ProbeReport check_on_probe_grid(const IndexFunction& beta, int d,
                                       std::span<const double> box_lo,
                                       std::span<const double> box_hi,
                                       std::size_t n = 10000) {
  ProbeReport rep;
  auto pts = probe_grid(d, n, box_lo, box_hi);
  std::vector<double> prev;
  double prev_val = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::span<const double> x(pts.data() + i * d, static_cast<std::size_t>(d));
    double v = beta(x);
    rep.min_seen = std::min(rep.min_seen, v);
    rep.max_seen = std::max(rep.max_seen, v);
    if (!(v > 0.0 && v < 2.0 && v >= beta.beta_min() - 1e-12 &&
          v <= beta.beta_max() + 1e-12))
      rep.range_ok = false;
    if (!prev.empty()) {
      double dist = euclidean_distance(x, prev);
      if (dist > 1e-12) {
        double ratio = std::abs(v - prev_val) / dist;
        rep.worst_lipschitz_ratio = std::max(rep.worst_lipschitz_ratio, ratio);
        if (ratio > beta.lipschitz() * (1.0 + 1e-9) + 1e-12) rep.lipschitz_ok = false;
      }
    }
    prev.assign(x.begin(), x.end());
    prev_val = v;
  }
  return rep;
}

}  // namespace stablelike
