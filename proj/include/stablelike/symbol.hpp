#pragma once

#include <cmath>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "stablelike/core.hpp"
#include "stablelike/csv.hpp"
#include "stablelike/quadrature.hpp"

namespace stablelike::symbol {

// C_alpha and the sphere-moment quadratures diverge toward alpha = 0 and 2;
// the compact-range assumption on beta makes a hard guard band safe.
inline constexpr double kAlphaGuardLo = 0.05;
inline constexpr double kAlphaGuardHi = 1.95;
inline constexpr double kInnerRelTol = 1e-8;   // single quadrature
inline constexpr double kCrossRelTol = 1e-4;   // two independent routes

inline void require_guard_band(double alpha) {
  if (!(alpha >= kAlphaGuardLo && alpha <= kAlphaGuardHi))
    throw std::invalid_argument(
        "alpha outside guard band [0.05, 1.95]; the integrand is not "
        "numerically integrable near 0 or 2");
}

namespace detail {

// int_0^t0 (1 - cos(xi u)) u^{-1-alpha} du by the alternating series of
// 1 - cos; exact to machine precision when xi*t0 <= 1.
inline double near_zero_series(double xi, double alpha, double t0) {
  double sum = 0.0;
  double fact = 1.0;  // (2k)!
  double xpow = 1.0;  // xi^{2k}
  for (int k = 1; k <= 24; ++k) {
    fact *= (2.0 * k - 1.0) * (2.0 * k);
    xpow *= xi * xi;
    double term = xpow * std::pow(t0, 2.0 * k - alpha) / (fact * (2.0 * k - alpha));
    sum += (k % 2 == 1) ? term : -term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

// int_U^inf cos(xi u) u^{-s} du by two levels of integration by parts; the
// asymptotic expansion needs xi*U large (a few dozen radians).
inline double oscillatory_tail_cos(double xi, double s, double U) {
  auto P = [&](double sv, auto&& self, int depth) -> double {
    if (depth == 0) return 0.0;
    double sinU = std::sin(xi * U), cosU = std::cos(xi * U);
    return -sinU / xi * std::pow(U, -sv) +
           sv / xi *
               (cosU / xi * std::pow(U, -sv - 1.0) -
                (sv + 1.0) / xi * self(sv + 2.0, self, depth - 1));
  };
  return P(s, P, 3);
}

inline double one_minus_cos_integral(double xi, double alpha);

// int_0^w0 (1 - cos w) w^{-1-b} dw for moderate w0 (series near zero plus
// adaptive quadrature beyond 1).
inline double partial_one_minus_cos(double w0, double b) {
  double t0 = std::min(1.0, w0);
  double v = near_zero_series(1.0, b, t0);
  if (w0 > 1.0) {
    auto f = [=](double w) {
      return (1.0 - std::cos(w)) * std::pow(w, -1.0 - b);
    };
    v += quad::integrate_or_throw(f, 1.0, w0, 1e-10, 1e-13);
  }
  return v;
}

// int_P^inf cos(xi rho) rho^{-1-b} drho for any xi >= 0. When xi*P is large
// the by-parts expansion applies directly; otherwise use the complement
// identity against the full integral C_b:
//   int_{w0}^inf cos(w) w^{-1-b} dw = w0^{-b}/b - C_b + int_0^{w0}(1-cos w)w^{-1-b} dw
// rescaled by xi^b with w0 = xi P.
inline double cos_tail_integral(double xi, double b, double P) {
  xi = std::abs(xi);
  if (xi * P >= 30.0) return oscillatory_tail_cos(xi, 1.0 + b, P);
  if (xi == 0.0) return std::pow(P, -b) / b;
  double w0 = xi * P;
  double full = one_minus_cos_integral(1.0, b);  // C_b
  return std::pow(xi, b) *
         (std::pow(w0, -b) / b - full + partial_one_minus_cos(w0, b));
}

// int_0^inf (1 - cos(xi u)) u^{-1-alpha} du for xi > 0. Split: series near
// zero, adaptive GK on the middle, closed 1/alpha piece plus an
// oscillation-averaged tail beyond U.
inline double one_minus_cos_integral(double xi, double alpha) {
  if (xi == 0.0) return 0.0;
  xi = std::abs(xi);
  double t0 = 1.0 / xi;
  double value = near_zero_series(xi, alpha, t0);
  // choose U so the parts remainder ~ U^{-alpha-4} xi^{-3} is negligible
  double U = std::max(t0, 600.0 / xi);
  auto f = [=](double u) {
    return (1.0 - std::cos(xi * u)) * std::pow(u, -1.0 - alpha);
  };
  value += quad::integrate_or_throw(f, t0, U, kInnerRelTol * 1e-1,
                                    kInnerRelTol * 1e-3 * std::abs(value));
  // int_U^inf u^{-1-alpha} du = U^{-alpha}/alpha, minus the cosine tail
  value += std::pow(U, -alpha) / alpha;
  value -= oscillatory_tail_cos(xi, 1.0 + alpha, U);
  return value;
}

}  // namespace detail

// C_alpha = int_0^inf (1 - cos r) r^{-1-alpha} dr, adaptive quadrature with
// series handling of the r -> 0 cancellation and an oscillation-averaged
// tail. Relative error well below 1e-8 inside the guard band.
inline double c_alpha(double alpha) {
  require_guard_band(alpha);
  return detail::one_minus_cos_integral(1.0, alpha);
}

// Gamma(2-alpha) cos(pi alpha / 2) / (alpha (1-alpha)), continuous at 1 with
// value pi/2. Used as an independent cross-check of the quadrature route.
inline double c_alpha_closed_form(double alpha) {
  if (!(alpha > 0.0 && alpha < 2.0))
    throw std::invalid_argument("c_alpha_closed_form: alpha outside (0,2)");
  if (std::abs(alpha - 1.0) < 1e-9) {
    // remove the 0/0 at alpha=1 by l'Hopital around the pole
    return 1.5707963267948966;
  }
  return std::tgamma(2.0 - alpha) * std::cos(1.5707963267948966 * alpha) /
         (alpha * (1.0 - alpha));
}

// E_H |theta . e1|^alpha over the uniform probability measure on S^{d-1}.
// d=1 is exactly 1; d>=2 reduces to the polar angle integral
// int_0^pi |cos psi|^alpha sin^{d-2} psi dpsi / int_0^pi sin^{d-2} psi dpsi.
inline double sphere_moment(double alpha, int d) {
  if (d < 1) throw std::invalid_argument("sphere_moment: d < 1");
  if (!(alpha > 0.0 && alpha < 2.0))
    throw std::invalid_argument("sphere_moment: alpha outside (0,2)");
  if (d == 1) return 1.0;
  auto num = [=](double psi) {
    return std::pow(std::abs(std::cos(psi)), alpha) *
           std::pow(std::sin(psi), static_cast<double>(d - 2));
  };
  auto den = [=](double psi) {
    return std::pow(std::sin(psi), static_cast<double>(d - 2));
  };
  const double pi = 3.1415926535897932384626433832795;
  // |cos|^alpha has an algebraic kink at pi/2; split there.
  double n1 = quad::integrate_or_throw(num, 0.0, pi / 2, kInnerRelTol * 1e-1);
  double n2 = quad::integrate_or_throw(num, pi / 2, pi, kInnerRelTol * 1e-1);
  double d1 = quad::integrate_or_throw(den, 0.0, pi, kInnerRelTol * 1e-1);
  return (n1 + n2) / d1;
}

struct SymbolEval {
  std::vector<double> x;
  std::vector<double> xi;
  double value = 0.0;         // q(x,xi) = a(x) |xi|^{beta(x)}
  double a_of_x = 0.0;
  double c_alpha = 0.0;
  double sphere_moment = 0.0;
  double beta_x = 0.0;
};

// Symbol of the generator driven by the r^{-2} jump measure:
//   q(x, xi) = beta(x) C_{beta(x)} E_H|theta.e1|^{beta(x)} |xi|^{beta(x)}.
// The beta(x) factor is the Jacobian of the radial change of variables
// u = theta r^{1/beta(x)}; with it, L applied to a plane wave equals
// -q(x,xi) times the wave, which the Fourier and Monte Carlo checks verify.
inline SymbolEval symbol(std::span<const double> x, std::span<const double> xi,
                         const IndexFunction& beta) {
  for (double c : xi)
    if (!std::isfinite(c)) throw std::invalid_argument("symbol: non-finite xi");
  SymbolEval ev;
  ev.x.assign(x.begin(), x.end());
  ev.xi.assign(xi.begin(), xi.end());
  ev.beta_x = beta(x);
  require_guard_band(ev.beta_x);
  ev.c_alpha = c_alpha(ev.beta_x);
  ev.sphere_moment = sphere_moment(ev.beta_x, static_cast<int>(x.size()));
  ev.a_of_x = ev.beta_x * ev.c_alpha * ev.sphere_moment;
  double norm2 = 0.0;
  for (double c : xi) norm2 += c * c;
  ev.value = ev.a_of_x * std::pow(norm2, 0.5 * ev.beta_x);
  if (norm2 == 0.0) ev.value = 0.0;  // q(.,0) == 0
  return ev;
}

// d=1 cross-check: quadrature of int_0^inf (1-cos(u xi)) beta(x) u^{-1-beta}
// du against a(x)|xi|^{beta(x)}. Returns the relative discrepancy.
inline double symbol_fourier_check(double x, double xi, const IndexFunction& beta) {
  if (xi == 0.0) throw std::invalid_argument("symbol_fourier_check: xi must be nonzero");
  double b = beta(x);
  require_guard_band(b);
  double direct = b * detail::one_minus_cos_integral(std::abs(xi), b);
  SymbolEval ev = symbol(std::span<const double>(&x, 1),
                         std::span<const double>(&xi, 1), beta);
  return std::abs(direct - ev.value) / ev.value;
}

// Growth exponent of the symbol class: for q = a(x)|xi|^{beta(x)} with a
// bounded, the sup over |eta| <= |xi| grows like |xi|^{sup beta}, so
// beta_infinity equals beta_max exactly.
inline double beta_infinity(const IndexFunction& beta) { return beta.beta_max(); }

struct BetaInfinityCheck {
  std::vector<double> xi_scales;
  std::vector<double> ratios_above;  // q_sup/|xi|^{beta_max+0.05}: should fall
  std::vector<double> ratios_below;  // q_sup/|xi|^{beta_max-0.05}: should grow
  bool decreasing_above = false;
  bool increasing_below = false;
};

// Numeric ratio test of the beta_infinity claim at |xi| in {1e2,1e4,1e6}.
// sup over x is taken on a probe grid, so an index whose sup lives at
// infinity can under-report (documented limitation).
inline BetaInfinityCheck beta_infinity_ratio_check(
    const IndexFunction& beta, int d, std::span<const double> box_lo,
    std::span<const double> box_hi, std::size_t n_probe = 2000) {
  BetaInfinityCheck chk;
  chk.xi_scales = {1e2, 1e4, 1e6};
  double bmax = beta.beta_max();
  auto pts = probe_grid(d, n_probe, box_lo, box_hi);
  for (double s : chk.xi_scales) {
    // sup over |eta| <= s of a(x)|eta|^{beta(x)}: monotone in |eta|, so the
    // sup sits at |eta| = s for every x.
    double qsup = 0.0;
    for (std::size_t i = 0; i < n_probe; ++i) {
      std::span<const double> x(pts.data() + i * d, static_cast<std::size_t>(d));
      double bx = beta(x);
      double q = bx * c_alpha(bx) * sphere_moment(bx, d) * std::pow(s, bx);
      qsup = std::max(qsup, q);
    }
    chk.ratios_above.push_back(qsup / std::pow(s, bmax + 0.05));
    chk.ratios_below.push_back(qsup / std::pow(s, bmax - 0.05));
  }
  chk.decreasing_above = chk.ratios_above[0] > chk.ratios_above[1] &&
                         chk.ratios_above[1] > chk.ratios_above[2];
  chk.increasing_below = chk.ratios_below[0] < chk.ratios_below[1] &&
                         chk.ratios_below[1] < chk.ratios_below[2];
  return chk;
}

// Twice-differentiable test function on R (the generator checks are 1-d;
// Lemma 2.3's reduction already factors through the radial integral).
// support_radius may be +inf; unbounded functions should either supply
// sphere_tail (the analytic far integral, see plane_wave_cos) or accept an
// O(sup_abs P^{-beta}) residual past the cutoff.
struct C2Function {
  std::function<double(double)> value;
  std::function<double(double)> deriv;
  std::function<double(double)> deriv2;
  double support_radius = std::numeric_limits<double>::infinity();
  double sup_abs = 1.0;
  double far_mean = 0.0;
  // int_P^inf E_theta f(x + theta rho) * b rho^{-1-b} drho, if known in
  // closed/semi-closed form (arguments: x, P, b).
  std::function<double(double, double, double)> sphere_tail;
};

// Numeric L f(x) via the spherical-coordinate form, written in the jump-size
// variable rho = r^{1/beta(x)} under which the radial measure is
// beta rho^{-1-beta} drho:
//   L f(x) = beta int_0^inf [ (f(x+rho)+f(x-rho))/2 - f(x) ] rho^{-1-beta} drho.
// The gradient compensator integrates to zero against the symmetric sphere
// measure, so it is dropped exactly. The rho -> 0 singularity is handled with
// the second-order Taylor bound; the far field splits into an exact
// -f(x) P^{-beta} piece plus the sphere_tail (zero beyond the support for
// compactly supported f).
inline double apply_generator(const C2Function& f, double x,
                              const IndexFunction& beta) {
  double b = beta(x);
  require_guard_band(b);
  const double fx = f.value(x);
  auto g = [&](double rho) {
    return 0.5 * (f.value(x + rho) + f.value(x - rho)) - fx;
  };
  // Taylor piece: g(rho) ~ f''(x) rho^2 / 2 for rho <= rho0.
  const double rho0 = 1e-3;
  double value = 0.5 * f.deriv2(x) * b * std::pow(rho0, 2.0 - b) / (2.0 - b);

  double P;
  if (f.sphere_tail) {
    P = 60.0;  // the tail hook is accurate once xi*P is a few dozen radians
  } else if (std::isfinite(f.support_radius)) {
    P = std::max(1.0, f.support_radius + std::abs(x));
  } else {
    P = 1e4;  // residual O(sup_abs P^{-b}) documented above
  }
  auto integrand = [&](double rho) {
    return b * g(rho) * std::pow(rho, -1.0 - b);
  };
  value += quad::integrate_or_throw(integrand, rho0, P, 1e-9, 1e-12, 8000);
  double far = 0.0;  // limit the sphere average settles to beyond P
  if (!f.sphere_tail && !std::isfinite(f.support_radius)) far = f.far_mean;
  value += (far - fx) * std::pow(P, -b);
  if (f.sphere_tail) value += f.sphere_tail(x, P, b);
  return value;
}

// Plane waves with the analytic oscillatory far-field integral; used by the
// Fourier-identity checks L f = -q f.
inline C2Function plane_wave_cos(double xi) {
  C2Function f;
  f.value = [xi](double y) { return std::cos(xi * y); };
  f.deriv = [xi](double y) { return -xi * std::sin(xi * y); };
  f.deriv2 = [xi](double y) { return -xi * xi * std::cos(xi * y); };
  f.sup_abs = 1.0;
  f.far_mean = 0.0;
  // E_theta f(x+theta rho) = cos(x xi) cos(rho xi)
  f.sphere_tail = [xi](double x, double P, double b) {
    return std::cos(xi * x) * b * detail::cos_tail_integral(xi, b, P);
  };
  return f;
}

inline C2Function plane_wave_sin(double xi) {
  C2Function f;
  f.value = [xi](double y) { return std::sin(xi * y); };
  f.deriv = [xi](double y) { return xi * std::cos(xi * y); };
  f.deriv2 = [xi](double y) { return -xi * xi * std::sin(xi * y); };
  f.sup_abs = 1.0;
  f.far_mean = 0.0;
  f.sphere_tail = [xi](double x, double P, double b) {
    return std::sin(xi * x) * b * detail::cos_tail_integral(xi, b, P);
  };
  return f;
}

// Appendix bounds. lhs = int_0^1 (r^{1/beta(x)} - r^{1/beta(y)})^2 r^{-2} dr
// by quadrature; rhs = C |x-y|^2 with C assembled from the explicit chain
//   (1-e^{-u} <= u, log(1/r)^2 <= (2/(e eps0))^2 r^{-eps0},
//    eps0 = (2/beta_max - 1)/2).
struct LipschitzCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool ok = false;
};

inline LipschitzCheck lipschitz_quadrature_check(double x, double y,
                                                 const IndexFunction& beta) {
  if (x == y) return {0.0, 0.0, true};
  double bx = beta(x), by = beta(y);
  auto integrand = [&](double r) {
    double d = std::pow(r, 1.0 / bx) - std::pow(r, 1.0 / by);
    return d * d / (r * r);
  };
  LipschitzCheck out;
  out.lhs = quad::integrate_or_throw(integrand, 0.0, 1.0, 1e-10, 1e-14, 8000);
  double bhi = std::max(bx, by);
  double bmin = beta.beta_min();
  double bmax = beta.beta_max();
  double eps0 = 0.5 * (2.0 / bmax - 1.0);
  double lip_inv = beta.lipschitz() / (bmin * bmin);  // |1/bx - 1/by| <= L/bmin^2 |x-y|
  double log_const = 4.0 / (2.718281828459045235 * 2.718281828459045235 * eps0 * eps0);
  double tail = 1.0 / (2.0 / bhi - 1.0 - eps0);
  double C = lip_inv * lip_inv * log_const * tail;
  out.rhs = C * (x - y) * (x - y);
  out.ok = out.lhs <= out.rhs;
  return out;
}

// int_0^1 r^{2/beta} r^{-2} dr, quadrature route and closed form
// 1/(2/beta - 1).
inline double growth_integral(double beta_x) {
  if (!(beta_x > 0.0 && beta_x < 2.0))
    throw std::invalid_argument("growth_integral: beta outside (0,2)");
  auto f = [=](double r) { return std::pow(r, 2.0 / beta_x - 2.0); };
  return quad::integrate_or_throw(f, 0.0, 1.0, 1e-12, 1e-15, 20000);
}

inline double growth_integral_closed_form(double beta_x) {
  return 1.0 / (2.0 / beta_x - 1.0);
}

// (alpha -> C_alpha) cache, CSV round-trip for reuse by the harness.
inline void write_c_alpha_table(std::ostream& os, std::span<const double> alphas) {
  csv::Writer w(os);
  w.row("alpha", "c_alpha");
  for (double a : alphas) w.row(a, c_alpha(a));
}

inline std::vector<std::pair<double, double>> read_c_alpha_table(std::istream& is) {
  std::vector<std::pair<double, double>> out;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("c_alpha table: empty");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto f = csv::split_row(line);
    if (f.size() != 2) throw std::runtime_error("c_alpha table: bad row");
    out.emplace_back(csv::parse_double(f[0]), csv::parse_double(f[1]));
  }
  return out;
}

}  // namespace stablelike::symbol
