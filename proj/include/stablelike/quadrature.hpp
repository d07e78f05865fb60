#pragma once

#include <cmath>
#include <functional>
#include <queue>
#include <stdexcept>
#include <vector>

namespace stablelike::quad {

// 15-point Kronrod rule with embedded 7-point Gauss rule on [-1,1].
// Standard node/weight tables (QUADPACK dqk15).
namespace detail {
inline constexpr double kKronrodNodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
inline constexpr double kKronrodWeights[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
inline constexpr double kGaussWeights[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};
}  // namespace detail

struct Interval {
  double a, b, value, error;
};

// G7 shares the odd Kronrod nodes and the center point.
template <typename F>
inline Interval gk15(const F& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double fk = 0.0, fg = 0.0;
  for (int i = 0; i < 8; ++i) {
    double x = detail::kKronrodNodes[i];
    double fv;
    if (i == 7) {
      fv = f(mid);
    } else {
      fv = f(mid - half * x) + f(mid + half * x);
    }
    fk += detail::kKronrodWeights[i] * fv;
    if (i == 7) fg += detail::kGaussWeights[3] * fv;
    else if (i % 2 == 1) fg += detail::kGaussWeights[i / 2] * fv;
  }
  Interval out;
  out.a = a;
  out.b = b;
  out.value = fk * half;
  // Conservative: the raw G/K difference over-estimates the true error, which
  // only costs a few extra bisections.
  out.error = std::max(std::abs((fk - fg) * half), 1e-300);
  return out;
}

struct Result {
  double value = 0.0;
  double error_estimate = 0.0;
  int subdivisions = 0;
  bool converged = false;
};

// Globally adaptive bisection on [a,b]; stops when the summed error estimate
// falls below max(abs_tol, rel_tol*|integral|).
template <typename F>
inline Result integrate(const F& f, double a, double b, double rel_tol = 1e-10,
                        double abs_tol = 0.0, int max_subdiv = 4000) {
  auto cmp = [](const Interval& x, const Interval& y) { return x.error < y.error; };
  std::priority_queue<Interval, std::vector<Interval>, decltype(cmp)> heap(cmp);
  Interval whole = gk15(f, a, b);
  heap.push(whole);
  double total = whole.value;
  double err = whole.error;
  Result res;
  res.subdivisions = 1;
  while (err > std::max(abs_tol, rel_tol * std::abs(total)) &&
         res.subdivisions < max_subdiv) {
    Interval worst = heap.top();
    heap.pop();
    double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {
      // interval exhausted at machine precision
      heap.push(Interval{worst.a, worst.b, worst.value, 0.0});
      err -= worst.error;
      continue;
    }
    Interval left = gk15(f, worst.a, mid);
    Interval right = gk15(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++res.subdivisions;
  }
  res.value = total;
  res.error_estimate = err;
  res.converged = err <= std::max(abs_tol, rel_tol * std::abs(total)) * 1.0001 ||
                  err <= 1e-14 * std::abs(total) + 1e-300;
  return res;
}

template <typename F>
inline double integrate_or_throw(const F& f, double a, double b,
                                 double rel_tol = 1e-10, double abs_tol = 0.0,
                                 int max_subdiv = 4000) {
  Result r = integrate(f, a, b, rel_tol, abs_tol, max_subdiv);
  if (!r.converged && r.error_estimate > 1e3 * std::max(abs_tol, rel_tol * std::abs(r.value)))
    throw std::runtime_error("quadrature failed to converge");
  return r.value;
}

}  // namespace stablelike::quad
