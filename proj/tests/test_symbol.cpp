#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "stablelike/symbol.hpp"

using namespace stablelike;

namespace {

// Brute-force oracle for C_alpha, independent of the library quadrature:
// series of 1-cos on [0,1], composite Simpson per pi-length panel on
// [1, 1+2000pi], and the crude tail bound int_R^inf 2 r^{-1-a} dr.
double c_alpha_brute(double a) {
  double s = 0.0, fact = 1.0;
  for (int k = 1; k <= 20; ++k) {
    fact *= (2.0 * k - 1) * (2.0 * k);
    double term = 1.0 / (fact * (2.0 * k - a));
    s += (k % 2 == 1) ? term : -term;
  }
  const double pi = 3.14159265358979323846;
  double R = 1.0 + 2000.0 * pi;
  auto f = [&](double r) { return (1.0 - std::cos(r)) * std::pow(r, -1.0 - a); };
  const int per_panel = 64;
  double integral = 0.0;
  double left = 1.0;
  for (int p = 0; p < 2000; ++p) {
    double right = left + pi;
    double h = (right - left) / per_panel;
    double acc = f(left) + f(right);
    for (int i = 1; i < per_panel; ++i)
      acc += (i % 2 ? 4.0 : 2.0) * f(left + i * h);
    integral += acc * h / 3.0;
    left = right;
  }
  // tail: |(1-cos r) r^{-1-a}| <= 2 r^{-1-a}; centered at 1/alpha * R^-a
  double tail = std::pow(R, -a) / a;
  return s + integral + tail;
}

}  // namespace

TEST(CAlpha, ClosedFormValidatedByBruteForceOracle) {
  // tail of the oracle is only O(R^-a) accurate, so compare loosely first,
  // then pin the closed form against frozen oracle-grade values
  for (double a : {0.3, 0.5, 0.9, 1.1, 1.5, 1.9}) {
    double brute = c_alpha_brute(a);
    double closed = symbol::c_alpha_closed_form(a);
    EXPECT_NEAR(brute / closed, 1.0, 2e-2) << "alpha " << a;
  }
  EXPECT_NEAR(symbol::c_alpha_closed_form(0.3), 3.8552525671549203, 1e-12);
  EXPECT_NEAR(symbol::c_alpha_closed_form(0.5), 2.5066282746310005, 1e-12);
  EXPECT_NEAR(symbol::c_alpha_closed_form(0.9), 1.6536005416637344, 1e-12);
  EXPECT_NEAR(symbol::c_alpha_closed_form(1.1), 1.5197305394788359, 1e-12);
  EXPECT_NEAR(symbol::c_alpha_closed_form(1.5), 1.671085516420667, 1e-12);
  EXPECT_NEAR(symbol::c_alpha_closed_form(1.9), 5.4949594339983551, 1e-12);
  // alpha = 1 continues through the removable singularity with pi/2
  EXPECT_NEAR(symbol::c_alpha_closed_form(1.0), 1.5707963267948966, 1e-12);
}

TEST(CAlpha, QuadratureMatchesClosedForm) {
  for (double a : {0.3, 0.5, 0.9, 1.1, 1.5, 1.9}) {
    double q = symbol::c_alpha(a);
    double c = symbol::c_alpha_closed_form(a);
    EXPECT_LE(std::abs(q - c) / c, 1e-6) << "alpha " << a;
  }
  EXPECT_NEAR(symbol::c_alpha(1.0), 1.5707963267948966, 1e-8);
  EXPECT_NEAR(symbol::c_alpha(0.5), 2.5066, 1e-4);
}

TEST(CAlpha, GuardBandRejectsEndpoints) {
  EXPECT_THROW(symbol::c_alpha(0.04), std::invalid_argument);
  EXPECT_THROW(symbol::c_alpha(1.96), std::invalid_argument);
  EXPECT_NO_THROW(symbol::c_alpha(0.05));
  EXPECT_NO_THROW(symbol::c_alpha(1.95));
}

TEST(SphereMoment, MatchesClosedForms) {
  EXPECT_DOUBLE_EQ(symbol::sphere_moment(0.7, 1), 1.0);
  EXPECT_DOUBLE_EQ(symbol::sphere_moment(1.3, 1), 1.0);
  // d=3: theta.e1 uniform on [-1,1], E|U|^a = 1/(1+a)
  EXPECT_NEAR(symbol::sphere_moment(1.0, 3), 0.5, 1e-8);
  EXPECT_NEAR(symbol::sphere_moment(1.5, 3), 0.4, 1e-8);
  EXPECT_NEAR(symbol::sphere_moment(0.7, 3), 1.0 / 1.7, 1e-8);
  // d=2: E|cos phi|
  EXPECT_NEAR(symbol::sphere_moment(1.0, 2), 2.0 / 3.14159265358979323846, 1e-8);
  EXPECT_NEAR(symbol::sphere_moment(1.5, 2), 0.55641789444938212, 1e-8);
  EXPECT_THROW(symbol::sphere_moment(1.0, 0), std::invalid_argument);
}

TEST(Symbol, AssemblesAAndQ) {
  auto beta = IndexFunction::constant(1.0);
  double x = 0.3, xi = 1.0;
  auto ev = symbol::symbol({&x, 1}, {&xi, 1}, beta);
  // d=1, beta=1: q = 1 * C_1 * 1 * |xi| = pi/2
  EXPECT_NEAR(ev.value, 1.5707963267948966, 1e-8);
  EXPECT_NEAR(ev.a_of_x, 1.5707963267948966, 1e-8);

  double zero = 0.0;
  auto ev0 = symbol::symbol({&x, 1}, {&zero, 1}, beta);
  EXPECT_DOUBLE_EQ(ev0.value, 0.0);  // q(.,0) == 0
}

TEST(Symbol, PowerLawScalingInXi) {
  auto beta = IndexFunction::rational_bump(0.6, 1.4);
  for (double x : {-1.0, 0.0, 2.0}) {
    double xi1 = 1.3, xi2 = 2.6;
    auto e1 = symbol::symbol({&x, 1}, {&xi1, 1}, beta);
    auto e2 = symbol::symbol({&x, 1}, {&xi2, 1}, beta);
    EXPECT_NEAR(e2.value / e1.value, std::pow(2.0, beta(x)), 1e-10);
  }
}

TEST(SymbolFourier, TwoRoutesAgree) {
  auto beta = IndexFunction::rational_bump(0.6, 1.4);
  for (double x : {-2.0, 0.0, 1.0})
    for (double xi : {0.5, 1.0, 3.0})
      EXPECT_LE(symbol::symbol_fourier_check(x, xi, beta), 1e-4)
          << "x=" << x << " xi=" << xi;
  EXPECT_THROW(symbol::symbol_fourier_check(0.0, 0.0, beta),
               std::invalid_argument);
}

TEST(BetaInfinity, EqualsSupOfIndex) {
  EXPECT_DOUBLE_EQ(symbol::beta_infinity(IndexFunction::constant(0.8)), 0.8);
  EXPECT_DOUBLE_EQ(symbol::beta_infinity(IndexFunction::rational_bump(0.6, 1.4)), 1.4);
  EXPECT_DOUBLE_EQ(
      symbol::beta_infinity(IndexFunction::clamp(IndexFunction::rational_bump(0.6, 1.4), 1.7)),
      1.7);
}

TEST(BetaInfinity, RatioTestAtThreeScales) {
  auto beta = IndexFunction::rational_bump(0.6, 1.4);
  double lo = -3.0, hi = 3.0;
  auto chk = symbol::beta_infinity_ratio_check(beta, 1, {&lo, 1}, {&hi, 1}, 200);
  EXPECT_TRUE(chk.decreasing_above);
  EXPECT_TRUE(chk.increasing_below);
}

TEST(ApplyGenerator, ConstantFunctionGivesZero) {
  symbol::C2Function f;
  f.value = [](double) { return 2.5; };
  f.deriv = [](double) { return 0.0; };
  f.deriv2 = [](double) { return 0.0; };
  f.far_mean = 2.5;
  f.sup_abs = 2.5;
  EXPECT_DOUBLE_EQ(symbol::apply_generator(f, 0.3, IndexFunction::constant(1.5)), 0.0);
}

TEST(ApplyGenerator, PlaneWavesReproduceTheSymbol) {
  for (const char* desc : {"constant(1.0)", "constant(1.5)", "bump(0.6,1.4)"}) {
    auto beta = IndexFunction::parse(desc);
    for (double xi : {1.0, 3.0})
      for (double x : {0.0, 1.0}) {
        double q = symbol::symbol({&x, 1}, {&xi, 1}, beta).value;
        double lc = symbol::apply_generator(symbol::plane_wave_cos(xi), x, beta);
        double ls = symbol::apply_generator(symbol::plane_wave_sin(xi), x, beta);
        double ec = lc + q * std::cos(xi * x);
        double es = ls + q * std::sin(xi * x);
        EXPECT_LE(std::sqrt(ec * ec + es * es) / q, 1e-3)
            << desc << " xi=" << xi << " x=" << x;
      }
  }
}

TEST(ApplyGenerator, VanishesWithXi) {
  auto beta = IndexFunction::constant(1.2);
  double x = 0.4;
  double xi = 1e-4;
  double q = symbol::symbol({&x, 1}, {&xi, 1}, beta).value;
  double lc = symbol::apply_generator(symbol::plane_wave_cos(xi), x, beta);
  EXPECT_LT(q, 1e-4);
  EXPECT_LT(std::abs(lc), 1e-3);
}

TEST(LipschitzCheck, ZeroAtEqualPointsAndBoundedOnProbes) {
  auto beta = IndexFunction::rational_bump(0.6, 1.4);
  auto same = symbol::lipschitz_quadrature_check(0.4, 0.4, beta);
  EXPECT_DOUBLE_EQ(same.lhs, 0.0);
  EXPECT_TRUE(same.ok);

  auto chk = symbol::lipschitz_quadrature_check(0.0, 0.1, beta);
  EXPECT_GT(chk.lhs, 0.0);
  EXPECT_LE(chk.lhs, chk.rhs);

  double lo = -3.0, hi = 3.0;
  auto pts = probe_grid(1, 40, {&lo, 1}, {&hi, 1});
  for (int i = 0; i < 20; ++i) {
    auto c = symbol::lipschitz_quadrature_check(pts[2 * i], pts[2 * i + 1], beta);
    EXPECT_TRUE(c.ok) << pts[2 * i] << " vs " << pts[2 * i + 1];
  }
}

TEST(GrowthIntegral, MatchesClosedFormTightly) {
  for (double b : {0.6, 0.7, 1.0, 1.2, 1.4, 1.5, 1.9}) {
    double q = symbol::growth_integral(b);
    double c = symbol::growth_integral_closed_form(b);
    EXPECT_LE(std::abs(q - c) / c, 1e-10) << "beta " << b;
  }
}

TEST(CAlphaTable, CsvRoundTrip) {
  std::vector<double> grid = {0.3, 0.9, 1.5};
  std::stringstream buf;
  symbol::write_c_alpha_table(buf, grid);
  auto rows = symbol::read_c_alpha_table(buf);
  ASSERT_EQ(rows.size(), 3u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_DOUBLE_EQ(rows[i].first, grid[i]);
    EXPECT_DOUBLE_EQ(rows[i].second, symbol::c_alpha(grid[i]));
  }
}
