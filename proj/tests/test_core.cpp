#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "stablelike/core.hpp"
#include "stablelike/jumps.hpp"
#include "stablelike/sde.hpp"

using namespace stablelike;

namespace {

SamplePath make_path(std::vector<double> times, std::vector<double> states,
                     double horizon, int dim = 1) {
  SamplePath p;
  p.dim = dim;
  p.horizon = horizon;
  p.times = std::move(times);
  p.states = std::move(states);
  p.jump_flags.assign(p.times.size(), 1);
  p.jump_flags[0] = 0;
  return p;
}

}  // namespace

TEST(IndexFunction, ConstantEvaluates) {
  auto f = IndexFunction::constant(1.5);
  EXPECT_DOUBLE_EQ(f(3.2), 1.5);
  EXPECT_DOUBLE_EQ(f.beta_min(), 1.5);
  EXPECT_DOUBLE_EQ(f.beta_max(), 1.5);
  EXPECT_DOUBLE_EQ(f.lipschitz(), 0.0);
}

TEST(IndexFunction, ClampDominatesLowBase) {
  auto f = IndexFunction::clamp(IndexFunction::constant(0.7), 1.1);
  for (double x : {-4.0, 0.0, 2.5}) EXPECT_DOUBLE_EQ(f(x), 1.1);
  EXPECT_DOUBLE_EQ(f.beta_min(), 1.1);
  EXPECT_DOUBLE_EQ(f.beta_max(), 1.1);
}

TEST(IndexFunction, RationalBumpValueAtZero) {
  auto f = IndexFunction::rational_bump(0.6, 1.4);
  EXPECT_DOUBLE_EQ(f(0.0), 1.4);
  EXPECT_NEAR(f(1.0), 0.6 + 0.8 / 2.0, 1e-15);
  EXPECT_DOUBLE_EQ(f.beta_max(), 1.4);
  EXPECT_DOUBLE_EQ(f.beta_min(), 0.6);
}

TEST(IndexFunction, RejectsNonFinitePoint) {
  auto f = IndexFunction::constant(1.0);
  EXPECT_THROW(f(std::nan("")), std::invalid_argument);
  EXPECT_THROW(f(std::numeric_limits<double>::infinity()), std::invalid_argument);
}

TEST(IndexFunction, RejectsOutOfRangeParameters) {
  EXPECT_THROW(IndexFunction::constant(0.0), std::invalid_argument);
  EXPECT_THROW(IndexFunction::constant(2.0), std::invalid_argument);
  EXPECT_THROW(IndexFunction::rational_bump(1.4, 0.6), std::invalid_argument);
  EXPECT_THROW(IndexFunction::clamp(IndexFunction::constant(1.0), 2.5),
               std::invalid_argument);
}

TEST(IndexFunction, ClampIsIdempotentOnProbeGrid) {
  auto base = IndexFunction::rational_bump(0.6, 1.4);
  auto once = IndexFunction::clamp(base, 1.0);
  auto twice = IndexFunction::clamp(once, 1.0);
  double lo = -5.0, hi = 5.0;
  auto pts = probe_grid(1, 2000, {&lo, 1}, {&hi, 1});
  for (double x : pts) EXPECT_EQ(once(x), twice(x));
}

TEST(IndexFunction, RadialTableInterpolates) {
  auto f = IndexFunction::radial_table({0.0, 1.0, 2.0}, {0.5, 1.5, 0.9}, 1.0);
  EXPECT_DOUBLE_EQ(f(0.0), 0.5);
  EXPECT_DOUBLE_EQ(f(1.0), 1.5);
  EXPECT_DOUBLE_EQ(f(0.5), 1.0);
  EXPECT_DOUBLE_EQ(f(-0.5), 1.0);  // radial
  EXPECT_DOUBLE_EQ(f(7.0), 0.9);   // constant beyond the last knot
}

TEST(IndexFunction, DescriptorRoundTrip) {
  for (const char* desc :
       {"constant(1.5)", "bump(0.6,1.4)", "clamp(bump(0.6,1.4),1)",
        "table(0:0.5,1:1.5,2:0.9;1)"}) {
    auto f = IndexFunction::parse(desc);
    auto g = IndexFunction::parse(f.describe());
    double lo = -3.0, hi = 3.0;
    auto pts = probe_grid(1, 500, {&lo, 1}, {&hi, 1});
    for (double x : pts) EXPECT_EQ(f(x), g(x)) << desc;
    EXPECT_EQ(f.lipschitz(), g.lipschitz());
  }
  EXPECT_THROW(IndexFunction::parse("wavelet(1)"), std::invalid_argument);
  EXPECT_THROW(IndexFunction::parse("constant(1.5) trailing"),
               std::invalid_argument);
}

TEST(ProbeGrid, BuiltInsSatisfyRangeAndLipschitzContracts) {
  double lo = -5.0, hi = 5.0;
  for (const char* desc : {"constant(0.7)", "bump(0.6,1.4)",
                           "clamp(bump(0.6,1.4),1.1)"}) {
    auto rep = check_on_probe_grid(IndexFunction::parse(desc), 1, {&lo, 1},
                                   {&hi, 1});
    EXPECT_TRUE(rep.range_ok) << desc;
    EXPECT_TRUE(rep.lipschitz_ok) << desc;
  }
}

TEST(ProbeGrid, DetectsUnderDeclaredLipschitzConstant) {
  // slope 1 between knots, declared 0.1
  auto f = IndexFunction::radial_table({0.0, 1.0}, {0.5, 1.5}, 0.1);
  double lo = 0.0, hi = 1.0;
  auto rep = check_on_probe_grid(f, 1, {&lo, 1}, {&hi, 1});
  EXPECT_FALSE(rep.lipschitz_ok);
}

TEST(SamplePath, ValueLookupIsCadlag) {
  auto p = make_path({0.0, 0.3}, {1.0, 2.0}, 1.0);
  EXPECT_DOUBLE_EQ(p.value_at1(0.5), 2.0);
  EXPECT_DOUBLE_EQ(p.value_at1(0.3), 2.0);     // right continuity at the jump
  EXPECT_DOUBLE_EQ(p.value_at1(0.2999), 1.0);  // left limit
  EXPECT_THROW(p.value_at1(1.5), std::out_of_range);
  EXPECT_THROW(p.value_at1(-0.1), std::out_of_range);
}

TEST(SamplePath, SingleEntryPathIsConstant) {
  auto p = make_path({0.0}, {7.0}, 1.0);
  EXPECT_DOUBLE_EQ(p.value_at1(0.0), 7.0);
  EXPECT_DOUBLE_EQ(p.value_at1(0.5), 7.0);
  EXPECT_DOUBLE_EQ(p.value_at1(1.0), 7.0);
}

TEST(SamplePath, RightContinuousAtEveryStoredTime) {
  auto stream = sample_stream(1.0, 0.01, 1, 99);
  SimulationConfig cfg;
  cfg.beta = IndexFunction::constant(1.2);
  cfg.x0 = {0.0};
  cfg.epsilon = 0.01;
  auto p = simulate(cfg, stream);
  for (std::size_t k = 0; k < p.size(); ++k)
    EXPECT_DOUBLE_EQ(p.value_at1(p.times[k]), p.states[k]);
}

TEST(Oscillation, ConstantPathIsZero) {
  auto p = make_path({0.0}, {3.0}, 1.0);
  EXPECT_DOUBLE_EQ(oscillation(p, 0.0, 1.0), 0.0);
}

TEST(Oscillation, OneDimensionalMaxMinusMin) {
  auto p = make_path({0.0, 0.2, 0.6}, {0.0, 2.0, -1.0}, 1.0);
  EXPECT_DOUBLE_EQ(oscillation(p, 0.0, 1.0), 3.0);
}

TEST(Oscillation, EuclideanInTwoDimensions) {
  auto p = make_path({0.0, 0.5}, {0.0, 0.0, 3.0, 4.0}, 1.0, 2);
  EXPECT_DOUBLE_EQ(oscillation(p, 0.0, 1.0), 5.0);
}

TEST(Oscillation, IncludesValueEnteringTheInterval) {
  auto p = make_path({0.0, 0.2, 0.6}, {0.0, 5.0, 6.0}, 1.0);
  // on [0.3, 1.0] the path is 5 then 6; the entry value 5 counts
  EXPECT_DOUBLE_EQ(oscillation(p, 0.3, 1.0), 1.0);
  EXPECT_THROW(oscillation(p, 0.8, 0.2), std::invalid_argument);
}

TEST(SupIndexAlong, ConstantAndBumpExamples) {
  auto p = make_path({0.0, 0.5}, {0.0, 1.0}, 1.0);
  EXPECT_DOUBLE_EQ(sup_index_along(p, IndexFunction::constant(0.8), 0.0, 1.0), 0.8);
  auto bump = IndexFunction::rational_bump(0.6, 1.4);
  auto pinned = make_path({0.0}, {0.0}, 1.0);
  EXPECT_DOUBLE_EQ(sup_index_along(pinned, bump, 0.0, 1.0), 1.4);
  // states {0,1}: max(1.4, 1.0) = 1.4
  EXPECT_DOUBLE_EQ(sup_index_along(p, bump, 0.0, 1.0), 1.4);
}

TEST(SupIndexAlong, MonotoneInTheInterval) {
  auto stream = sample_stream(1.0, 0.005, 1, 12345);
  SimulationConfig cfg;
  cfg.beta = IndexFunction::rational_bump(0.6, 1.4);
  cfg.x0 = {2.0};
  cfg.epsilon = 0.005;
  auto p = simulate(cfg, stream);
  double prev = 0.0;
  for (double t : {0.1, 0.3, 0.5, 0.7, 1.0}) {
    double cur = sup_index_along(p, cfg.beta, 0.0, t);
    EXPECT_GE(cur, prev);
    prev = cur;
  }
}
