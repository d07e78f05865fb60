// Acceptance suite: Monte Carlo dimension experiments at desk scale plus the
// exact-arithmetic and quadrature checks, one line per criterion. Returns the
// number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "stablelike/stablelike.hpp"

namespace fs = std::filesystem;
namespace hn = stablelike::harness;
using nlohmann::json;

namespace {

int g_failures = 0;
fs::path g_root;

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
  }
};

void report(int id, bool pass, const std::string& what, double secs) {
  std::printf("[%2d] %s  %s  (%.1fs)\n", id, pass ? "PASS" : "FAIL", what.c_str(),
              secs);
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

json run_to_summary(hn::ExperimentConfig cfg, const std::string& tag) {
  fs::path dir = g_root / tag;
  fs::remove_all(dir);
  cfg.out_dir = dir.string();
  hn::run(cfg);
  std::ifstream is(dir / "summary.json");
  return json::parse(is);
}

std::string fmt(const char* pattern, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

void criterion_1() {
  Timer t;
  hn::ExperimentConfig cfg;
  cfg.experiment = hn::Experiment::DimRange;
  cfg.beta = "constant(0.7)";
  cfg.epsilon = 0.0;  // auto: solves to ~8.2e-4
  cfg.n_paths = 200;
  cfg.seed = 1101;
  auto s = run_to_summary(cfg, "c01");
  double med = s["median_slope"];
  double secs = t.seconds();
  bool pass = med >= 0.55 && med <= 0.85 && secs <= 300.0;
  report(1, pass,
         "range dimension subcritical (beta 0.7, d=1): median slope " +
             fmt("%.3f in [0.55, 0.85]", med),
         secs);
}

void criterion_2() {
  Timer t;
  hn::ExperimentConfig cfg;
  cfg.experiment = hn::Experiment::DimRange;
  cfg.beta = "constant(1.5)";
  cfg.epsilon = 1e-5;
  cfg.scale_fine = 14;
  cfg.n_paths = 200;
  cfg.seed = 1102;
  auto s = run_to_summary(cfg, "c02");
  double med = s["median_slope"];
  bool pass = med >= 0.9 && med <= 1.05;
  report(2, pass,
         "range dimension supercritical (beta 1.5, d=1): median slope " +
             fmt("%.3f in [0.90, 1.05]", med),
         t.seconds());
}

void criterion_3() {
  Timer t;
  hn::ExperimentConfig cfg;
  cfg.experiment = hn::Experiment::DimRange;
  cfg.beta = "constant(1.2)";
  cfg.dim = 2;
  cfg.epsilon = 3e-6;
  cfg.scale_fine = 13;
  cfg.n_paths = 200;
  cfg.seed = 1103;
  auto s = run_to_summary(cfg, "c03");
  double med = s["median_slope"];
  bool pass = med >= 1.0 && med <= 1.4;
  report(3, pass,
         "range dimension planar (beta 1.2, d=2): median slope " +
             fmt("%.3f in [1.00, 1.40]", med),
         t.seconds());
}

void criterion_4() {
  Timer t;
  hn::ExperimentConfig cfg;
  cfg.experiment = hn::Experiment::DimGraph;
  cfg.beta = "constant(1.5)";
  cfg.epsilon = 3e-6;
  cfg.level_min = 6;
  cfg.level_max = 16;
  cfg.n_paths = 100;
  cfg.seed = 1104;
  auto s_hot = run_to_summary(cfg, "c04a");
  double med_hot = s_hot["median_slope"];

  cfg.beta = "constant(0.7)";
  cfg.epsilon = 0.0;
  cfg.seed = 1105;
  auto s_cold = run_to_summary(cfg, "c04b");
  double med_cold = s_cold["median_slope"];

  const double target = 2.0 - 1.0 / 1.5;
  bool pass = med_hot >= target - 0.12 && med_hot <= target + 0.12 &&
              med_cold >= 0.9 && med_cold <= 1.1;
  report(4, pass,
         "graph dimension d=1: beta 1.5 median " +
             fmt("%.3f in [1.213, 1.453]; beta 0.7 median %.3f in [0.90, 1.10]",
                 med_hot, med_cold),
         t.seconds());
}

void criterion_5() {
  Timer t;
  hn::ExperimentConfig cfg;
  cfg.experiment = hn::Experiment::DimGraph;
  cfg.beta = "constant(1.5)";
  cfg.dim = 2;
  cfg.epsilon = 1e-6;
  cfg.level_min = 3;
  cfg.level_max = 10;
  cfg.n_paths = 64;
  cfg.seed = 1106;
  auto s = run_to_summary(cfg, "c05");
  double med = s["median_slope"];
  bool pass = med >= 1.35 && med <= 1.65;
  report(5, pass,
         "graph dimension d=2 (beta 1.5): median slope " +
             fmt("%.3f in [1.35, 1.65]", med),
         t.seconds());
}

void criterion_6() {
  Timer t;
  hn::ExperimentConfig cfg;
  cfg.experiment = hn::Experiment::DimRange;
  cfg.beta = "bump(0.6,1.4)";
  cfg.x0 = {2.0};
  cfg.epsilon = 1e-5;
  cfg.scale_fine = 14;
  cfg.n_paths = 500;
  cfg.seed = 1107;
  auto s = run_to_summary(cfg, "c06");
  double rank = s["rank_correlation"];
  double mae = s["mean_absolute_error"];
  double mean_est = s["mean_slope"];
  bool pass = rank >= 0.3 && mae <= 0.2 && mean_est > 0.65 && mean_est < 1.35;
  report(6, pass,
         "variable index (bump, d=1): rank corr " +
             fmt("%.3f >= 0.30, MAE %.3f <= 0.20, mean estimate %.3f in (0.65, 1.35)",
                 rank, mae, mean_est),
         t.seconds());
}

void criterion_7() {
  Timer t;
  hn::ExperimentConfig cfg;
  cfg.experiment = hn::Experiment::Couple;
  cfg.beta = "bump(0.6,1.4)";
  cfg.couple_a = 1.0;
  cfg.index_drop = 0.05;
  cfg.epsilon = 1e-4;
  cfg.n_paths = 1000;
  cfg.seed = 1108;
  auto s = run_to_summary(cfg, "c07");
  double frac = s["identical_fraction"];
  double disc = s["max_discrepancy"];
  double secs = t.seconds();
  bool pass = frac == 1.0 && disc == 0.0 && secs <= 60.0;
  report(7, pass,
         "coupling exactness (1000 seeds): identical " +
             fmt("%.4f == 1, max discrepancy %.1e == 0", frac, disc),
         secs);
}

void criterion_8() {
  Timer t;
  hn::ExperimentConfig cfg;
  cfg.experiment = hn::Experiment::PVar;
  cfg.beta = "constant(1.2)";
  cfg.epsilon = 1e-5;
  cfg.p_grid = {0.96, 1.44};
  cfg.depth_min = 4;
  cfg.depth_max = 16;
  cfg.n_paths = 100;
  cfg.seed = 1109;
  auto s = run_to_summary(cfg, "c08");
  double stab = 0.0, grow = 0.0;
  for (const auto& row : s["per_p"]) {
    if (row["p"] == 1.44) stab = row["stabilized_fraction"];
    if (row["p"] == 0.96) grow = row["growing_fraction"];
  }
  bool pass = stab >= 0.9 && grow >= 0.9;
  report(8, pass,
         "p-variation dichotomy (beta 1.2): stabilized at p=1.44 " +
             fmt("%.2f >= 0.90, strict growth at p=0.96 %.2f >= 0.90", stab, grow),
         t.seconds());
}

void criterion_9() {
  Timer t;
  hn::ExperimentConfig cfg;
  cfg.experiment = hn::Experiment::Sojourn;
  cfg.beta = "constant(1.5)";
  cfg.horizon = 0.00390625;  // 2^-8
  cfg.epsilon = 1e-6;
  cfg.sojourn_t0 = 0.0;
  cfg.sojourn_a = 0.00390625;
  cfg.sojourn_s = 0.00390625;
  cfg.lambda_grid = {12.0, 24.0, 48.0};
  cfg.n_paths = 20000;
  cfg.seed = 1110;
  auto s = run_to_summary(cfg, "c09");
  bool pass = true;
  std::string detail;
  for (const auto& row : s["tail"]) {
    double lam = row["lambda"];
    double emp = row["empirical_p"];
    double limit = 1.5 * std::exp(-lam / 12.0);
    if (emp > limit) pass = false;
    detail += fmt("l=%.0f: %.4f<=%.4f ", lam, emp, limit);
  }
  report(9, pass, "sojourn tail (beta 1.5, a=s=2^-8): " + detail, t.seconds());
}

json g_symbol_summary;
double g_symbol_secs = 0.0;

void criterion_10() {
  Timer t;
  hn::ExperimentConfig cfg;
  cfg.experiment = hn::Experiment::SymbolCheck;
  cfg.beta = "bump(0.6,1.4)";
  cfg.epsilon = 0.01;
  g_symbol_summary = run_to_summary(cfg, "c10");
  g_symbol_secs = t.seconds();
  double ca = g_symbol_summary["worst_c_alpha_rel_err"];
  double fo = g_symbol_summary["worst_fourier_rel_err"];
  double pw = g_symbol_summary["worst_planewave_rel_err"];
  bool pass = ca <= 1e-6 && fo <= 1e-4 && pw <= 1e-3;
  report(10, pass,
         "symbol numerics: c_alpha " +
             fmt("%.1e <= 1e-6, fourier %.1e <= 1e-4, plane waves %.1e <= 1e-3",
                 ca, fo, pw),
         g_symbol_secs);
}

void criterion_12() {
  bool lips = g_symbol_summary["lipschitz_ok"];
  double growth = g_symbol_summary["worst_growth_rel_err"];
  bool pass = lips && growth <= 1e-10;
  report(12, pass,
         std::string("appendix bounds: lipschitz 20-pair probe ") +
             (lips ? "holds" : "VIOLATED") +
             fmt(", growth integral rel err %.1e <= 1e-10", growth),
         g_symbol_secs);
}

void criterion_11() {
  Timer t;
  hn::ExperimentConfig cfg;
  cfg.experiment = hn::Experiment::GeneratorCheck;
  cfg.beta = "constant(1.5)";
  cfg.epsilon = 1e-5;
  cfg.gen_h = 1e-3;
  cfg.n_paths = 100000;
  cfg.seed = 1112;
  auto s = run_to_summary(cfg, "c11");
  double z = s["z"];
  double mc = s["mc_estimate"];
  double lf = s["generator_value"];
  bool pass = z <= 5.0;
  report(11, pass,
         "generator consistency (beta 1.5, h=1e-3, 1e5 paths): " +
             fmt("MC %.4f vs quadrature %.4f, z=%.2f <= 5", mc, lf, z),
         t.seconds());
}

void criterion_13() {
  Timer t;
  hn::ExperimentConfig cfg;
  cfg.experiment = hn::Experiment::HeatKernel;
  cfg.beta = "constant(1.5)";
  cfg.horizon = 0.16;
  cfg.epsilon = 1e-4;
  cfg.t_grid = {0.01, 0.04, 0.16};
  cfg.n_paths = 100000;
  cfg.seed = 1113;
  auto s = run_to_summary(cfg, "c13");
  double slope = s["slope"];
  double threshold = s["threshold"];
  bool pass = slope >= threshold;
  report(13, pass,
         "heat kernel bound (beta 1.5, d=1): sup-KDE slope " +
             fmt("%.3f >= %.3f", slope, threshold),
         t.seconds());
}

void criterion_14() {
  Timer t;
  hn::ExperimentConfig cfg;
  cfg.experiment = hn::Experiment::DimRange;
  cfg.beta = "constant(0.7)";
  cfg.epsilon = 0.0;
  cfg.n_paths = 16;
  cfg.seed = 1114;
  cfg.workers = 1;
  fs::path d1 = g_root / "c14a";
  fs::remove_all(d1);
  cfg.out_dir = d1.string();
  auto m1 = hn::run(cfg);

  fs::path d2 = g_root / "c14b";
  fs::remove_all(d2);
  auto m2 = hn::rerun(d1 / "manifest.json", d2.string(), 8);
  bool pass = m1.output_digests == m2.output_digests && !m1.output_digests.empty();
  report(14, pass,
         fmt("determinism: %.0f output digests identical at 1 and 8 workers",
             static_cast<double>(m1.output_digests.size())),
         t.seconds());
}

}  // namespace

int main() {
  g_root = fs::temp_directory_path() / "stablelike_acceptance";
  fs::create_directories(g_root);
  std::printf("acceptance suite: outputs under %s\n", g_root.c_str());

  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();
  criterion_12();
  criterion_13();
  criterion_14();

  std::printf("%s: %d criterion(s) failed\n", g_failures ? "FAIL" : "OK",
              g_failures);
  return g_failures;
}
