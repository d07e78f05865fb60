// Command-line front end: one subcommand per experiment, flags mirroring the
// config fields, plus `validate` and `rerun`. Exit codes: 0 success, 1 config
// error, 2 runtime failure, 3 built-in check failure.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "stablelike/stablelike.hpp"

namespace sl = stablelike;
namespace hn = stablelike::harness;

namespace {

struct CliState {
  hn::ExperimentConfig cfg;
  std::string config_file;
  std::string epsilon_text = "auto";
  std::string x0_text;
  std::string p_grid_text;
  std::string lambda_text;
  std::string t_grid_text;
};

void add_common_options(CLI::App* cmd, CliState& st) {
  cmd->add_option("--config", st.config_file,
                  "key = value config document; flags override its entries");
  cmd->add_option("--beta", st.cfg.beta,
                  "index descriptor: constant(a) | bump(lo,hi) | "
                  "clamp(desc,a) | table(r:v,...;L)");
  cmd->add_option("--dim", st.cfg.dim, "state dimension d");
  cmd->add_option("--x0", st.x0_text, "start point, comma separated");
  cmd->add_option("--horizon", st.cfg.horizon, "time horizon T");
  cmd->add_option("--epsilon", st.epsilon_text,
                  "radial truncation cutoff, or 'auto'");
  cmd->add_option("--auto-epsilon-target", st.cfg.auto_epsilon_target,
                  "auto mode: truncation bound target relative to T");
  cmd->add_option("--epsilon-floor", st.cfg.epsilon_floor,
                  "auto mode: smallest cutoff the solver may pick");
  cmd->add_option("--paths,--n-paths", st.cfg.n_paths, "number of paths");
  cmd->add_option("--seed", st.cfg.seed, "root seed; path k uses substream k");
  cmd->add_option("--workers", st.cfg.workers, "worker threads (0 = hardware)");
  cmd->add_option("--out", st.cfg.out_dir,
                  "output directory (default $STABLELIKE_OUT_DIR or ./out)");
}

// The --config file is loaded into st.cfg before CLI11 parses the rest of
// argv, so explicitly passed flags override file entries.
void preload_config(CliState& st, int argc, char** argv) {
  std::string file;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) file = argv[i + 1];
    else if (a.rfind("--config=", 0) == 0) file = a.substr(9);
  }
  if (file.empty()) return;
  std::ifstream is(file);
  if (!is) throw hn::ConfigError("cannot read config file " + file);
  std::ostringstream buf;
  buf << is.rdbuf();
  st.cfg = hn::parse_config_text(buf.str());
  st.epsilon_text = st.cfg.epsilon == 0.0 ? "auto"
                                          : sl::csv::format_double(st.cfg.epsilon);
}

void finalize(CliState& st, hn::Experiment exp) {
  st.cfg.experiment = exp;
  if (!st.x0_text.empty()) st.cfg.x0 = hn::detail::parse_double_list(st.x0_text);
  if (!st.p_grid_text.empty())
    st.cfg.p_grid = hn::detail::parse_double_list(st.p_grid_text);
  if (!st.lambda_text.empty())
    st.cfg.lambda_grid = hn::detail::parse_double_list(st.lambda_text);
  if (!st.t_grid_text.empty())
    st.cfg.t_grid = hn::detail::parse_double_list(st.t_grid_text);
  if (st.epsilon_text == "auto") {
    st.cfg.epsilon = 0.0;
  } else {
    try {
      st.cfg.epsilon = std::stod(st.epsilon_text);
    } catch (const std::exception&) {
      throw hn::ConfigError("bad --epsilon value '" + st.epsilon_text + "'");
    }
  }
}

int execute(CliState& st, hn::Experiment exp) {
  finalize(st, exp);
  hn::RunManifest manifest = hn::run(st.cfg);
  for (const auto& d : manifest.diagnostics)
    std::cerr << "warning: " << d << "\n";
  std::cout << "wrote " << manifest.output_digests.size() << " files to "
            << st.cfg.resolved_out_dir() << " (" << manifest.wall_ms << " ms)\n";
  if (!manifest.checks_passed) {
    std::cerr << "built-in checks FAILED (see summary.json)\n";
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "stable-like jump process simulator and fractal dimension estimators"};
  app.require_subcommand(1);

  CliState st;
  int exit_code = 0;
  try {
    preload_config(st, argc, argv);
  } catch (const hn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }

  auto wire = [&](const char* name, const char* help, hn::Experiment exp) {
    CLI::App* cmd = app.add_subcommand(name, help);
    add_common_options(cmd, st);
    cmd->callback([&st, &exit_code, exp] { exit_code = execute(st, exp); });
    return cmd;
  };

  CLI::App* c_sim = wire("simulate", "sample one or more paths to CSV",
                         hn::Experiment::Simulate);
  c_sim->add_flag("--emit-stream", st.cfg.emit_stream,
                  "also write the driving jump stream CSV");
  c_sim->add_flag("--emit-binary", st.cfg.emit_binary,
                  "also write the compact binary path format");

  CLI::App* c_range = wire("dim-range", "box-counting dimension of the range",
                           hn::Experiment::DimRange);
  c_range->add_option("--scale-coarse", st.cfg.scale_coarse,
                      "coarsest dyadic scale exponent");
  c_range->add_option("--scale-fine", st.cfg.scale_fine,
                      "finest dyadic scale exponent");
  c_range->add_option("--trim-coarse", st.cfg.trim_coarse,
                      "scales dropped at the coarse end of the fit");
  c_range->add_option("--trim-fine", st.cfg.trim_fine,
                      "scales dropped at the fine end of the fit");

  CLI::App* c_graph = wire("dim-graph", "box-counting dimension of the graph",
                           hn::Experiment::DimGraph);
  c_graph->add_option("--level-min", st.cfg.level_min, "first dyadic level");
  c_graph->add_option("--level-max", st.cfg.level_max, "last dyadic level");
  c_graph->add_option("--trim-coarse", st.cfg.trim_coarse,
                      "levels dropped at the coarse end of the fit");
  c_graph->add_option("--trim-fine", st.cfg.trim_fine,
                      "levels dropped at the fine end of the fit");

  CLI::App* c_pvar =
      wire("pvar", "p-variation profile over dyadic partitions plus jump sums",
           hn::Experiment::PVar);
  c_pvar->add_option("--p-grid", st.p_grid_text, "comma separated p exponents");
  c_pvar->add_option("--depth-min", st.cfg.depth_min, "first dyadic depth");
  c_pvar->add_option("--depth-max", st.cfg.depth_max, "last dyadic depth");
  c_pvar->add_option("--slice-m", st.cfg.slice_m, "index-slice count m");

  CLI::App* c_soj = wire("sojourn", "sojourn time statistic and its tail",
                         hn::Experiment::Sojourn);
  c_soj->add_option("--t0", st.cfg.sojourn_t0, "window anchor time");
  c_soj->add_option("--radius", st.cfg.sojourn_a, "ball radius a");
  c_soj->add_option("--window", st.cfg.sojourn_s, "window length s");
  c_soj->add_option("--lambda-grid", st.lambda_text,
                    "comma separated tail thresholds");

  CLI::App* c_couple = wire(
      "couple", "coupled pair driven by one stream, exact-equality report",
      hn::Experiment::Couple);
  c_couple->add_option("--a", st.cfg.couple_a, "clamp level a (beta ∨ a)");
  c_couple->add_option("--index-drop", st.cfg.index_drop,
                       "stopping-time index drop eps_c");
  c_couple->add_option("--replay", st.cfg.replay,
                       "replay a serialized stream CSV instead of sampling");

  wire("symbol-check",
       "c_alpha, Fourier and plane-wave symbol cross-checks, Appendix bounds",
       hn::Experiment::SymbolCheck);

  CLI::App* c_gen = wire(
      "generator-check",
      "small-time Monte Carlo generator vs quadrature on a smooth bump",
      hn::Experiment::GeneratorCheck);
  c_gen->add_option("--gen-h", st.cfg.gen_h, "time increment h");

  CLI::App* c_heat = wire("heat-kernel",
                          "KDE sup-density scaling check across t_grid",
                          hn::Experiment::HeatKernel);
  c_heat->add_option("--t-grid", st.t_grid_text, "comma separated times");

  // validate: diagnostics only, never runs
  CLI::App* c_val = app.add_subcommand("validate", "print config diagnostics");
  static std::string val_exp = "simulate";
  c_val->add_option("--experiment", val_exp, "experiment the config is for");
  add_common_options(c_val, st);
  c_val->add_option("--t-grid", st.t_grid_text, "comma separated times");
  c_val->callback([&] {
    finalize(st, hn::experiment_from_name(val_exp));
    auto diags = hn::validate(st.cfg);
    for (const auto& d : diags)
      std::cout << (d.severity == hn::Diagnostic::Severity::Error ? "error: "
                                                                  : "warning: ")
                << d.message << "\n";
    if (diags.empty()) std::cout << "config ok\n";
  });

  // rerun: reproduce a manifest byte-for-byte
  CLI::App* c_rerun = app.add_subcommand("rerun", "re-execute a run manifest");
  static std::string manifest_path;
  static std::string rerun_out;
  static int rerun_workers = -1;
  c_rerun->add_option("manifest", manifest_path, "manifest.json path")->required();
  c_rerun->add_option("--out", rerun_out, "output directory override");
  c_rerun->add_option("--workers", rerun_workers, "worker override");
  c_rerun->callback([&] {
    hn::RunManifest m = hn::rerun(manifest_path, rerun_out, rerun_workers);
    std::cout << "wrote " << m.output_digests.size() << " files ("
              << m.wall_ms << " ms)\n";
    if (!m.checks_passed) exit_code = 3;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const hn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << "\n";
    return 2;
  }
  return exit_code;
}
