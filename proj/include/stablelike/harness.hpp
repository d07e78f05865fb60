#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "stablelike/core.hpp"
#include "stablelike/csv.hpp"
#include "stablelike/fractal.hpp"
#include "stablelike/jumps.hpp"
#include "stablelike/sde.hpp"
#include "stablelike/stats.hpp"
#include "stablelike/symbol.hpp"

namespace stablelike::harness {

inline constexpr const char* kVersion = "0.1.0";

// Config parsing problems map to exit code 1; runtime failures to 2; failed
// built-in checks to 3.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Experiment {
  Simulate,
  DimRange,
  DimGraph,
  PVar,
  Sojourn,
  Couple,
  SymbolCheck,
  GeneratorCheck,
  HeatKernel,
};

inline const char* experiment_name(Experiment e) {
  switch (e) {
    case Experiment::Simulate: return "simulate";
    case Experiment::DimRange: return "dim-range";
    case Experiment::DimGraph: return "dim-graph";
    case Experiment::PVar: return "pvar";
    case Experiment::Sojourn: return "sojourn";
    case Experiment::Couple: return "couple";
    case Experiment::SymbolCheck: return "symbol-check";
    case Experiment::GeneratorCheck: return "generator-check";
    case Experiment::HeatKernel: return "heat-kernel";
  }
  return "?";
}

inline Experiment experiment_from_name(const std::string& s) {
  for (Experiment e : {Experiment::Simulate, Experiment::DimRange, Experiment::DimGraph,
                       Experiment::PVar, Experiment::Sojourn, Experiment::Couple,
                       Experiment::SymbolCheck, Experiment::GeneratorCheck,
                       Experiment::HeatKernel})
    if (s == experiment_name(e)) return e;
  throw ConfigError("unknown experiment '" + s + "'");
}

// One key/value document per run; every field has a default and all of them
// are materialized into the manifest.
struct ExperimentConfig {
  Experiment experiment = Experiment::Simulate;
  std::string beta = "constant(1.5)";
  int dim = 1;
  std::vector<double> x0;             // empty = origin
  double horizon = 1.0;
  double epsilon = 0.0;               // 0 = auto
  double auto_epsilon_target = 1e-6;  // truncation_bound <= target * horizon
  double epsilon_floor = 1e-5;
  int n_paths = 1;
  std::uint64_t seed = 1;
  int workers = 0;                    // 0 = hardware concurrency
  double index_drop = 0.05;           // eps_c for coupling stopping times
  double couple_a = 1.0;
  int slice_m = 4;

  // dim-range scales 2^{-k}, k = scale_coarse .. scale_fine
  int scale_coarse = 2;
  int scale_fine = 12;
  // dim-graph dyadic levels
  int level_min = 4;
  int level_max = 13;
  int trim_coarse = 2;
  int trim_fine = 2;

  std::vector<double> p_grid;         // empty = 0.5 .. 2.0 step 0.1
  int depth_min = 4;
  int depth_max = 16;

  double sojourn_t0 = 0.0;
  double sojourn_a = 0.00390625;      // 2^-8
  double sojourn_s = 0.00390625;
  std::vector<double> lambda_grid = {12.0, 24.0, 48.0};

  std::vector<double> t_grid = {0.01, 0.04, 0.16};
  double gen_h = 1e-3;

  std::string out_dir;                // empty = $STABLELIKE_OUT_DIR or ./out
  std::string replay;                 // stream csv for coupling replays
  bool emit_stream = false;
  bool emit_binary = false;

  IndexFunction index_function() const { return IndexFunction::parse(beta); }

  std::vector<double> start_point() const {
    if (x0.empty()) return std::vector<double>(dim, 0.0);
    if (x0.size() == 1 && dim > 1) return std::vector<double>(dim, x0[0]);
    if (x0.size() != static_cast<std::size_t>(dim))
      throw ConfigError("x0 must have 1 or dim entries");
    return x0;
  }

  std::vector<double> scales() const {
    std::vector<double> s;
    for (int k = scale_coarse; k <= scale_fine; ++k) s.push_back(std::pow(2.0, -k));
    return s;
  }

  std::vector<int> levels() const {
    std::vector<int> l;
    for (int j = level_min; j <= level_max; ++j) l.push_back(j);
    return l;
  }

  std::vector<int> depths() const {
    std::vector<int> d;
    for (int j = depth_min; j <= depth_max; ++j) d.push_back(j);
    return d;
  }

  std::vector<double> p_grid_or_default() const {
    if (!p_grid.empty()) return p_grid;
    std::vector<double> p;
    for (int i = 5; i <= 20; ++i) p.push_back(0.1 * i);
    return p;
  }

  int resolved_workers() const {
    if (workers > 0) return workers;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
  }

  std::string resolved_out_dir() const {
    if (!out_dir.empty()) return out_dir;
    if (const char* env = std::getenv("STABLELIKE_OUT_DIR")) return env;
    return "out";
  }
};

namespace detail {

inline std::string join_doubles(std::span<const double> v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += csv::format_double(v[i]);
  }
  return s;
}

inline std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  return out;
}

}  // namespace detail

// The key/value document captures the experiment identity; the runtime-only
// workers/out_dir knobs live in the manifest instead, so re-runs at a
// different worker count reproduce every output byte.
inline std::string to_config_text(const ExperimentConfig& c) {
  std::ostringstream os;
  auto kv = [&](const char* k, const std::string& v) { os << k << " = " << v << "\n"; };
  kv("experiment", experiment_name(c.experiment));
  kv("beta", c.beta);
  kv("dim", std::to_string(c.dim));
  kv("x0", detail::join_doubles(c.x0));
  kv("horizon", csv::format_double(c.horizon));
  kv("epsilon", c.epsilon == 0.0 ? "auto" : csv::format_double(c.epsilon));
  kv("auto_epsilon_target", csv::format_double(c.auto_epsilon_target));
  kv("epsilon_floor", csv::format_double(c.epsilon_floor));
  kv("n_paths", std::to_string(c.n_paths));
  kv("seed", csv::format_u64(c.seed));
  kv("index_drop", csv::format_double(c.index_drop));
  kv("couple_a", csv::format_double(c.couple_a));
  kv("slice_m", std::to_string(c.slice_m));
  kv("scale_coarse", std::to_string(c.scale_coarse));
  kv("scale_fine", std::to_string(c.scale_fine));
  kv("level_min", std::to_string(c.level_min));
  kv("level_max", std::to_string(c.level_max));
  kv("trim_coarse", std::to_string(c.trim_coarse));
  kv("trim_fine", std::to_string(c.trim_fine));
  kv("p_grid", detail::join_doubles(c.p_grid));
  kv("depth_min", std::to_string(c.depth_min));
  kv("depth_max", std::to_string(c.depth_max));
  kv("sojourn_t0", csv::format_double(c.sojourn_t0));
  kv("sojourn_a", csv::format_double(c.sojourn_a));
  kv("sojourn_s", csv::format_double(c.sojourn_s));
  kv("lambda_grid", detail::join_doubles(c.lambda_grid));
  kv("t_grid", detail::join_doubles(c.t_grid));
  kv("gen_h", csv::format_double(c.gen_h));
  kv("replay", c.replay);
  kv("emit_stream", c.emit_stream ? "true" : "false");
  kv("emit_binary", c.emit_binary ? "true" : "false");
  return os.str();
}

inline void apply_config_entry(ExperimentConfig& c, const std::string& key,
                               const std::string& value) {
  try {
    if (key == "experiment") c.experiment = experiment_from_name(value);
    else if (key == "beta") c.beta = value;
    else if (key == "dim") c.dim = std::stoi(value);
    else if (key == "x0") c.x0 = detail::parse_double_list(value);
    else if (key == "horizon") c.horizon = std::stod(value);
    else if (key == "epsilon") c.epsilon = (value == "auto") ? 0.0 : std::stod(value);
    else if (key == "auto_epsilon_target") c.auto_epsilon_target = std::stod(value);
    else if (key == "epsilon_floor") c.epsilon_floor = std::stod(value);
    else if (key == "n_paths") c.n_paths = std::stoi(value);
    else if (key == "seed") c.seed = std::stoull(value);
    else if (key == "workers") c.workers = std::stoi(value);
    else if (key == "index_drop") c.index_drop = std::stod(value);
    else if (key == "couple_a") c.couple_a = std::stod(value);
    else if (key == "slice_m") c.slice_m = std::stoi(value);
    else if (key == "scale_coarse") c.scale_coarse = std::stoi(value);
    else if (key == "scale_fine") c.scale_fine = std::stoi(value);
    else if (key == "level_min") c.level_min = std::stoi(value);
    else if (key == "level_max") c.level_max = std::stoi(value);
    else if (key == "trim_coarse") c.trim_coarse = std::stoi(value);
    else if (key == "trim_fine") c.trim_fine = std::stoi(value);
    else if (key == "p_grid") c.p_grid = detail::parse_double_list(value);
    else if (key == "depth_min") c.depth_min = std::stoi(value);
    else if (key == "depth_max") c.depth_max = std::stoi(value);
    else if (key == "sojourn_t0") c.sojourn_t0 = std::stod(value);
    else if (key == "sojourn_a") c.sojourn_a = std::stod(value);
    else if (key == "sojourn_s") c.sojourn_s = std::stod(value);
    else if (key == "lambda_grid") c.lambda_grid = detail::parse_double_list(value);
    else if (key == "t_grid") c.t_grid = detail::parse_double_list(value);
    else if (key == "gen_h") c.gen_h = std::stod(value);
    else if (key == "out_dir") c.out_dir = value;
    else if (key == "replay") c.replay = value;
    else if (key == "emit_stream") c.emit_stream = (value == "true" || value == "1");
    else if (key == "emit_binary") c.emit_binary = (value == "true" || value == "1");
    else throw ConfigError("unknown config key '" + key + "'");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("bad value for '" + key + "': " + e.what());
  }
}

inline ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig c;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      bool blank = line.find_first_not_of(" \t\r") == std::string::npos;
      if (blank) continue;
      throw ConfigError("config line without '=': " + line);
    }
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line with empty key");
    if (key == "x0" && value.empty()) {
      c.x0.clear();
      continue;
    }
    if ((key == "p_grid" || key == "lambda_grid" || key == "t_grid") && value.empty()) {
      apply_config_entry(c, key, "");
      continue;
    }
    if (value.empty() && key != "out_dir" && key != "replay") continue;
    apply_config_entry(c, key, value);
  }
  return c;
}

struct Diagnostic {
  enum class Severity { Warning, Error };
  Severity severity = Severity::Warning;
  std::string message;
};

inline double resolve_epsilon(const ExperimentConfig& c, const IndexFunction& beta) {
  if (c.epsilon > 0.0) return c.epsilon;
  return auto_epsilon(beta.beta_max(), c.auto_epsilon_target, c.epsilon_floor);
}

// Feasibility and sanity diagnostics; never throws, mirrors what run() would
// reject plus softer warnings.
inline std::vector<Diagnostic> validate(const ExperimentConfig& c) {
  std::vector<Diagnostic> out;
  auto warn = [&](std::string m) {
    out.push_back({Diagnostic::Severity::Warning, std::move(m)});
  };
  auto error = [&](std::string m) {
    out.push_back({Diagnostic::Severity::Error, std::move(m)});
  };
  std::optional<IndexFunction> beta;
  try {
    beta = c.index_function();
  } catch (const std::exception& e) {
    error(std::string("beta descriptor: ") + e.what());
  }
  if (c.dim < 1) error("dim must be >= 1");
  if (!(c.horizon > 0.0)) error("horizon must be > 0");
  if (c.n_paths < 1) error("n_paths must be >= 1");
  if (c.epsilon != 0.0 && !(c.epsilon > 0.0 && c.epsilon < 1.0))
    error("epsilon must be 'auto' or lie in (0,1)");
  if (!(c.index_drop > 0.0)) error("index_drop must be > 0");
  if (!beta) return out;

  if (beta->beta_max() > 1.9)
    warn("beta_max " + csv::format_double(beta->beta_max()) +
         " is near the guard band; C_alpha quadrature becomes unstable above 1.95");
  if (beta->beta_min() < 0.1)
    warn("beta_min " + csv::format_double(beta->beta_min()) +
         " is near the guard band; C_alpha quadrature becomes unstable below 0.05");

  double eps = resolve_epsilon(c, *beta);
  if (c.epsilon == 0.0) {
    double q = 2.0 / beta->beta_max() - 1.0;
    double solved = std::pow(q * c.auto_epsilon_target, 1.0 / q);
    if (solved < c.epsilon_floor)
      warn("auto epsilon solve " + csv::format_double(solved) +
           " clamped to floor " + csv::format_double(c.epsilon_floor) +
           "; truncation bound target not met");
  }
  double events_per_path = c.horizon / eps;
  double total_events = events_per_path * c.n_paths;
  if (total_events > 1e11)
    warn("~" + csv::format_double(total_events) +
         " events across the run: infeasible at desk scale");
  else if (total_events > 2e9)
    warn("~" + csv::format_double(total_events) + " events across the run: slow");
  double mem = static_cast<double>(c.resolved_workers()) * events_per_path *
               (16.0 * (c.dim + 2));
  if (mem > 2e9)
    warn("worker-resident stream+path memory ~" + csv::format_double(mem / 1e9) +
         " GB");

  if (c.experiment == Experiment::DimRange) {
    double min_scale = std::pow(2.0, -c.scale_fine);
    if (min_scale < 1.0 / events_per_path)
      warn("finest scale below event resolution 1/(T/eps): slope biased toward 0");
    double disp = truncation_displacement_scale(beta->beta_max(), eps);
    if (min_scale < 2.0 * disp)
      warn("finest scale below 2x truncation displacement scale " +
           csv::format_double(disp));
  }
  if (c.experiment == Experiment::Sojourn &&
      c.sojourn_t0 + c.sojourn_s > c.horizon)
    error("sojourn window t0+s exceeds horizon");
  if (c.experiment == Experiment::GeneratorCheck && !(c.gen_h > 0 && c.gen_h <= c.horizon))
    error("gen_h must lie in (0, horizon]");
  if (c.experiment == Experiment::Couple) {
    auto x = c.start_point();
    double bx0 = (*beta)(std::span<const double>(x));
    if (c.couple_a > bx0 - 2.0 * c.index_drop)
      warn("couple_a exceeds beta(x0) - 2*index_drop; the coupling identity is "
           "not guaranteed from this start point");
  }
  if (c.experiment == Experiment::HeatKernel) {
    if (c.dim != 1) error("heat-kernel experiment supports d=1 only");
    if (c.n_paths < 10000) error("heat-kernel needs >= 10^4 paths for the KDE");
    for (double t : c.t_grid)
      if (!(t > 0.0 && t <= c.horizon)) error("t_grid entries must lie in (0, horizon]");
  }
  if (c.experiment == Experiment::GeneratorCheck && c.dim != 1)
    error("generator-check supports d=1 only");
  return out;
}

// ---------------------------------------------------------------------------
// parallel path batches with deterministic, seed-ordered reduction

template <typename Fn>
inline void parallel_for(std::size_t n, int workers, Fn&& fn) {
  if (n == 0) return;
  int nw = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), n);
  if (nw <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  pool.reserve(nw);
  for (int w = 0; w < nw; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_mu);
          if (!first_error) first_error = std::current_exception();
          next.store(n);
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

// ---------------------------------------------------------------------------
// path serialization

inline void write_path_csv(const SamplePath& p, std::ostream& os) {
  csv::Writer w(os);
  w.field("t");
  for (int c = 0; c < p.dim; ++c) w.field("x" + std::to_string(c + 1));
  w.field("jump");
  w.end_row();
  for (std::size_t k = 0; k < p.size(); ++k) {
    w.field(p.times[k]);
    for (int c = 0; c < p.dim; ++c) w.field(p.states[k * p.dim + c]);
    w.field(static_cast<std::uint64_t>(p.jump_flags[k]));
    w.end_row();
  }
}

inline void write_path_binary(const SamplePath& p, std::ostream& os) {
  const char magic[8] = {'S', 'L', 'P', 'A', 'T', 'H', '0', '1'};
  os.write(magic, 8);
  std::int32_t dim = p.dim;
  std::int64_t n = static_cast<std::int64_t>(p.size());
  os.write(reinterpret_cast<const char*>(&dim), sizeof dim);
  os.write(reinterpret_cast<const char*>(&n), sizeof n);
  os.write(reinterpret_cast<const char*>(&p.horizon), sizeof p.horizon);
  os.write(reinterpret_cast<const char*>(p.times.data()),
           static_cast<std::streamsize>(p.times.size() * sizeof(double)));
  os.write(reinterpret_cast<const char*>(p.states.data()),
           static_cast<std::streamsize>(p.states.size() * sizeof(double)));
  os.write(reinterpret_cast<const char*>(p.jump_flags.data()),
           static_cast<std::streamsize>(p.jump_flags.size()));
}

inline SamplePath read_path_binary(std::istream& is) {
  char magic[8];
  is.read(magic, 8);
  if (!is || std::string(magic, 8) != "SLPATH01")
    throw std::runtime_error("path binary: bad magic");
  std::int32_t dim = 0;
  std::int64_t n = 0;
  SamplePath p;
  is.read(reinterpret_cast<char*>(&dim), sizeof dim);
  is.read(reinterpret_cast<char*>(&n), sizeof n);
  is.read(reinterpret_cast<char*>(&p.horizon), sizeof p.horizon);
  if (!is || dim < 1 || n < 1) throw std::runtime_error("path binary: bad header");
  p.dim = dim;
  p.times.resize(static_cast<std::size_t>(n));
  p.states.resize(static_cast<std::size_t>(n) * dim);
  p.jump_flags.resize(static_cast<std::size_t>(n));
  is.read(reinterpret_cast<char*>(p.times.data()),
          static_cast<std::streamsize>(p.times.size() * sizeof(double)));
  is.read(reinterpret_cast<char*>(p.states.data()),
          static_cast<std::streamsize>(p.states.size() * sizeof(double)));
  is.read(reinterpret_cast<char*>(p.jump_flags.data()),
          static_cast<std::streamsize>(p.jump_flags.size()));
  if (!is) throw std::runtime_error("path binary: truncated");
  return p;
}

// ---------------------------------------------------------------------------
// manifests

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[v & 0xF];
    v >>= 4;
  }
  return s;
}

inline std::string digest_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << is.rdbuf();
  return hex64(fnv1a64(buf.str()));
}

struct RunManifest {
  std::string version = kVersion;
  std::string experiment;
  std::string config_text;
  ExperimentConfig config;             // resolved: epsilon materialized
  std::vector<std::uint64_t> path_seeds;
  double wall_ms = 0.0;
  std::map<std::string, std::string> output_digests;
  std::vector<std::string> diagnostics;
  bool checks_passed = true;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["version"] = version;
    j["experiment"] = experiment;
    j["config_text"] = config_text;
    j["workers"] = config.workers;
    j["out_dir"] = config.resolved_out_dir();
    std::vector<std::string> seeds;
    seeds.reserve(path_seeds.size());
    for (auto s : path_seeds) seeds.push_back(hex64(s));
    j["path_seeds"] = seeds;
    j["wall_ms"] = wall_ms;
    j["outputs"] = output_digests;
    j["diagnostics"] = diagnostics;
    j["checks_passed"] = checks_passed;
    return j;
  }
};

inline void save_manifest(const RunManifest& m, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  os << m.to_json().dump(2) << "\n";
}

inline RunManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot read manifest " + path.string());
  nlohmann::json j = nlohmann::json::parse(is);
  RunManifest m;
  m.version = j.value("version", "");
  m.experiment = j.value("experiment", "");
  m.config_text = j.at("config_text").get<std::string>();
  m.config = parse_config_text(m.config_text);
  m.config.workers = j.value("workers", 0);
  m.config.out_dir = j.value("out_dir", "");
  m.wall_ms = j.value("wall_ms", 0.0);
  if (j.contains("outputs"))
    m.output_digests = j["outputs"].get<std::map<std::string, std::string>>();
  m.checks_passed = j.value("checks_passed", true);
  return m;
}

RunManifest run(const ExperimentConfig& config);

inline RunManifest rerun(const std::filesystem::path& manifest_path,
                         const std::string& out_dir = "", int workers = -1) {
  RunManifest m = load_manifest(manifest_path);
  ExperimentConfig cfg = m.config;
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (workers >= 0) cfg.workers = workers;
  return run(cfg);
}

// ---------------------------------------------------------------------------
// experiment driver

namespace detail {

struct PathOutcome {
  bool censored = false;
  double slope = std::nan("");
  double r2 = 0.0;
  double predicted = std::nan("");
  fractal::DimensionEstimate estimate;
};

struct RunContext {
  const ExperimentConfig& cfg;
  IndexFunction beta;
  std::vector<double> x0;
  double epsilon;
  std::filesystem::path dir;
  RunManifest& manifest;

  SimulationConfig sim_config(std::uint64_t path_seed) const {
    SimulationConfig sc;
    sc.beta = beta;
    sc.x0 = x0;
    sc.horizon = cfg.horizon;
    sc.epsilon = epsilon;
    sc.dim = cfg.dim;
    sc.seed = path_seed;
    sc.index_drop = cfg.index_drop;
    return sc;
  }

  void emit(const std::string& name, const std::string& contents) const {
    std::filesystem::path p = dir / name;
    {
      std::ofstream os(p, std::ios::binary);
      if (!os) throw std::runtime_error("cannot write " + p.string());
      os << contents;
    }
    manifest.output_digests[name] = digest_file(p);
  }
};

inline nlohmann::json estimate_to_json(const fractal::DimensionEstimate& e) {
  nlohmann::json j;
  j["slope"] = e.slope;
  j["r2"] = e.fit_r2;
  j["window"] = {e.window_lo, e.window_hi};
  j["degenerate"] = e.degenerate;
  j["poor_fit"] = e.poor_fit;
  return j;
}

inline void run_dimension(RunContext& ctx, bool graph) {
  const auto& cfg = ctx.cfg;
  auto scales = cfg.scales();
  auto levels = cfg.levels();
  std::vector<PathOutcome> outcomes(cfg.n_paths);
  parallel_for(cfg.n_paths, cfg.resolved_workers(), [&](std::size_t i) {
    auto seed = ctx.manifest.path_seeds[i];
    JumpStream stream = sample_stream(cfg.horizon, ctx.epsilon, cfg.dim, seed);
    PathOutcome& out = outcomes[i];
    try {
      SamplePath path = simulate(ctx.sim_config(seed), stream);
      double sup = sup_index_along(path, ctx.beta, 0.0, cfg.horizon);
      out.predicted = graph ? fractal::predicted_graph_dimension(sup, cfg.dim)
                            : fractal::predicted_range_dimension(sup, cfg.dim);
      out.estimate = graph
                         ? fractal::box_count_graph(path, levels, cfg.trim_coarse,
                                                    cfg.trim_fine)
                         : fractal::box_count_range(path, scales, cfg.trim_coarse,
                                                    cfg.trim_fine);
      out.slope = out.estimate.slope;
      out.r2 = out.estimate.fit_r2;
    } catch (const PathExplosion&) {
      out.censored = true;
    }
  });

  std::ostringstream fits, perscale;
  csv::Writer wf(fits), ws(perscale);
  wf.row("path", "seed", "slope", "r2", "predicted", "censored");
  ws.row("path", "scale", "count");
  std::vector<double> slopes, preds;
  std::size_t censored = 0;
  for (int i = 0; i < cfg.n_paths; ++i) {
    const auto& o = outcomes[i];
    wf.field(static_cast<std::uint64_t>(i));
    wf.field(hex64(ctx.manifest.path_seeds[i]));
    wf.field(o.slope);
    wf.field(o.r2);
    wf.field(o.predicted);
    wf.field(o.censored);
    wf.end_row();
    if (o.censored) {
      ++censored;
      continue;
    }
    for (std::size_t s = 0; s < o.estimate.scales.size(); ++s)
      ws.row(static_cast<std::uint64_t>(i), o.estimate.scales[s], o.estimate.counts[s]);
    slopes.push_back(o.slope);
    preds.push_back(o.predicted);
  }
  std::string base = graph ? "dimgraph" : "dimrange";
  ctx.emit(base + "_fits.csv", fits.str());
  ctx.emit(base + "_perscale.csv", perscale.str());

  nlohmann::json summary;
  summary["experiment"] = experiment_name(cfg.experiment);
  summary["n_paths"] = cfg.n_paths;
  summary["censored"] = censored;
  summary["epsilon"] = ctx.epsilon;
  if (!slopes.empty()) {
    summary["median_slope"] = stats::median(slopes);
    summary["mean_slope"] = stats::mean(slopes);
    auto rep = fractal::dimension_vs_prediction(preds, slopes);
    summary["mean_absolute_error"] = rep.mean_absolute_error;
    summary["rank_correlation"] = rep.rank_correlation;
    summary["mean_prediction"] = rep.mean_prediction;
  }
  ctx.emit("summary.json", summary.dump(2) + "\n");
}

inline void run_simulate(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  std::vector<std::string> path_csv(cfg.n_paths), stream_csv(cfg.n_paths),
      path_bin(cfg.n_paths);
  std::vector<char> censored(cfg.n_paths, 0);
  parallel_for(cfg.n_paths, cfg.resolved_workers(), [&](std::size_t i) {
    auto seed = ctx.manifest.path_seeds[i];
    JumpStream stream = sample_stream(cfg.horizon, ctx.epsilon, cfg.dim, seed);
    try {
      SamplePath path = simulate(ctx.sim_config(seed), stream);
      std::ostringstream os;
      write_path_csv(path, os);
      path_csv[i] = os.str();
      if (cfg.emit_binary) {
        std::ostringstream ob(std::ios::binary);
        write_path_binary(path, ob);
        path_bin[i] = ob.str();
      }
      if (cfg.emit_stream) {
        std::ostringstream osr;
        write_stream_csv(stream, osr);
        stream_csv[i] = osr.str();
      }
    } catch (const PathExplosion&) {
      censored[i] = 1;
    }
  });
  std::size_t n_censored = 0;
  for (int i = 0; i < cfg.n_paths; ++i) {
    if (censored[i]) {
      ++n_censored;
      continue;
    }
    std::string tag = std::to_string(i);
    ctx.emit("path_" + tag + ".csv", path_csv[i]);
    if (cfg.emit_binary) ctx.emit("path_" + tag + ".bin", path_bin[i]);
    if (cfg.emit_stream) ctx.emit("stream_" + tag + ".csv", stream_csv[i]);
  }
  nlohmann::json summary;
  summary["experiment"] = "simulate";
  summary["n_paths"] = cfg.n_paths;
  summary["censored"] = n_censored;
  summary["epsilon"] = ctx.epsilon;
  summary["truncation_bound"] =
      truncation_bound(ctx.beta.beta_max(), ctx.epsilon, cfg.horizon);
  ctx.emit("summary.json", summary.dump(2) + "\n");
}

inline void run_pvar(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  auto p_grid = cfg.p_grid_or_default();
  auto depths = cfg.depths();
  auto p_exponents = default_slice_exponents(cfg.slice_m);

  struct Out {
    fractal::PVariationProfile prof;
    std::vector<double> slices;
    bool censored = false;
  };
  std::vector<Out> outs(cfg.n_paths);
  parallel_for(cfg.n_paths, cfg.resolved_workers(), [&](std::size_t i) {
    auto seed = ctx.manifest.path_seeds[i];
    JumpStream stream = sample_stream(cfg.horizon, ctx.epsilon, cfg.dim, seed);
    try {
      SamplePath path = simulate(ctx.sim_config(seed), stream);
      outs[i].prof = fractal::p_variation(path, p_grid, depths);
      outs[i].slices = slice_jump_sums(path, ctx.beta, cfg.slice_m, p_exponents);
    } catch (const PathExplosion&) {
      outs[i].censored = true;
    }
  });

  std::ostringstream vp, sp, sl;
  csv::Writer wv(vp), wsp(sp), wsl(sl);
  wv.row("path", "p", "depth", "v");
  wsp.row("path", "p", "s");
  wsl.row("path", "slice", "p_slice", "s_slice");
  std::vector<std::size_t> stab(p_grid.size(), 0), grow(p_grid.size(), 0);
  std::vector<double> vhat;
  std::size_t kept = 0;
  for (int i = 0; i < cfg.n_paths; ++i) {
    const auto& o = outs[i];
    if (o.censored) continue;
    ++kept;
    for (std::size_t pi = 0; pi < p_grid.size(); ++pi) {
      for (std::size_t di = 0; di < depths.size(); ++di)
        wv.row(static_cast<std::uint64_t>(i), p_grid[pi], depths[di],
               o.prof.v_values[di][pi]);
      wsp.row(static_cast<std::uint64_t>(i), p_grid[pi], o.prof.s_values[pi]);
      if (o.prof.stabilized(pi)) ++stab[pi];
      if (o.prof.strictly_growing(pi)) ++grow[pi];
    }
    for (int k = 0; k < cfg.slice_m; ++k)
      wsl.row(static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(k),
              p_exponents[k], o.slices[k]);
    double vi = o.prof.variation_index();
    if (!std::isnan(vi)) vhat.push_back(vi);
  }
  ctx.emit("pvar_vp.csv", vp.str());
  ctx.emit("pvar_sp.csv", sp.str());
  ctx.emit("pvar_slices.csv", sl.str());

  nlohmann::json summary;
  summary["experiment"] = "pvar";
  summary["n_paths"] = cfg.n_paths;
  summary["censored"] = cfg.n_paths - kept;
  summary["epsilon"] = ctx.epsilon;
  nlohmann::json per_p = nlohmann::json::array();
  for (std::size_t pi = 0; pi < p_grid.size(); ++pi) {
    nlohmann::json row;
    row["p"] = p_grid[pi];
    row["stabilized_fraction"] =
        kept ? static_cast<double>(stab[pi]) / static_cast<double>(kept) : 0.0;
    row["growing_fraction"] =
        kept ? static_cast<double>(grow[pi]) / static_cast<double>(kept) : 0.0;
    per_p.push_back(row);
  }
  summary["per_p"] = per_p;
  if (!vhat.empty()) summary["variation_index_median"] = stats::median(vhat);
  ctx.emit("summary.json", summary.dump(2) + "\n");
}

inline void run_sojourn(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  std::vector<double> values(cfg.n_paths, std::nan(""));
  parallel_for(cfg.n_paths, cfg.resolved_workers(), [&](std::size_t i) {
    auto seed = ctx.manifest.path_seeds[i];
    JumpStream stream = sample_stream(cfg.horizon, ctx.epsilon, cfg.dim, seed);
    try {
      SamplePath path = simulate(ctx.sim_config(seed), stream);
      values[i] =
          fractal::sojourn(path, cfg.sojourn_t0, cfg.sojourn_a, cfg.sojourn_s).value;
    } catch (const PathExplosion&) {
    }
  });

  std::ostringstream vs, tail;
  csv::Writer wv(vs), wt(tail);
  wv.row("path", "sojourn_time");
  std::vector<double> kept;
  for (int i = 0; i < cfg.n_paths; ++i) {
    wv.row(static_cast<std::uint64_t>(i), values[i]);
    if (!std::isnan(values[i])) kept.push_back(values[i]);
  }
  ctx.emit("sojourn.csv", vs.str());

  double beta_lower = ctx.beta.beta_min();
  double scale = cfg.sojourn_a * std::pow(cfg.sojourn_s, 1.0 - 1.0 / beta_lower);
  double tail_const = 2.0 / (1.0 - 1.0 / beta_lower);
  wt.row("lambda", "threshold", "empirical_p", "bound");
  nlohmann::json tails = nlohmann::json::array();
  for (double lam : cfg.lambda_grid) {
    double thr = lam * scale;
    double count = 0;
    for (double v : kept)
      if (v >= thr) count += 1.0;
    double p = kept.empty() ? 0.0 : count / static_cast<double>(kept.size());
    double bound = std::exp(-lam / (2.0 * tail_const));
    wt.row(lam, thr, p, bound);
    nlohmann::json row;
    row["lambda"] = lam;
    row["threshold"] = thr;
    row["empirical_p"] = p;
    row["bound"] = bound;
    tails.push_back(row);
  }
  ctx.emit("sojourn_tail.csv", tail.str());

  nlohmann::json summary;
  summary["experiment"] = "sojourn";
  summary["n_paths"] = cfg.n_paths;
  summary["censored"] = cfg.n_paths - kept.size();
  summary["epsilon"] = ctx.epsilon;
  summary["beta_lower"] = beta_lower;
  summary["tail"] = tails;
  if (!kept.empty()) summary["mean_sojourn"] = stats::mean(kept);
  ctx.emit("summary.json", summary.dump(2) + "\n");
}

inline void run_couple(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  std::optional<JumpStream> replay;
  int n = cfg.n_paths;
  if (!cfg.replay.empty()) {
    std::ifstream is(cfg.replay, std::ios::binary);
    if (!is) throw ConfigError("cannot read replay stream " + cfg.replay);
    replay = read_stream_csv(is);
    if (replay->dim != cfg.dim) throw ConfigError("replay stream dimension mismatch");
    n = 1;
  }
  std::vector<CouplingReport> reports(n);
  std::vector<char> censored(n, 0);
  parallel_for(n, cfg.resolved_workers(), [&](std::size_t i) {
    auto seed = ctx.manifest.path_seeds[i];
    JumpStream stream = replay ? *replay
                               : sample_stream(cfg.horizon, ctx.epsilon, cfg.dim, seed);
    SimulationConfig sc = ctx.sim_config(seed);
    if (replay) {
      sc.horizon = stream.horizon;
      sc.epsilon = stream.epsilon;
    }
    try {
      reports[i] = simulate_coupled(sc, cfg.couple_a, stream).report;
    } catch (const PathExplosion&) {
      censored[i] = 1;
    }
  });

  std::ostringstream os;
  csv::Writer w(os);
  w.row("path", "seed", "tau_x", "tau_xa", "tau_ge1", "tau_min", "tau",
        "max_discrepancy", "identical", "censored");
  std::size_t identical = 0, kept = 0;
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto& r = reports[i];
    w.field(static_cast<std::uint64_t>(i));
    w.field(hex64(ctx.manifest.path_seeds[i]));
    w.field(r.tau_x);
    w.field(r.tau_xa);
    if (r.tau_ge1) w.field(*r.tau_ge1);
    else w.field("none");
    w.field(r.tau_min);
    w.field(r.tau);
    w.field(r.max_discrepancy_before_tau);
    w.field(r.identical_before_tau);
    w.field(static_cast<bool>(censored[i]));
    w.end_row();
    if (censored[i]) continue;
    ++kept;
    if (r.identical_before_tau) ++identical;
    worst = std::max(worst, r.max_discrepancy_before_tau);
  }
  ctx.emit("couple.csv", os.str());

  bool all_identical = kept > 0 && identical == kept;
  nlohmann::json summary;
  summary["experiment"] = "couple";
  summary["n_paths"] = n;
  summary["censored"] = n - kept;
  summary["epsilon"] = ctx.epsilon;
  summary["couple_a"] = cfg.couple_a;
  summary["index_drop"] = cfg.index_drop;
  summary["identical_fraction"] =
      kept ? static_cast<double>(identical) / static_cast<double>(kept) : 0.0;
  summary["max_discrepancy"] = worst;
  summary["checks_passed"] = all_identical;
  ctx.emit("summary.json", summary.dump(2) + "\n");
  ctx.manifest.checks_passed = all_identical;
}

inline void run_symbol_check(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  bool ok = true;

  // c_alpha quadrature vs closed form
  std::ostringstream ca;
  csv::Writer wca(ca);
  wca.row("alpha", "quadrature", "closed_form", "rel_err");
  const double alphas[6] = {0.3, 0.5, 0.9, 1.1, 1.5, 1.9};
  double worst_ca = 0.0;
  for (double a : alphas) {
    double q = symbol::c_alpha(a);
    double c = symbol::c_alpha_closed_form(a);
    double rel = std::abs(q - c) / c;
    worst_ca = std::max(worst_ca, rel);
    wca.row(a, q, c, rel);
  }
  ok = ok && worst_ca <= 1e-6;
  ctx.emit("symbol_calpha.csv", ca.str());

  // Fourier route vs assembled symbol on a 5x5 grid (d=1)
  std::ostringstream fo;
  csv::Writer wfo(fo);
  wfo.row("x", "xi", "rel_err");
  double worst_fourier = 0.0;
  if (cfg.dim == 1) {
    const double xs[5] = {-2.0, -1.0, 0.0, 1.0, 2.0};
    const double xis[5] = {0.5, 1.0, 2.0, 4.0, 8.0};
    for (double x : xs)
      for (double xi : xis) {
        double rel = symbol::symbol_fourier_check(x, xi, ctx.beta);
        worst_fourier = std::max(worst_fourier, rel);
        wfo.row(x, xi, rel);
      }
    ok = ok && worst_fourier <= symbol::kCrossRelTol;
  }
  ctx.emit("symbol_fourier.csv", fo.str());

  // generator on plane waves vs -q f (d=1), complex-modulus relative error
  std::ostringstream pw;
  csv::Writer wpw(pw);
  wpw.row("x", "xi", "rel_err");
  double worst_pw = 0.0;
  if (cfg.dim == 1) {
    const double xs[5] = {-2.0, -1.0, 0.0, 1.0, 2.0};
    const double xis[5] = {0.5, 1.0, 2.0, 4.0, 8.0};
    for (double x : xs)
      for (double xi : xis) {
        double q = symbol::symbol(std::span<const double>(&x, 1),
                                  std::span<const double>(&xi, 1), ctx.beta)
                       .value;
        double lc = symbol::apply_generator(symbol::plane_wave_cos(xi), x, ctx.beta);
        double ls = symbol::apply_generator(symbol::plane_wave_sin(xi), x, ctx.beta);
        double ec = lc + q * std::cos(xi * x);
        double es = ls + q * std::sin(xi * x);
        double rel = std::sqrt(ec * ec + es * es) / q;
        worst_pw = std::max(worst_pw, rel);
        wpw.row(x, xi, rel);
      }
    ok = ok && worst_pw <= 1e-3;
  }
  ctx.emit("symbol_planewave.csv", pw.str());

  // Appendix bounds on probe pairs + growth integral closed form
  std::ostringstream lp;
  csv::Writer wlp(lp);
  wlp.row("x", "y", "lhs", "rhs", "ok");
  double box_lo = -3.0, box_hi = 3.0;
  auto pts = probe_grid(1, 40, std::span<const double>(&box_lo, 1),
                        std::span<const double>(&box_hi, 1));
  bool lips_ok = true;
  for (int i = 0; i < 20; ++i) {
    double x = pts[2 * i], y = pts[2 * i + 1];
    auto chk = symbol::lipschitz_quadrature_check(x, y, ctx.beta);
    lips_ok = lips_ok && chk.ok;
    wlp.row(x, y, chk.lhs, chk.rhs, chk.ok);
  }
  ok = ok && lips_ok;
  ctx.emit("symbol_lipschitz.csv", lp.str());

  double worst_growth = 0.0;
  for (double b : {ctx.beta.beta_min(), ctx.beta.beta_max(),
                   0.5 * (ctx.beta.beta_min() + ctx.beta.beta_max())}) {
    double g = symbol::growth_integral(b);
    double c = symbol::growth_integral_closed_form(b);
    worst_growth = std::max(worst_growth, std::abs(g - c) / c);
  }
  ok = ok && worst_growth <= 1e-10;

  // beta_infinity ratio test
  auto binf_chk = symbol::beta_infinity_ratio_check(
      ctx.beta, cfg.dim, std::vector<double>(cfg.dim, -3.0),
      std::vector<double>(cfg.dim, 3.0));

  // alpha -> C_alpha cache
  std::vector<double> grid;
  for (int i = 1; i <= 19; ++i) grid.push_back(0.1 * i);
  std::ostringstream cache;
  symbol::write_c_alpha_table(cache, grid);
  ctx.emit("symbol_calpha_table.csv", cache.str());

  nlohmann::json summary;
  summary["experiment"] = "symbol-check";
  summary["worst_c_alpha_rel_err"] = worst_ca;
  summary["worst_fourier_rel_err"] = worst_fourier;
  summary["worst_planewave_rel_err"] = worst_pw;
  summary["worst_growth_rel_err"] = worst_growth;
  summary["lipschitz_ok"] = lips_ok;
  summary["beta_infinity"] = symbol::beta_infinity(ctx.beta);
  summary["beta_infinity_ratio_decreasing"] = binf_chk.decreasing_above;
  summary["beta_infinity_ratio_increasing"] = binf_chk.increasing_below;
  summary["checks_passed"] = ok;
  ctx.emit("summary.json", summary.dump(2) + "\n");
  ctx.manifest.checks_passed = ok;
}

// C^infinity bump supported on |y-center| < radius, value 1 at the center.
inline symbol::C2Function mollifier_bump(double center, double radius) {
  auto val = [center, radius](double y) {
    double t = (y - center) / radius;
    double s = t * t;
    if (s >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - s));
  };
  auto d1 = [center, radius, val](double y) {
    double t = (y - center) / radius;
    double s = t * t;
    if (s >= 1.0) return 0.0;
    double w = 1.0 - s;
    return val(y) * (-2.0 * t / (w * w)) / radius;
  };
  auto d2 = [center, radius, val](double y) {
    double t = (y - center) / radius;
    double s = t * t;
    if (s >= 1.0) return 0.0;
    double w = 1.0 - s;
    // f'' = f * [ (2t/w^2)^2 - 2/w^2 - 8t^2/w^3 ] / radius^2
    double a = 2.0 * t / (w * w);
    return val(y) * (a * a - 2.0 / (w * w) - 8.0 * s / (w * w * w)) /
           (radius * radius);
  };
  symbol::C2Function f;
  f.value = val;
  f.deriv = d1;
  f.deriv2 = d2;
  f.support_radius = radius + std::abs(center);
  f.sup_abs = 1.0;
  f.far_mean = 0.0;
  return f;
}

inline void run_generator_check(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  symbol::C2Function f = mollifier_bump(0.0, 4.0);
  double x = ctx.x0[0];
  double lf = symbol::apply_generator(f, x, ctx.beta);

  const double h = cfg.gen_h;
  std::vector<double> fx(cfg.n_paths, std::nan(""));
  parallel_for(cfg.n_paths, cfg.resolved_workers(), [&](std::size_t i) {
    auto seed = ctx.manifest.path_seeds[i];
    JumpStream stream = sample_stream(h, ctx.epsilon, cfg.dim, seed);
    SimulationConfig sc = ctx.sim_config(seed);
    sc.horizon = h;
    try {
      SamplePath path = simulate(sc, stream);
      fx[i] = f.value(path.states[path.size() - 1]);
    } catch (const PathExplosion&) {
    }
  });
  std::vector<double> kept;
  for (double v : fx)
    if (!std::isnan(v)) kept.push_back(v);
  double n = static_cast<double>(kept.size());
  double mc = (stats::mean(kept) - f.value(x)) / h;
  double se = std::sqrt(stats::variance(kept) / n) / h;
  double se_quad = 1e-6 * std::abs(lf);
  double combined = std::sqrt(se * se + se_quad * se_quad);
  double z = std::abs(mc - lf) / combined;
  bool ok = z <= 5.0;

  std::ostringstream os;
  csv::Writer w(os);
  w.row("h", "n", "mc_estimate", "std_error", "generator_value", "z");
  w.row(h, static_cast<std::uint64_t>(kept.size()), mc, se, lf, z);
  ctx.emit("generator_check.csv", os.str());

  nlohmann::json summary;
  summary["experiment"] = "generator-check";
  summary["h"] = h;
  summary["n_paths"] = cfg.n_paths;
  summary["censored"] = cfg.n_paths - kept.size();
  summary["epsilon"] = ctx.epsilon;
  summary["mc_estimate"] = mc;
  summary["std_error"] = se;
  summary["generator_value"] = lf;
  summary["z"] = z;
  summary["checks_passed"] = ok;
  ctx.emit("summary.json", summary.dump(2) + "\n");
  ctx.manifest.checks_passed = ok;
}

inline void run_heat_kernel(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  std::vector<double> ts = cfg.t_grid;
  std::sort(ts.begin(), ts.end());
  double t_max = ts.back();
  std::vector<std::vector<double>> endpoints(ts.size(),
                                             std::vector<double>(cfg.n_paths));
  std::vector<char> censored(cfg.n_paths, 0);
  parallel_for(cfg.n_paths, cfg.resolved_workers(), [&](std::size_t i) {
    auto seed = ctx.manifest.path_seeds[i];
    JumpStream stream = sample_stream(t_max, ctx.epsilon, cfg.dim, seed);
    SimulationConfig sc = ctx.sim_config(seed);
    sc.horizon = t_max;
    try {
      SamplePath path = simulate(sc, stream);
      for (std::size_t k = 0; k < ts.size(); ++k)
        endpoints[k][i] = path.value_at1(ts[k]);
    } catch (const PathExplosion&) {
      censored[i] = 1;
    }
  });

  std::ostringstream os;
  csv::Writer w(os);
  w.row("t", "sup_density", "bandwidth", "kde_mass", "n");
  std::vector<double> log_t, log_sup;
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t k = 0; k < ts.size(); ++k) {
    std::vector<double> sample;
    sample.reserve(cfg.n_paths);
    for (int i = 0; i < cfg.n_paths; ++i)
      if (!censored[i]) sample.push_back(endpoints[k][i]);
    auto kde = stats::kde1d(sample);
    double sup = kde.sup();
    w.row(ts[k], sup, kde.bandwidth, kde.mass(),
          static_cast<std::uint64_t>(sample.size()));
    log_t.push_back(std::log(ts[k]));
    log_sup.push_back(std::log(sup));
    nlohmann::json row;
    row["t"] = ts[k];
    row["sup_density"] = sup;
    row["bandwidth"] = kde.bandwidth;
    rows.push_back(row);
  }
  ctx.emit("heatkernel.csv", os.str());

  auto fit = stats::ols(log_t, log_sup);
  double alpha = ctx.beta.beta_min();
  double threshold = -static_cast<double>(cfg.dim) / alpha - 0.15;
  bool ok = fit.slope >= threshold;

  nlohmann::json summary;
  summary["experiment"] = "heat-kernel";
  summary["n_paths"] = cfg.n_paths;
  summary["epsilon"] = ctx.epsilon;
  summary["alpha"] = alpha;
  summary["slope"] = fit.slope;
  summary["threshold"] = threshold;
  summary["per_t"] = rows;
  summary["checks_passed"] = ok;
  ctx.emit("summary.json", summary.dump(2) + "\n");
  ctx.manifest.checks_passed = ok;
}

}  // namespace detail

inline RunManifest run(const ExperimentConfig& config) {
  auto t_start = std::chrono::steady_clock::now();

  auto diags = validate(config);
  for (const auto& d : diags)
    if (d.severity == Diagnostic::Severity::Error)
      throw ConfigError(d.message);

  RunManifest manifest;
  IndexFunction beta = config.index_function();
  double epsilon = resolve_epsilon(config, beta);

  ExperimentConfig resolved = config;
  resolved.epsilon = epsilon;
  manifest.experiment = experiment_name(config.experiment);
  manifest.config = resolved;
  manifest.config_text = to_config_text(resolved);
  for (const auto& d : diags) manifest.diagnostics.push_back(d.message);

  int n_seeds = config.n_paths;
  manifest.path_seeds.resize(n_seeds);
  for (int i = 0; i < n_seeds; ++i)
    manifest.path_seeds[i] = substream_seed(config.seed, static_cast<std::uint64_t>(i));

  std::filesystem::path dir(resolved.resolved_out_dir());
  std::filesystem::create_directories(dir);

  detail::RunContext ctx{config, beta, config.start_point(), epsilon, dir, manifest};
  switch (config.experiment) {
    case Experiment::Simulate: detail::run_simulate(ctx); break;
    case Experiment::DimRange: detail::run_dimension(ctx, false); break;
    case Experiment::DimGraph: detail::run_dimension(ctx, true); break;
    case Experiment::PVar: detail::run_pvar(ctx); break;
    case Experiment::Sojourn: detail::run_sojourn(ctx); break;
    case Experiment::Couple: detail::run_couple(ctx); break;
    case Experiment::SymbolCheck: detail::run_symbol_check(ctx); break;
    case Experiment::GeneratorCheck: detail::run_generator_check(ctx); break;
    case Experiment::HeatKernel: detail::run_heat_kernel(ctx); break;
  }

  ctx.emit("config.resolved.txt", manifest.config_text);
  auto t_end = std::chrono::steady_clock::now();
  manifest.wall_ms =
      std::chrono::duration<double, std::milli>(t_end - t_start).count();
  save_manifest(manifest, dir / "manifest.json");
  return manifest;
}

}  // namespace stablelike::harness
