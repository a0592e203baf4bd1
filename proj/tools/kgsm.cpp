#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "kgsm/config.hpp"
#include "kgsm/csv.hpp"
#include "kgsm/experiments.hpp"
#include "kgsm/svg.hpp"
#include "kgsm/theory.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace kgsm;

namespace {

constexpr int kExitInvalid = 2;
constexpr int kExitIo = 3;

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

std::uint64_t default_seed() {
  const char* env = std::getenv("KGSM_SEED");
  if (env == nullptr || *env == '\0') {
    return 1;
  }
  std::size_t used = 0;
  std::uint64_t seed = 0;
  try {
    seed = std::stoull(env, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != std::string_view(env).size() || std::string_view(env).front() == '-') {
    throw ConfigError(std::string("KGSM_SEED is not an unsigned integer: '") + env + "'");
  }
  return seed;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out << text;
  if (!out) {
    throw IoError("write failed: " + path.string());
  }
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_file(path, text);
  }
}

std::optional<double> parse_beta(const std::string& text) {
  if (text == "auto") {
    return std::nullopt;
  }
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty()) {
    throw ConfigError("--beta must be a number or 'auto', got '" + text + "'");
  }
  return v;
}

/// "a,b,c" or "start:stop:step" (inclusive of stop up to rounding).
std::vector<double> parse_grid(const std::string& text, const char* name) {
  std::vector<double> out;
  try {
    if (text.find(':') != std::string::npos) {
      std::vector<double> parts;
      std::stringstream in(text);
      std::string piece;
      while (std::getline(in, piece, ':')) {
        parts.push_back(std::stod(piece));
      }
      if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
        throw ConfigError("");
      }
      const auto count = static_cast<std::size_t>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
      for (std::size_t i = 0; i <= count; ++i) {
        out.push_back(parts[0] + static_cast<double>(i) * parts[2]);
      }
    } else {
      std::stringstream in(text);
      std::string piece;
      while (std::getline(in, piece, ',')) {
        out.push_back(std::stod(piece));
      }
    }
  } catch (const std::exception&) {
    out.clear();
  }
  if (out.empty()) {
    throw ConfigError(std::string(name) + ": expected 'a,b,c' or 'start:stop:step', got '" +
                      text + "'");
  }
  return out;
}

/// System flags shared by run, sweep and generate.
struct SystemFlags {
  std::string preset;
  bool gaussian = false;
  std::size_t rows = 0;
  std::size_t cols = 0;
  double floor = 0.0;
  std::vector<double> sigma;
  CLI::Option* preset_opt = nullptr;
  CLI::Option* gaussian_opt = nullptr;
  CLI::Option* rows_opt = nullptr;
  CLI::Option* cols_opt = nullptr;
  CLI::Option* floor_opt = nullptr;
  CLI::Option* sigma_opt = nullptr;

  void attach(CLI::App* app) {
    preset_opt = app->add_option("--preset", preset,
                                 "spectrum preset: one-small, two-small, linear, many-small, "
                                 "convex-poly, concave-poly, explicit");
    gaussian_opt = app->add_flag("--gaussian", gaussian, "i.i.d. N(0,1) matrix instead of a preset");
    rows_opt = app->add_option("--rows", rows, "number of equations");
    cols_opt = app->add_option("--cols", cols, "number of unknowns");
    floor_opt = app->add_option("--floor", floor, "value of the small singular values");
    sigma_opt = app->add_option("--sigma", sigma, "singular values for the explicit preset")
                    ->delimiter(',');
    gaussian_opt->excludes(preset_opt);
  }

  /// Applies the flags that were given on top of `generator` / `preset`.
  void apply(std::string& generator, SpectrumPreset& p) const {
    if (gaussian) {
      generator = "gaussian";
    }
    if (preset_opt->count() > 0) {
      const auto kind = parse_spectrum_kind(preset);
      if (!kind) {
        throw ConfigError("unknown preset '" + preset + "'");
      }
      generator = "spectrum";
      p.kind = *kind;
    }
    if (sigma_opt->count() > 0) {
      if (p.kind != SpectrumKind::Explicit) {
        throw ConfigError("--sigma requires --preset explicit");
      }
      p.explicit_sigma = sigma;
      p.cols = sigma.size();
    }
    if (rows_opt->count() > 0) {
      p.rows = rows;
    }
    if (cols_opt->count() > 0) {
      p.cols = cols;
    }
    if (floor_opt->count() > 0) {
      p.floor = floor;
    }
    if (p.kind == SpectrumKind::Explicit && p.explicit_sigma.empty()) {
      throw ConfigError("the explicit preset needs --sigma");
    }
  }
};

// ---------------------------------------------------------------------------
// run

struct RunFlags {
  std::string config_path;
  SystemFlags system;
  std::vector<std::string> methods;
  double mass = 0.0;
  std::string beta;
  std::size_t iterations = 0;
  std::size_t trials = 0;
  std::vector<std::size_t> tracked;
  std::uint64_t seed = 0;
  std::size_t stride = 0;
  std::string sampling;
  std::string x0;
  std::string out;
  bool svg = false;
  bool dump_config = false;
  std::map<std::string, CLI::Option*> opts;
};

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot read config " + path);
  }
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

ExperimentConfig build_config(const RunFlags& f) {
  ExperimentConfig c;
  c.seed = default_seed();
  if (!f.config_path.empty()) {
    c = load_config(f.config_path);
  }
  auto given = [&](const char* name) { return f.opts.at(name)->count() > 0; };
  f.system.apply(c.generator, c.preset);
  if (given("--method")) {
    c.methods.clear();
    for (const auto& name : f.methods) {
      const auto m = parse_method(name);
      if (!m) {
        throw ConfigError("unknown method '" + name + "'");
      }
      c.methods.push_back(*m);
    }
    if (!given("--mass") && std::none_of(c.methods.begin(), c.methods.end(), uses_momentum)) {
      c.mass = 0.0;
    }
  }
  if (given("--mass")) {
    c.mass = f.mass;
  }
  if (given("--beta")) {
    c.beta = parse_beta(f.beta);
  }
  if (given("--iters")) {
    c.iterations = f.iterations;
  }
  if (given("--trials")) {
    c.trials = f.trials;
  }
  if (given("--track")) {
    c.tracked = f.tracked;
  }
  if (given("--seed")) {
    c.seed = f.seed;
  }
  if (given("--stride")) {
    c.stride = f.stride;
  }
  if (given("--sampling")) {
    const auto s = parse_sampling(f.sampling);
    if (!s) {
      throw ConfigError("unknown sampling '" + f.sampling + "'");
    }
    c.sampling = *s;
  }
  if (given("--x0")) {
    if (f.x0 != "gaussian" && f.x0 != "zeros") {
      throw ConfigError("--x0 must be 'gaussian' or 'zeros'");
    }
    c.zero_start = f.x0 == "zeros";
  }
  if (given("--out")) {
    c.output = f.out;
  }
  if (given("--svg")) {
    c.svg = f.svg;
  }
  c.validate();
  return c;
}

int cmd_run(const RunFlags& flags) {
  const ExperimentConfig config = build_config(flags);
  if (flags.dump_config) {
    std::cout << to_json(config).dump(2) << '\n';
    return 0;
  }
  const Instance inst = make_instance(config.descriptor(), config.zero_start);
  const std::size_t n = inst.system.cols();
  const double eta_n = inst.system.eta(n - 1);
  const double beta = config.beta.value_or(optimal_beta(eta_n, config.mass));

  RunOptions base;
  base.iterations = config.iterations;
  base.tracked = config.tracked_zero_based();
  base.stride = config.stride;
  base.sampling = config.sampling;

  const std::size_t runs = config.methods.size();
  std::vector<IterationTrace> traces(config.trials * runs);
  parallel_for(config.trials, [&](std::size_t t) {
    RngStream stream = derive_substream(config.seed, t);
    const auto log = draw_index_log(inst.system, config.sampling, config.iterations, stream);
    for (std::size_t m = 0; m < runs; ++m) {
      RunOptions o = base;
      o.method = config.methods[m];
      o.params = o.method == Method::Kgsm   ? MomentumParams::make(config.mass, beta)
                 : o.method == Method::Hbm ? MomentumParams::make(config.mass, 0.0)
                                           : MomentumParams{};
      o.replay = log;
      RngStream unused(0);
      traces[t * runs + m] = run(inst.system, inst.x0, o, unused);
    }
  });

  const fs::path dir(config.output);
  fs::create_directories(dir);
  Manifest manifest;
  manifest.id = "run";
  manifest.seed = config.seed;
  manifest.params = to_json(config);
  manifest.params["resolved_beta"] = beta;
  manifest.params["eta_n"] = eta_n;
  manifest.params["regime"] =
      std::string(to_string(analyze(eta_n, MomentumParams::make(config.mass, beta)).regime));
  svg::Tables tables;
  for (std::size_t t = 0; t < config.trials; ++t) {
    for (std::size_t m = 0; m < runs; ++m) {
      const IterationTrace& trace = traces[t * runs + m];
      std::string name(to_string(config.methods[m]));
      if (config.trials > 1) {
        name += "_trial" + std::to_string(t);
      }
      std::ostringstream text;
      write_trace_csv(text, trace);
      write_file(dir / (name + ".csv"), text.str());
      manifest.files.push_back(name + ".csv");
      manifest.divergence_flags.push_back({name, trace.diverged, trace.divergence_iteration});
      if (t == 0) {
        std::istringstream in(text.str());
        tables[std::string(to_string(config.methods[m]))] = csv::read(in);
      }
      std::cout << name << ": final_l2=" << csv::format_double(trace.l2.back());
      for (const auto& [l, values] : trace.directional) {
        std::cout << " final_dir_" << l + 1 << '=' << csv::format_double(values.back());
      }
      std::cout << " diverged=" << (trace.diverged ? "true" : "false");
      if (trace.divergence_iteration) {
        std::cout << " at=" << *trace.divergence_iteration;
      }
      std::cout << '\n';
    }
  }
  if (config.svg) {
    svg::PlotSpec plot;
    plot.title = "l2 error (trial 0)";
    plot.y_label = "||x_k - x||";
    const char* colors[] = {"#1f4fd8", "#d62728", "#008000"};
    for (std::size_t m = 0; m < runs; ++m) {
      svg::SeriesSpec s;
      s.label = std::string(to_string(config.methods[m]));
      s.table = s.label;
      s.y_column = "l2";
      s.color = colors[m % 3];
      plot.series.push_back(s);
    }
    write_file(dir / "run.svg", svg::render_svg(plot, tables));
    manifest.files.push_back("run.svg");
  }
  write_file(dir / "manifest.json", manifest.to_json().dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------------------
// theory

struct TheoryFlags {
  double eta = 0.0;
  double mass = 0.0;
  std::string beta;
  double e0 = 1.0;
  std::size_t trajectory = 0;
  double regime_tol = kRegimeTolerance;
  CLI::Option* trajectory_opt = nullptr;
};

json complex_json(std::complex<double> z) { return {{"re", z.real()}, {"im", z.imag()}}; }

int cmd_theory(const TheoryFlags& f) {
  if (!(f.eta > 0.0 && f.eta <= 1.0)) {
    throw ConfigError("--eta must lie in (0, 1]");
  }
  const auto explicit_beta = parse_beta(f.beta);
  const double beta = explicit_beta.value_or(optimal_beta(f.eta, f.mass));
  const MomentumParams params = MomentumParams::make(f.mass, beta);
  const CompanionAnalysis a = analyze(f.eta, params, f.regime_tol);
  json out = {{"r", a.r},
              {"zeta", a.zeta},
              {"beta", a.beta},
              {"lambda1", complex_json(a.lambda1)},
              {"lambda2", complex_json(a.lambda2)},
              {"discriminant", a.discriminant},
              {"beta0", std::isfinite(a.beta0) ? json(a.beta0) : json(nullptr)},
              {"beta1", a.beta1},
              {"regime", std::string(to_string(a.regime))}};
  if (f.trajectory_opt->count() > 0 && f.trajectory > 0) {
    // Entry k is E<x_{k+1} - x, v> for initial error e0.
    const auto series = expected_error_trajectory(f.eta, params, f.e0, f.trajectory - 1);
    json values = json::array();
    json logs = json::array();
    for (const auto& v : series) {
      values.push_back(v.to_double());
      logs.push_back(v.sign() == 0 ? json(nullptr) : json(v.log10_abs()));
    }
    out["e0"] = f.e0;
    out["trajectory"] = values;
    out["trajectory_log10_abs"] = logs;
  }
  std::cout << out.dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// figure

struct FigureFlags {
  bool list = false;
  std::string id;
  std::uint64_t seed = 0;
  std::string out = "figures";
  double mass = 0.0;
  std::string beta;
  std::size_t iterations = 0;
  std::size_t trials = 0;
  std::map<std::string, CLI::Option*> opts;
};

int cmd_figure(const FigureFlags& f) {
  if (f.list) {
    for (const auto& info : figure_catalog()) {
      std::cout << info.id << '\t' << info.summary << '\n';
    }
    return 0;
  }
  if (f.id.empty()) {
    throw ConfigError("figure: give an id or --list");
  }
  FigureSpec spec;
  spec.id = f.id;
  spec.seed = f.opts.at("--seed")->count() > 0 ? f.seed : default_seed();
  if (f.opts.at("--mass")->count() > 0) {
    spec.overrides.mass = f.mass;
  }
  if (f.opts.at("--beta")->count() > 0) {
    const auto b = parse_beta(f.beta);
    if (!b) {
      throw ConfigError("figure: --beta takes a number");
    }
    spec.overrides.beta = b;
  }
  if (f.opts.at("--iters")->count() > 0) {
    spec.overrides.iterations = f.iterations;
  }
  if (f.opts.at("--trials")->count() > 0) {
    spec.overrides.trials = f.trials;
  }
  const Manifest m = run_figure(spec, f.out);
  std::cout << (fs::path(f.out) / f.id / "manifest.json").string() << ": " << m.files.size()
            << " files";
  std::size_t diverged = 0;
  for (const auto& flag : m.divergence_flags) {
    diverged += flag.diverged ? 1 : 0;
  }
  std::cout << ", " << diverged << " diverged run(s)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepFlags {
  SystemFlags system;
  std::string masses;
  std::string betas;
  std::size_t iterations = 100000;
  std::size_t direction = 0;
  std::uint64_t seed = 0;
  std::size_t stride = 0;
  unsigned threads = 0;
  std::string out;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* direction_opt = nullptr;
};

int cmd_sweep(const SweepFlags& f) {
  std::string generator = "spectrum";
  SpectrumPreset preset;
  f.system.apply(generator, preset);
  const std::uint64_t seed = f.seed_opt->count() > 0 ? f.seed : default_seed();
  const Instance inst = make_instance({generator, preset, seed}, false);
  const auto masses = parse_grid(f.masses, "--masses");
  const auto betas = parse_grid(f.betas, "--betas");
  SweepOptions o;
  o.iterations = f.iterations;
  o.direction = f.direction_opt->count() > 0 ? f.direction : inst.system.cols();
  if (o.direction == 0 || o.direction > inst.system.cols()) {
    throw ConfigError("--direction outside 1.." + std::to_string(inst.system.cols()));
  }
  o.direction -= 1;
  o.seed = derive_substream(seed, 0).seed();
  o.stride = f.stride;
  o.threads = f.threads;
  const auto cells = parameter_sweep(inst.system, inst.x0, masses, betas, o);
  std::ostringstream text;
  csv::write_row(text, {"mass", "beta", "regime", "spectral_radius", "diverged",
                        "divergence_iteration", "converged", "final_directional", "final_l2",
                        "sign_flips"});
  for (const auto& c : cells) {
    csv::write_row(text, {csv::format_double(c.mass), csv::format_double(c.beta),
                          std::string(to_string(c.regime)), csv::format_double(c.spectral_radius),
                          c.diverged ? "true" : "false",
                          c.divergence_iteration ? std::to_string(*c.divergence_iteration) : "",
                          c.converged ? "true" : "false", csv::format_double(c.final_directional),
                          csv::format_double(c.final_l2), std::to_string(c.sign_flips)});
  }
  emit(f.out, text.str());
  return 0;
}

// ---------------------------------------------------------------------------
// generate

struct GenerateFlags {
  SystemFlags system;
  std::uint64_t seed = 0;
  std::string format = "json";
  std::string out;
  CLI::Option* seed_opt = nullptr;
};

int cmd_generate(const GenerateFlags& f) {
  SystemDescriptor d;
  f.system.apply(d.generator, d.preset);
  d.seed = f.seed_opt->count() > 0 ? f.seed : default_seed();
  if (d.preset.cols == 0 || d.preset.rows < d.preset.cols) {
    throw ConfigError("system needs rows >= cols >= 1");
  }
  const LinearSystem system = regenerate(d);
  if (f.format == "json") {
    emit(f.out, system_to_json(system, d).dump(2) + "\n");
  } else if (f.format == "csv") {
    emit(f.out, system_to_csv(system));
  } else {
    throw ConfigError("--format must be json or csv");
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Randomized Kaczmarz with geometrically smoothed momentum"};
  app.require_subcommand(1);

  RunFlags run_flags;
  CLI::App* run_cmd = app.add_subcommand("run", "run solvers on one system and write traces");
  run_cmd->add_option("--config", run_flags.config_path, "JSON config; flags override its fields");
  run_flags.system.attach(run_cmd);
  auto& ro = run_flags.opts;
  ro["--method"] = run_cmd->add_option("--method", run_flags.methods,
                                       "kaczmarz, kgsm or hbm (repeatable)");
  ro["--mass"] = run_cmd->add_option("--mass", run_flags.mass, "momentum mass M in [0, 1]");
  ro["--beta"] = run_cmd->add_option("--beta", run_flags.beta, "smoothing beta in [0, 1) or 'auto'");
  ro["--iters"] = run_cmd->add_option("--iters", run_flags.iterations, "iterations per run");
  ro["--trials"] = run_cmd->add_option("--trials", run_flags.trials, "independent index streams");
  ro["--track"] = run_cmd->add_option("--track", run_flags.tracked,
                                      "one-based singular directions to record (default: last)")
                      ->delimiter(',');
  ro["--seed"] = run_cmd->add_option("--seed", run_flags.seed, "seed (default $KGSM_SEED or 1)");
  ro["--stride"] = run_cmd->add_option("--stride", run_flags.stride, "recording interval");
  ro["--sampling"] = run_cmd->add_option("--sampling", run_flags.sampling,
                                         "squared-norm or uniform");
  ro["--x0"] = run_cmd->add_option("--x0", run_flags.x0, "gaussian or zeros");
  ro["--out"] = run_cmd->add_option("--out", run_flags.out, "output directory");
  ro["--svg"] = run_cmd->add_flag("--svg", run_flags.svg, "also write run.svg");
  run_cmd->add_flag("--dump-config", run_flags.dump_config,
                    "print the effective config as JSON and exit");

  TheoryFlags theory_flags;
  CLI::App* theory_cmd = app.add_subcommand("theory", "companion-matrix analysis as JSON");
  theory_cmd->add_option("--eta", theory_flags.eta, "sigma_l^2 / ||A||_F^2")->required();
  theory_cmd->add_option("--mass", theory_flags.mass, "momentum mass M")->required();
  theory_cmd->add_option("--beta", theory_flags.beta, "smoothing beta or 'auto'")->required();
  theory_cmd->add_option("--e0", theory_flags.e0, "initial error <x_0 - x, v_l> (default 1)");
  theory_flags.trajectory_opt = theory_cmd->add_option(
      "--trajectory", theory_flags.trajectory, "also print E<x_k - x, v_l> for k = 1..K");
  theory_cmd->add_option("--regime-tol", theory_flags.regime_tol,
                         "relative discriminant tolerance for RealRepeated (default 1e-12)");

  FigureFlags figure_flags;
  CLI::App* figure_cmd = app.add_subcommand("figure", "run a figure driver");
  figure_cmd->add_flag("--list", figure_flags.list, "list figure ids");
  figure_cmd->add_option("id", figure_flags.id, "figure id");
  auto& fo = figure_flags.opts;
  fo["--seed"] = figure_cmd->add_option("--seed", figure_flags.seed, "seed (default $KGSM_SEED or 1)");
  figure_cmd->add_option("--out", figure_flags.out, "output root (default ./figures)");
  fo["--mass"] = figure_cmd->add_option("--mass", figure_flags.mass, "override the mass");
  fo["--beta"] = figure_cmd->add_option("--beta", figure_flags.beta, "override beta");
  fo["--iters"] = figure_cmd->add_option("--iters", figure_flags.iterations, "override the budget");
  fo["--trials"] = figure_cmd->add_option("--trials", figure_flags.trials, "override trial count");

  SweepFlags sweep_flags;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "KGSM over an (M, beta) grid, CSV out");
  sweep_flags.system.attach(sweep_cmd);
  sweep_cmd->add_option("--masses", sweep_flags.masses, "'a,b,c' or 'start:stop:step'")->required();
  sweep_cmd->add_option("--betas", sweep_flags.betas, "'a,b,c' or 'start:stop:step'")->required();
  sweep_cmd->add_option("--iters", sweep_flags.iterations, "iterations per cell");
  sweep_flags.direction_opt = sweep_cmd->add_option(
      "--direction", sweep_flags.direction, "one-based direction to report (default: last)");
  sweep_flags.seed_opt = sweep_cmd->add_option("--seed", sweep_flags.seed, "seed");
  sweep_cmd->add_option("--stride", sweep_flags.stride, "recording interval");
  sweep_cmd->add_option("--threads", sweep_flags.threads, "worker threads (0: all cores)");
  sweep_cmd->add_option("--out", sweep_flags.out, "CSV path (default stdout)");

  GenerateFlags generate_flags;
  CLI::App* generate_cmd = app.add_subcommand("generate", "emit a linear system");
  generate_flags.system.attach(generate_cmd);
  generate_flags.seed_opt = generate_cmd->add_option("--seed", generate_flags.seed, "seed");
  generate_cmd->add_option("--format", generate_flags.format, "json or csv");
  generate_cmd->add_option("--out", generate_flags.out, "path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  try {
    if (run_cmd->parsed()) {
      return cmd_run(run_flags);
    }
    if (theory_cmd->parsed()) {
      return cmd_theory(theory_flags);
    }
    if (figure_cmd->parsed()) {
      return cmd_figure(figure_flags);
    }
    if (sweep_cmd->parsed()) {
      return cmd_sweep(sweep_flags);
    }
    if (generate_cmd->parsed()) {
      return cmd_generate(generate_flags);
    }
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitInvalid;
}
