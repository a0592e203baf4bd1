#include "kgsm/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "kgsm/csv.hpp"
#include "kgsm/svg.hpp"

namespace kgsm {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Analytics

double quantile_type7(std::span<const double> sorted, double p) {
  if (sorted.empty()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

namespace {

const Vector& metric_series(const IterationTrace& trace, const TraceMetric& metric) {
  if (metric.kind == TraceMetric::Kind::L2) {
    return trace.l2;
  }
  const auto it = trace.directional.find(metric.direction);
  if (it == trace.directional.end()) {
    throw std::out_of_range("direction " + std::to_string(metric.direction + 1) +
                            " was not tracked");
  }
  return it->second;
}

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

} // namespace

QuartileBands quartile_bands(const std::vector<IterationTrace>& traces, TraceMetric metric) {
  if (traces.size() < 4) {
    throw std::invalid_argument("quartile_bands: need at least 4 traces");
  }
  const IterationTrace* longest = &traces.front();
  for (const auto& t : traces) {
    if (t.length() > longest->length()) {
      longest = &t;
    }
  }
  const std::size_t length = longest->length();
  QuartileBands bands;
  for (const auto& t : traces) {
    if (t.length() < length && !t.diverged) {
      throw std::invalid_argument("quartile_bands: traces have unequal lengths");
    }
    bands.diverged_trials += t.diverged ? 1 : 0;
  }
  bands.k = longest->k;
  for (Vector* v : {&bands.min, &bands.q1, &bands.median, &bands.q3, &bands.max}) {
    v->resize(length);
  }
  bands.counts.resize(length);
  std::vector<const Vector*> series;
  series.reserve(traces.size());
  for (const auto& t : traces) {
    series.push_back(&metric_series(t, metric));
  }
  std::vector<double> column;
  column.reserve(traces.size());
  for (std::size_t j = 0; j < length; ++j) {
    column.clear();
    for (const Vector* s : series) {
      if (j < s->size()) {
        column.push_back(std::abs((*s)[j]));
      }
    }
    std::sort(column.begin(), column.end());
    bands.counts[j] = column.size();
    bands.min[j] = quantile_type7(column, 0.0);
    bands.q1[j] = quantile_type7(column, 0.25);
    bands.median[j] = quantile_type7(column, 0.5);
    bands.q3[j] = quantile_type7(column, 0.75);
    bands.max[j] = quantile_type7(column, 1.0);
  }
  return bands;
}

std::vector<std::size_t> sign_flip_positions(std::span<const double> series) {
  std::vector<std::size_t> flips;
  if (series.empty()) {
    return flips;
  }
  int previous = sign_of(series[0]);
  for (std::size_t j = 1; j < series.size(); ++j) {
    int current = sign_of(series[j]);
    if (current == 0) {
      current = previous;
    }
    if (previous != 0 && current != previous) {
      flips.push_back(j);
    }
    previous = current;
  }
  return flips;
}

std::vector<std::size_t> sign_flip_positions(const std::vector<ScaledValue>& series) {
  Vector signs(series.size());
  std::transform(series.begin(), series.end(), signs.begin(),
                 [](const ScaledValue& v) { return static_cast<double>(v.sign()); });
  return sign_flip_positions(signs);
}

std::vector<std::size_t> sign_flip_events(const IterationTrace& trace, std::size_t l) {
  const Vector& series = metric_series(trace, TraceMetric::directional(l));
  std::vector<std::size_t> out;
  for (std::size_t j : sign_flip_positions(series)) {
    out.push_back(trace.k[j]);
  }
  return out;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  unsigned threads) {
  if (threads == 0) {
    threads = std::max(1U, std::thread::hardware_concurrency());
  }
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) {
      body(i);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          const std::lock_guard lock(failure_mutex);
          if (!failure) {
            failure = std::current_exception();
          }
        }
      }
    });
  }
  for (auto& th : pool) {
    th.join();
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
}

std::vector<SweepCell> parameter_sweep(const LinearSystem& system, std::span<const double> x0,
                                       std::span<const double> mass_grid,
                                       std::span<const double> beta_grid,
                                       const SweepOptions& options) {
  if (mass_grid.empty() || beta_grid.empty()) {
    throw std::invalid_argument("parameter_sweep: empty grid");
  }
  if (options.direction >= system.cols()) {
    throw std::out_of_range("parameter_sweep: direction out of range");
  }
  const double eta = system.eta(options.direction);
  std::vector<SweepCell> cells(mass_grid.size() * beta_grid.size());
  for (std::size_t i = 0; i < mass_grid.size(); ++i) {
    for (std::size_t j = 0; j < beta_grid.size(); ++j) {
      SweepCell& cell = cells[i * beta_grid.size() + j];
      cell.mass = mass_grid[i];
      cell.beta = beta_grid[j];
      // Validates the pair before any thread starts.
      const CompanionAnalysis a = analyze(eta, MomentumParams::make(cell.mass, cell.beta));
      cell.regime = a.regime;
      cell.spectral_radius = a.spectral_radius();
    }
  }
  const double initial_l2 = l2_error(x0, system);
  parallel_for(
      cells.size(),
      [&](std::size_t c) {
        SweepCell& cell = cells[c];
        RunOptions run_options;
        run_options.method = Method::Kgsm;
        run_options.params = MomentumParams::make(cell.mass, cell.beta);
        run_options.iterations = options.iterations;
        run_options.tracked = {options.direction};
        run_options.stride = options.stride;
        RngStream stream(options.seed);
        const IterationTrace trace = run(system, x0, run_options, stream);
        cell.diverged = trace.diverged;
        cell.divergence_iteration = trace.divergence_iteration;
        cell.final_l2 = trace.l2.back();
        cell.final_directional = trace.directional.at(options.direction).back();
        cell.converged = !trace.diverged && cell.final_l2 < initial_l2;
        cell.sign_flips = sign_flip_events(trace, options.direction).size();
      },
      options.threads);
  return cells;
}

PersistenceCheck direction_persistence_check(const LinearSystem& system,
                                             std::span<const double> xk) {
  if (xk.size() != system.cols()) {
    throw DimensionError("direction_persistence_check: length mismatch");
  }
  Vector e(xk.begin(), xk.end());
  axpy(-1.0, system.solution, e);
  const double e_norm = norm2(e);
  if (e_norm == 0.0) {
    throw std::invalid_argument("direction_persistence_check: x_k equals the solution");
  }
  Vector u = e;
  for (double& v : u) {
    v /= e_norm;
  }
  PersistenceCheck out;
  for (std::size_t i = 0; i < system.rows(); ++i) {
    Vector next = kaczmarz_step(xk, system.a.row(i), system.b[i]);
    axpy(-1.0, system.solution, next);
    const double next_norm = norm2(next);
    if (next_norm == 0.0) {
      ++out.excluded_rows;
      continue;
    }
    const double cosine = dot(u, next) / next_norm;
    out.lhs += system.row_sq_norms[i] / system.frob_sq * cosine * cosine;
  }
  const double au = squared_norm(multiply(system.a, u));
  out.rhs = 1.0 - au / system.frob_sq;
  return out;
}

std::vector<std::uint32_t> draw_index_log(const LinearSystem& system, Sampling sampling,
                                          std::size_t count, RngStream& stream) {
  const RowSampler sampler = sampling == Sampling::Uniform ? RowSampler::uniform(system.rows())
                                                           : system.squared_norm_sampler();
  std::vector<std::uint32_t> log(count);
  for (auto& i : log) {
    i = static_cast<std::uint32_t>(sampler.sample(stream));
  }
  return log;
}

ComparisonFinals compare_final_errors(const LinearSystem& system, std::span<const double> x0,
                                      const MomentumParams& kgsm_params, double hbm_mass,
                                      std::size_t iterations, Sampling sampling,
                                      RngStream& stream) {
  const auto log = draw_index_log(system, sampling, iterations, stream);
  auto final_error = [&](Method method, MomentumParams params) {
    RunOptions o;
    o.method = method;
    o.params = params;
    o.iterations = iterations;
    o.stride = std::max<std::size_t>(iterations, 1);
    o.sampling = sampling;
    o.replay = log;
    RngStream unused(0);
    const IterationTrace t = run(system, x0, o, unused);
    return t.diverged ? std::numeric_limits<double>::infinity() : t.l2.back();
  };
  ComparisonFinals out;
  out.kaczmarz = final_error(Method::Kaczmarz, {});
  out.kgsm = final_error(Method::Kgsm, kgsm_params);
  out.hbm = final_error(Method::Hbm, MomentumParams::make(hbm_mass, 0.0));
  return out;
}

// ---------------------------------------------------------------------------
// Figure drivers

const std::vector<FigureInfo>& figure_catalog() {
  static const std::vector<FigureInfo> catalog{
      {"fig01", "alias of fig03 with its own seed stream"},
      {"fig02", "one small singular value, M = 0.9, beta = beta0"},
      {"fig03", "one small singular value, M = 0.9, beta = beta0 + 0.001"},
      {"fig04", "(M, beta) plane: regimes, beta0 curve, the four marked pairs"},
      {"fig05", "the four marked (M, beta) pairs, error along v20"},
      {"fig06", "linear singular value decay, M = 0.85, beta = beta0"},
      {"fig07", "quartile bands over 100 KGSM trials, linear decay"},
      {"fig_manysmall", "all singular values small but one, M = 0.85, beta = beta0"},
      {"fig08", "one small singular value, beta0 + 0.001: v20 error next to l2 error"},
      {"fig09", "two small singular values, M = 0.9, beta = beta0 + 0.001"},
      {"fig_sign", "error magnitude and sign along v20 in two oscillating runs"},
      {"gauss_a1", "60 x 50 Gaussian system, N = 15000, M = 0.8, beta = 0.98"},
      {"hbm_a2", "Kaczmarz, KGSM and heavy ball (M = 0.5) on two systems"},
      {"spectra_a3", "convex and concave polynomial spectra"},
      {"phase_a4", "the four marked (M, beta) pairs, v19 and l2 errors"},
  };
  return catalog;
}

bool is_figure_id(std::string_view id) {
  const auto& c = figure_catalog();
  return std::any_of(c.begin(), c.end(), [&](const FigureInfo& f) { return f.id == id; });
}

json Manifest::to_json() const {
  json flags = json::array();
  for (const auto& f : divergence_flags) {
    flags.push_back({{"run", f.run},
                     {"diverged", f.diverged},
                     {"iteration", f.iteration ? json(*f.iteration) : json(nullptr)}});
  }
  return {{"id", id}, {"seed", seed}, {"params", params}, {"files", files},
          {"divergence_flags", flags}};
}

Manifest Manifest::from_json(const json& j) {
  Manifest m;
  m.id = j.at("id").get<std::string>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.params = j.at("params");
  m.files = j.at("files").get<std::vector<std::string>>();
  for (const auto& f : j.at("divergence_flags")) {
    DivergenceFlag flag;
    flag.run = f.at("run").get<std::string>();
    flag.diverged = f.at("diverged").get<bool>();
    if (!f.at("iteration").is_null()) {
      flag.iteration = f.at("iteration").get<std::size_t>();
    }
    m.divergence_flags.push_back(flag);
  }
  return m;
}

std::uint64_t figure_stream_seed(std::string_view id, std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char c : id) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return derive_substream(mix64(seed ^ h), salt).seed();
}

namespace {

const char* const kBlue = "#1f4fd8";
const char* const kRed = "#d62728";
const char* const kBlack = "#000000";
const char* const kGreen = "#008000";
const char* const kGray = "#7f7f7f";
const char* const kOrange = "#ff7f0e";
const char* const kPurple = "#9467bd";

class FigureWriter {
public:
  FigureWriter(const FigureSpec& spec, const fs::path& outdir)
      : spec_(spec), dir_(outdir / spec.id) {
    fs::create_directories(dir_);
    manifest_.id = spec.id;
    manifest_.seed = spec.seed;
  }

  json& params() { return manifest_.params; }
  const FigureSpec& spec() const { return spec_; }

  std::uint64_t stream_seed(std::uint64_t salt) const {
    return figure_stream_seed(spec_.id, spec_.seed, salt);
  }

  void csv(const std::string& name, const std::string& text) {
    write(name + ".csv", text);
    std::istringstream in(text);
    tables_[name] = csv::read(in);
  }

  /// Adds a table for plotting only.
  void table(const std::string& name, csv::Table t) { tables_[name] = std::move(t); }

  void svg(const std::string& name, const svg::PlotSpec& plot) {
    write(name + ".svg", svg::render_svg(plot, tables_));
  }

  void flag(const std::string& run, const IterationTrace& trace) {
    manifest_.divergence_flags.push_back({run, trace.diverged, trace.divergence_iteration});
  }

  Manifest finish() {
    std::ofstream out(dir_ / "manifest.json", std::ios::binary);
    if (!out) {
      throw std::ios_base::failure("cannot write " + (dir_ / "manifest.json").string());
    }
    out << manifest_.to_json().dump(2) << '\n';
    if (!out) {
      throw std::ios_base::failure("write failed: " + (dir_ / "manifest.json").string());
    }
    return manifest_;
  }

private:
  void write(const std::string& file, const std::string& text) {
    const fs::path path = dir_ / file;
    std::ofstream out(path, std::ios::binary);
    if (!out) {
      throw std::ios_base::failure("cannot write " + path.string());
    }
    out << text;
    if (!out) {
      throw std::ios_base::failure("write failed: " + path.string());
    }
    manifest_.files.push_back(file);
  }

  FigureSpec spec_;
  fs::path dir_;
  Manifest manifest_;
  svg::Tables tables_;
};

std::string trace_csv(const IterationTrace& trace) {
  std::ostringstream out;
  write_trace_csv(out, trace);
  return out.str();
}

std::vector<std::size_t> recorded_steps(std::size_t iterations, std::size_t stride) {
  std::vector<std::size_t> ks;
  for (std::size_t k = 0; k <= iterations; k += stride) {
    ks.push_back(k);
  }
  return ks;
}

// One row per recorded step: signed expectation (0 once it underflows), its
// log10 magnitude and sign. `value(j)` is the expectation at iterate j.
std::string theory_csv(const std::vector<std::size_t>& ks,
                       const std::function<ScaledValue(std::size_t)>& value) {
  std::ostringstream out;
  csv::write_row(out, {"k", "expected", "log10_abs", "sign"});
  for (std::size_t k : ks) {
    const ScaledValue v = value(k);
    csv::write_row(out, {std::to_string(k), csv::format_double(v.to_double()),
                         csv::format_double(v.log10_abs()), std::to_string(v.sign())});
  }
  return out.str();
}

ScaledValue scaled(double v) {
  if (v == 0.0) {
    return {};
  }
  int e = 0;
  const double m = std::frexp(v, &e);
  return {m, e};
}

std::string kaczmarz_theory_csv(const std::vector<std::size_t>& ks, double eta, double e0) {
  const double log2_rate = std::log2(1.0 - eta);
  return theory_csv(ks, [&](std::size_t k) {
    if (eta == 1.0) {
      return k == 0 ? scaled(e0) : ScaledValue{};
    }
    // (1 - eta)^k e0 as 2^(k log2(1 - eta)) e0, split into mantissa and exponent.
    const double power = static_cast<double>(k) * log2_rate;
    const double whole = std::floor(power);
    ScaledValue v = scaled(std::exp2(power - whole) * e0);
    v.exponent += static_cast<long>(whole);
    return v;
  });
}

// Theorem 1 evaluated at iterates j = k (entry j - 1 of the trajectory).
std::string kgsm_theory_csv(const std::vector<std::size_t>& ks, double eta,
                            const MomentumParams& params, double e0) {
  const std::size_t last = ks.empty() ? 0 : ks.back();
  const auto series = last == 0 ? std::vector<ScaledValue>{}
                                : expected_error_trajectory(eta, params, e0, last - 1);
  return theory_csv(ks, [&](std::size_t k) { return k == 0 ? scaled(e0) : series[k - 1]; });
}

std::string closed_form_theory_csv(const std::vector<std::size_t>& ks, double eta, double mass,
                                   double e0) {
  return theory_csv(ks, [&](std::size_t k) {
    return k == 0 ? scaled(e0) : closed_form_repeated_scaled(eta, mass, e0, k - 1);
  });
}

svg::SeriesSpec series(std::string label, std::string table, std::string column,
                       const char* color, svg::Style style = svg::Style::Line) {
  svg::SeriesSpec s;
  s.label = std::move(label);
  s.table = std::move(table);
  s.y_column = std::move(column);
  s.color = color;
  s.style = style;
  return s;
}

svg::SeriesSpec theory_series(std::string label, std::string table, const char* color) {
  svg::SeriesSpec s = series(std::move(label), std::move(table), "log10_abs", color,
                             svg::Style::Dashed);
  s.y_is_log10 = true;
  return s;
}

svg::PlotSpec log_plot(std::string title, std::string y_label) {
  svg::PlotSpec p;
  p.title = std::move(title);
  p.y_label = std::move(y_label);
  return p;
}

struct Problem {
  LinearSystem system;
  Vector x0;
};

Problem make_problem(const SpectrumPreset& preset, std::uint64_t stream_seed) {
  RngStream stream(stream_seed);
  Problem p{generate_spectrum_system(preset, stream), {}};
  p.x0 = gaussian_vector(p.system.cols(), stream);
  return p;
}

struct RunPlan {
  std::size_t iterations = 0;
  std::vector<std::size_t> tracked;
  Sampling sampling = Sampling::SquaredNorm;
  std::size_t stride = 0;
};

IterationTrace replay(const Problem& p, Method method, const MomentumParams& params,
                      const RunPlan& plan, std::span<const std::uint32_t> log) {
  RunOptions o;
  o.method = method;
  o.params = params;
  o.iterations = plan.iterations;
  o.tracked = plan.tracked;
  o.sampling = plan.sampling;
  o.stride = plan.stride;
  o.replay = log;
  RngStream unused(0);
  return run(p.system, p.x0, o, unused);
}

std::size_t effective_stride(const RunPlan& plan) {
  return plan.stride == 0 ? default_stride(plan.iterations) : plan.stride;
}

json system_params(const Problem& p, const SpectrumPreset& preset) {
  const std::size_t n = p.system.cols();
  return {{"preset", std::string(to_string(preset.kind))},
          {"rows", p.system.rows()},
          {"cols", n},
          {"eta_n", p.system.eta(n - 1)},
          {"e0_n", directional_error(p.x0, p.system, n - 1)},
          {"initial_l2", l2_error(p.x0, p.system)}};
}

double beta0_for(double eta, double mass) {
  return 1.0 - eta / ((1.0 - std::sqrt(mass)) * (1.0 - std::sqrt(mass)));
}

// Kaczmarz against KGSM on one spectrum with theory overlays along v_n.
// Returns the KGSM trace.
IterationTrace comparison_figure(FigureWriter& w, const SpectrumPreset& preset,
                                 double default_mass, double beta_offset,
                                 std::size_t default_iterations,
                                 std::vector<std::size_t> extra_tracked = {}) {
  const FigureSpec& spec = w.spec();
  const Problem p = make_problem(preset, w.stream_seed(0));
  const std::size_t n = p.system.cols();
  const double eta = p.system.eta(n - 1);
  const double mass = spec.overrides.mass.value_or(default_mass);
  const double beta0 = beta0_for(eta, mass);
  const double beta = spec.overrides.beta.value_or(beta0 + beta_offset);
  const MomentumParams params = MomentumParams::make(mass, beta);

  RunPlan plan;
  plan.iterations = spec.overrides.iterations.value_or(default_iterations);
  plan.tracked = std::move(extra_tracked);
  plan.tracked.push_back(n - 1);
  std::sort(plan.tracked.begin(), plan.tracked.end());
  plan.tracked.erase(std::unique(plan.tracked.begin(), plan.tracked.end()), plan.tracked.end());

  RngStream index_stream(w.stream_seed(1));
  const auto log = draw_index_log(p.system, plan.sampling, plan.iterations, index_stream);
  const IterationTrace kaczmarz = replay(p, Method::Kaczmarz, {}, plan, log);
  const IterationTrace kgsm = replay(p, Method::Kgsm, params, plan, log);

  const double e0 = directional_error(p.x0, p.system, n - 1);
  const auto ks = recorded_steps(plan.iterations, effective_stride(plan));
  const bool on_curve = beta == beta0 && mass <= std::pow(1.0 - std::sqrt(eta), 2);

  w.params() = system_params(p, preset);
  w.params()["mass"] = mass;
  w.params()["beta"] = beta;
  w.params()["beta0"] = beta0;
  w.params()["iterations"] = plan.iterations;
  w.params()["stride"] = effective_stride(plan);
  w.params()["regime"] = std::string(to_string(analyze(eta, params).regime));
  w.params()["kgsm_theory"] = on_curve ? "closed form on the repeated curve" : "matrix powers";

  w.csv("kaczmarz", trace_csv(kaczmarz));
  w.csv("kgsm", trace_csv(kgsm));
  w.csv("theory_kaczmarz", kaczmarz_theory_csv(ks, eta, e0));
  w.csv("theory_kgsm", on_curve ? closed_form_theory_csv(ks, eta, mass, e0)
                                : kgsm_theory_csv(ks, eta, params, e0));
  w.flag("kaczmarz", kaczmarz);
  w.flag("kgsm", kgsm);
  return kgsm;
}

std::string dir_column(std::size_t l) { return "dir_" + std::to_string(l + 1); }

svg::PlotSpec direction_plot(const std::string& title, std::size_t n) {
  svg::PlotSpec plot = log_plot(title, "|<x_k - x, v" + std::to_string(n) + ">|");
  plot.series = {series("Kaczmarz", "kaczmarz", dir_column(n - 1), kBlue),
                 series("KGSM", "kgsm", dir_column(n - 1), kRed),
                 theory_series("Kaczmarz expectation", "theory_kaczmarz", kGray),
                 theory_series("KGSM expectation", "theory_kgsm", kBlack)};
  return plot;
}

svg::PlotSpec l2_plot(const std::string& title) {
  svg::PlotSpec plot = log_plot(title, "||x_k - x||");
  plot.series = {series("Kaczmarz", "kaczmarz", "l2", kBlue), series("KGSM", "kgsm", "l2", kRed)};
  return plot;
}

void write_flips(FigureWriter& w, const IterationTrace& kgsm, std::size_t l) {
  std::ostringstream out;
  csv::write_row(out, {"source", "k"});
  for (std::size_t k : sign_flip_events(kgsm, l)) {
    csv::write_row(out, {"kgsm", std::to_string(k)});
  }
  w.csv("flips", out.str());
}

// fig01 / fig02 / fig03 / fig08
void one_small_figure(FigureWriter& w, double beta_offset, bool side_by_side) {
  const auto preset = SpectrumPreset::named(SpectrumKind::OneSmall);
  const IterationTrace kgsm = comparison_figure(w, preset, 0.9, beta_offset, 100000);
  const std::string& id = w.spec().id;
  if (beta_offset != 0.0) {
    write_flips(w, kgsm, 19);
  }
  if (side_by_side) {
    w.svg(id + "_v20", direction_plot(id + ": error along v20", 20));
    w.svg(id + "_l2", l2_plot(id + ": l2 error"));
  } else {
    w.svg(id, direction_plot(id + ": error along v20", 20));
  }
}

struct Marker {
  const char* name;
  double mass;
  double beta;
  const char* color;
};

constexpr Marker kMarkers[] = {
    {"circle", 0.9, 0.992, kBlack},
    {"plus", 0.95, 0.992, kGreen},
    {"square", 0.85, 0.992, kRed},
    {"triangle", 0.965, 0.932, kBlue},
};

void fig04(FigureWriter& w) {
  const auto preset = SpectrumPreset::named(SpectrumKind::OneSmall);
  const Problem p = make_problem(preset, w.stream_seed(0));
  const double eta = p.system.eta(19);
  w.params() = system_params(p, preset);

  std::ostringstream grid;
  csv::write_row(grid, {"mass", "beta", "regime", "spectral_radius", "discriminant"});
  for (int i = 0; i <= 40; ++i) {
    const double mass = 0.8 + 0.005 * i;
    for (int j = 0; j <= 100; ++j) {
      const double beta = 0.9 + 0.00099 * j;
      const CompanionAnalysis a = analyze(eta, MomentumParams::make(mass, beta));
      csv::write_row(grid, {csv::format_double(mass), csv::format_double(beta),
                            std::string(to_string(a.regime)),
                            csv::format_double(a.spectral_radius()),
                            csv::format_double(a.discriminant)});
    }
  }
  w.csv("regimes", grid.str());

  std::ostringstream curve;
  csv::write_row(curve, {"mass", "beta0", "beta1"});
  for (int i = 0; i <= 200; ++i) {
    const double mass = 0.8 + 0.001 * i;
    const CompanionAnalysis a = analyze(eta, MomentumParams::make(mass, 0.0));
    if (a.beta0 < 0.9) {
      break;
    }
    csv::write_row(curve, {csv::format_double(mass), csv::format_double(a.beta0),
                           csv::format_double(a.beta1)});
  }
  w.csv("boundary", curve.str());

  std::ostringstream markers;
  csv::write_row(markers, {"marker", "mass", "beta", "regime", "spectral_radius", "discriminant"});
  svg::PlotSpec plot;
  plot.title = "fig04: (M, beta) parameter plane";
  plot.x_label = "M";
  plot.y_label = "beta";
  plot.y_scale = svg::YScale::Linear;
  svg::SeriesSpec curve_series = series("beta = beta0(M)", "boundary", "beta0", kBlue);
  curve_series.x_column = "mass";
  plot.series.push_back(curve_series);
  for (const Marker& m : kMarkers) {
    const CompanionAnalysis a = analyze(eta, MomentumParams::make(m.mass, m.beta));
    csv::write_row(markers, {m.name, csv::format_double(m.mass), csv::format_double(m.beta),
                             std::string(to_string(a.regime)),
                             csv::format_double(a.spectral_radius()),
                             csv::format_double(a.discriminant)});
    csv::Table t;
    t.header = {"mass", "beta"};
    t.rows = {{csv::format_double(m.mass), csv::format_double(m.beta)}};
    w.table(std::string("marker_") + m.name, t);
    svg::SeriesSpec s = series(m.name, std::string("marker_") + m.name, "beta", m.color,
                               svg::Style::Markers);
    s.x_column = "mass";
    plot.series.push_back(s);
  }
  w.csv("markers", markers.str());
  w.svg("fig04", plot);
}

// fig05 and phase_a4 share the runs and differ in what they plot.
void marker_figure(FigureWriter& w, bool phase_panels) {
  const FigureSpec& spec = w.spec();
  const auto preset = SpectrumPreset::named(SpectrumKind::OneSmall);
  const Problem p = make_problem(preset, w.stream_seed(0));
  const double eta = p.system.eta(19);
  const double e0 = directional_error(p.x0, p.system, 19);
  RunPlan plan;
  plan.iterations = spec.overrides.iterations.value_or(200000);
  plan.tracked = {18, 19};
  RngStream index_stream(w.stream_seed(1));
  const auto log = draw_index_log(p.system, plan.sampling, plan.iterations, index_stream);
  const auto ks = recorded_steps(plan.iterations, effective_stride(plan));

  w.params() = system_params(p, preset);
  w.params()["iterations"] = plan.iterations;
  w.params()["stride"] = effective_stride(plan);
  w.params()["markers"] = json::array();

  const IterationTrace kaczmarz = replay(p, Method::Kaczmarz, {}, plan, log);
  w.csv("kaczmarz", trace_csv(kaczmarz));
  w.flag("kaczmarz", kaczmarz);
  for (const Marker& m : kMarkers) {
    const MomentumParams params = MomentumParams::make(m.mass, m.beta);
    const IterationTrace kgsm = replay(p, Method::Kgsm, params, plan, log);
    const std::string name = std::string("kgsm_") + m.name;
    const std::string theory = std::string("theory_") + m.name;
    w.csv(name, trace_csv(kgsm));
    w.csv(theory, kgsm_theory_csv(ks, eta, params, e0));
    w.flag(name, kgsm);
    const CompanionAnalysis a = analyze(eta, params);
    w.params()["markers"].push_back({{"marker", m.name},
                                     {"mass", m.mass},
                                     {"beta", m.beta},
                                     {"regime", std::string(to_string(a.regime))},
                                     {"spectral_radius", a.spectral_radius()},
                                     {"sign_flips_v20", sign_flip_events(kgsm, 19).size()}});
    const std::string label = std::string(" (") + m.name + ")";
    if (!phase_panels) {
      svg::PlotSpec plot = log_plot("fig05" + label + ": error along v20", "|<x_k - x, v20>|");
      plot.series = {series("Kaczmarz", "kaczmarz", "dir_20", kBlue),
                     series("KGSM", name, "dir_20", kRed),
                     theory_series("KGSM expectation", theory, kBlack)};
      w.svg(std::string("fig05_") + m.name, plot);
    } else {
      svg::PlotSpec v19 = log_plot("phase" + label + ": error along v19", "|<x_k - x, v19>|");
      v19.series = {series("KGSM", name, "dir_19", kRed)};
      w.svg(std::string("phase_") + m.name + "_v19", v19);
      svg::PlotSpec l2 = log_plot("phase" + label + ": l2 error", "||x_k - x||");
      l2.series = {series("Kaczmarz", "kaczmarz", "l2", kBlue), series("KGSM", name, "l2", kRed)};
      w.svg(std::string("phase_") + m.name + "_l2", l2);
    }
  }
}

// fig06 / fig_manysmall
void decay_figure(FigureWriter& w, SpectrumKind kind) {
  comparison_figure(w, SpectrumPreset::named(kind), 0.85, 0.0, 20000);
  const std::string& id = w.spec().id;
  w.svg(id + "_v20", direction_plot(id + ": error along v20", 20));
  w.svg(id + "_l2", l2_plot(id + ": l2 error"));
}

std::string bands_csv(const QuartileBands& b) {
  std::ostringstream out;
  csv::write_row(out, {"k", "min", "q1", "median", "q3", "max", "count"});
  for (std::size_t j = 0; j < b.k.size(); ++j) {
    csv::write_row(out, {std::to_string(b.k[j]), csv::format_double(b.min[j]),
                         csv::format_double(b.q1[j]), csv::format_double(b.median[j]),
                         csv::format_double(b.q3[j]), csv::format_double(b.max[j]),
                         std::to_string(b.counts[j])});
  }
  return out.str();
}

void fig07(FigureWriter& w) {
  const FigureSpec& spec = w.spec();
  const auto preset = SpectrumPreset::named(SpectrumKind::Linear);
  const std::size_t trials = spec.overrides.trials.value_or(100);
  RunPlan plan;
  plan.iterations = spec.overrides.iterations.value_or(20000);
  plan.tracked = {19};
  plan.stride = 10;
  const double mass = spec.overrides.mass.value_or(0.85);
  // The spectrum is fixed by the preset, so eta_20 is the same in every trial.
  const Vector sigma = expand_preset(preset);
  double frob = 0.0;
  for (double s : sigma) {
    frob += s * s;
  }
  const double eta = sigma.back() * sigma.back() / frob;
  const double beta = spec.overrides.beta.value_or(beta0_for(eta, mass));
  const MomentumParams params = MomentumParams::make(mass, beta);

  std::vector<IterationTrace> traces(trials);
  const std::uint64_t master = w.stream_seed(2);
  parallel_for(trials, [&](std::size_t t) {
    RngStream stream = derive_substream(master, t);
    Problem p{generate_spectrum_system(preset, stream), {}};
    p.x0 = gaussian_vector(p.system.cols(), stream);
    const auto log = draw_index_log(p.system, plan.sampling, plan.iterations, stream);
    traces[t] = replay(p, Method::Kgsm, params, plan, log);
  });

  w.params() = {{"preset", "linear"}, {"rows", preset.rows}, {"cols", preset.cols},
                {"eta_n", eta}, {"mass", mass}, {"beta", beta}, {"trials", trials},
                {"iterations", plan.iterations}, {"stride", plan.stride},
                {"quantile_rule", "type 7 (linear interpolation of order statistics)"}};
  for (std::size_t t = 0; t < trials; ++t) {
    w.flag("trial_" + std::to_string(t), traces[t]);
  }
  const QuartileBands v20 = quartile_bands(traces, TraceMetric::directional(19));
  const QuartileBands l2 = quartile_bands(traces, TraceMetric::l2());
  w.params()["diverged_trials"] = v20.diverged_trials;
  w.csv("quartiles_v20", bands_csv(v20));
  w.csv("quartiles_l2", bands_csv(l2));
  for (const auto& [table, name, label] :
       {std::tuple{"quartiles_v20", "fig07_v20", "|<x_k - x, v20>|"},
        std::tuple{"quartiles_l2", "fig07_l2", "||x_k - x||"}}) {
    svg::PlotSpec plot = log_plot(std::string("fig07: quartiles over trials, ") + label, label);
    plot.series = {series("min", table, "min", kGray), series("q1", table, "q1", kBlue),
                   series("median", table, "median", kBlack), series("q3", table, "q3", kOrange),
                   series("max", table, "max", kRed)};
    w.svg(name, plot);
  }
}

void fig09(FigureWriter& w) {
  comparison_figure(w, SpectrumPreset::named(SpectrumKind::TwoSmall), 0.9, 0.001, 100000, {18});
  svg::PlotSpec dirs = log_plot("fig09: errors along v19 and v20", "|<x_k - x, v_l>|");
  dirs.series = {series("Kaczmarz v20", "kaczmarz", "dir_20", kBlue),
                 series("KGSM v19", "kgsm", "dir_19", kOrange),
                 series("KGSM v20", "kgsm", "dir_20", kRed),
                 theory_series("KGSM expectation v20", "theory_kgsm", kBlack)};
  w.svg("fig09_dirs", dirs);
  w.svg("fig09_l2", l2_plot("fig09: l2 error"));
}

void fig_sign(FigureWriter& w) {
  const FigureSpec& spec = w.spec();
  const auto preset = SpectrumPreset::named(SpectrumKind::OneSmall);
  const Problem p = make_problem(preset, w.stream_seed(0));
  const double eta = p.system.eta(19);
  RunPlan plan;
  plan.iterations = spec.overrides.iterations.value_or(100000);
  plan.tracked = {19};
  RngStream index_stream(w.stream_seed(1));
  const auto log = draw_index_log(p.system, plan.sampling, plan.iterations, index_stream);

  struct Panel {
    const char* name;
    MomentumParams params;
  };
  const Panel panels[] = {
      {"fig03", MomentumParams::make(0.9, beta0_for(eta, 0.9) + 0.001)},
      {"plus", MomentumParams::make(0.95, 0.992)},
  };
  w.params() = system_params(p, preset);
  w.params()["iterations"] = plan.iterations;
  w.params()["panels"] = json::array();
  for (const Panel& panel : panels) {
    const IterationTrace kgsm = replay(p, Method::Kgsm, panel.params, plan, log);
    const std::string name = std::string("sign_") + panel.name;
    std::ostringstream out;
    csv::write_row(out, {"k", "abs", "sign"});
    const Vector& d = kgsm.directional.at(19);
    for (std::size_t j = 0; j < d.size(); ++j) {
      csv::write_row(out, {std::to_string(kgsm.k[j]), csv::format_double(std::abs(d[j])),
                           std::to_string((d[j] > 0.0) - (d[j] < 0.0))});
    }
    w.csv(name, out.str());
    w.flag(name, kgsm);
    const auto flips = sign_flip_events(kgsm, 19);
    w.params()["panels"].push_back({{"panel", panel.name},
                                    {"mass", panel.params.mass},
                                    {"beta", panel.params.smoothing},
                                    {"sign_flips", flips.size()}});
    svg::PlotSpec abs_plot = log_plot(std::string("KGSM error along v20 (") + panel.name + ")",
                                      "|<x_k - x, v20>|");
    abs_plot.series = {series("|error|", name, "abs", kRed)};
    w.svg(name + "_abs", abs_plot);
    svg::PlotSpec sign_plot;
    sign_plot.title = std::string("sign of <x_k - x, v20> (") + panel.name + ")";
    sign_plot.y_label = "sign";
    sign_plot.y_scale = svg::YScale::Linear;
    sign_plot.series = {series("sign", name, "sign", kBlack)};
    w.svg(name + "_sign", sign_plot);
  }
}

void gauss_a1(FigureWriter& w) {
  const FigureSpec& spec = w.spec();
  RngStream stream(w.stream_seed(0));
  Problem p{generate_gaussian_system(60, 50, stream), Vector(50, 0.0)};
  const double mass = spec.overrides.mass.value_or(0.8);
  const double beta = spec.overrides.beta.value_or(0.98);
  const MomentumParams params = MomentumParams::make(mass, beta);
  RunPlan plan;
  plan.iterations = spec.overrides.iterations.value_or(15000);
  plan.tracked = {49};
  plan.sampling = Sampling::Uniform;
  RngStream index_stream(w.stream_seed(1));
  const auto log = draw_index_log(p.system, plan.sampling, plan.iterations, index_stream);
  const IterationTrace kaczmarz = replay(p, Method::Kaczmarz, {}, plan, log);
  const IterationTrace kgsm = replay(p, Method::Kgsm, params, plan, log);
  const Vector& sigma = p.system.spectrum.singular_values;
  w.params() = {{"generator", "gaussian"}, {"rows", 60}, {"cols", 50}, {"mass", mass},
                {"beta", beta}, {"iterations", plan.iterations}, {"sampling", "uniform"},
                {"x0", "zeros"}, {"condition_number", sigma.front() / sigma.back()},
                {"final_l2_kaczmarz", kaczmarz.l2.back()}, {"final_l2_kgsm", kgsm.l2.back()}};
  w.csv("kaczmarz", trace_csv(kaczmarz));
  w.csv("kgsm", trace_csv(kgsm));
  w.flag("kaczmarz", kaczmarz);
  w.flag("kgsm", kgsm);
  w.svg("gauss_a1", l2_plot("Gaussian 60 x 50 system: l2 error"));
}

void hbm_a2(FigureWriter& w) {
  const FigureSpec& spec = w.spec();
  const double hbm_mass = spec.overrides.mass.value_or(kHbmMass);
  struct Case {
    const char* name;
    SpectrumKind kind;
    double kgsm_mass;
    std::size_t iterations;
  };
  const Case cases[] = {{"one_small", SpectrumKind::OneSmall, 0.9, kHbmBudgetOneSmall},
                        {"linear", SpectrumKind::Linear, 0.85, kHbmBudgetLinear}};
  w.params() = {{"hbm_mass", hbm_mass}, {"systems", json::array()}};
  std::uint64_t salt = 0;
  for (const Case& c : cases) {
    const auto preset = SpectrumPreset::named(c.kind);
    const Problem p = make_problem(preset, w.stream_seed(salt++));
    const double eta = p.system.eta(19);
    const MomentumParams kgsm_params = MomentumParams::make(c.kgsm_mass, beta0_for(eta, c.kgsm_mass));
    RunPlan plan;
    plan.iterations = spec.overrides.iterations.value_or(c.iterations);
    plan.tracked = {19};
    RngStream index_stream(w.stream_seed(salt++));
    const auto log = draw_index_log(p.system, plan.sampling, plan.iterations, index_stream);
    const IterationTrace kaczmarz = replay(p, Method::Kaczmarz, {}, plan, log);
    const IterationTrace kgsm = replay(p, Method::Kgsm, kgsm_params, plan, log);
    const IterationTrace hbm = replay(p, Method::Hbm, MomentumParams::make(hbm_mass, 0.0), plan, log);
    const std::string prefix = c.name;
    w.csv(prefix + "_kaczmarz", trace_csv(kaczmarz));
    w.csv(prefix + "_kgsm", trace_csv(kgsm));
    w.csv(prefix + "_hbm", trace_csv(hbm));
    w.flag(prefix + "_kaczmarz", kaczmarz);
    w.flag(prefix + "_kgsm", kgsm);
    w.flag(prefix + "_hbm", hbm);
    json entry = system_params(p, preset);
    entry["kgsm_mass"] = kgsm_params.mass;
    entry["kgsm_beta"] = kgsm_params.smoothing;
    entry["iterations"] = plan.iterations;
    entry["final_l2"] = {{"kaczmarz", kaczmarz.l2.back()}, {"kgsm", kgsm.l2.back()},
                         {"hbm", hbm.l2.back()}};
    w.params()["systems"].push_back(entry);
    svg::PlotSpec plot = log_plot("l2 error, " + prefix + " system", "||x_k - x||");
    plot.series = {series("Kaczmarz", prefix + "_kaczmarz", "l2", kBlue),
                   series("KGSM", prefix + "_kgsm", "l2", kRed),
                   series("heavy ball", prefix + "_hbm", "l2", kGreen)};
    w.svg("hbm_" + prefix, plot);
  }
}

void spectra_a3(FigureWriter& w) {
  const FigureSpec& spec = w.spec();
  struct Case {
    const char* name;
    SpectrumKind kind;
    double mass;
  };
  const Case cases[] = {{"convex", SpectrumKind::ConvexPoly, 0.95},
                        {"concave", SpectrumKind::ConcavePoly, 0.91}};
  const Vector mu = expand_preset(SpectrumPreset::named(SpectrumKind::ConvexPoly));
  const Vector sg = expand_preset(SpectrumPreset::named(SpectrumKind::ConcavePoly));
  std::ostringstream dist;
  csv::write_row(dist, {"i", "convex", "concave"});
  for (std::size_t i = 0; i < mu.size(); ++i) {
    csv::write_row(dist, {std::to_string(i + 1), csv::format_double(mu[i]), csv::format_double(sg[i])});
  }
  w.csv("spectra", dist.str());
  svg::PlotSpec dist_plot;
  dist_plot.title = "singular values";
  dist_plot.x_label = "i";
  dist_plot.y_label = "singular value";
  dist_plot.y_scale = svg::YScale::Linear;
  for (auto s : {series("convex-poly", "spectra", "convex", kBlue),
                 series("concave-poly", "spectra", "concave", kRed)}) {
    s.x_column = "i";
    dist_plot.series.push_back(s);
  }
  w.svg("spectra_dist", dist_plot);

  w.params() = {{"convex_constant", convex_poly_constant()},
                {"concave_constant", concave_poly_constant()},
                {"systems", json::array()}};
  std::uint64_t salt = 0;
  for (const Case& c : cases) {
    const auto preset = SpectrumPreset::named(c.kind);
    const Problem p = make_problem(preset, w.stream_seed(salt++));
    const double eta = p.system.eta(19);
    const double mass = spec.overrides.mass.value_or(c.mass);
    const double beta = spec.overrides.beta.value_or(beta0_for(eta, mass));
    const MomentumParams params = MomentumParams::make(mass, beta);
    RunPlan plan;
    plan.iterations = spec.overrides.iterations.value_or(40000);
    plan.tracked = {19};
    RngStream index_stream(w.stream_seed(salt++));
    const auto log = draw_index_log(p.system, plan.sampling, plan.iterations, index_stream);
    const IterationTrace kaczmarz = replay(p, Method::Kaczmarz, {}, plan, log);
    const IterationTrace kgsm = replay(p, Method::Kgsm, params, plan, log);
    const std::string prefix = c.name;
    const auto ks = recorded_steps(plan.iterations, effective_stride(plan));
    const double e0 = directional_error(p.x0, p.system, 19);
    w.csv(prefix + "_kaczmarz", trace_csv(kaczmarz));
    w.csv(prefix + "_kgsm", trace_csv(kgsm));
    w.csv(prefix + "_theory", kgsm_theory_csv(ks, eta, params, e0));
    w.flag(prefix + "_kaczmarz", kaczmarz);
    w.flag(prefix + "_kgsm", kgsm);
    json entry = system_params(p, preset);
    entry["mass"] = mass;
    entry["beta"] = beta;
    entry["iterations"] = plan.iterations;
    w.params()["systems"].push_back(entry);
    svg::PlotSpec plot = log_plot("l2 error, " + std::string(to_string(c.kind)) + " spectrum", "||x_k - x||");
    plot.series = {series("Kaczmarz", prefix + "_kaczmarz", "l2", kBlue),
                   series("KGSM", prefix + "_kgsm", "l2", kRed),
                   theory_series("|E<x_k - x, v20>|", prefix + "_theory", kBlack)};
    w.svg("spectra_" + prefix + "_l2", plot);
  }
}

} // namespace

Manifest run_figure(const FigureSpec& spec, const fs::path& outdir) {
  if (!is_figure_id(spec.id)) {
    throw UnknownFigureError("unknown figure id '" + spec.id + "' (see figure --list)");
  }
  FigureWriter w(spec, outdir);
  const std::string& id = spec.id;
  if (id == "fig01" || id == "fig03") {
    one_small_figure(w, 0.001, false);
  } else if (id == "fig02") {
    one_small_figure(w, 0.0, false);
  } else if (id == "fig08") {
    one_small_figure(w, 0.001, true);
  } else if (id == "fig04") {
    fig04(w);
  } else if (id == "fig05") {
    marker_figure(w, false);
  } else if (id == "phase_a4") {
    marker_figure(w, true);
  } else if (id == "fig06") {
    decay_figure(w, SpectrumKind::Linear);
  } else if (id == "fig_manysmall") {
    decay_figure(w, SpectrumKind::ManySmall);
  } else if (id == "fig07") {
    fig07(w);
  } else if (id == "fig09") {
    fig09(w);
  } else if (id == "fig_sign") {
    fig_sign(w);
  } else if (id == "gauss_a1") {
    gauss_a1(w);
  } else if (id == "hbm_a2") {
    hbm_a2(w);
  } else if (id == "spectra_a3") {
    spectra_a3(w);
  }
  return w.finish();
}

} // namespace kgsm
