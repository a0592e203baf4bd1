#include "kgsm/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "kgsm/csv.hpp"

namespace kgsm {

MomentumParams MomentumParams::make(double mass, double smoothing) {
  MomentumParams params{mass, smoothing};
  params.validate();
  return params;
}

void MomentumParams::validate() const {
  if (!(mass >= 0.0 && mass <= 1.0)) {
    throw std::invalid_argument("momentum mass must lie in [0, 1], got " + std::to_string(mass));
  }
  if (!(smoothing >= 0.0 && smoothing < 1.0)) {
    throw std::invalid_argument("smoothing must lie in [0, 1), got " + std::to_string(smoothing));
  }
}

SolverState SolverState::start(std::span<const double> x0) {
  return SolverState{Vector(x0.begin(), x0.end()), Vector(x0.size(), 0.0), 0};
}

namespace {

double checked_row_norm(std::span<const double> row) {
  const double sq = squared_norm(row);
  if (!(sq > 0.0)) {
    throw ZeroRowError("kaczmarz step on a zero row");
  }
  return sq;
}

// x <- x + (rhs - <row, x>) / ||row||^2 * row
void project_in_place(std::span<double> x, std::span<const double> row, double rhs,
                      double row_sq) {
  const double scale = (rhs - dot(row, x)) / row_sq;
  axpy(scale, row, x);
}

// One momentum step in place. `scratch` receives the previous iterate.
void momentum_step_in_place(Vector& x, Vector& y, Vector& scratch, std::span<const double> row,
                            double rhs, double row_sq, double mass, double smoothing) {
  scratch = x;
  project_in_place(x, row, rhs, row_sq);
  axpy(mass, y, x);
  const double keep = 1.0 - smoothing;
  for (std::size_t j = 0; j < x.size(); ++j) {
    y[j] = smoothing * y[j] + keep * (x[j] - scratch[j]);
  }
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double z) { return std::isfinite(z); });
}

} // namespace

Vector kaczmarz_step(std::span<const double> x, std::span<const double> row, double rhs) {
  if (x.size() != row.size()) {
    throw DimensionError("kaczmarz_step: row length differs from iterate length");
  }
  Vector out(x.begin(), x.end());
  project_in_place(out, row, rhs, checked_row_norm(row));
  return out;
}

SolverState kgsm_step(const SolverState& state, std::span<const double> row, double rhs,
                      const MomentumParams& params) {
  if (state.x.size() != row.size()) {
    throw DimensionError("kgsm_step: row length differs from iterate length");
  }
  SolverState next = state;
  Vector scratch;
  momentum_step_in_place(next.x, next.y, scratch, row, rhs, checked_row_norm(row), params.mass,
                         params.smoothing);
  ++next.k;
  return next;
}

SolverState hbm_step(const SolverState& state, std::span<const double> row, double rhs,
                     double mass) {
  if (state.x.size() != row.size()) {
    throw DimensionError("hbm_step: row length differs from iterate length");
  }
  SolverState next = state;
  project_in_place(next.x, row, rhs, checked_row_norm(row));
  axpy(mass, state.y, next.x);
  for (std::size_t j = 0; j < next.x.size(); ++j) {
    next.y[j] = next.x[j] - state.x[j];
  }
  ++next.k;
  return next;
}

SgdConfig SgdConfig::kaczmarz(const LinearSystem& system) {
  SgdConfig config;
  config.probabilities.resize(system.rows());
  double total = 0.0;
  for (double w : system.row_sq_norms) {
    total += w;
  }
  for (std::size_t i = 0; i < system.rows(); ++i) {
    config.probabilities[i] = system.row_sq_norms[i] / total;
  }
  config.learning_rate = [total](std::size_t) { return 1.0 / total; };
  return config;
}

Vector sgd_step(std::span<const double> x, std::size_t row, const SgdConfig& config,
                const LinearSystem& system, std::size_t k) {
  const double p = config.probabilities.at(row);
  if (!(p > 0.0)) {
    throw std::invalid_argument("sgd_step: row sampled with zero probability");
  }
  const auto a = system.a.row(row);
  const double alpha = config.learning_rate(k);
  Vector out(x.begin(), x.end());
  axpy(-alpha * (dot(a, x) - system.b[row]) / p, a, out);
  return out;
}

std::string_view to_string(Method method) {
  switch (method) {
  case Method::Kaczmarz:
    return "kaczmarz";
  case Method::Kgsm:
    return "kgsm";
  case Method::Hbm:
    return "hbm";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view name) {
  for (Method m : {Method::Kaczmarz, Method::Kgsm, Method::Hbm}) {
    if (to_string(m) == name) {
      return m;
    }
  }
  return std::nullopt;
}

bool uses_momentum(Method method) { return method != Method::Kaczmarz; }

std::size_t default_stride(std::size_t iterations) {
  constexpr std::size_t kMaxRecords = 100000;
  if (iterations <= kMaxRecords) {
    return 1;
  }
  return (iterations + kMaxRecords - 1) / kMaxRecords;
}

IterationTrace run(const LinearSystem& system, std::span<const double> x0,
                   const RunOptions& options, RngStream& stream) {
  const std::size_t n = system.cols();
  if (x0.size() != n) {
    throw DimensionError("run: x0 length differs from column count");
  }
  for (std::size_t l : options.tracked) {
    if (l >= n) {
      throw std::out_of_range("run: tracked direction " + std::to_string(l + 1) +
                              " exceeds n = " + std::to_string(n));
    }
  }
  if (!options.replay.empty() && options.replay.size() < options.iterations) {
    throw std::invalid_argument("run: replay log shorter than the iteration budget");
  }
  if (uses_momentum(options.method)) {
    options.params.validate();
  }

  IterationTrace trace;
  trace.stride = options.stride == 0 ? default_stride(options.iterations) : options.stride;
  const std::size_t records = options.iterations / trace.stride + 1;
  trace.k.reserve(records);
  trace.l2.reserve(records);
  for (std::size_t l : options.tracked) {
    trace.directional[l].reserve(records);
  }
  if (options.record_indices) {
    trace.index_log.reserve(options.iterations);
  }

  Vector x(x0.begin(), x0.end());
  Vector y(n, 0.0);
  Vector scratch(n);

  // Norms can overflow one step before the iterate itself does.
  auto record = [&](std::size_t k) {
    const double l2 = l2_error(x, system);
    if (!std::isfinite(l2)) {
      return false;
    }
    trace.k.push_back(k);
    trace.l2.push_back(l2);
    for (auto& [l, series] : trace.directional) {
      series.push_back(directional_error(x, system, l));
    }
    return true;
  };
  if (!record(0)) {
    throw std::invalid_argument("run: initial iterate is not finite");
  }

  const RowSampler sampler = options.sampling == Sampling::Uniform
                                 ? RowSampler::uniform(system.rows())
                                 : system.squared_norm_sampler();
  const double mass = options.params.mass;
  const double smoothing = options.method == Method::Hbm ? 0.0 : options.params.smoothing;

  for (std::size_t k = 0; k < options.iterations; ++k) {
    const std::size_t i =
        options.replay.empty() ? sampler.sample(stream) : options.replay[k];
    if (options.record_indices) {
      trace.index_log.push_back(static_cast<std::uint32_t>(i));
    }
    const auto row = system.a.row(i);
    const double rhs = system.b[i];
    const double row_sq = system.row_sq_norms[i];
    if (options.method == Method::Kaczmarz) {
      project_in_place(x, row, rhs, row_sq);
    } else {
      momentum_step_in_place(x, y, scratch, row, rhs, row_sq, mass, smoothing);
    }
    if (!all_finite(x) || !all_finite(y)) {
      trace.diverged = true;
      trace.divergence_iteration = k + 1;
      break;
    }
    if ((k + 1) % trace.stride == 0 && !record(k + 1)) {
      trace.diverged = true;
      trace.divergence_iteration = k + 1;
      break;
    }
  }
  trace.final_x = std::move(x);
  return trace;
}

void write_trace_csv(std::ostream& out, const IterationTrace& trace) {
  std::vector<std::string> header{"k", "l2"};
  for (const auto& [l, series] : trace.directional) {
    header.push_back("dir_" + std::to_string(l + 1));
  }
  csv::write_row(out, header);
  std::vector<std::string> fields;
  for (std::size_t r = 0; r < trace.length(); ++r) {
    fields.clear();
    fields.push_back(std::to_string(trace.k[r]));
    fields.push_back(csv::format_double(trace.l2[r]));
    for (const auto& [l, series] : trace.directional) {
      fields.push_back(csv::format_double(series[r]));
    }
    csv::write_row(out, fields);
  }
}

} // namespace kgsm
