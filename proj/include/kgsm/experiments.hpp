#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "kgsm/solvers.hpp"
#include "kgsm/systems.hpp"
#include "kgsm/theory.hpp"

namespace kgsm {

// ---------------------------------------------------------------------------
// Analytics

/// Which recorded series of a trace to aggregate.
struct TraceMetric {
  enum class Kind { L2, Directional };
  Kind kind = Kind::L2;
  std::size_t direction = 0;  ///< zero-based, Directional only

  static TraceMetric l2() { return {Kind::L2, 0}; }
  static TraceMetric directional(std::size_t l) { return {Kind::Directional, l}; }
};

/// Pointwise order statistics over trials. Directional values enter as |.|.
struct QuartileBands {
  std::vector<std::size_t> k;
  Vector min;
  Vector q1;
  Vector median;
  Vector q3;
  Vector max;
  std::vector<std::size_t> counts;   ///< traces contributing at each point
  std::size_t diverged_trials = 0;   ///< traces cut short by divergence
};

/// Type-7 quantile (linear interpolation of order statistics) of sorted data.
double quantile_type7(std::span<const double> sorted, double p);

/// Requires at least four traces. Divergent traces contribute up to their
/// last recorded point; a short trace that did not diverge is an error.
QuartileBands quartile_bands(const std::vector<IterationTrace>& traces, TraceMetric metric);

/// Positions j where the sign of series[j] differs from that of series[j-1].
/// A zero keeps the previous sign.
std::vector<std::size_t> sign_flip_positions(std::span<const double> series);
std::vector<std::size_t> sign_flip_positions(const std::vector<ScaledValue>& series);

/// Iteration numbers (trace.k) at which <x_k - x, v_l> changes sign.
/// Throws std::out_of_range when l was not tracked.
std::vector<std::size_t> sign_flip_events(const IterationTrace& trace, std::size_t l);

struct SweepOptions {
  std::size_t iterations = 100000;
  std::size_t direction = 0;   ///< zero-based direction whose error is reported
  std::uint64_t seed = 0;      ///< every cell replays the index stream of this seed
  std::size_t stride = 0;
  unsigned threads = 0;        ///< 0 uses hardware concurrency
};

struct SweepCell {
  double mass = 0.0;
  double beta = 0.0;
  Regime regime = Regime::RealDistinct;
  double spectral_radius = 0.0;
  bool diverged = false;
  std::optional<std::size_t> divergence_iteration;
  bool converged = false;      ///< finite and final l2 below the initial l2
  double final_directional = 0.0;
  double final_l2 = 0.0;
  std::size_t sign_flips = 0;
};

/// KGSM over the (M, beta) grid, row-major in M. Cells run in parallel and
/// the result does not depend on the schedule.
std::vector<SweepCell> parameter_sweep(const LinearSystem& system, std::span<const double> x0,
                                       std::span<const double> mass_grid,
                                       std::span<const double> beta_grid,
                                       const SweepOptions& options);

struct PersistenceCheck {
  double lhs = 0.0;  ///< sum_i p_i <u, u'(i)>^2
  double rhs = 0.0;  ///< 1 - ||A u||^2 / ||A||_F^2
  std::size_t excluded_rows = 0;
};

/// Exact row enumeration of the one-step direction persistence identity.
/// Rows whose projection lands on the solution contribute nothing and are
/// counted in `excluded_rows`. Throws std::invalid_argument when xk equals
/// the solution.
PersistenceCheck direction_persistence_check(const LinearSystem& system, std::span<const double> xk);

/// Row indices drawn exactly as run() would draw them.
std::vector<std::uint32_t> draw_index_log(const LinearSystem& system, Sampling sampling,
                                          std::size_t count, RngStream& stream);

/// Runs `body(i)` for i in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  unsigned threads = 0);

// ---------------------------------------------------------------------------
// Figure drivers

struct FigureOverrides {
  std::optional<double> mass;
  std::optional<double> beta;
  std::optional<std::size_t> iterations;
  std::optional<std::size_t> trials;
};

struct FigureSpec {
  std::string id;
  std::uint64_t seed = 1;
  FigureOverrides overrides;
};

struct FigureInfo {
  std::string_view id;
  std::string_view summary;
};

/// Every figure id, in listing order.
const std::vector<FigureInfo>& figure_catalog();
bool is_figure_id(std::string_view id);

class UnknownFigureError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct DivergenceFlag {
  std::string run;
  bool diverged = false;
  std::optional<std::size_t> iteration;
};

/// Contents of `<outdir>/<id>/manifest.json`.
struct Manifest {
  std::string id;
  std::uint64_t seed = 0;
  nlohmann::json params = nlohmann::json::object();
  std::vector<std::string> files;  ///< relative to the figure directory
  std::vector<DivergenceFlag> divergence_flags;

  nlohmann::json to_json() const;
  static Manifest from_json(const nlohmann::json& j);
};

/// Runs one figure driver and writes its CSV, SVG and manifest files under
/// `<outdir>/<id>/`. Throws UnknownFigureError for an unknown id and
/// std::filesystem::filesystem_error / std::ios_base::failure on I/O errors.
Manifest run_figure(const FigureSpec& spec, const std::filesystem::path& outdir);

// Building blocks shared by the drivers and the acceptance checks.

/// Seed of the stream used for part `salt` of figure `id`.
std::uint64_t figure_stream_seed(std::string_view id, std::uint64_t seed, std::uint64_t salt);

struct ComparisonFinals {
  double kaczmarz = 0.0;
  double kgsm = 0.0;
  double hbm = 0.0;
};

/// Final l2 errors of Kaczmarz, KGSM and heavy ball (mass `hbm_mass`) on one
/// system from one x0, all replaying one index log.
ComparisonFinals compare_final_errors(const LinearSystem& system, std::span<const double> x0,
                                      const MomentumParams& kgsm_params, double hbm_mass,
                                      std::size_t iterations, Sampling sampling,
                                      RngStream& stream);

/// Defaults used by the heavy-ball comparison: about one Kaczmarz e-folding
/// along v_n on each system.
inline constexpr std::size_t kHbmBudgetOneSmall = 50000;
inline constexpr std::size_t kHbmBudgetLinear = 3000;
inline constexpr double kHbmMass = 0.5;

} // namespace kgsm
