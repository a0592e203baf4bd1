#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string_view>
#include <vector>

#include "kgsm/linalg.hpp"
#include "kgsm/rng.hpp"
#include "kgsm/systems.hpp"

namespace kgsm {

/// Mass M in [0, 1] and smoothing beta in [0, 1).
struct MomentumParams {
  double mass = 0.0;
  double smoothing = 0.0;

  /// Throws std::invalid_argument outside the admissible ranges.
  static MomentumParams make(double mass, double smoothing);
  void validate() const;
};

struct SolverState {
  Vector x;
  Vector y;  ///< smoothed velocity, starts at zero
  std::size_t k = 0;

  static SolverState start(std::span<const double> x0);
};

class ZeroRowError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Projects x onto {y : <row, y> = rhs}.
Vector kaczmarz_step(std::span<const double> x, std::span<const double> row, double rhs);

/// x' = P(x) + M y,  y' = beta y + (1 - beta)(x' - x).
SolverState kgsm_step(const SolverState& state, std::span<const double> row, double rhs,
                      const MomentumParams& params);

/// Batch-1 heavy ball: x' = P(x) + M y,  y' = x' - x.
SolverState hbm_step(const SolverState& state, std::span<const double> row, double rhs,
                     double mass);

/// Importance-weighted SGD on f(x) = 1/2 ||Ax - b||^2 with batch size one.
struct SgdConfig {
  std::function<double(std::size_t)> learning_rate;
  Vector probabilities;

  /// p_i = ||a_i||^2 / ||A||_F^2 and alpha = 1 / ||A||_F^2, which turns the
  /// step into a Kaczmarz projection.
  static SgdConfig kaczmarz(const LinearSystem& system);
};

/// x - alpha_k (<a_i, x> - b_i) / p_i * a_i. Throws on p_i <= 0.
Vector sgd_step(std::span<const double> x, std::size_t row, const SgdConfig& config,
                const LinearSystem& system, std::size_t k);

enum class Method { Kaczmarz, Kgsm, Hbm };
enum class Sampling { SquaredNorm, Uniform };

std::string_view to_string(Method method);
std::optional<Method> parse_method(std::string_view name);
bool uses_momentum(Method method);

/// Recording interval used when none is given: 1 up to 1e5 iterations, else
/// ceil(N / 1e5).
std::size_t default_stride(std::size_t iterations);

struct RunOptions {
  Method method = Method::Kaczmarz;
  MomentumParams params;
  std::size_t iterations = 0;
  std::vector<std::size_t> tracked;  ///< zero-based directions to record
  std::size_t stride = 0;            ///< 0 selects default_stride()
  Sampling sampling = Sampling::SquaredNorm;
  bool record_indices = false;
  /// When non-empty, row indices are read from here instead of sampled.
  std::span<const std::uint32_t> replay;
};

struct IterationTrace {
  std::size_t stride = 1;
  std::vector<std::size_t> k;
  Vector l2;
  std::map<std::size_t, Vector> directional;  ///< keyed by zero-based l
  std::vector<std::uint32_t> index_log;
  bool diverged = false;
  std::optional<std::size_t> divergence_iteration;
  Vector final_x;

  std::size_t length() const { return k.size(); }
};

/// Runs N steps from x0, recording l2 and tracked directional errors at every
/// multiple of the stride (including k = 0). A non-finite state ends the run
/// and sets the divergence flag instead of throwing.
IterationTrace run(const LinearSystem& system, std::span<const double> x0,
                   const RunOptions& options, RngStream& stream);

/// Header `k,l2,dir_<l>,...` (one-based l), 17 significant digits.
void write_trace_csv(std::ostream& out, const IterationTrace& trace);

} // namespace kgsm
