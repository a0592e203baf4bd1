#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "kgsm/solvers.hpp"
#include "kgsm/systems.hpp"

namespace kgsm {

class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Settings of one `run` invocation. JSON form (every key optional on input,
/// all keys present on output):
///
///   {
///     "system":   {"generator": "spectrum" | "gaussian", "preset": "one-small",
///                  "rows": 100, "cols": 20, "floor": 0.02, "sigma": [...]},
///     "methods":  ["kaczmarz", "kgsm"],
///     "mass":     0.9,
///     "beta":     "auto" | 0.992,
///     "iterations": 100000, "trials": 1, "tracked": [20],
///     "seed": 1, "stride": 0, "sampling": "squared-norm" | "uniform",
///     "x0": "gaussian" | "zeros", "output": "out", "svg": false
///   }
///
/// "sigma" appears only for the explicit preset. Tracked directions are
/// one-based. Unknown keys are rejected.
struct ExperimentConfig {
  std::string generator = "spectrum";
  SpectrumPreset preset;
  std::vector<Method> methods{Method::Kaczmarz, Method::Kgsm};
  double mass = 0.9;
  std::optional<double> beta;   ///< empty means optimal_beta(eta_n, mass)
  std::size_t iterations = 100000;
  std::size_t trials = 1;
  std::vector<std::size_t> tracked;  ///< one-based; empty tracks v_n
  std::uint64_t seed = 1;
  std::size_t stride = 0;
  Sampling sampling = Sampling::SquaredNorm;
  bool zero_start = false;
  std::string output = "out";
  bool svg = false;

  bool operator==(const ExperimentConfig&) const = default;

  /// Throws ConfigError on inconsistent settings (for example a nonzero mass
  /// with no momentum method).
  void validate() const;

  SystemDescriptor descriptor() const;
  /// Zero-based directions to record.
  std::vector<std::size_t> tracked_zero_based() const;
};

nlohmann::json to_json(const ExperimentConfig& config);
/// Throws ConfigError for malformed documents.
ExperimentConfig config_from_json(const nlohmann::json& j);

std::string_view to_string(Sampling sampling);
std::optional<Sampling> parse_sampling(std::string_view name);

/// Matrix, right-hand side, planted solution and spectrum of a system, with
/// the descriptor that regenerates it.
nlohmann::json system_to_json(const LinearSystem& system, const SystemDescriptor& descriptor);
/// Header `a_1,...,a_n,b`, one row per equation.
std::string system_to_csv(const LinearSystem& system);

/// A generated system with its starting point: x0 is drawn from the same
/// stream right after the system (or is zero).
struct Instance {
  LinearSystem system;
  Vector x0;
};

Instance make_instance(const SystemDescriptor& descriptor, bool zero_start);

} // namespace kgsm
