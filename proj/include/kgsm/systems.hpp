#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "kgsm/linalg.hpp"
#include "kgsm/rng.hpp"

namespace kgsm {

enum class SpectrumKind {
  OneSmall,
  TwoSmall,
  Linear,
  ManySmall,
  ConvexPoly,
  ConcavePoly,
  Explicit,
};

std::string_view to_string(SpectrumKind kind);
/// Accepts the hyphenated names ("one-small", "convex-poly", ...).
std::optional<SpectrumKind> parse_spectrum_kind(std::string_view name);

/// A named singular-value profile plus the matrix shape it is drawn at.
struct SpectrumPreset {
  SpectrumKind kind = SpectrumKind::OneSmall;
  std::size_t rows = 100;
  std::size_t cols = 20;
  double floor = 1.0 / 50.0;   ///< value of the small singular values
  Vector explicit_sigma;       ///< used only by SpectrumKind::Explicit

  static SpectrumPreset named(SpectrumKind kind, std::size_t rows = 100, std::size_t cols = 20);
  static SpectrumPreset from_sigma(Vector sigma, std::size_t rows);

  bool operator==(const SpectrumPreset&) const = default;
};

/// c1 with 1 - c1 * (19/20)^6 = floor.
double convex_poly_constant(double floor = 1.0 / 50.0);
/// c2 with (1 - c2 * 19/20)^6 = floor.
double concave_poly_constant(double floor = 1.0 / 50.0);

/// Singular values of a preset, nonincreasing and positive. The convex,
/// concave and linear profiles are defined for n = 20 only.
Vector expand_preset(const SpectrumPreset& preset);

/// Consistent system A x = b with its right singular data.
struct LinearSystem {
  Matrix a;
  Vector b;
  Vector solution;
  SvdResult spectrum;
  double frob_sq = 0.0;
  Vector row_sq_norms;

  std::size_t rows() const { return a.rows(); }
  std::size_t cols() const { return a.cols(); }

  /// sigma_l^2 / ||A||_F^2 for zero-based l.
  double eta(std::size_t l) const;
  /// Right singular vector v_l (zero-based l).
  Vector right_vector(std::size_t l) const;
  /// Sampling probabilities ||a_i||^2 / ||A||_F^2.
  RowSampler squared_norm_sampler() const;
};

/// Builds a system from A and a planted solution, with b := A x. When
/// `spectrum` is empty it is computed with svd(). Throws on m < n or zero rows.
LinearSystem make_system(Matrix a, Vector solution, std::optional<SvdResult> spectrum = {});

/// Haar-random U and V factors around the preset spectrum, Gaussian solution.
/// Retries up to five times when a draw is rank deficient.
LinearSystem generate_spectrum_system(const SpectrumPreset& preset, RngStream& stream);

/// i.i.d. N(0, 1) matrix and solution; spectrum via svd().
LinearSystem generate_gaussian_system(std::size_t rows, std::size_t cols, RngStream& stream);

Vector gaussian_vector(std::size_t n, RngStream& stream);

/// <x_k - x, v_l> for zero-based l.
double directional_error(std::span<const double> xk, const LinearSystem& system, std::size_t l);
double l2_error(std::span<const double> xk, const LinearSystem& system);
/// 1/2 ||A x_k - b||^2.
double least_squares_loss(std::span<const double> xk, const LinearSystem& system);

/// Exact expectation of <x, a> <a, v_l> / ||a||^2 over rows drawn with
/// probability ||a_i||^2 / ||A||_F^2, by summing over all rows.
double projected_row_expectation(std::span<const double> x, const LinearSystem& system,
                                 std::size_t l);

/// Same sum with an explicit direction held in extended precision.
long double projected_row_expectation(std::span<const double> x, const LinearSystem& system,
                                      const std::vector<long double>& direction);

/// How a system was produced; enough to regenerate it bit for bit.
struct SystemDescriptor {
  std::string generator = "spectrum";  ///< "spectrum" or "gaussian"
  SpectrumPreset preset;               ///< shape also used by "gaussian"
  std::uint64_t seed = 0;

  bool operator==(const SystemDescriptor&) const = default;
};

LinearSystem regenerate(const SystemDescriptor& descriptor);

} // namespace kgsm
