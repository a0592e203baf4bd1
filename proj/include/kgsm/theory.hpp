#pragma once

#include <complex>
#include <cstddef>
#include <string_view>
#include <vector>

#include "kgsm/linalg.hpp"
#include "kgsm/solvers.hpp"

namespace kgsm {

/// Expected-error theory along one right singular direction.
///
/// For a direction with spectral ratio eta = sigma_l^2 / ||A||_F^2, KGSM's
/// expected signed error obeys
///
///   E<x_{k+1} - x, v_l> = [r, zeta] B^k [1, -1/(1-beta)]^T e0,
///   B = [[r, zeta], [-1, beta]],  r = 1 - eta + M(1-beta),  zeta = M(1-beta)^2,
///
/// where e0 = <x_0 - x, v_l>. Every function here is indexed the same way:
/// argument k refers to iterate k + 1.

enum class Regime { RealDistinct, RealRepeated, ComplexPair };

std::string_view to_string(Regime regime);

struct CompanionAnalysis {
  double eta = 0.0;
  double mass = 0.0;
  double beta = 0.0;
  double r = 0.0;
  double zeta = 0.0;
  Mat2 b{};
  std::complex<double> lambda1;  ///< |lambda1| >= |lambda2|
  std::complex<double> lambda2;
  double discriminant = 0.0;     ///< (r - beta)^2 - 4 zeta
  double beta0 = 0.0;            ///< 1 - eta / (1 - sqrt M)^2
  double beta1 = 0.0;            ///< 1 - eta / (1 + sqrt M)^2
  Regime regime = Regime::RealDistinct;

  double spectral_radius() const { return std::abs(lambda1); }
};

/// |D| <= 1e-12 * max(1, (r - beta)^2) counts as a repeated eigenvalue.
inline constexpr double kRegimeTolerance = 1e-12;

/// Throws std::invalid_argument unless 0 < eta <= 1 and params are valid.
/// `tolerance` replaces the 1e-12 factor of the repeated-root test.
CompanionAnalysis analyze(double eta, const MomentumParams& params,
                          double tolerance = kRegimeTolerance);

/// A real number held as mantissa * 2^exponent so long trajectories keep
/// their tails instead of flushing to zero.
struct ScaledValue {
  double mantissa = 0.0;
  long exponent = 0;

  double to_double() const;
  /// log10 |value|; -inf for zero.
  double log10_abs() const;
  int sign() const { return (mantissa > 0.0) - (mantissa < 0.0); }
};

/// |a - b| / max(|a|, |b|), evaluated without leaving the scaled form.
double relative_difference(const ScaledValue& a, const ScaledValue& b);

/// E<x_{k+1} - x, v_l> by k applications of B.
double expected_signed_error(double eta, const MomentumParams& params, double e0, std::size_t k);

/// Entries k = 0..k_max of E<x_{k+1} - x, v_l>, one B application per entry.
std::vector<ScaledValue> expected_error_trajectory(double eta, const MomentumParams& params,
                                                   double e0, std::size_t k_max);

/// Closed form on the repeated-eigenvalue curve beta = beta0:
/// (1 - eta/(1 - sqrt M))^k (1 + eta (sqrt M (k+1) - 1) / (1 - sqrt M)) e0.
/// Requires 0 <= M <= (1 - sqrt eta)^2.
double closed_form_repeated(double eta, double mass, double e0, std::size_t k);
ScaledValue closed_form_repeated_scaled(double eta, double mass, double e0, std::size_t k);

/// expected_error_trajectory at beta = beta0(eta, M), with beta0 formed in
/// extended precision instead of being rounded to a double first.
/// Same domain as closed_form_repeated.
std::vector<ScaledValue> expected_error_trajectory_repeated(double eta, double mass, double e0,
                                                            std::size_t k_max);

/// The beta in [0, 1) minimizing |lambda1(beta)| for fixed M.
double optimal_beta(double eta, double mass);

/// E<x_{k+1} - x, v_l> = C rho^k cos(k theta + theta0) in the complex regime,
/// normalized so C > 0 and theta0 in [0, 2 pi).
struct OscillationParams {
  double rho = 0.0;
  double theta = 0.0;
  double amplitude = 0.0;
  double phase = 0.0;

  double evaluate(std::size_t k) const;
  /// Expected spacing between sign changes, pi / theta.
  double flip_spacing() const;
};

/// Throws std::invalid_argument outside the complex regime or for e0 == 0.
OscillationParams oscillation_params(double eta, const MomentumParams& params, double e0);

/// Plain Kaczmarz: E<x_k - x, v_l> = (1 - eta)^k e0.
double kaczmarz_expectation(double eta, double e0, std::size_t k);

/// Mean-square bound (1 - eta_min)^k ||x_0 - x||^2.
double sv_rate_bound(double eta_min, double initial_l2_sq, std::size_t k);

} // namespace kgsm
