#include "kgsm/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace kgsm {

namespace {

using Real = long double;
using MatL = std::array<std::array<Real, 2>, 2>;
using VecL = std::array<Real, 2>;

void require_eta(double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) {
    throw std::invalid_argument("eta must lie in (0, 1], got " + std::to_string(eta));
  }
}

struct Recurrence {
  Real r;
  Real zeta;
  MatL b;
  VecL start;  // [1, -1/(1-beta)]
};

// B is assembled in extended precision: on the repeated-eigenvalue curve
// rounding the entries to double splits the eigenvalue by ~sqrt(eps), which
// would cost ~1e-9 relative accuracy after 1e4 steps.
Recurrence make_recurrence(double eta, Real mass, Real beta) {
  const Real gap = 1.0L - beta;
  Recurrence rec;
  rec.r = 1.0L - static_cast<Real>(eta) + mass * gap;
  rec.zeta = mass * gap * gap;
  rec.b = {{{rec.r, rec.zeta}, {-1.0L, beta}}};
  rec.start = {1.0L, -1.0L / gap};
  return rec;
}

Recurrence make_recurrence(double eta, const MomentumParams& params) {
  require_eta(eta);
  params.validate();
  return make_recurrence(eta, static_cast<Real>(params.mass), static_cast<Real>(params.smoothing));
}

Real read_out(const Recurrence& rec, const VecL& w) { return rec.r * w[0] + rec.zeta * w[1]; }

ScaledValue to_scaled(Real value, long exponent) {
  if (value == 0.0L) {
    return {0.0, 0};
  }
  int e = 0;
  const Real m = std::frexp(value, &e);
  return {static_cast<double>(m), exponent + e};
}

} // namespace

std::string_view to_string(Regime regime) {
  switch (regime) {
  case Regime::RealDistinct:
    return "RealDistinct";
  case Regime::RealRepeated:
    return "RealRepeated";
  case Regime::ComplexPair:
    return "ComplexPair";
  }
  return "unknown";
}

CompanionAnalysis analyze(double eta, const MomentumParams& params, double tolerance) {
  require_eta(eta);
  if (!(tolerance >= 0.0)) {
    throw std::invalid_argument("analyze: negative regime tolerance");
  }
  params.validate();
  CompanionAnalysis out;
  out.eta = eta;
  out.mass = params.mass;
  out.beta = params.smoothing;
  const double gap = 1.0 - out.beta;
  out.r = 1.0 - eta + out.mass * gap;
  out.zeta = out.mass * gap * gap;
  out.b = {{{out.r, out.zeta}, {-1.0, out.beta}}};
  const double spread = out.r - out.beta;
  out.discriminant = spread * spread - 4.0 * out.zeta;

  const double root_mass = std::sqrt(out.mass);
  const double lower = (1.0 - root_mass) * (1.0 - root_mass);
  out.beta0 = lower > 0.0 ? 1.0 - eta / lower : -std::numeric_limits<double>::infinity();
  out.beta1 = 1.0 - eta / ((1.0 + root_mass) * (1.0 + root_mass));

  const double threshold = tolerance * std::max(1.0, spread * spread);
  const double half_sum = 0.5 * (out.r + out.beta);
  if (std::abs(out.discriminant) <= threshold) {
    out.regime = Regime::RealRepeated;
    out.lambda1 = half_sum;
    out.lambda2 = half_sum;
  } else if (out.discriminant < 0.0) {
    out.regime = Regime::ComplexPair;
    const double im = 0.5 * std::sqrt(-out.discriminant);
    out.lambda1 = {half_sum, im};
    out.lambda2 = {half_sum, -im};
  } else {
    out.regime = Regime::RealDistinct;
    const double big = half_sum + 0.5 * std::sqrt(out.discriminant);
    const double det = out.r * out.beta + out.zeta;
    out.lambda1 = big;
    out.lambda2 = det / big;
  }
  return out;
}

double ScaledValue::to_double() const {
  return std::ldexp(mantissa, static_cast<int>(std::clamp(exponent, -100000L, 100000L)));
}

double ScaledValue::log10_abs() const {
  if (mantissa == 0.0) {
    return -std::numeric_limits<double>::infinity();
  }
  return std::log10(std::abs(mantissa)) + static_cast<double>(exponent) * std::log10(2.0);
}

double relative_difference(const ScaledValue& a, const ScaledValue& b) {
  if (a.mantissa == 0.0 && b.mantissa == 0.0) {
    return 0.0;
  }
  const long top = std::max(a.mantissa != 0.0 ? a.exponent : b.exponent,
                            b.mantissa != 0.0 ? b.exponent : a.exponent);
  auto rescale = [top](const ScaledValue& v) {
    if (v.mantissa == 0.0) {
      return 0.0;
    }
    const long shift = std::max(v.exponent - top, -2000L);
    return std::ldexp(v.mantissa, static_cast<int>(shift));
  };
  const double x = rescale(a);
  const double y = rescale(b);
  return std::abs(x - y) / std::max(std::abs(x), std::abs(y));
}

double expected_signed_error(double eta, const MomentumParams& params, double e0, std::size_t k) {
  const Recurrence rec = make_recurrence(eta, params);
  const VecL w = power_apply(rec.b, rec.start, k);
  return static_cast<double>(read_out(rec, w) * static_cast<Real>(e0));
}

namespace {

std::vector<ScaledValue> run_trajectory(const Recurrence& rec, double e0, std::size_t k_max) {
  std::vector<ScaledValue> series;
  series.reserve(k_max + 1);
  VecL w = rec.start;
  long exponent = 0;
  // Rescaling by powers of two is exact, so entries match the unscaled
  // recurrence bit for bit whenever the latter does not underflow.
  constexpr int kRescaleBits = 200;
  const Real low = std::ldexp(1.0L, -kRescaleBits);
  const Real high = std::ldexp(1.0L, kRescaleBits);
  for (std::size_t k = 0; k <= k_max; ++k) {
    series.push_back(to_scaled(read_out(rec, w) * static_cast<Real>(e0), exponent));
    if (k == k_max) {
      break;
    }
    w = power_apply(rec.b, w, 1);
    const Real size = std::max(std::abs(w[0]), std::abs(w[1]));
    if (size != 0.0L && (size < low || size > high)) {
      int e = 0;
      std::frexp(size, &e);
      w[0] = std::ldexp(w[0], -e);
      w[1] = std::ldexp(w[1], -e);
      exponent += e;
    }
  }
  return series;
}

} // namespace

std::vector<ScaledValue> expected_error_trajectory(double eta, const MomentumParams& params,
                                                   double e0, std::size_t k_max) {
  return run_trajectory(make_recurrence(eta, params), e0, k_max);
}

namespace {

void require_first_branch(double eta, double mass) {
  require_eta(eta);
  const double edge = (1.0 - std::sqrt(eta)) * (1.0 - std::sqrt(eta));
  if (!(mass >= 0.0 && mass <= edge)) {
    throw std::invalid_argument("closed_form_repeated: mass must lie in [0, (1 - sqrt eta)^2]");
  }
}

} // namespace

double closed_form_repeated(double eta, double mass, double e0, std::size_t k) {
  require_first_branch(eta, mass);
  const double root = std::sqrt(mass);
  const double rate = 1.0 - eta / (1.0 - root);
  const double bracket = 1.0 + eta * (root * static_cast<double>(k + 1) - 1.0) / (1.0 - root);
  return std::pow(rate, static_cast<double>(k)) * bracket * e0;
}

ScaledValue closed_form_repeated_scaled(double eta, double mass, double e0, std::size_t k) {
  require_first_branch(eta, mass);
  const double root = std::sqrt(mass);
  const Real rate = 1.0L - static_cast<Real>(eta) / (1.0L - root);
  const Real bracket =
      1.0L + static_cast<Real>(eta) * (root * static_cast<Real>(k + 1) - 1.0L) / (1.0L - root);
  const Real value = bracket * static_cast<Real>(e0);
  if (rate == 0.0L) {
    return k == 0 ? to_scaled(value, 0) : ScaledValue{};
  }
  // rate^k = 2^(k log2 rate), split into integer and fractional exponents.
  const Real log2_power = static_cast<Real>(k) * std::log2(std::abs(rate));
  const Real whole = std::floor(log2_power);
  Real magnitude = std::exp2(log2_power - whole) * value;
  if (rate < 0.0L && k % 2 == 1) {
    magnitude = -magnitude;
  }
  return to_scaled(magnitude, static_cast<long>(whole));
}

std::vector<ScaledValue> expected_error_trajectory_repeated(double eta, double mass, double e0,
                                                            std::size_t k_max) {
  require_first_branch(eta, mass);
  const Real root = std::sqrt(static_cast<Real>(mass));
  const Real beta0 = 1.0L - static_cast<Real>(eta) / ((1.0L - root) * (1.0L - root));
  return run_trajectory(make_recurrence(eta, static_cast<Real>(mass), beta0), e0, k_max);
}

double optimal_beta(double eta, double mass) {
  require_eta(eta);
  if (!(mass >= 0.0 && mass <= 1.0)) {
    throw std::invalid_argument("optimal_beta: mass must lie in [0, 1]");
  }
  const double root = std::sqrt(mass);
  const double root_eta = std::sqrt(eta);
  if (mass <= (1.0 - root_eta) * (1.0 - root_eta)) {
    return 1.0 - eta / ((1.0 - root) * (1.0 - root));
  }
  if (mass <= 1.0 - eta) {
    return 0.0;
  }
  return 1.0 - eta / ((1.0 + root) * (1.0 + root));
}

double OscillationParams::evaluate(std::size_t k) const {
  const double kk = static_cast<double>(k);
  return amplitude * std::pow(rho, kk) * std::cos(kk * theta + phase);
}

double OscillationParams::flip_spacing() const { return std::numbers::pi / theta; }

OscillationParams oscillation_params(double eta, const MomentumParams& params, double e0) {
  const CompanionAnalysis analysis = analyze(eta, params);
  if (analysis.regime != Regime::ComplexPair) {
    throw std::invalid_argument("oscillation_params: eigenvalues are real (regime " +
                                std::string(to_string(analysis.regime)) + ")");
  }
  if (e0 == 0.0) {
    throw std::invalid_argument("oscillation_params: zero initial error");
  }
  using C = std::complex<double>;
  const C l1 = analysis.lambda1;
  const C l2 = analysis.lambda2;
  const double beta = analysis.beta;
  // Eigenvectors of [[r, zeta], [-1, beta]] are (beta - lambda, 1).
  const C q11 = beta - l1;
  const C q12 = beta - l2;
  const double w0 = 1.0;
  const double w1 = -1.0 / (1.0 - beta);
  // First coordinate of Q^{-1} w e0, with det Q = lambda2 - lambda1.
  const C c1 = (w0 - q12 * w1) * e0 / (l2 - l1);
  const C coefficient = (analysis.r * q11 + analysis.zeta) * c1;

  OscillationParams out;
  out.rho = std::abs(l1);
  out.theta = std::arg(l1);
  out.amplitude = 2.0 * std::abs(coefficient);
  double phase = std::arg(coefficient);
  if (phase < 0.0) {
    phase += 2.0 * std::numbers::pi;
  }
  out.phase = phase;
  return out;
}

double kaczmarz_expectation(double eta, double e0, std::size_t k) {
  require_eta(eta);
  return std::pow(1.0 - eta, static_cast<double>(k)) * e0;
}

double sv_rate_bound(double eta_min, double initial_l2_sq, std::size_t k) {
  require_eta(eta_min);
  return std::pow(1.0 - eta_min, static_cast<double>(k)) * initial_l2_sq;
}

} // namespace kgsm
