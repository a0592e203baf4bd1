#include "kgsm/systems.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace kgsm {

namespace {

struct KindName {
  SpectrumKind kind;
  std::string_view name;
};

constexpr std::array<KindName, 7> kKindNames{{
    {SpectrumKind::OneSmall, "one-small"},
    {SpectrumKind::TwoSmall, "two-small"},
    {SpectrumKind::Linear, "linear"},
    {SpectrumKind::ManySmall, "many-small"},
    {SpectrumKind::ConvexPoly, "convex-poly"},
    {SpectrumKind::ConcavePoly, "concave-poly"},
    {SpectrumKind::Explicit, "explicit"},
}};

constexpr int kMaxDrawAttempts = 5;

void require_twenty(const SpectrumPreset& preset) {
  if (preset.cols != 20) {
    throw std::invalid_argument(std::string("expand_preset: '") +
                                std::string(to_string(preset.kind)) +
                                "' is defined for n = 20 only");
  }
}

} // namespace

std::string_view to_string(SpectrumKind kind) {
  for (const auto& entry : kKindNames) {
    if (entry.kind == kind) {
      return entry.name;
    }
  }
  return "unknown";
}

std::optional<SpectrumKind> parse_spectrum_kind(std::string_view name) {
  for (const auto& entry : kKindNames) {
    if (entry.name == name) {
      return entry.kind;
    }
  }
  return std::nullopt;
}

SpectrumPreset SpectrumPreset::named(SpectrumKind kind, std::size_t rows, std::size_t cols) {
  SpectrumPreset preset;
  preset.kind = kind;
  preset.rows = rows;
  preset.cols = cols;
  return preset;
}

SpectrumPreset SpectrumPreset::from_sigma(Vector sigma, std::size_t rows) {
  SpectrumPreset preset;
  preset.kind = SpectrumKind::Explicit;
  preset.rows = rows;
  preset.cols = sigma.size();
  preset.explicit_sigma = std::move(sigma);
  return preset;
}

double convex_poly_constant(double floor) {
  return (1.0 - floor) / std::pow(19.0 / 20.0, 6);
}

double concave_poly_constant(double floor) {
  return (1.0 - std::pow(floor, 1.0 / 6.0)) / (19.0 / 20.0);
}

Vector expand_preset(const SpectrumPreset& preset) {
  const std::size_t n = preset.cols;
  if (n == 0) {
    throw std::invalid_argument("expand_preset: zero columns");
  }
  if (preset.kind != SpectrumKind::Explicit && !(preset.floor > 0.0 && preset.floor <= 1.0)) {
    throw std::invalid_argument("expand_preset: floor must lie in (0, 1]");
  }
  Vector sigma(n, 1.0);
  switch (preset.kind) {
  case SpectrumKind::OneSmall:
    sigma[n - 1] = preset.floor;
    break;
  case SpectrumKind::TwoSmall:
    if (n < 2) {
      throw std::invalid_argument("expand_preset: two-small needs n >= 2");
    }
    sigma[n - 2] = preset.floor;
    sigma[n - 1] = preset.floor;
    break;
  case SpectrumKind::ManySmall:
    for (std::size_t i = 1; i < n; ++i) {
      sigma[i] = preset.floor;
    }
    break;
  case SpectrumKind::Linear:
    require_twenty(preset);
    for (std::size_t i = 0; i < n; ++i) {
      sigma[i] = static_cast<double>(20 - i) / 20.0;
    }
    break;
  case SpectrumKind::ConvexPoly: {
    require_twenty(preset);
    const double c1 = convex_poly_constant(preset.floor);
    for (std::size_t i = 0; i < n; ++i) {
      sigma[i] = 1.0 - c1 * std::pow(static_cast<double>(i) / 20.0, 6);
    }
    break;
  }
  case SpectrumKind::ConcavePoly: {
    require_twenty(preset);
    const double c2 = concave_poly_constant(preset.floor);
    for (std::size_t i = 0; i < n; ++i) {
      sigma[i] = std::pow(1.0 - c2 * static_cast<double>(i) / 20.0, 6);
    }
    break;
  }
  case SpectrumKind::Explicit:
    if (preset.explicit_sigma.size() != n) {
      throw std::invalid_argument("expand_preset: explicit sigma length differs from cols");
    }
    sigma = preset.explicit_sigma;
    break;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(sigma[i] > 0.0) || !std::isfinite(sigma[i])) {
      throw std::invalid_argument("expand_preset: singular values must be positive");
    }
    if (i > 0 && sigma[i] > sigma[i - 1]) {
      throw std::invalid_argument("expand_preset: singular values must be nonincreasing");
    }
  }
  return sigma;
}

double LinearSystem::eta(std::size_t l) const {
  const double s = spectrum.singular_values.at(l);
  return s * s / frob_sq;
}

Vector LinearSystem::right_vector(std::size_t l) const { return spectrum.right.column(l); }

RowSampler LinearSystem::squared_norm_sampler() const { return RowSampler(row_sq_norms); }

LinearSystem make_system(Matrix a, Vector solution, std::optional<SvdResult> spectrum) {
  if (a.rows() < a.cols()) {
    throw DimensionError("make_system: matrix must be tall (m >= n)");
  }
  if (solution.size() != a.cols()) {
    throw DimensionError("make_system: solution length differs from column count");
  }
  LinearSystem system;
  system.row_sq_norms.resize(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    system.row_sq_norms[i] = squared_norm(a.row(i));
    if (!(system.row_sq_norms[i] > 0.0)) {
      throw std::invalid_argument("make_system: zero row " + std::to_string(i));
    }
  }
  system.b = multiply(a, solution);
  system.spectrum = spectrum ? std::move(*spectrum) : svd(a);
  system.frob_sq = 0.0;
  for (double s : system.spectrum.singular_values) {
    system.frob_sq += s * s;
  }
  system.a = std::move(a);
  system.solution = std::move(solution);
  return system;
}

Vector gaussian_vector(std::size_t n, RngStream& stream) {
  Vector v(n);
  for (double& x : v) {
    x = stream.standard_normal();
  }
  return v;
}

namespace {

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, RngStream& stream) {
  Matrix g(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (double& x : g.row(i)) {
      x = stream.standard_normal();
    }
  }
  return g;
}

Matrix random_orthonormal(std::size_t rows, std::size_t cols, RngStream& stream) {
  for (int attempt = 0; attempt < kMaxDrawAttempts; ++attempt) {
    try {
      return gram_schmidt_orthonormalize(gaussian_matrix(rows, cols, stream));
    } catch (const RankDeficientError&) {
    }
  }
  throw RankDeficientError("random_orthonormal: repeated rank-deficient draws");
}

} // namespace

LinearSystem generate_spectrum_system(const SpectrumPreset& preset, RngStream& stream) {
  if (preset.rows < preset.cols) {
    throw DimensionError("generate_spectrum_system: need rows >= cols");
  }
  const Vector sigma = expand_preset(preset);
  const std::size_t n = sigma.size();
  Matrix u = random_orthonormal(preset.rows, n, stream);
  const Matrix v = random_orthonormal(n, n, stream);
  Matrix a = synthesize_matrix(u, sigma, v);
  Vector solution = gaussian_vector(n, stream);

  // A = U diag(sigma) V, so the right singular vectors are the rows of V.
  SvdResult spectrum{std::move(u), sigma, v.transpose()};
  apply_sign_convention(spectrum);
  return make_system(std::move(a), std::move(solution), std::move(spectrum));
}

LinearSystem generate_gaussian_system(std::size_t rows, std::size_t cols, RngStream& stream) {
  if (rows < cols) {
    throw DimensionError("generate_gaussian_system: need rows >= cols");
  }
  Matrix a = gaussian_matrix(rows, cols, stream);
  Vector solution = gaussian_vector(cols, stream);
  return make_system(std::move(a), std::move(solution));
}

double directional_error(std::span<const double> xk, const LinearSystem& system, std::size_t l) {
  const Matrix& v = system.spectrum.right;
  double s = 0.0;
  for (std::size_t i = 0; i < xk.size(); ++i) {
    s += (xk[i] - system.solution[i]) * v(i, l);
  }
  return s;
}

double l2_error(std::span<const double> xk, const LinearSystem& system) {
  double s = 0.0;
  for (std::size_t i = 0; i < xk.size(); ++i) {
    const double d = xk[i] - system.solution[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double least_squares_loss(std::span<const double> xk, const LinearSystem& system) {
  double s = 0.0;
  for (std::size_t i = 0; i < system.rows(); ++i) {
    const double r = dot(system.a.row(i), xk) - system.b[i];
    s += r * r;
  }
  return 0.5 * s;
}

double projected_row_expectation(std::span<const double> x, const LinearSystem& system,
                                 std::size_t l) {
  const Vector v = system.right_vector(l);
  return static_cast<double>(
      projected_row_expectation(x, system, std::vector<long double>(v.begin(), v.end())));
}

long double projected_row_expectation(std::span<const double> x, const LinearSystem& system,
                                      const std::vector<long double>& direction) {
  if (direction.size() != system.cols() || x.size() != system.cols()) {
    throw DimensionError("projected_row_expectation: length mismatch");
  }
  // The terms cancel heavily when <x, v_l> is small, so accumulate wide.
  long double s = 0.0L;
  for (std::size_t i = 0; i < system.rows(); ++i) {
    const auto row = system.a.row(i);
    long double xa = 0.0L;
    long double av = 0.0L;
    for (std::size_t j = 0; j < row.size(); ++j) {
      xa += static_cast<long double>(x[j]) * row[j];
      av += row[j] * direction[j];
    }
    const long double p = static_cast<long double>(system.row_sq_norms[i]) / system.frob_sq;
    s += p * xa * av / system.row_sq_norms[i];
  }
  return s;
}

LinearSystem regenerate(const SystemDescriptor& descriptor) {
  RngStream stream(descriptor.seed);
  if (descriptor.generator == "gaussian") {
    return generate_gaussian_system(descriptor.preset.rows, descriptor.preset.cols, stream);
  }
  if (descriptor.generator == "spectrum") {
    return generate_spectrum_system(descriptor.preset, stream);
  }
  throw std::invalid_argument("regenerate: unknown generator '" + descriptor.generator + "'");
}

} // namespace kgsm
