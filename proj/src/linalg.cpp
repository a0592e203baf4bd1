#include "kgsm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace kgsm {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
  if (data_.size() != rows * cols) {
    throw DimensionError("Matrix: data size does not match dimensions");
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) = 1.0;
  }
  return m;
}

Vector Matrix::column(std::size_t j) const {
  Vector out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    out[i] = (*this)(i, j);
  }
  return out;
}

void Matrix::set_column(std::size_t j, std::span<const double> values) {
  if (values.size() != rows_) {
    throw DimensionError("set_column: length mismatch");
  }
  for (std::size_t i = 0; i < rows_; ++i) {
    (*this)(i, j) = values[i];
  }
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) {
      t(j, i) = (*this)(i, j);
    }
  }
  return t;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += a[i] * b[i];
  }
  return s;
}

double squared_norm(std::span<const double> a) { return dot(a, a); }

double norm2(std::span<const double> a) { return std::sqrt(squared_norm(a)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] += alpha * x[i];
  }
}

Matrix multiply(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("multiply: inner dimensions differ");
  }
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      axpy(a(i, k), b.row(k), out);
    }
  }
  return c;
}

Vector multiply(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) {
    throw DimensionError("multiply: vector length differs from column count");
  }
  Vector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    y[i] = dot(a.row(i), x);
  }
  return y;
}

double orthonormality_defect(const Matrix& q) {
  const Matrix qt = q.transpose();
  double worst = 0.0;
  for (std::size_t i = 0; i < qt.rows(); ++i) {
    for (std::size_t j = 0; j < qt.rows(); ++j) {
      const double target = i == j ? 1.0 : 0.0;
      worst = std::max(worst, std::abs(dot(qt.row(i), qt.row(j)) - target));
    }
  }
  return worst;
}

double frobenius_norm(const Matrix& a) { return norm2(a.data()); }

Matrix gram_schmidt_orthonormalize(const Matrix& g) {
  // Work on columns stored contiguously.
  Matrix cols = g.transpose();
  const std::size_t n = cols.rows();
  for (std::size_t j = 0; j < n; ++j) {
    auto v = cols.row(j);
    const double original = norm2(v);
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 0; i < j; ++i) {
        axpy(-dot(cols.row(i), v), cols.row(i), v);
      }
    }
    const double remaining = norm2(v);
    if (!(original > 0.0) || remaining < 1e-10 * original) {
      throw RankDeficientError("gram_schmidt_orthonormalize: column " + std::to_string(j) +
                               " is numerically dependent on earlier columns");
    }
    for (double& x : v) {
      x /= remaining;
    }
  }
  return cols.transpose();
}

Matrix synthesize_matrix(const Matrix& u, std::span<const double> sigma, const Matrix& v) {
  const std::size_t n = sigma.size();
  if (u.cols() != n || v.rows() != n || v.cols() != n) {
    throw DimensionError("synthesize_matrix: factor dimensions disagree");
  }
  Matrix scaled = u;
  for (std::size_t i = 0; i < scaled.rows(); ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      scaled(i, j) *= sigma[j];
    }
  }
  return multiply(scaled, v);
}

void apply_sign_convention(SvdResult& result) {
  const std::size_t n = result.right.cols();
  for (std::size_t l = 0; l < n; ++l) {
    std::size_t argmax = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < result.right.rows(); ++i) {
      const double magnitude = std::abs(result.right(i, l));
      if (magnitude > best) {
        best = magnitude;
        argmax = i;
      }
    }
    if (result.right(argmax, l) < 0.0) {
      for (std::size_t i = 0; i < result.right.rows(); ++i) {
        result.right(i, l) = -result.right(i, l);
      }
      for (std::size_t i = 0; i < result.left.rows(); ++i) {
        result.left(i, l) = -result.left(i, l);
      }
    }
  }
}

namespace {

constexpr int kMaxSweeps = 30;
constexpr double kPairTolerance = 1e-15;

// Extends the accepted columns of `u_cols` (rows of a column-major copy) to an
// orthonormal set by choosing the standard basis vectors with the largest
// residual after projection.
void complete_basis(Matrix& u_cols, const std::vector<bool>& accepted) {
  const std::size_t m = u_cols.cols();
  std::vector<std::size_t> basis;
  for (std::size_t j = 0; j < accepted.size(); ++j) {
    if (accepted[j]) {
      basis.push_back(j);
    }
  }
  for (std::size_t j = 0; j < accepted.size(); ++j) {
    if (accepted[j]) {
      continue;
    }
    Vector best;
    double best_norm = -1.0;
    for (std::size_t e = 0; e < m; ++e) {
      Vector candidate(m, 0.0);
      candidate[e] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t b : basis) {
          axpy(-dot(u_cols.row(b), candidate), u_cols.row(b), candidate);
        }
      }
      const double nrm = norm2(candidate);
      if (nrm > best_norm) {
        best_norm = nrm;
        best = std::move(candidate);
      }
    }
    auto target = u_cols.row(j);
    for (std::size_t i = 0; i < m; ++i) {
      target[i] = best[i] / best_norm;
    }
    basis.push_back(j);
  }
}

} // namespace

SvdResult svd(const Matrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (m < n) {
    throw DimensionError("svd: expected rows >= cols");
  }
  for (double x : a.data()) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument("svd: non-finite entry");
    }
  }
  Matrix w = a.transpose();          // row j holds column j of A
  Matrix v = Matrix::identity(n);    // row j holds column j of V

  bool converged = false;
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    converged = true;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        auto wp = w.row(p);
        auto wq = w.row(q);
        const double alpha = squared_norm(wp);
        const double beta = squared_norm(wq);
        const double gamma = dot(wp, wq);
        if (gamma == 0.0 || std::abs(gamma) <= kPairTolerance * std::sqrt(alpha * beta)) {
          continue;
        }
        converged = false;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double xp = wp[i];
          const double xq = wq[i];
          wp[i] = c * xp - s * xq;
          wq[i] = s * xp + c * xq;
        }
        auto vp = v.row(p);
        auto vq = v.row(q);
        for (std::size_t i = 0; i < n; ++i) {
          const double xp = vp[i];
          const double xq = vq[i];
          vp[i] = c * xp - s * xq;
          vq[i] = s * xp + c * xq;
        }
      }
    }
  }
  if (!converged) {
    throw SvdNonConvergence("svd: Jacobi sweeps did not converge");
  }

  Vector sigma(n);
  for (std::size_t j = 0; j < n; ++j) {
    sigma[j] = norm2(w.row(j));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

  const double largest = n > 0 ? sigma[order[0]] : 0.0;
  Matrix u_cols(n, m);
  Matrix v_cols(n, n);
  std::vector<bool> accepted(n, false);
  SvdResult result;
  result.singular_values.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = order[j];
    result.singular_values[j] = sigma[src];
    std::copy(v.row(src).begin(), v.row(src).end(), v_cols.row(j).begin());
    if (sigma[src] > 1e-13 * largest && sigma[src] > 0.0) {
      auto target = u_cols.row(j);
      const auto source = w.row(src);
      for (std::size_t i = 0; i < m; ++i) {
        target[i] = source[i] / sigma[src];
      }
      accepted[j] = true;
    }
  }
  complete_basis(u_cols, accepted);
  result.left = u_cols.transpose();
  result.right = v_cols.transpose();
  apply_sign_convention(result);
  return result;
}

namespace {

using WideMatrix = std::vector<std::vector<long double>>;

// Gaussian elimination with partial pivoting; `m` is consumed.
std::vector<long double> solve_wide(WideMatrix m, std::vector<long double> rhs) {
  const std::size_t n = rhs.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t pivot = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(m[r][c]) > std::abs(m[pivot][c])) {
        pivot = r;
      }
    }
    std::swap(m[c], m[pivot]);
    std::swap(rhs[c], rhs[pivot]);
    if (m[c][c] == 0.0L) {
      m[c][c] = std::numeric_limits<long double>::min();
    }
    for (std::size_t r = c + 1; r < n; ++r) {
      const long double f = m[r][c] / m[c][c];
      for (std::size_t j = c; j < n; ++j) {
        m[r][j] -= f * m[c][j];
      }
      rhs[r] -= f * rhs[c];
    }
  }
  std::vector<long double> out(n);
  for (std::size_t c = n; c-- > 0;) {
    long double s = rhs[c];
    for (std::size_t j = c + 1; j < n; ++j) {
      s -= m[c][j] * out[j];
    }
    out[c] = s / m[c][c];
  }
  return out;
}

void normalize_wide(std::vector<long double>& v) {
  long double s = 0.0L;
  for (long double x : v) {
    s += x * x;
  }
  s = std::sqrt(s);
  for (long double& x : v) {
    x /= s;
  }
}

} // namespace

RefinedSingularPair refine_singular_pair(const Matrix& a, std::span<const double> v0,
                                         int iterations) {
  const std::size_t n = a.cols();
  if (v0.size() != n) {
    throw DimensionError("refine_singular_pair: vector length differs from column count");
  }
  WideMatrix gram(n, std::vector<long double>(n, 0.0L));
  long double trace = 0.0L;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto row = a.row(i);
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = 0; q < n; ++q) {
        gram[p][q] += static_cast<long double>(row[p]) * row[q];
      }
    }
  }
  for (std::size_t p = 0; p < n; ++p) {
    trace += gram[p][p];
  }
  auto rayleigh = [&](const std::vector<long double>& v) {
    long double s = 0.0L;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = 0; q < n; ++q) {
        s += v[p] * gram[p][q] * v[q];
      }
    }
    return s;
  };
  RefinedSingularPair out;
  out.vector.assign(v0.begin(), v0.end());
  normalize_wide(out.vector);
  for (int it = 0; it < iterations; ++it) {
    const long double shift = rayleigh(out.vector) + 1e-13L * trace;
    WideMatrix shifted = gram;
    for (std::size_t p = 0; p < n; ++p) {
      shifted[p][p] -= shift;
    }
    out.vector = solve_wide(std::move(shifted), out.vector);
    normalize_wide(out.vector);
  }
  long double largest = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(out.vector[i]) > std::abs(largest)) {
      largest = out.vector[i];
    }
  }
  if (largest < 0.0L) {
    for (long double& x : out.vector) {
      x = -x;
    }
  }
  out.sigma_sq = rayleigh(out.vector);
  return out;
}

Vec2 apply(const Mat2& b, const Vec2& w) {
  return {b[0][0] * w[0] + b[0][1] * w[1], b[1][0] * w[0] + b[1][1] * w[1]};
}

Mat2 multiply(const Mat2& a, const Mat2& b) {
  Mat2 c{};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
    }
  }
  return c;
}

Vec2 mat2_power_apply(const Mat2& b, Vec2 w, std::size_t k) { return power_apply(b, w, k); }

Eigen2 eig2(const Mat2& b) {
  const double half_trace = 0.5 * (b[0][0] + b[1][1]);
  const double half_gap = 0.5 * (b[0][0] - b[1][1]);
  // (a - d)^2 / 4 + bc avoids the cancellation in trace^2 / 4 - det.
  const double quarter_disc = half_gap * half_gap + b[0][1] * b[1][0];
  if (quarter_disc >= 0.0) {
    const double root = std::sqrt(quarter_disc);
    const double big = half_trace >= 0.0 ? half_trace + root : half_trace - root;
    const double det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
    const double small = big != 0.0 ? det / big : 0.0;
    return {big, small};
  }
  const double root = std::sqrt(-quarter_disc);
  return {{half_trace, root}, {half_trace, -root}};
}

} // namespace kgsm
