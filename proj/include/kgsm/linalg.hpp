#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace kgsm {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles.
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }

  Vector column(std::size_t j) const;
  void set_column(std::size_t j, std::span<const double> values);

  const std::vector<double>& data() const { return data_; }

  Matrix transpose() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A pivot collapsed during orthonormalization; the input is numerically
/// rank deficient.
class RankDeficientError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class SvdNonConvergence : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double squared_norm(std::span<const double> a);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

Matrix multiply(const Matrix& a, const Matrix& b);
Vector multiply(const Matrix& a, std::span<const double> x);
/// Max-abs entry of A^T A - I.
double orthonormality_defect(const Matrix& q);
double frobenius_norm(const Matrix& a);

/// Modified Gram-Schmidt with one re-orthogonalization pass. Columns of the
/// result are orthonormal and span the column space of `g`. Throws
/// RankDeficientError when a column norm falls below 1e-10 of its original
/// norm after projection.
Matrix gram_schmidt_orthonormalize(const Matrix& g);

/// U * diag(sigma) * V with U m x n, V n x n.
Matrix synthesize_matrix(const Matrix& u, std::span<const double> sigma, const Matrix& v);

struct SvdResult {
  Matrix left;          ///< m x n, orthonormal columns
  Vector singular_values;  ///< nonincreasing, nonnegative
  Matrix right;         ///< n x n, column l is v_l
};

/// Flip each right vector so its largest-magnitude entry (lowest index on
/// ties) is positive, flipping the matching left vector with it.
void apply_sign_convention(SvdResult& svd);

/// One-sided (Hestenes) Jacobi SVD for m >= n, at most 30 sweeps.
SvdResult svd(const Matrix& a);

/// Singular pair of the matrix as stored, to extended precision.
struct RefinedSingularPair {
  std::vector<long double> vector;  ///< unit right singular vector
  long double sigma_sq = 0.0L;
};

/// Inverse iteration on A^T A in long double, started from an approximate
/// right singular vector `v0`. When the singular value is repeated the result
/// is some unit vector of that singular subspace.
RefinedSingularPair refine_singular_pair(const Matrix& a, std::span<const double> v0,
                                         int iterations = 3);

using Mat2 = std::array<std::array<double, 2>, 2>;
using Vec2 = std::array<double, 2>;

Vec2 apply(const Mat2& b, const Vec2& w);
Mat2 multiply(const Mat2& a, const Mat2& b);

/// B^k w by k sequential applications.
Vec2 mat2_power_apply(const Mat2& b, Vec2 w, std::size_t k);

/// Same recurrence in any floating type; the theory code runs it in long double.
template <class T>
std::array<T, 2> power_apply(const std::array<std::array<T, 2>, 2>& b, std::array<T, 2> w,
                             std::size_t k) {
  for (std::size_t step = 0; step < k; ++step) {
    w = {b[0][0] * w[0] + b[0][1] * w[1], b[1][0] * w[0] + b[1][1] * w[1]};
  }
  return w;
}

struct Eigen2 {
  std::complex<double> first;   ///< larger magnitude
  std::complex<double> second;
};

/// Eigenvalues from trace and determinant, (t +- sqrt(t^2 - 4d)) / 2,
/// ordered so |first| >= |second|.
Eigen2 eig2(const Mat2& b);

} // namespace kgsm
