#include <doctest.h>

#include <cmath>

#include "kgsm/linalg.hpp"
#include "kgsm/rng.hpp"
#include "support.hpp"

using namespace kgsm;
using kgsm::testing::rel_err;

namespace {

Matrix gaussian(std::size_t m, std::size_t n, RngStream& s) {
  Matrix g(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    for (double& x : g.row(i)) {
      x = s.standard_normal();
    }
  }
  return g;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
  }
  return worst;
}

// Naive oracle: B^k as a full matrix product, then applied once.
Vec2 naive_power(const Mat2& b, const Vec2& w, int k) {
  Mat2 p{{{1.0, 0.0}, {0.0, 1.0}}};
  for (int i = 0; i < k; ++i) {
    p = multiply(p, b);
  }
  return kgsm::apply(p, w);
}

} // namespace

TEST_CASE("gram-schmidt") {
  SUBCASE("identity is fixed") {
    const Matrix q = gram_schmidt_orthonormalize(Matrix::identity(4));
    CHECK(q == Matrix::identity(4));
  }
  SUBCASE("2d by hand") {
    const Matrix g(2, 2, {1.0, 1.0, 0.0, 1.0});  // columns (1,0), (1,1)
    const Matrix q = gram_schmidt_orthonormalize(g);
    CHECK(q(0, 0) == 1.0);
    CHECK(q(1, 0) == 0.0);
    CHECK(q(0, 1) == doctest::Approx(0.0));
    CHECK(q(1, 1) == 1.0);
  }
  SUBCASE("100 x 20 gaussian is orthonormal to 1e-12") {
    RngStream s(1);
    const Matrix q = gram_schmidt_orthonormalize(gaussian(100, 20, s));
    CHECK(orthonormality_defect(q) <= 1e-12);
  }
  SUBCASE("spans the original column space") {
    RngStream s(2);
    const Matrix g = gaussian(30, 5, s);
    const Matrix q = gram_schmidt_orthonormalize(g);
    // g = Q Q^T g when the spans agree.
    const Matrix back = multiply(q, multiply(q.transpose(), g));
    CHECK(max_abs_diff(back, g) <= 1e-12);
  }
  SUBCASE("dependent columns rejected") {
    const Matrix g(3, 2, {1.0, 2.0, 1.0, 2.0, 1.0, 2.0});
    CHECK_THROWS_AS(gram_schmidt_orthonormalize(g), RankDeficientError);
  }
}

TEST_CASE("synthesize_matrix") {
  SUBCASE("identity factors give the diagonal") {
    const std::vector<double> sigma{3.0, 1.0};
    const Matrix a = synthesize_matrix(Matrix::identity(2), sigma, Matrix::identity(2));
    CHECK(a == Matrix(2, 2, {3.0, 0.0, 0.0, 1.0}));
  }
  SUBCASE("frobenius norm equals root sum of squares") {
    RngStream s(3);
    const Matrix u = gram_schmidt_orthonormalize(gaussian(50, 6, s));
    const Matrix v = gram_schmidt_orthonormalize(gaussian(6, 6, s));
    const std::vector<double> sigma{2.0, 1.5, 1.0, 0.5, 0.1, 0.01};
    const Matrix a = synthesize_matrix(u, sigma, v);
    double sq = 0.0;
    for (double x : sigma) {
      sq += x * x;
    }
    CHECK(rel_err(frobenius_norm(a), std::sqrt(sq)) <= 1e-12);
  }
  SUBCASE("dimension mismatch") {
    const std::vector<double> sigma{1.0, 2.0, 3.0};
    CHECK_THROWS_AS(synthesize_matrix(Matrix::identity(2), sigma, Matrix::identity(2)),
                    DimensionError);
  }
}

TEST_CASE("svd") {
  SUBCASE("zero-padded diagonal") {
    const Matrix a(4, 2, {3.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0});
    const SvdResult r = svd(a);
    CHECK(r.singular_values[0] == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(r.singular_values[1] == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("rank one outer product") {
    const std::vector<double> u{1.0, 2.0, 2.0, 0.0};
    const std::vector<double> v{3.0, 0.0, 4.0};
    Matrix a(4, 3);
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < 3; ++j) {
        a(i, j) = u[i] * v[j];
      }
    }
    const SvdResult r = svd(a);
    CHECK(rel_err(r.singular_values[0], 3.0 * 5.0) <= 1e-14);
    CHECK(r.singular_values[1] <= 1e-13);
    CHECK(r.singular_values[2] <= 1e-13);
    CHECK(orthonormality_defect(r.left) <= 1e-12);
    CHECK(orthonormality_defect(r.right) <= 1e-12);
  }
  SUBCASE("invariants on a gaussian matrix") {
    RngStream s(4);
    const Matrix a = gaussian(60, 50, s);
    const SvdResult r = svd(a);
    CHECK(orthonormality_defect(r.left) <= 1e-12);
    CHECK(orthonormality_defect(r.right) <= 1e-12);
    for (std::size_t i = 1; i < r.singular_values.size(); ++i) {
      REQUIRE(r.singular_values[i] <= r.singular_values[i - 1]);
    }
    const Matrix rebuilt = synthesize_matrix(r.left, r.singular_values, r.right.transpose());
    CHECK(max_abs_diff(rebuilt, a) <= 1e-10 * r.singular_values[0]);
    // Sign convention: largest-magnitude entry of each v_l is positive.
    for (std::size_t l = 0; l < r.right.cols(); ++l) {
      const Vector v = r.right.column(l);
      std::size_t arg = 0;
      for (std::size_t i = 1; i < v.size(); ++i) {
        if (std::abs(v[i]) > std::abs(v[arg])) {
          arg = i;
        }
      }
      REQUIRE(v[arg] > 0.0);
    }
  }
  SUBCASE("recovers a prescribed spectrum with one small value") {
    RngStream s(5);
    const Matrix u = gram_schmidt_orthonormalize(gaussian(100, 20, s));
    const Matrix v = gram_schmidt_orthonormalize(gaussian(20, 20, s));
    std::vector<double> sigma(20, 1.0);
    sigma.back() = 1.0 / 50.0;
    const SvdResult r = svd(synthesize_matrix(u, sigma, v));
    for (std::size_t i = 0; i < 20; ++i) {
      CHECK(rel_err(r.singular_values[i], sigma[i]) <= 1e-10);
    }
  }
  SUBCASE("wide input rejected") {
    CHECK_THROWS_AS(svd(Matrix(2, 3, 1.0)), DimensionError);
  }
}

TEST_CASE("svd round trip over 200 random factorizations") {
  RngStream s(6);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + s.uniform_index(9);
    const std::size_t m = n + s.uniform_index(20);
    const Matrix u = gram_schmidt_orthonormalize(gaussian(m, n, s));
    const Matrix v = gram_schmidt_orthonormalize(gaussian(n, n, s));
    std::vector<double> sigma(n);
    for (double& x : sigma) {
      x = std::exp(-4.0 * s.uniform());
    }
    std::sort(sigma.rbegin(), sigma.rend());
    const SvdResult r = svd(synthesize_matrix(u, sigma, v));
    for (std::size_t i = 0; i < n; ++i) {
      REQUIRE(rel_err(r.singular_values[i], sigma[i]) <= 1e-10);
    }
  }
}

TEST_CASE("mat2_power_apply") {
  SUBCASE("identity power") {
    const Mat2 id{{{1.0, 0.0}, {0.0, 1.0}}};
    const Vec2 w{0.3, -2.5};
    CHECK(mat2_power_apply(id, w, 57) == w);
  }
  SUBCASE("k = 0 returns w") {
    const Mat2 b{{{2.0, 1.0}, {3.0, 4.0}}};
    CHECK(mat2_power_apply(b, {1.0, 2.0}, 0) == Vec2{1.0, 2.0});
  }
  SUBCASE("lower triangular cube") {
    const double a = 0.7;
    const double bb = -1.3;
    const double c = 0.4;
    const Mat2 b{{{a, 0.0}, {bb, c}}};
    const Vec2 out = mat2_power_apply(b, {1.0, 0.0}, 3);
    CHECK(rel_err(out[0], a * a * a) <= 1e-15);
    CHECK(rel_err(out[1], bb * (a * a + a * c + c * c)) <= 1e-15);
  }
  SUBCASE("matches naive matrix powers") {
    RngStream s(7);
    for (int t = 0; t < 50; ++t) {
      Mat2 b{};
      for (auto& row : b) {
        for (double& x : row) {
          x = s.uniform() * 1.2 - 0.6;
        }
      }
      const Vec2 w{s.standard_normal(), s.standard_normal()};
      const Vec2 got = mat2_power_apply(b, w, 10);
      const Vec2 want = naive_power(b, w, 10);
      const double scale = std::max({std::abs(want[0]), std::abs(want[1]), 1e-300});
      CHECK(std::abs(got[0] - want[0]) <= 1e-12 * scale);
      CHECK(std::abs(got[1] - want[1]) <= 1e-12 * scale);
    }
  }
  SUBCASE("composition") {
    const Mat2 b{{{0.99, 0.01}, {-1.0, 0.97}}};
    const Vec2 w{1.0, -3.0};
    for (std::size_t k = 0; k <= 100; k += 7) {
      const Vec2 whole = mat2_power_apply(b, w, k);
      for (std::size_t j = 0; j <= k; j += 3) {
        const Vec2 split = mat2_power_apply(b, mat2_power_apply(b, w, j), k - j);
        REQUIRE(rel_err(split[0], whole[0]) <= 1e-12);
        REQUIRE(rel_err(split[1], whole[1]) <= 1e-12);
      }
    }
  }
}

TEST_CASE("eig2") {
  SUBCASE("rotation has eigenvalues +-i") {
    const Eigen2 e = eig2({{{0.0, -1.0}, {1.0, 0.0}}});
    CHECK(std::abs(e.first.real()) <= 1e-15);
    CHECK(std::abs(std::abs(e.first.imag()) - 1.0) <= 1e-15);
    CHECK(std::abs(e.first - std::conj(e.second)) <= 1e-15);
  }
  SUBCASE("triangular matrix") {
    const Eigen2 e = eig2({{{0.9, 0.0}, {-1.0, 0.5}}});
    CHECK(rel_err(e.first.real(), 0.9) <= 1e-15);
    CHECK(rel_err(e.second.real(), 0.5) <= 1e-15);
  }
  SUBCASE("trace and determinant identities") {
    RngStream s(8);
    for (int t = 0; t < 200; ++t) {
      const Mat2 b{{{s.uniform(), s.uniform() * 0.1}, {-1.0, s.uniform()}}};
      const Eigen2 e = eig2(b);
      const double trace = b[0][0] + b[1][1];
      const double det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
      REQUIRE(std::abs((e.first + e.second).real() - trace) <= 1e-12 * std::abs(trace));
      REQUIRE(std::abs((e.first * e.second).real() - det) <= 1e-12 * std::max(std::abs(det), 1e-3));
      REQUIRE(std::abs(e.first) >= std::abs(e.second));
    }
  }
}
