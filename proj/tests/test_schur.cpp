#include "doctest.h"

#include <cmath>

#include "applications.hpp"
#include "errors.hpp"
#include "schur.hpp"
#include "support.hpp"

using namespace ncgl;
using namespace ncgl::testing;

namespace {

Matrix random_hermitian_matrix(Index n, Rng& rng) {
  Matrix g = random_matrix(n, n, rng);
  return 0.5 * (g + g.adjoint());
}

std::vector<int> random_bits(std::size_t n, Rng& rng) {
  std::vector<int> b(n);
  for (auto& x : b) x = static_cast<int>(rng.below(2));
  return b;
}

}  // namespace

TEST_CASE("Schur multiplication") {
  Rng rng(1);
  Matrix a = random_matrix(5, 5, rng), b = random_matrix(5, 5, rng);
  CHECK(schur_multiply(Matrix::Ones(5, 5), a) == a);
  CHECK(schur_multiply(Matrix::Zero(5, 5), a).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(schur_multiply(Matrix::Ones(4, 5), a), Error);
  // tau((m*a) b) = tau(a (m^t * b)) for real patterns.
  for (int t = 0; t < 20; ++t) {
    Matrix m(5, 5);
    for (Index i = 0; i < 5; ++i)
      for (Index j = 0; j < 5; ++j) m(i, j) = static_cast<double>(rng.below(2));
    const cplx lhs = (schur_multiply(m, a) * b).trace();
    const cplx rhs = (a * schur_multiply(Matrix(m.transpose()), b)).trace();
    CHECK(std::abs(lhs - rhs) <= 1e-12 * (1 + std::abs(lhs)));
  }
}

TEST_CASE("triangular projection") {
  Matrix a(2, 2);
  a << 1, 2, 3, 4;
  Matrix expect(2, 2);
  expect << 1, 2, 0, 4;
  CHECK(triangular_projection(a) == expect);
  Rng rng(2);
  Matrix u = triangular_projection(random_matrix(6, 6, rng));
  CHECK(triangular_projection(u) == u);
  for (int t = 0; t < 10; ++t) {
    Matrix r = random_matrix(7, 7, rng);
    CHECK(triangular_projection(r) == schur_multiply(Pattern::triangular(7), r));
  }
  // p = 2: contraction, attained on upper-triangular input.
  NormLowerBound two = schur_norm_lower(Pattern::triangular(6), 2.0, 50, 3);
  CHECK(two.value <= 1.0 + 1e-12);
  CHECK(two.value >= 1.0 - 1e-9);
}

TEST_CASE("interlacing map") {
  Matrix one(1, 1);
  one << cplx(2.5, -1);
  Matrix expect = Matrix::Zero(2, 2);
  expect(0, 1) = cplx(2.5, -1);
  CHECK(interlace_t(one) == expect);
  Rng rng(3);
  Matrix a = random_matrix(4, 4, rng);
  for (double p : {1.0, 2.0, 4.0, kInf})
    CHECK(schatten_norm(interlace_t(a), p) == doctest::Approx(schatten_norm(a, p)).epsilon(1e-10));
  for (int t = 0; t < 100; ++t) {
    const Index n = 2 + static_cast<Index>(rng.below(15));
    Matrix r = random_matrix(n, n, rng);
    CHECK(schur_multiply(Pattern::interlace_pattern(n), interlace_t(r)) == interlace_t(triangular_projection(r)));
  }
  // The pattern matches the displayed 0 1 0 1 ... / 1 1 0 1 ... layout.
  Pattern m = Pattern::interlace_pattern(3);
  Matrix shown(6, 6);
  shown << 0, 1, 0, 1, 0, 1,  //
      1, 1, 0, 1, 0, 1,       //
      0, 0, 0, 1, 0, 1,       //
      1, 1, 1, 1, 0, 1,       //
      0, 0, 0, 0, 0, 1,       //
      1, 1, 1, 1, 1, 1;
  CHECK(m.entries == shown);
}

TEST_CASE("reversed-L patterns") {
  Pattern p = Pattern::reversed_L({0, 1, 0}, {1, 0, 1});
  Matrix expect(3, 3);
  expect << 1, 1, 0,  //
      1, 0, 0,        //
      0, 0, 1;
  CHECK(p.entries == expect);
  CHECK(p.truncate(2).entries == expect.topLeftCorner(2, 2));
  CHECK_THROWS_AS(Pattern::reversed_L({0, 2}, {1, 1}), Error);
  CHECK_THROWS_AS(Pattern::reversed_L({0, 1}, {1}), Error);
}

TEST_CASE("gradient against finite differences") {
  Rng rng(4);
  const Pattern m = Pattern::triangular(5);
  for (double p : {1.5, 3.0, 8.0}) {
    Matrix a = random_matrix(5, 5, rng);
    Matrix g = schur_ratio_gradient(m.entries, a, p);
    auto f = [&](const Matrix& x) {
      return std::log(schatten_norm(schur_multiply(m, x), p)) - std::log(schatten_norm(x, p));
    };
    Matrix dir = random_matrix(5, 5, rng);
    const double h = 1e-6 * a.norm();
    const double fd = (f(a + h * dir) - f(a - h * dir)) / (2 * h);
    const double an = (g.adjoint() * dir).trace().real();
    CHECK(fd == doctest::Approx(an).epsilon(1e-5));
  }
}

TEST_CASE("norm lower bounds") {
  CHECK(schur_norm_lower(Pattern::custom(Matrix::Ones(6, 6)), 3.0).value == doctest::Approx(1.0).epsilon(1e-12));
  Rng rng(5);
  for (int t = 0; t < 5; ++t) {
    Pattern d = Pattern::diagonal(random_bits(6, rng));
    CHECK(schur_norm_lower(d, 4.0, 50, t).value <= 1.0 + 1e-12);
  }
  CHECK_THROWS_AS(schur_norm_lower(Pattern::triangular(4), 4.0, 0), Error);

  const Pattern tri = Pattern::triangular(32);
  double prev = 0;
  for (double p : {4.0, 8.0, 16.0}) {
    const double v = schur_norm_lower(tri, p, 200, 7).value;
    CHECK(v >= prev);
    CHECK(v <= schur_upper_constant(tri, p));
    prev = v;
  }
  // Same seed, same answer.
  CHECK(schur_norm_lower(tri, 4.0, 30, 9).value == schur_norm_lower(tri, 4.0, 30, 9).value);
}

TEST_CASE("duality and localization consistency") {
  Rng rng(6);
  for (int t = 0; t < 3; ++t) {
    Pattern m = Pattern::reversed_L(random_bits(8, rng), random_bits(8, rng));
    for (double p : {3.0, 4.0}) {
      const double q = p / (p - 1);
      CHECK(schur_norm_lower(m, p, 60, t).value <= schur_upper_constant(m, q));
      CHECK(schur_norm_lower(m, q, 60, t).value <= schur_upper_constant(m, p));
    }
  }
  const Pattern big = Pattern::interlace_pattern(6);
  double prev = 0;
  for (Index K : {4, 8, 12}) {
    const double v = schur_norm_lower(big.truncate(K), 6.0, 150, 1).value;
    CHECK(v >= prev - 1e-9);
    prev = v;
  }
}

TEST_CASE("reversed-L bound") {
  Pattern ones = Pattern::reversed_L(std::vector<int>(5, 1), std::vector<int>(5, 1));
  Rng rng(7);
  Matrix a = random_hermitian_matrix(5, rng);
  ReversedLTrial t = verify_reversed_L_once(ones, 4.0, a);
  CHECK(t.identity_defect <= 1e-12);
  CHECK(t.report.lhs == doctest::Approx(schatten_norm(a, 4.0)));
  CHECK(t.report.pass);

  for (int s = 0; s < 10; ++s) {
    Pattern m = Pattern::reversed_L(random_bits(8, rng), random_bits(8, rng));
    ReversedLReport r = verify_reversed_L(m, 4.0, 20, s);
    CHECK(r.pass());
    CHECK(r.max_identity_defect <= 1e-12);
    for (const auto& tr : r.trials) CHECK(tr.report.flag != HypothesisFlag::Unverified);
  }
  CHECK_THROWS_AS(verify_reversed_L(Pattern::triangular(4), 4.0, 1), Error);
  CHECK_THROWS_AS(verify_reversed_L(ones, 1.5, 1), Error);
  CHECK_THROWS_AS(verify_reversed_L(ones, 4.0, 0), Error);
}
