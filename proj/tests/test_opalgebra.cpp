#include "doctest.h"

#include <Eigen/Eigenvalues>

#include <cmath>

#include "errors.hpp"
#include "opalgebra.hpp"
#include "support.hpp"

using namespace ncgl;
using namespace ncgl::testing;

TEST_CASE("trace of identity and matrix units") {
  auto a3 = make_algebra(TracialAlgebra::matrix(3));
  CHECK(real_trace(Operator::identity(a3)) == doctest::Approx(3.0));

  auto two = make_algebra(TracialAlgebra({2, 2}, {0.5, 0.5}));
  CHECK(real_trace(Operator::identity(two)) == doctest::Approx(2.0));

  auto m2 = make_algebra(TracialAlgebra::matrix(2));
  Matrix e11 = Matrix::Zero(2, 2);
  e11(0, 0) = 1;
  CHECK(real_trace(Operator(m2, {e11})) == doctest::Approx(1.0));
}

TEST_CASE("algebra validation") {
  CHECK_THROWS_AS(TracialAlgebra({2, 3}, {1.0}), Error);
  CHECK_THROWS_AS(TracialAlgebra({2}, {0.0}), Error);
  CHECK_THROWS_AS(TracialAlgebra({0}, {1.0}), Error);
  auto m2 = make_algebra(TracialAlgebra::matrix(2));
  CHECK_THROWS_AS(Operator(m2, {Matrix::Zero(3, 3)}), Error);
}

TEST_CASE("operands on different algebras are a structural error") {
  auto a = make_algebra(TracialAlgebra::matrix(2));
  auto b = make_algebra(TracialAlgebra::matrix(3));
  try {
    (void)(Operator::identity(a) + Operator::identity(b));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Structural);
  }
}

TEST_CASE("schatten norms of diag(3,-4)") {
  auto m2 = make_algebra(TracialAlgebra::matrix(2));
  Operator x(m2, {diag({3, -4})}, true);
  CHECK(schatten_norm(x, 1) == doctest::Approx(7.0));
  CHECK(schatten_norm(x, 2) == doctest::Approx(5.0));
  CHECK(schatten_norm(x, kInf) == doctest::Approx(4.0));
  CHECK_THROWS_AS(schatten_norm(x, 0.5), Error);
}

TEST_CASE("weights enter the norm but not the operator norm") {
  auto alg = make_algebra(TracialAlgebra({1, 1}, {0.25, 4.0}));
  Operator x(alg, {diag({2}), diag({1})}, true);
  CHECK(schatten_norm(x, 1) == doctest::Approx(0.25 * 2 + 4.0));
  CHECK(schatten_norm(x, 2) == doctest::Approx(std::sqrt(0.25 * 4 + 4.0)));
  CHECK(schatten_norm(x, kInf) == doctest::Approx(2.0));
}

TEST_CASE("trace is tracial, positive and Hilbert-Schmidt on random pairs") {
  Rng rng(7);
  auto alg = make_algebra(TracialAlgebra({2, 3, 1}, {0.3, 1.2, 2.0}));
  for (int t = 0; t < 50; ++t) {
    Operator x = random_operator(alg, rng);
    Operator y = random_operator(alg, rng);
    CHECK(std::abs(trace(x * y) - trace(y * x)) < 1e-10);
    const double hs = real_trace(x.adjoint() * x);
    CHECK(hs >= -1e-12);
    const double n2 = schatten_norm(x, 2);
    CHECK(std::abs(n2 * n2 - hs) <= 1e-10 * hs);
  }
}

TEST_CASE("Hoelder inequality on random pairs") {
  Rng rng(11);
  auto alg = make_algebra(TracialAlgebra({3, 2}, {0.5, 1.5}));
  for (double p : {1.0, 1.5, 2.0, 3.0, 4.0}) {
    const double q = p == 1.0 ? kInf : p / (p - 1.0);
    for (int t = 0; t < 20; ++t) {
      Operator x = random_operator(alg, rng);
      Operator y = random_operator(alg, rng);
      CHECK(std::abs(trace(x * y)) <= schatten_norm(x, p) * schatten_norm(y, q) + 1e-8);
    }
  }
}

TEST_CASE("spectral projection examples") {
  auto m2 = make_algebra(TracialAlgebra::matrix(2));
  Operator a(m2, {diag({0.5, 2})}, true);
  Projection e = spectral_projection(a, Interval::below(1));
  CHECK(max_diff(e.op(), Operator(m2, {diag({1, 0})})) < 1e-14);

  Projection all = spectral_projection(Operator::zero(m2), Interval::at_least(0));
  CHECK(max_diff(all.op(), Operator::identity(m2)) < 1e-14);
}

TEST_CASE("spectral projection of a non-Hermitian operator is a domain error") {
  auto m2 = make_algebra(TracialAlgebra::matrix(2));
  Matrix b = Matrix::Zero(2, 2);
  b(0, 1) = 1;
  try {
    (void)spectral_projection(Operator(m2, {b}), Interval::below(1));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Domain);
  }
}

TEST_CASE("spectral projections of random Hermitian operators") {
  Rng rng(3);
  auto alg = make_algebra(TracialAlgebra({4, 3}, {1.0, 0.5}));
  for (int t = 0; t < 20; ++t) {
    Operator a = random_hermitian(alg, rng);
    const double lambda = rng.uniform(-1, 1);
    Projection lo = spectral_projection(a, Interval::below(lambda));
    Projection hi = spectral_projection(a, Interval::at_least(lambda));
    CHECK(max_diff(lo.op() * lo.op(), lo.op()) < 1e-9);
    CHECK(max_diff(lo.op() * a, a * lo.op()) < 1e-9);
    CHECK(max_diff(lo.op() + hi.op(), Operator::identity(alg)) < 1e-12);
    // Oracle: the rank equals the eigenvalue count below lambda.
    double count = 0;
    for (std::size_t i = 0; i < a.num_blocks(); ++i) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(a.block(i));
      for (Index j = 0; j < es.eigenvalues().size(); ++j)
        if (es.eigenvalues()[j] < lambda) count += alg->weight(i);
    }
    CHECK(lo.rank_trace() == doctest::Approx(count));
  }
}

TEST_CASE("tie rule keeps complementary pairs exact at an eigenvalue") {
  auto m3 = make_algebra(TracialAlgebra::matrix(3));
  Operator a(m3, {diag({1.0, 1.0 + 1e-13, 2.0})}, true);
  Projection lo = spectral_projection(a, Interval::below(1.0));
  Projection hi = spectral_projection(a, Interval::at_least(1.0));
  CHECK(lo.rank_trace() == doctest::Approx(0.0));
  CHECK(hi.rank_trace() == doctest::Approx(3.0));
  CHECK(max_diff(lo.op() + hi.op(), Operator::identity(m3)) == 0.0);
}

TEST_CASE("functional calculus") {
  auto m2 = make_algebra(TracialAlgebra::matrix(2));
  Operator a(m2, {diag({4, 9})}, true);
  CHECK(max_diff(func_calculus(a, [](double t) { return t; }), a) < 1e-12);
  CHECK(max_diff(sqrt_psd(a), Operator(m2, {diag({2, 3})})) < 1e-12);

  Rng rng(5);
  auto alg = make_algebra(TracialAlgebra({5, 2}, {1.0, 3.0}));
  for (int t = 0; t < 10; ++t) {
    Operator p = random_psd(alg, rng);
    Operator r = sqrt_psd(p);
    CHECK(max_diff(r * r, p) < 1e-9);
  }

  Operator neg(m2, {diag({-1, 1})}, true);
  try {
    (void)sqrt_psd(neg);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Domain);
  }
  // Tiny negative eigenvalues inside the tolerance are accepted.
  Operator almost(m2, {diag({-1e-13, 1})}, true);
  CHECK(max_diff(sqrt_psd(almost), Operator(m2, {diag({0, 1})})) < 1e-12);
}

TEST_CASE("absolute value of a non-Hermitian operator") {
  Rng rng(9);
  auto alg = make_algebra(TracialAlgebra::matrix(4));
  Operator x = random_operator(alg, rng);
  Operator ax = abs(x);
  CHECK(max_diff(ax * ax, x.adjoint() * x) < 1e-9);
  CHECK(schatten_norm(ax, 3) == doctest::Approx(schatten_norm(x, 3)));
}

TEST_CASE("proj_meet examples and properties") {
  auto m2 = make_algebra(TracialAlgebra::matrix(2));
  Projection e = Projection::checked(Operator(m2, {diag({1, 0})}));
  Projection f = Projection::checked(Operator(m2, {diag({0, 1})}));
  CHECK(proj_meet(e, e).rank_trace() == doctest::Approx(1.0));
  CHECK(max_diff(proj_meet(e, e).op(), e.op()) < 1e-12);
  CHECK(proj_meet(e, f).rank_trace() == doctest::Approx(0.0));

  Rng rng(13);
  auto md = make_algebra(TracialAlgebra::matrix(6));
  for (int t = 0; t < 30; ++t) {
    const Index re = 1 + static_cast<Index>(rng.below(6));
    const Index rf = 1 + static_cast<Index>(rng.below(6));
    // Force a nontrivial intersection half of the time by sharing a subspace.
    Matrix pe = random_projection(6, re, rng);
    Matrix pf = random_projection(6, rf, rng);
    if (t % 2 == 0 && re > 1 && rf > 1) {
      Matrix common = random_projection(6, 1, rng);
      Matrix be = range_basis(pe);
      Matrix bf = range_basis(pf);
      be.col(0) = range_basis(common).col(0);
      bf.col(0) = range_basis(common).col(0);
      Eigen::HouseholderQR<Matrix> qe(be), qf(bf);
      Matrix oe = qe.householderQ() * Matrix::Identity(6, re);
      Matrix of = qf.householderQ() * Matrix::Identity(6, rf);
      pe = oe * oe.adjoint();
      pf = of * of.adjoint();
    }
    Projection a = Projection::checked(Operator(md, {pe}));
    Projection b = Projection::checked(Operator(md, {pf}));
    Projection m = proj_meet(a, b);
    // Oracle: dim(E cap F) = rank E + rank F - rank [E F].
    Matrix be = range_basis(pe), bf = range_basis(pf);
    Matrix joint(6, be.cols() + bf.cols());
    joint << be, bf;
    const Index expected = be.cols() + bf.cols() - svd_rank(joint);
    CHECK(m.rank_trace() == doctest::Approx(static_cast<double>(expected)).epsilon(1e-9));
    CHECK(max_diff(proj_meet(b, a).op(), m.op()) < 1e-9);
    CHECK(max_diff(proj_meet(m, m).op(), m.op()) < 1e-9);
    CHECK(psd_leq(m.op(), a.op(), 1e-9));
    CHECK(psd_leq(m.op(), b.op(), 1e-9));
  }
}

TEST_CASE("checked projection rejects non-projections") {
  auto m2 = make_algebra(TracialAlgebra::matrix(2));
  CHECK_THROWS_AS(Projection::checked(Operator(m2, {diag({0.5, 1})})), Error);
}

TEST_CASE("tensor product layout") {
  TracialAlgebra a({1, 2}, {0.5, 2.0});
  TracialAlgebra b({3}, {0.1});
  TracialAlgebra t = tensor(a, b);
  REQUIRE(t.num_blocks() == 2);
  CHECK(t.dim(1) == 6);
  CHECK(t.weight(1) == doctest::Approx(0.2));
  CHECK(t.trace_identity() == doctest::Approx(a.trace_identity() * b.trace_identity()));

  Rng rng(1);
  auto pa = make_algebra(a), pb = make_algebra(b), pt = make_algebra(t);
  Operator x = random_operator(pa, rng), y = random_operator(pb, rng);
  CHECK(std::abs(trace(kron(x, y, pt)) - trace(x) * trace(y)) < 1e-10);
}
