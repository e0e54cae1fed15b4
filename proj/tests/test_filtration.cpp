#include "doctest.h"

#include <cmath>

#include "errors.hpp"
#include "filtration.hpp"
#include "support.hpp"

using namespace ncgl;
using namespace ncgl::testing;

namespace {

std::vector<Filtration> all_families() {
  std::vector<Filtration> fs;
  fs.push_back(families::trivial_full(3));
  fs.push_back(families::corner(4));
  fs.push_back(families::rademacher(3));
  fs.push_back(families::rademacher_matrix(3, 2));
  fs.push_back(families::rademacher_corner(2, 3));
  fs.push_back(families::corner(3).prepend(TracialAlgebra::matrix(2),
                                           {ce::Full{}, ce::Full{}, ce::Full{}, ce::Full{}},
                                           "matrix-corner"));
  fs.push_back(families::rademacher_matrix(2, 2).prepend(
      TracialAlgebra::matrix(2), {ce::Trivial{}, ce::Full{}, ce::Full{}}, "mixed"));
  return fs;
}

}  // namespace

TEST_CASE("corner expectation on M_3") {
  FiltrationPtr f = share(families::corner(3));
  Matrix a(3, 3);
  a << 1, 2, 3, 4, 5, 6, 7, 8, 9;
  Operator x(f->algebra(), {a});
  Operator e1 = f->cond_exp(1, x);
  CHECK(max_diff(e1, Operator(f->algebra(), {diag({1, 7, 7})})) < 1e-14);
  CHECK(max_diff(f->cond_exp(0, x), 5.0 * Operator::identity(f->algebra())) < 1e-14);
  CHECK(max_diff(f->cond_exp(-1, x), f->cond_exp(0, x)) == 0.0);
  CHECK(max_diff(f->cond_exp(f->N(), x), x) == 0.0);
  CHECK_THROWS_AS(f->cond_exp(4, x), Error);
  CHECK_THROWS_AS(f->cond_exp(-2, x), Error);
}

TEST_CASE("trivial-then-full filtration on M_2") {
  FiltrationPtr f = share(families::trivial_full(2));
  Rng rng(2);
  Operator x = random_operator(f->algebra(), rng);
  CHECK(max_diff(f->cond_exp(0, x), (trace(x) / 2.0) * Operator::identity(f->algebra())) < 1e-14);
  CHECK(max_diff(f->cond_exp(1, x), x) == 0.0);
}

TEST_CASE("rademacher depth 3 averages blocks agreeing on the first signs") {
  FiltrationPtr f = share(families::rademacher(3));
  REQUIRE(f->algebra()->num_blocks() == 8);
  for (std::size_t i = 0; i < 8; ++i) CHECK(f->algebra()->weight(i) == 0.125);
  Rng rng(4);
  Operator x = random_hermitian(f->algebra(), rng);
  Operator e2 = f->cond_exp(2, x);
  // Classical oracle: the first two signs are bits 0 and 1.
  for (std::size_t s = 0; s < 8; ++s) {
    const std::size_t partner = s ^ 4;
    const cplx expect = 0.5 * (x.block(s)(0, 0) + x.block(partner)(0, 0));
    CHECK(std::abs(e2.block(s)(0, 0) - expect) < 1e-14);
  }
}

TEST_CASE("corner filtration on M_4 has five levels") {
  CHECK(families::corner(4).N() == 4);
}

TEST_CASE("filtration validation") {
  // Decreasing levels.
  CHECK_THROWS_AS(Filtration({TracialAlgebra::matrix(2)}, {{{ce::Full{}}}, {{ce::Trivial{}}}}),
                  Error);
  // Corner on a multi-block factor.
  CHECK_THROWS_AS(Filtration({TracialAlgebra({1, 1}, {1, 1})}, {{{ce::Corner{1}}}}), Error);
  // Rademacher level beyond depth.
  CHECK_THROWS_AS(Filtration({TracialAlgebra::rademacher(2)}, {{{ce::RademacherAverage{3}}}}),
                  Error);
  // Wrong descriptor count.
  CHECK_THROWS_AS(Filtration({TracialAlgebra::matrix(2)}, {{{ce::Full{}, ce::Full{}}}}), Error);
}

TEST_CASE("filtration invariants on every family") {
  Rng rng(17);
  for (const Filtration& raw : all_families()) {
    CAPTURE(raw.name());
    FiltrationPtr f = share(raw);
    auto alg = f->algebra();
    const Operator id = Operator::identity(alg);
    for (int t = 0; t < 5; ++t) {
      Operator x = random_operator(alg, rng);
      Operator h = random_hermitian(alg, rng);
      Operator pos = random_psd(alg, rng);
      for (int n = 0; n <= f->N(); ++n) {
        Operator en = f->cond_exp(n, x);
        CHECK(max_diff(f->cond_exp(n, id), id) < 1e-12);
        CHECK(std::abs(trace(en) - trace(x)) < 1e-10);
        CHECK(max_diff(f->cond_exp(n, en), en) < 1e-12);
        CHECK(min_eigenvalue(f->cond_exp(n, pos)) >= -1e-10);
        Operator eh = f->cond_exp(n, h);
        CHECK(eh.hermitian());
        CHECK(max_diff(f->cond_exp(n, h.adjoint()), eh.adjoint()) < 1e-12);
        for (int m = 0; m <= f->N(); ++m) {
          const int lo = std::min(m, n);
          CHECK(max_diff(f->cond_exp(m, en), f->cond_exp(lo, x)) < 1e-9);
          CHECK(max_diff(f->cond_exp(n, f->cond_exp(m, x)), f->cond_exp(lo, x)) < 1e-9);
        }
        // Bimodule property.
        Operator a = f->cond_exp(n, random_operator(alg, rng));
        Operator b = f->cond_exp(n, random_operator(alg, rng));
        CHECK(max_diff(f->cond_exp(n, a * x * b), a * en * b) < 1e-9);
        // L^p contraction.
        for (double p : {1.0, 2.0, 4.0, kInf}) CHECK(schatten_norm(en, p) <= schatten_norm(x, p) + 1e-8);
        // Jensen.
        Operator ehn = f->cond_exp(n, h);
        Operator gap = f->cond_exp(n, (h * h).mark_hermitian()) - (ehn * ehn).mark_hermitian();
        CHECK(min_eigenvalue(gap.mark_hermitian()) >= -1e-9);
      }
    }
  }
}

TEST_CASE("cond_exp agrees with the Gram-projection oracle") {
  Rng rng(23);
  for (const Filtration& raw : all_families()) {
    CAPTURE(raw.name());
    for (int n = 0; n <= raw.N(); ++n) {
      for (int t = 0; t < 5; ++t) {
        Operator x = random_operator(raw.algebra(), rng);
        CHECK(max_diff(raw.cond_exp(n, x), ce_oracle(raw, n, x)) < 1e-9);
      }
    }
  }
}

TEST_CASE("oracle on trivial and full levels") {
  Filtration f = families::trivial_full(3);
  Rng rng(8);
  Operator x = random_operator(f.algebra(), rng);
  CHECK(max_diff(ce_oracle(f, 0, x), (trace(x) / 3.0) * Operator::identity(f.algebra())) < 1e-12);
  CHECK(max_diff(ce_oracle(f, 1, x), x) < 1e-12);
}

TEST_CASE("martingales from a final value") {
  FiltrationPtr f = share(families::corner(4));
  Rng rng(31);
  // Constant martingale from a level-0 element.
  Operator c = 2.5 * Operator::identity(f->algebra());
  Martingale mc = martingale_from_final(f, c);
  for (const auto& v : mc.values) CHECK(max_diff(v, c) < 1e-14);

  Martingale m = random_martingale(f, rng, 4.0);
  CHECK(schatten_norm(m.final_value(), 4.0) == doctest::Approx(1.0));
  CHECK(martingale_defect(m) < 1e-9);
  // Orthogonal differences.
  for (int a = 0; a <= m.N(); ++a)
    for (int b = 0; b <= m.N(); ++b)
      if (a != b) CHECK(std::abs(trace(m.diff(a).adjoint() * m.diff(b))) < 1e-9);

  // e_{N,N} in M_N: x_k has (N - k)^{-1} on the tail diagonal.
  const Index d = 4;
  Matrix enn = Matrix::Zero(d, d);
  enn(d - 1, d - 1) = 1;
  Martingale me = martingale_from_final(f, Operator(f->algebra(), {enn}, true));
  for (int k = 0; k < d; ++k) {
    Matrix expect = Matrix::Zero(d, d);
    for (Index j = k; j < d; ++j) expect(j, j) = 1.0 / static_cast<double>(d - k);
    CHECK(max_diff(me.values[k], Operator(f->algebra(), {expect})) < 1e-14);
  }
}

TEST_CASE("square functions") {
  Rng rng(37);
  // One step: S_0 = |x_0|.
  FiltrationPtr one = share(Filtration({TracialAlgebra::matrix(3)}, {{{ce::Full{}}}}));
  Martingale m1 = random_martingale(one, rng);
  CHECK(max_diff(square_function(m1), abs(m1.final_value())) < 1e-9);

  // Diagonal martingale: pointwise square function.
  FiltrationPtr rad = share(families::rademacher(3));
  Martingale md = random_martingale(rad, rng);
  Operator S = square_function(md);
  for (std::size_t s = 0; s < 8; ++s) {
    double acc = 0;
    for (int k = 0; k <= md.N(); ++k) acc += std::norm(md.diff(k).block(s)(0, 0));
    CHECK(S.block(s)(0, 0).real() == doctest::Approx(std::sqrt(acc)));
  }

  // tau(S^2) = sum ||dx_k||_2^2.
  FiltrationPtr rc = share(families::rademacher_corner(2, 3));
  Martingale m = random_martingale(rc, rng);
  SquareFunctions sf = square_functions(m, 3.0);
  double sum = 0;
  for (int k = 0; k <= m.N(); ++k) sum += std::pow(schatten_norm(m.diff(k), 2), 2);
  CHECK(real_trace(sf.S * sf.S) == doctest::Approx(sum));
  CHECK(real_trace(sf.s * sf.s) == doctest::Approx(sum));
  double psum = 0;
  for (int k = 0; k <= m.N(); ++k) psum += std::pow(schatten_norm(m.diff(k), 3), 3);
  CHECK(std::pow(schatten_norm(sf.z, 3), 3) == doctest::Approx(psum));
  CHECK_THROWS_AS(diagonal_p_function(m, 1.5), Error);
}
