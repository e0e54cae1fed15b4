#include "doctest.h"

#include <cmath>

#include "applications.hpp"
#include "cuculescu.hpp"
#include "errors.hpp"
#include "support.hpp"

using namespace ncgl;
using namespace ncgl::testing;

namespace {

double pnorm_p(const Operator& a, double p) { return std::pow(schatten_norm(a, p), p); }

// Random unitary U on M_m applied as 1 (x) U on every sign block.
Operator conjugate(const Operator& a, const Matrix& u) {
  std::vector<Matrix> blocks;
  for (std::size_t s = 0; s < a.algebra().num_blocks(); ++s) blocks.push_back(u * a.block(s) * u.adjoint());
  return Operator(std::make_shared<TracialAlgebra>(a.algebra()), std::move(blocks), true);
}

Matrix random_unitary(Index m, Rng& rng) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(m, m, rng));
  return qr.householderQ() * Matrix::Identity(m, m);
}

std::vector<Operator> random_psd_sequence(const FiltrationPtr& f, Rng& rng, bool adapted) {
  std::vector<Operator> u;
  for (int n = 0; n <= f->N(); ++n) {
    Operator a = random_psd(f->algebra(), rng);
    if (adapted) a = f->cond_exp(n, a).mark_hermitian();
    u.push_back(a);
  }
  return u;
}

}  // namespace

TEST_CASE("constants at p = 2 and their closed forms") {
  CHECK(bg_upper_constant(2) == 1.0);
  CHECK(bg_lower_constant(2) == 1.0);
  CHECK(transform_constant(2) == 1.0);
  CHECK(stein_constant(2) == 1.0);
  CHECK(dual_doob_constant(1) == 1.0);
  CHECK(dominated_constant(2) == 1.0);
  const double p = 4;
  const double cm = 12 * p / std::sqrt(1 - std::pow(1 + 1 / p, 2 - p));
  CHECK(cm == doctest::Approx(80.0));
  CHECK(bg_upper_constant(p) == doctest::Approx(std::sqrt(2.0) * 80));
  CHECK(bg_lower_constant(p) == doctest::Approx(cm * std::sqrt(3.0) * std::pow(5.0, 0.25)));
  CHECK(transform_constant(p) == doctest::Approx(80 * std::sqrt(3.0)));
  CHECK(dominated_constant(p, 2) == doctest::Approx(80 * 3.0));
  CHECK(positive_tangent_constant(p) == doctest::Approx(1 + 2 * 80 * std::sqrt(3.0)));
  CHECK(refined_doob_constant(p) == doctest::Approx((1 + 3 * positive_tangent_constant(p)) / 2));
  const double c8 = 96 / std::sqrt(1 - std::pow(1.125, -6.0));
  CHECK(dual_doob_constant(4) == doctest::Approx(2 * c8 * c8 * std::pow(2.0, 0.25)));
  CHECK(stein_constant(8) == doctest::Approx(std::sqrt(dual_doob_constant(4))));
  CHECK_THROWS_AS(bg_upper_constant(1.5), Error);
  CHECK_THROWS_AS(stein_constant(1.5), Error);
}

TEST_CASE("bg embedding of a scalar N = 0 martingale") {
  FiltrationPtr f = share(Filtration({TracialAlgebra::matrix(1)}, {{{ce::Full{}}}}));
  Martingale x = martingale_from_final(f, Operator::scalar(f->algebra(), 1.0).mark_hermitian());
  EmbeddedInstance e = bg_embed(x);
  Spectrum s = eigh(abs(e.y.final_value()));
  std::vector<double> ev(s.values[0].data(), s.values[0].data() + 3);
  std::sort(ev.begin(), ev.end());
  CHECK(ev[0] == doctest::Approx(0.0));
  CHECK(ev[1] == doctest::Approx(1.0));
  CHECK(ev[2] == doctest::Approx(1.0));
  CHECK(e.identity_defect == 0.0);
  CHECK(e.domination_defect <= 1e-12);
}

TEST_CASE("bg embedding identities") {
  Rng rng(11);
  for (int t = 0; t < 20; ++t) {
    FiltrationPtr f = share(families::corner(2 + t % 3));
    Martingale x = random_martingale(f, rng);
    for (double p : {2.0, 3.0, 4.0}) {
      EmbeddedInstance e = bg_embed(x, p);
      CHECK(e.identity_defect <= 1e-10);
      CHECK(e.domination_defect <= 1e-9);
      double rhs = pnorm_p(x.final_value(), p);
      for (int k = 0; k <= x.N(); ++k) rhs += pnorm_p(x.diff(k), p);
      CHECK(pnorm_p(e.x_tilde, p) == doctest::Approx(rhs).epsilon(1e-10));
      CHECK(e.y.hermitian());
    }
  }
  FiltrationPtr f = share(families::corner(3));
  Martingale zero = martingale_from_final(f, Operator::zero(f->algebra()).mark_hermitian());
  EmbeddedInstance e = bg_embed(zero, 3.0);
  CHECK(e.y.final_value().max_abs() == 0.0);
  CHECK(e.x_tilde.max_abs() == 0.0);
  CHECK(e.z.max_abs() == 0.0);
}

TEST_CASE("Burkholder-Gundy in both directions") {
  Rng rng(12);
  for (int t = 0; t < 60; ++t) {
    FiltrationPtr f = share(families::corner(2 + t % 4));
    Martingale x = scale(random_martingale(f, rng), rng.uniform(0.1, 5.0));
    for (double p : {2.0, 3.0, 4.0, 8.0}) {
      BGReport r = verify_bg(x, p, false, t);
      CHECK(r.pass());
      CHECK(r.upper.flag == HypothesisFlag::StrongPass);
      CHECK(r.lower.flag == HypothesisFlag::StrongPass);
    }
  }
  // Constant 1 at p = 2 is the Hilbert-Schmidt orthogonality of differences.
  FiltrationPtr f = share(families::rademacher_corner(2, 3));
  Martingale x = random_martingale(f, rng);
  BGReport r = verify_bg(x, 2.0);
  CHECK(r.upper.lhs == doctest::Approx(r.upper.rhs).epsilon(1e-10));
  CHECK_THROWS_AS(verify_bg(x, 1.5), Error);
}

TEST_CASE("Burkholder-Gundy with the good-lambda chain") {
  Rng rng(13);
  FiltrationPtr f = share(families::corner(3));
  for (int t = 0; t < 3; ++t) {
    Martingale x = random_martingale(f, rng);
    BGReport r = verify_bg(x, 4.0, true, t);
    REQUIRE(r.chain.has_value());
    CHECK(r.pass());
    CHECK(r.upper.defects.ok());
  }
}

TEST_CASE("martingale transforms") {
  Rng rng(14);
  FiltrationPtr f = share(families::corner(4));
  Martingale x = random_martingale(f, rng);
  std::vector<double> ones(x.N() + 1, 1.0), minus(x.N() + 1, -1.0), alt;
  for (int n = 0; n <= x.N(); ++n) alt.push_back(n % 2 ? -1.0 : 1.0);
  VerifyReport same = verify_transform(x, ones, 4.0);
  CHECK(same.pass);
  CHECK(same.lhs == doctest::Approx(schatten_norm(x.final_value(), 4.0)));
  VerifyReport flip = verify_transform(x, minus, 4.0);
  CHECK(flip.pass);
  CHECK(flip.lhs == doctest::Approx(schatten_norm(x.final_value(), 4.0)));
  for (int t = 0; t < 40; ++t) {
    Martingale xr = random_martingale(share(families::corner(2 + t % 4)), rng);
    std::vector<double> a;
    for (int n = 0; n <= xr.N(); ++n) a.push_back(n % 2 ? -1.0 : 1.0);
    for (double p : {3.0, 6.0}) CHECK(verify_transform(xr, a, p, t).pass);
    VerifyReport d = verify_transform(xr, a, 1.5, t);
    CHECK(d.pass);
    CHECK(d.flag == HypothesisFlag::DualityOnly);
  }
  // At p = 2 the transform by a sign sequence is an isometry.
  VerifyReport two = verify_transform(x, alt, 2.0);
  CHECK(two.lhs == doctest::Approx(schatten_norm(x.final_value(), 2.0)).epsilon(1e-10));
  std::vector<double> bad(x.N() + 1, 0.0);
  bad[1] = 1.5;
  CHECK_THROWS_AS(transform(x, bad), Error);
}

TEST_CASE("dual Doob embedding with a single term") {
  FiltrationPtr f = share(Filtration({TracialAlgebra::matrix(2)}, {{{ce::Trivial{}}}}));
  const AlgebraPtr& a = f->algebra();
  Operator u0(a, {Matrix{{cplx(2, 0), cplx(1, 1)}, {cplx(1, -1), cplx(3, 0)}}}, true);
  EmbeddedInstance e = doob_embed({u0}, f);
  CHECK(e.identity_defect <= 1e-12);
  // y_0^2 = (e_11 + e_22) (x) 1 (x) E_0(u_0) with E_0(u_0) = 5/2 I, so the
  // domination is an equality on the (1,1) corner.
  CHECK(std::abs(e.domination_defect) <= 1e-12);
  const Operator y2 = e.y.final_value() * e.y.final_value();
  REQUIRE(y2.algebra().num_blocks() == 2);
  for (std::size_t s = 0; s < 2; ++s)
    CHECK((y2.block(s) - 2.5 * Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(max_diff(e.z, e.x_tilde) == 0.0);
}

TEST_CASE("dual Doob embedding identities and the norm bound") {
  Rng rng(15);
  for (int t = 0; t < 20; ++t) {
    FiltrationPtr f = share(t % 2 ? families::corner(3) : families::rademacher_matrix(2, 2));
    std::vector<Operator> u = random_psd_sequence(f, rng, false);
    u.resize(1 + t % (f->N() + 1), u.front());
    EmbeddedInstance e = doob_embed(u, f);
    CHECK(e.identity_defect <= 1e-10);
    CHECK(e.domination_defect <= 1e-9);
    Operator total = Operator::zero(f->algebra());
    for (const auto& a : u) total += a;
    total.mark_hermitian();
    for (double p : {2.0, 3.0, 4.0})
      CHECK(schatten_norm(e.x_tilde, p) <=
            std::pow(2.0, 1 / p) * std::sqrt(schatten_norm(total, p / 2)) * (1 + 1e-12));
  }
  FiltrationPtr f = share(families::corner(2));
  std::vector<Operator> zero(2, Operator::zero(f->algebra()).mark_hermitian());
  EmbeddedInstance e = doob_embed(zero, f);
  CHECK(e.y.final_value().max_abs() == 0.0);
  CHECK(e.x_tilde.max_abs() == 0.0);
  Operator neg = Operator::scalar(f->algebra(), -1.0).mark_hermitian();
  CHECK_THROWS_AS(doob_embed({neg}, f), Error);
}

TEST_CASE("dual Doob and Stein") {
  Rng rng(16);
  FiltrationPtr triv = share(Filtration({TracialAlgebra::matrix(3)}, {{{ce::Trivial{}}}}));
  Operator u0 = random_psd(triv->algebra(), rng);
  DoobReport one = verify_dual_doob({u0}, triv, 1.0);
  CHECK(one.main.pass);
  CHECK(one.main.margin >= -1e-12 * one.main.rhs);
  for (double q : {1.0, 2.0, 4.0}) {
    DoobReport r = verify_dual_doob({u0}, triv, q);
    CHECK(r.pass());
    CHECK(r.main.lhs <= schatten_norm(u0, q) * (1 + 1e-12));
  }
  for (int t = 0; t < 30; ++t) {
    FiltrationPtr f = share(families::corner(2 + t % 3));
    std::vector<Operator> u = random_psd_sequence(f, rng, false);
    for (double q : {1.0, 2.0, 4.0}) {
      DoobReport r = verify_dual_doob(u, f, q, false, t);
      CHECK(r.pass());
      CHECK(r.main.flag == HypothesisFlag::StrongPass);
    }
    std::vector<Operator> w;
    for (int n = 0; n <= f->N(); ++n) w.push_back(random_operator(f->algebra(), rng));
    CHECK(verify_stein(w, f, 4.0, t).pass);
    VerifyReport s2 = verify_stein(w, f, 2.0, t);
    CHECK(s2.constant == 1.0);
    CHECK(s2.pass);
  }
  FiltrationPtr f = share(families::corner(2));
  std::vector<Operator> u = random_psd_sequence(f, rng, false);
  DoobReport chained = verify_dual_doob(u, f, 2.0, true, 3);
  REQUIRE(chained.chain.has_value());
  CHECK(chained.pass());
  CHECK_THROWS_AS(verify_stein(u, f, 1.5), Error);
}

TEST_CASE("tangency") {
  Rng rng(17);
  FiltrationPtr f = share(families::corner(4));
  Martingale x = random_martingale(f, rng);
  TangentCheck same = check_tangent(x.diffs(), x.diffs(), *f);
  CHECK(same.tangent);
  CHECK(same.max_deviation == 0.0);
  for (int t = 0; t < 10; ++t) {
    MartingalePair a = corner_tangent_pair(rng, 2 + t % 4);
    TangentCheck c = check_tangent(a.x.diffs(), a.y.diffs(), *a.x.filtration);
    CHECK(c.tangent);
    CHECK(c.moment_deviation <= 1e-10);
    MartingalePair b = sign_tangent_pair(rng, 1 + t % 3, 2);
    TangentCheck d = check_tangent(b.x.diffs(), b.y.diffs(), *b.x.filtration);
    CHECK(d.tangent);
    CHECK(d.moment_deviation <= 1e-10);
  }
  // The martingale and a random sign transform are generally not tangent at the
  // level of spectral projections on the corner filtration.
  Martingale y = martingale_from_final(f, random_hermitian(f->algebra(), rng));
  TangentCheck other = check_tangent(x.diffs(), y.diffs(), *f);
  CHECK_FALSE(other.tangent);
  std::vector<Operator> bad = x.diffs();
  bad[1] = random_hermitian(f->algebra(), rng);
  CHECK_THROWS_AS(check_tangent(bad, bad, *f), Error);
}

TEST_CASE("tangent counterexample") {
  CounterexampleReport r9 = tangent_counterexample(9, 1.5);
  CHECK(r9.weak_lhs == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(r9.tau_abs_x == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(r9.ratio == doctest::Approx(10.0 / 6.0).epsilon(1e-12));
  CounterexampleReport r3 = tangent_counterexample(3, 1.5);
  CHECK(r3.weak_lhs == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(r3.tau_abs_x == doctest::Approx(2 * std::sqrt(3.0)).epsilon(1e-12));
  CHECK(r3.tangency.tangent);
  double prev = 0;
  for (int N = 3; N <= 13; N += 2) {
    CounterexampleReport r = tangent_counterexample(N, 1.5);
    CHECK(r.norm_x == doctest::Approx(std::pow(2.0, 1 / 1.5) * std::sqrt(N)).epsilon(1e-12));
    CHECK(r.norm_ratio >= r.lower_ratio * (1 - 1e-12));
    CHECK(r.norm_ratio > prev);
    CHECK(r.ratio == doctest::Approx((N + 1) / (2 * std::sqrt(N))).epsilon(1e-12));
    prev = r.norm_ratio;
    if (N == 13) CHECK(r.ratio > 1.8);
  }
  CHECK_THROWS_AS(tangent_counterexample(4, 1.5), Error);
  CHECK_THROWS_AS(tangent_counterexample(15, 1.5), Error);
  // The same pair satisfies the domination hypotheses, so p = 4 holds.
  CounterexampleReport r5 = tangent_counterexample(5, 4.0);
  VerifyReport d = verify_dominated(r5.x, r5.y, 4.0);
  CHECK(d.pass);
  CHECK(d.flag != HypothesisFlag::Unverified);
}

TEST_CASE("dominated martingales") {
  Rng rng(18);
  FiltrationPtr f = share(families::corner(4));
  Martingale x = random_martingale(f, rng);
  VerifyReport same = verify_dominated(x, x, 4.0);
  CHECK(same.pass);
  CHECK(same.flag == HypothesisFlag::StrongPass);
  for (int t = 0; t < 30; ++t) {
    MartingalePair a = corner_tangent_pair(rng, 2 + t % 4);
    VerifyReport r = verify_dominated(a.x, a.y, 4.0, 1.0, t);
    CHECK(r.pass);
    CHECK(r.flag != HypothesisFlag::Unverified);
  }
  // Doubling y breaks the hypothesis; the report is flagged.
  VerifyReport big = verify_dominated(x, scale(x, 2.0), 4.0);
  CHECK(big.flag == HypothesisFlag::Unverified);
  CHECK_THROWS_AS(verify_dominated(x, x, 1.5), Error);
}

TEST_CASE("positive tangent sums") {
  Rng rng(19);
  for (int t = 0; t < 20; ++t) {
    PositivePair d = diagonal_positive_pair(rng, 1 + t % 3, 2);
    CHECK(check_tangent(d.u, d.v, *d.filtration).tangent);
    for (double p : {1.0, 1.5, 4.0}) {
      VerifyReport r = verify_positive_tangent(d.u, d.v, *d.filtration, p, false, 1.0, t);
      CHECK(r.pass);
      CHECK(r.flag == HypothesisFlag::NotApplicable);
    }
    PositivePair a = arrow_positive_pair(rng, 2 + t % 3);
    CHECK(check_tangent(a.u, a.v, *a.filtration).tangent);
    CHECK(verify_positive_tangent(a.u, a.v, *a.filtration, 3.0, false, 1.0, t).pass);
    CHECK(verify_positive_tangent(a.u, a.v, *a.filtration, 3.0, true, 1.0, t).pass);
  }
  PositivePair d = diagonal_positive_pair(rng, 2, 2);
  VerifyReport same = verify_positive_tangent(d.u, d.u, *d.filtration, 4.0);
  CHECK(same.lhs == doctest::Approx(same.rhs / same.constant));
  std::vector<Operator> neg = d.u;
  neg[0] = -1.0 * neg[0];
  neg[0].mark_hermitian();
  CHECK_THROWS_AS(verify_positive_tangent(neg, d.v, *d.filtration, 4.0), Error);
}

TEST_CASE("refined Doob") {
  Rng rng(20);
  // Trivial first level: the sequence (0, u_1) reduces to the contraction
  // ||tau(u_1)/tau(I) I||_p <= ||u_1||_p.
  FiltrationPtr tf = share(families::trivial_full(3));
  Operator u1 = random_psd(tf->algebra(), rng);
  VerifyReport r0 = refined_doob({Operator::zero(tf->algebra()).mark_hermitian(), u1}, *tf, 3.0);
  CHECK(r0.pass);
  CHECK(r0.lhs == doctest::Approx(schatten_norm(Operator::scalar(tf->algebra(), real_trace(u1) / 3.0), 3.0)));
  CHECK(r0.lhs <= schatten_norm(u1, 3.0));
  for (int t = 0; t < 30; ++t) {
    FiltrationPtr f = share(families::corner(2 + t % 4));
    std::vector<Operator> u = random_psd_sequence(f, rng, true);
    for (double p : {1.0, 1.5, 2.0, 4.0}) {
      VerifyReport r = refined_doob(u, *f, p, t);
      CHECK(r.pass);
      if (p >= 2) CHECK(r.flag == HypothesisFlag::NotApplicable);
    }
  }
  // Diagonal classical case: the classical constant p already suffices.
  for (int t = 0; t < 20; ++t) {
    FiltrationPtr f = share(families::rademacher(3));
    std::vector<Operator> u = random_psd_sequence(f, rng, true);
    VerifyReport r = refined_doob(u, *f, 4.0, t);
    CHECK(r.lhs <= 4.0 * r.rhs / r.constant);
  }
}

TEST_CASE("invariance under unitary conjugation") {
  Rng rng(21);
  for (int t = 0; t < 5; ++t) {
    FiltrationPtr f = share(families::rademacher_full(2, 3));
    Martingale x = random_martingale(f, rng);
    const Matrix u = random_unitary(3, rng);
    Martingale xu = martingale_from_final(f, conjugate(x.final_value(), u));
    BGReport a = verify_bg(x, 4.0), b = verify_bg(xu, 4.0);
    CHECK(b.upper.margin == doctest::Approx(a.upper.margin).epsilon(1e-8));
    CHECK(b.lower.margin == doctest::Approx(a.lower.margin).epsilon(1e-8));
    std::vector<double> alt{1, -1, 1};
    CHECK(verify_transform(xu, alt, 3.0).margin ==
          doctest::Approx(verify_transform(x, alt, 3.0).margin).epsilon(1e-8));
    std::vector<Operator> w = random_psd_sequence(f, rng, true), wu;
    for (const auto& a0 : w) wu.push_back(conjugate(a0, u));
    CHECK(verify_dual_doob(wu, f, 2.0).main.margin ==
          doctest::Approx(verify_dual_doob(w, f, 2.0).main.margin).epsilon(1e-8));
    CHECK(refined_doob(wu, *f, 4.0).margin == doctest::Approx(refined_doob(w, *f, 4.0).margin).epsilon(1e-8));
  }
}
