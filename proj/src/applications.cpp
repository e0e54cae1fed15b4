#include "applications.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "errors.hpp"

namespace ncgl {

namespace {

bool is_two(double p) { return p == 2.0; }

Operator sq(const Operator& a) { return (a.adjoint() * a).mark_hermitian(); }

Operator sum(const std::vector<Operator>& v, const AlgebraPtr& alg) {
  Operator acc = Operator::zero(alg);
  for (const auto& x : v) acc += x;
  return acc;
}

// The matrix unit e_{ij} (0-based) of M_D as an operator.
Operator unit(const AlgebraPtr& md, Index i, Index j) {
  const Index D = md->dim(0);
  Matrix e = Matrix::Zero(D, D);
  e(i, j) = 1.0;
  return Operator(md, {e}, i == j);
}

// eps_bit on L^inf(2^depth signs).
Operator sign_operator(const AlgebraPtr& rad, int bit) {
  std::vector<Matrix> blocks;
  for (std::size_t s = 0; s < rad->num_blocks(); ++s) {
    Matrix b(1, 1);
    b(0, 0) = ((s >> bit) & 1U) ? -1.0 : 1.0;
    blocks.push_back(b);
  }
  return Operator(rad, std::move(blocks), true);
}

void require_psd(const Operator& u, const char* what) {
  require_hermitian(u, what);
  const double tol = 1e-10 * (1.0 + u.max_abs());
  require(min_eigenvalue(u.hermitian_part()) >= -tol, ErrorCode::Domain, std::string(what) + ": operator is not PSD");
}

void require_adapted(const Filtration& f, int n, const Operator& a, const char* what) {
  const double tol = 1e-9 * (1.0 + a.max_abs());
  require(max_diff(f.cond_exp(n, a), a) <= tol, ErrorCode::Domain, std::string(what) + ": sequence is not adapted");
}

std::string p_meta(const std::string& base, double p) {
  std::ostringstream os;
  os << base << " p=" << p;
  return os.str();
}

std::string instance_name(const Filtration& f, int N) {
  std::ostringstream os;
  os << f.name() << " N=" << N << " dim=" << f.algebra()->total_dim();
  return os.str();
}

}  // namespace

// ---- Constants.

double bg_upper_constant(double p) {
  require(p >= 2.0, ErrorCode::Domain, "Burkholder-Gundy constants need p >= 2");
  return is_two(p) ? 1.0 : std::sqrt(2.0) * main_constant(p);
}

double bg_lower_constant(double p) {
  require(p >= 2.0, ErrorCode::Domain, "Burkholder-Gundy constants need p >= 2");
  if (is_two(p)) return 1.0;
  return main_constant(p) * std::sqrt(1.0 + std::pow(2.0, 2.0 - 4.0 / p)) *
         std::pow(1.0 + std::pow(2.0, p - 2.0), 1.0 / p);
}

double transform_constant(double p) {
  require(p >= 2.0, ErrorCode::Domain, "transform constant needs p >= 2");
  return is_two(p) ? 1.0 : main_constant(p) * std::sqrt(1.0 + std::pow(2.0, 2.0 - 4.0 / p));
}

double dual_doob_constant(double q) {
  require(q >= 1.0, ErrorCode::Domain, "dual Doob constant needs q >= 1");
  if (q == 1.0) return 1.0;
  const double r = 2.0 * q;
  const double c = std::sqrt(2.0) * main_constant(r) * std::pow(2.0, 1.0 / r);
  return c * c;
}

double stein_constant(double p) {
  require(p >= 2.0, ErrorCode::Domain, "Stein constant needs p >= 2");
  return std::sqrt(dual_doob_constant(p / 2.0));
}

double dominated_constant(double p, double kappa) {
  require(p >= 2.0, ErrorCode::Domain, "dominated constant needs p >= 2");
  require(kappa >= 1.0, ErrorCode::Domain, "dominated constant needs kappa >= 1");
  if (is_two(p)) return 1.0;
  return main_constant(p) * std::sqrt(1.0 + kappa * kappa * std::pow(2.0, 2.0 - 4.0 / p));
}

double positive_tangent_constant(double p, double kappa) {
  require(p >= 1.0, ErrorCode::Domain, "positive tangent constant needs p >= 1");
  if (p >= 2.0) return 1.0 + 2.0 * dominated_constant(p, (1.0 + kappa) / 2.0);
  require(kappa == 1.0, ErrorCode::Domain, "relaxed hypotheses need p >= 2");
  const double r = 2.0 * p;
  const double c = bg_lower_constant(r) * dominated_constant(r) * bg_upper_constant(r);
  return c * c;
}

double refined_doob_constant(double p) {
  require(p >= 1.0, ErrorCode::Domain, "refined Doob constant needs p >= 1");
  if (p < 2.0) return dual_doob_constant(p);
  return (1.0 + 3.0 * positive_tangent_constant(p)) / 2.0;
}

// ---- Burkholder-Gundy.

EmbeddedInstance bg_embed(const Martingale& x, double p) {
  require(x.hermitian(), ErrorCode::Domain, "bg_embed: x must be self-adjoint");
  const Filtration& f = *x.filtration;
  const int N = x.N();
  const Index D = N + 2;
  const AlgebraPtr md = make_algebra(TracialAlgebra::matrix(D));
  std::vector<FactorCE> front(f.levels().size(), ce::Full{});
  FiltrationPtr big = share(f.prepend(*md, front, "bg[" + f.name() + "]"));
  const AlgebraPtr& alg = big->algebra();

  const std::vector<Operator> dx = x.diffs();
  std::vector<Operator> dy, dxt;
  for (int k = 0; k <= N; ++k) {
    dy.push_back(kron(unit(md, 0, k + 1) + unit(md, k + 1, 0), dx[k], alg).mark_hermitian());
    dxt.push_back(kron(unit(md, 0, 0) + unit(md, k + 1, k + 1), dx[k], alg).mark_hermitian());
  }
  const Martingale y = martingale_from_diffs(big, dy);
  Operator acc = Operator::zero(alg);
  for (const auto& d : dxt) acc += abs_pow(d, p);
  double identity_defect = 0, domination_defect = 0;
  Operator S2 = Operator::zero(x.filtration->algebra());
  for (int n = 0; n <= N; ++n) {
    identity_defect = std::max(identity_defect, max_diff(sq(dy[n]), sq(dxt[n])));
    S2 += sq(dx[n]);
    const Operator gap = (sq(y.values[n]) - kron(unit(md, 0, 0), S2.mark_hermitian(), alg)).mark_hermitian();
    domination_defect = std::max(domination_defect, -min_eigenvalue(gap));
  }
  return EmbeddedInstance{big, y, sum(dxt, alg).mark_hermitian(), pow_psd(acc.mark_hermitian(), 1.0 / p), "bg",
                          identity_defect, domination_defect};
}

VerifyReport interp_bound(const Martingale& x, double p) {
  require(p >= 2.0, ErrorCode::Domain, "interp_bound needs p >= 2");
  double acc = 0;
  for (int k = 0; k <= x.N(); ++k) acc += std::pow(schatten_norm(x.diff(k), p), p);
  const double c = std::pow(2.0, 1.0 - 2.0 / p);
  VerifyReport r = make_report("bg-interp", std::pow(acc, 1.0 / p), c * schatten_norm(x.final_value(), p), c,
                               p_meta(instance_name(*x.filtration, x.N()), p));
  return r;
}

BGReport verify_bg(const Martingale& x, double p, bool chain, std::uint64_t seed) {
  require(p >= 2.0, ErrorCode::Domain, "verify_bg needs p >= 2");
  require(x.hermitian(), ErrorCode::Domain, "verify_bg: x must be self-adjoint");
  const std::string meta = p_meta(instance_name(*x.filtration, x.N()), p);
  const Operator S = square_function(x);
  const double nx = schatten_norm(x.final_value(), p);
  const double nS = schatten_norm(S, p);
  BGReport out;
  const double c1 = bg_upper_constant(p);
  const double c2 = bg_lower_constant(p);
  out.upper = make_report("bg-upper", nx, c1 * nS, c1, meta, seed);
  out.lower = make_report("bg-lower", nS, c2 * nx, c2, meta, seed);
  out.interp = interp_bound(x, p);
  out.interp.seed = seed;
  out.upper.flag = check_strong_testing(Triple(S, x, S)).pass ? HypothesisFlag::StrongPass : HypothesisFlag::Unverified;
  EmbeddedInstance e = bg_embed(x, p);
  const bool identities = e.identity_defect <= 1e-10 * (1.0 + x.final_value().max_abs()) &&
                          e.domination_defect <= 1e-9 * (1.0 + x.final_value().max_abs());
  out.lower.flag = identities && check_strong_testing(e.triple()).pass ? HypothesisFlag::StrongPass
                                                                      : HypothesisFlag::Unverified;
  if (chain && p > 2.0) {
    out.chain = verify_moment(e.triple(), p, 1.0 + 1.0 / p, seed);
    out.upper.defects = out.chain->max_plus.defects;
    out.lower.defects = out.chain->max_plus.defects;
  }
  return out;
}

// ---- Transforms.

Martingale transform(const Martingale& x, const std::vector<double>& v) {
  require(static_cast<int>(v.size()) == x.N() + 1, ErrorCode::Structural, "transform: one multiplier per difference");
  for (double c : v) require(std::abs(c) <= 1.0, ErrorCode::Domain, "transform: multipliers must lie in [-1, 1]");
  std::vector<Operator> d = x.diffs();
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = v[k] * d[k];
  return martingale_from_diffs(x.filtration, d);
}

VerifyReport verify_transform(const Martingale& x, const std::vector<double>& v, double p,
                              std::uint64_t seed, int samples) {
  require(p > 1.0, ErrorCode::Domain, "verify_transform needs p > 1");
  const Martingale y = transform(x, v);
  const std::string meta = p_meta(instance_name(*x.filtration, x.N()), p);
  const double nx = schatten_norm(x.final_value(), p);
  if (p >= 2.0) {
    const double c = transform_constant(p);
    VerifyReport r = make_report("transform", schatten_norm(y.final_value(), p), c * nx, c, meta, seed);
    Triple t(x.final_value(), y, diagonal_p_function(x, p));
    r.flag = check_strong_testing(t).pass ? HypothesisFlag::StrongPass : HypothesisFlag::Unverified;
    return r;
  }
  const double pd = p / (p - 1.0);
  const double c = transform_constant(pd);
  const Operator& yN = y.final_value();
  double best = 0;
  auto test = [&](const Operator& w) {
    const double nw = schatten_norm(w, pd);
    if (nw > 0) best = std::max(best, std::abs(trace(yN * w)) / nw);
  };
  test(func_calculus(yN, [p](double t) { return (t < 0 ? -1.0 : 1.0) * std::pow(std::abs(t), p - 1.0); }));
  Rng rng = Rng::stream(seed, 0x7A11);
  for (int s = 0; s < samples; ++s) test(random_hermitian(x.filtration->algebra(), rng));
  VerifyReport r = make_report("transform-dual", best, c * nx, c, meta + " duality", seed);
  r.flag = HypothesisFlag::DualityOnly;
  return r;
}

// ---- Doob and Stein.

EmbeddedInstance doob_embed(const std::vector<Operator>& u, const FiltrationPtr& f) {
  require(!u.empty(), ErrorCode::Domain, "doob_embed: empty sequence");
  const int N = static_cast<int>(u.size()) - 1;
  require(N <= f->N(), ErrorCode::Structural, "doob_embed: more terms than filtration levels");
  for (const auto& x : u) {
    require(x.algebra() == *f->algebra(), ErrorCode::Structural, "doob_embed: foreign algebra");
    require_psd(x, "doob_embed");
  }
  const int depth = N + 1;
  const TracialAlgebra rad_alg = TracialAlgebra::rademacher(depth);
  std::vector<FactorCE> front_rad, front_mat;
  for (int n = 0; n <= f->N(); ++n) {
    front_rad.push_back(ce::RademacherAverage{std::min(n + 1, depth)});
    front_mat.push_back(ce::Full{});
  }
  const Filtration mid = f->prepend(rad_alg, front_rad, "rad[" + f->name() + "]");
  const Index D = N + 2;
  const AlgebraPtr md = make_algebra(TracialAlgebra::matrix(D));
  FiltrationPtr big = share(mid.prepend(*md, front_mat, "doob[" + f->name() + "]"));
  const AlgebraPtr& alg = big->algebra();
  const AlgebraPtr& mid_alg = mid.algebra();
  const AlgebraPtr rad = make_algebra(rad_alg);
  const Operator one = Operator::identity(rad);

  auto lift = [&](const Operator& e, const Operator& s, const Operator& a) {
    return kron(e, kron(s, a, mid_alg), alg);
  };

  Operator usum = sum(u, f->algebra()).mark_hermitian();
  double identity_defect = 0;
  Operator x = lift(unit(md, 0, 0), one, sqrt_psd(usum));
  std::vector<Operator> dy;
  Operator esum = Operator::zero(f->algebra());
  for (int k = 0; k <= f->N(); ++k) {
    if (k > N) {
      dy.push_back(Operator::zero(alg).mark_hermitian());
      continue;
    }
    x += lift(unit(md, k + 1, k + 1), one, sqrt_psd(u[k]));
    const Operator Eu = f->cond_exp(k, u[k]).mark_hermitian();
    esum += Eu;
    const Operator d = lift(unit(md, 0, k + 1) + unit(md, k + 1, 0), sign_operator(rad, k), sqrt_psd(Eu)).mark_hermitian();
    const Operator target = big->cond_exp(k, lift(unit(md, 0, 0) + unit(md, k + 1, k + 1), one, u[k]));
    identity_defect = std::max(identity_defect, max_diff(sq(d), target));
    dy.push_back(d);
  }
  x.mark_hermitian();
  const Martingale y = martingale_from_diffs(big, dy);
  const Operator gap = (sq(y.final_value()) - lift(unit(md, 0, 0), one, esum.mark_hermitian())).mark_hermitian();
  return EmbeddedInstance{big, y, x, x, "doob", identity_defect, -min_eigenvalue(gap)};
}

DoobReport verify_dual_doob(const std::vector<Operator>& u, const FiltrationPtr& f, double q, bool chain,
                            std::uint64_t seed) {
  require(q >= 1.0, ErrorCode::Domain, "verify_dual_doob needs q >= 1");
  require(!u.empty() && static_cast<int>(u.size()) <= f->N() + 1, ErrorCode::Structural,
          "verify_dual_doob: sequence length must not exceed the number of levels");
  for (const auto& x : u) require_psd(x, "verify_dual_doob");
  const AlgebraPtr& alg = f->algebra();
  Operator lhs = Operator::zero(alg);
  for (std::size_t n = 0; n < u.size(); ++n) lhs += f->cond_exp(static_cast<int>(n), u[n]);
  lhs.mark_hermitian();
  const Operator rhs = sum(u, alg).mark_hermitian();
  const double c = dual_doob_constant(q);
  DoobReport out;
  out.main = make_report("dual-doob", schatten_norm(lhs, q), c * schatten_norm(rhs, q), c,
                         p_meta(instance_name(*f, static_cast<int>(u.size()) - 1), q), seed);
  EmbeddedInstance e = doob_embed(u, f);
  const double scale = 1.0 + rhs.max_abs();
  const bool identities = e.identity_defect <= 1e-10 * scale && e.domination_defect <= 1e-9 * scale;
  out.main.flag = identities && check_strong_testing(e.triple()).pass ? HypothesisFlag::StrongPass
                                                                     : HypothesisFlag::Unverified;
  if (chain && q > 1.0) {
    const double r = 2.0 * q;
    out.chain = verify_moment(e.triple(), r, 1.0 + 1.0 / r, seed);
    out.main.defects = out.chain->max_plus.defects;
  }
  return out;
}

VerifyReport verify_stein(const std::vector<Operator>& u, const FiltrationPtr& f, double p, std::uint64_t seed) {
  require(p >= 2.0, ErrorCode::Domain, "verify_stein needs p >= 2 (the case p < 2 is by duality)");
  require(!u.empty() && static_cast<int>(u.size()) <= f->N() + 1, ErrorCode::Structural,
          "verify_stein: sequence length must not exceed the number of levels");
  const AlgebraPtr& alg = f->algebra();
  Operator a = Operator::zero(alg), b = Operator::zero(alg);
  for (std::size_t n = 0; n < u.size(); ++n) {
    a += sq(f->cond_exp(static_cast<int>(n), u[n]));
    b += sq(u[n]);
  }
  const double c = stein_constant(p);
  VerifyReport r = make_report("stein", schatten_norm(sqrt_psd(a.mark_hermitian()), p),
                               c * schatten_norm(sqrt_psd(b.mark_hermitian()), p), c,
                               p_meta(instance_name(*f, static_cast<int>(u.size()) - 1), p), seed);
  return r;
}

// ---- Tangent sequences.

TangentCheck check_tangent(const std::vector<Operator>& a, const std::vector<Operator>& b, const Filtration& f) {
  require(a.size() == b.size(), ErrorCode::Structural, "check_tangent: sequences differ in length");
  require(static_cast<int>(a.size()) <= f.N() + 1, ErrorCode::Structural, "check_tangent: too many terms");
  const AlgebraPtr& alg = f.algebra();
  Index dmax = 1;
  for (Index d : alg->dims()) dmax = std::max(dmax, d);
  TangentCheck out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const int n = static_cast<int>(i);
    require_hermitian(a[i], "check_tangent");
    require_hermitian(b[i], "check_tangent");
    require_adapted(f, n, a[i], "check_tangent");
    require_adapted(f, n, b[i], "check_tangent");
    const Spectrum sa = eigh(a[i]);
    const Spectrum sb = eigh(b[i]);
    const double norm = std::max(sa.max_abs(), sb.max_abs());
    std::vector<double> all;
    for (const auto* s : {&sa, &sb})
      for (const auto& v : s->values) all.insert(all.end(), v.data(), v.data() + v.size());
    std::sort(all.begin(), all.end());
    const double ctol = cluster_tolerance(norm);
    const double stol = spectral_tolerance(norm);
    std::size_t start = 0, clusters = 0;
    while (start < all.size()) {
      ++clusters;
      std::size_t end = start + 1;
      while (end < all.size() && all[end] - all[end - 1] <= ctol) ++end;
      const Interval iv = Interval::closed(all[start], all[end - 1]);
      const Operator ca = f.cond_exp(n - 1, spectral_projection(sa, alg, iv, stol).op());
      const Operator cb = f.cond_exp(n - 1, spectral_projection(sb, alg, iv, stol).op());
      out.max_deviation = std::max(out.max_deviation, max_diff(ca, cb));
      start = end;
    }
    Operator pa = Operator::identity(alg), pb = Operator::identity(alg);
    // Moments beyond the number of distinct eigenvalues add nothing.
    const Index moments = std::min<Index>(dmax, static_cast<Index>(clusters));
    for (Index m = 0; m < moments; ++m) {
      const double ref = std::pow(1.0 + norm, static_cast<double>(m));
      out.moment_deviation = std::max(out.moment_deviation, max_diff(f.cond_exp(n - 1, pa), f.cond_exp(n - 1, pb)) / ref);
      pa = pa * a[i];
      pb = pb * b[i];
    }
  }
  out.tangent = out.max_deviation <= 1e-8;
  return out;
}

CounterexampleReport tangent_counterexample(int N, double p) {
  require(N >= 1 && N <= 13, ErrorCode::Domain, "tangent_counterexample: need 1 <= N <= 13");
  require(N % 2 == 1, ErrorCode::Domain, "tangent_counterexample: N must be odd");
  require(p >= 1.0, ErrorCode::Domain, "tangent_counterexample: need p >= 1");
  FiltrationPtr f = share(families::rademacher_full(N, N + 1));
  const AlgebraPtr& alg = f->algebra();
  std::vector<Operator> dx, dy;
  dx.push_back(Operator::zero(alg).mark_hermitian());
  dy.push_back(Operator::zero(alg).mark_hermitian());
  for (int n = 1; n <= N; ++n) {
    std::vector<Matrix> bx, by;
    for (std::size_t s = 0; s < alg->num_blocks(); ++s) {
      const double eps = ((s >> (n - 1)) & 1U) ? -1.0 : 1.0;
      Matrix mx = Matrix::Zero(N + 1, N + 1), my = Matrix::Zero(N + 1, N + 1);
      mx(0, n) = mx(n, 0) = eps;
      my(0, 0) = my(n, n) = eps;
      bx.push_back(std::move(mx));
      by.push_back(std::move(my));
    }
    dx.emplace_back(alg, std::move(bx), true);
    dy.emplace_back(alg, std::move(by), true);
  }
  CounterexampleReport r;
  r.N = N;
  r.p = p;
  r.x = martingale_from_diffs(f, dx);
  r.y = martingale_from_diffs(f, dy);
  const Operator& xN = r.x.final_value();
  const Operator& yN = r.y.final_value();
  r.weak_lhs = spectral_projection(abs(yN), Interval::at_least(1.0)).rank_trace();
  r.tau_abs_x = real_trace(abs(xN));
  r.ratio = r.weak_lhs / r.tau_abs_x;
  r.norm_y = schatten_norm(yN, p);
  r.norm_x = schatten_norm(xN, p);
  r.norm_ratio = r.norm_y / r.norm_x;
  r.lower_ratio = std::pow(N + 1.0, 1.0 / p) / (std::pow(2.0, 1.0 / p) * std::sqrt(static_cast<double>(N)));
  r.tangency = check_tangent(dx, dy, *f);
  return r;
}

VerifyReport verify_dominated(const Martingale& x, const Martingale& y, double p, double kappa, std::uint64_t seed) {
  require(p >= 2.0, ErrorCode::Domain, "verify_dominated needs p >= 2 (the bound fails for p < 2)");
  require(kappa >= 1.0, ErrorCode::Domain, "verify_dominated needs kappa >= 1");
  require(x.filtration == y.filtration && x.N() == y.N(), ErrorCode::Structural,
          "verify_dominated: martingales on different filtrations");
  require(x.hermitian() && y.hermitian(), ErrorCode::Domain, "verify_dominated: martingales must be self-adjoint");
  const Filtration& f = *x.filtration;
  bool hyp = true;
  for (int n = 0; n <= x.N(); ++n) {
    const Operator dx = x.diff(n), dy = y.diff(n);
    const Operator gap = f.cond_exp(n - 1, sq(dx) - sq(dy)).mark_hermitian();
    if (min_eigenvalue(gap) < -1e-9 * (1.0 + sq(dx).max_abs())) hyp = false;
    const double nx = schatten_norm(dx, p), ny = schatten_norm(dy, p);
    if (ny > kappa * nx * (1.0 + 1e-10) + 1e-12) hyp = false;
  }
  const double c = dominated_constant(p, kappa);
  std::ostringstream meta;
  meta << instance_name(f, x.N()) << " p=" << p << " kappa=" << kappa;
  VerifyReport r = make_report("dominated", schatten_norm(y.final_value(), p), c * schatten_norm(x.final_value(), p), c,
                               meta.str(), seed);
  if (!hyp) {
    r.flag = HypothesisFlag::Unverified;
  } else {
    r.flag = testing_flag(Triple(x.final_value(), y, diagonal_p_function(y, p)), seed);
  }
  return r;
}

VerifyReport verify_positive_tangent(const std::vector<Operator>& u, const std::vector<Operator>& v,
                                     const Filtration& f, double p, bool relaxed, double kappa,
                                     std::uint64_t seed) {
  require(p >= 1.0, ErrorCode::Domain, "verify_positive_tangent needs p >= 1");
  require(!relaxed || p >= 2.0, ErrorCode::Domain, "relaxed hypotheses need p >= 2");
  require(u.size() == v.size() && !u.empty(), ErrorCode::Structural, "verify_positive_tangent: length mismatch");
  for (std::size_t n = 0; n < u.size(); ++n) {
    require_psd(u[n], "verify_positive_tangent");
    require_adapted(f, static_cast<int>(n), u[n], "verify_positive_tangent");
    require_adapted(f, static_cast<int>(n), v[n], "verify_positive_tangent");
    if (!relaxed) require_psd(v[n], "verify_positive_tangent");
  }
  bool hyp = true;
  if (relaxed) {
    for (std::size_t n = 0; n < u.size(); ++n) {
      const int m = static_cast<int>(n) - 1;
      const double scale = 1.0 + sq(u[n]).max_abs();
      if (max_diff(f.cond_exp(m, u[n]), f.cond_exp(m, v[n])) > 1e-9 * scale) hyp = false;
      if (min_eigenvalue(f.cond_exp(m, sq(u[n]) - sq(v[n])).mark_hermitian()) < -1e-9 * scale) hyp = false;
      if (schatten_norm(v[n], p) > kappa * schatten_norm(u[n], p) * (1.0 + 1e-10) + 1e-12) hyp = false;
    }
  } else {
    hyp = check_tangent(u, v, f).tangent;
  }
  const AlgebraPtr& alg = f.algebra();
  const double c = positive_tangent_constant(p, relaxed ? kappa : 1.0);
  std::ostringstream meta;
  meta << instance_name(f, static_cast<int>(u.size()) - 1) << " p=" << p << (relaxed ? " relaxed" : " tangent");
  VerifyReport r = make_report("positive-tangent", schatten_norm(sum(v, alg).mark_hermitian(), p),
                               c * schatten_norm(sum(u, alg).mark_hermitian(), p), c, meta.str(), seed);
  r.flag = hyp ? HypothesisFlag::NotApplicable : HypothesisFlag::Unverified;
  return r;
}

VerifyReport refined_doob(const std::vector<Operator>& u, const Filtration& f, double p, std::uint64_t seed) {
  require(p >= 1.0, ErrorCode::Domain, "refined_doob needs p >= 1");
  require(!u.empty() && static_cast<int>(u.size()) <= f.N() + 1, ErrorCode::Structural,
          "refined_doob: sequence length must not exceed the number of levels");
  const AlgebraPtr& alg = f.algebra();
  Operator lhs = Operator::zero(alg);
  bool hyp = true;
  for (std::size_t n = 0; n < u.size(); ++n) {
    require_psd(u[n], "refined_doob");
    require_adapted(f, static_cast<int>(n), u[n], "refined_doob");
    const int m = static_cast<int>(n) - 1;
    const Operator e = f.cond_exp(m, u[n]).mark_hermitian();
    lhs += e;
    if (p >= 2.0) {
      // v_n = 2 E_{n-1}(u_n) - u_n: same conditional mean and second moment.
      const Operator v = (2.0 * e - u[n]).mark_hermitian();
      const double scale = 1.0 + sq(u[n]).max_abs();
      if (max_diff(f.cond_exp(m, v), e) > 1e-9 * scale) hyp = false;
      if (max_diff(f.cond_exp(m, sq(v)), f.cond_exp(m, sq(u[n]))) > 1e-9 * scale) hyp = false;
      if (schatten_norm(v, p) > 3.0 * schatten_norm(u[n], p) * (1.0 + 1e-10) + 1e-12) hyp = false;
    }
  }
  const double c = refined_doob_constant(p);
  VerifyReport r = make_report("refined-doob", schatten_norm(lhs.mark_hermitian(), p),
                               c * schatten_norm(sum(u, alg).mark_hermitian(), p), c,
                               p_meta(instance_name(f, static_cast<int>(u.size()) - 1), p), seed);
  r.flag = hyp ? HypothesisFlag::NotApplicable : HypothesisFlag::Unverified;
  return r;
}

// ---- Generators.

namespace {
Matrix random_hermitian_matrix(Index d, Rng& rng) {
  Matrix g(d, d);
  for (Index q = 0; q < d; ++q)
    for (Index p = 0; p < d; ++p) g(p, q) = rng.complex_gaussian();
  return 0.5 * (g + g.adjoint());
}
}  // namespace

MartingalePair sign_tangent_pair(Rng& rng, int depth, Index m) {
  require(depth >= 1, ErrorCode::Domain, "sign_tangent_pair needs depth >= 1");
  FiltrationPtr f = share(families::rademacher_full(depth, m));
  const AlgebraPtr& alg = f->algebra();
  const std::size_t nb = alg->num_blocks();
  const Matrix h0 = random_hermitian_matrix(m, rng);
  std::vector<Operator> dx{Operator(alg, std::vector<Matrix>(nb, h0), true)};
  std::vector<Operator> dy{dx.front()};
  for (int n = 1; n <= depth; ++n) {
    const std::size_t patterns = std::size_t{1} << (n - 1);
    std::vector<Matrix> h;
    std::vector<double> g;
    for (std::size_t q = 0; q < patterns; ++q) {
      h.push_back(random_hermitian_matrix(m, rng) / std::sqrt(static_cast<double>(n)));
      g.push_back(rng.sign());
    }
    std::vector<Matrix> bx, by;
    for (std::size_t s = 0; s < nb; ++s) {
      const std::size_t q = s & (patterns - 1);
      const double eps = ((s >> (n - 1)) & 1U) ? -1.0 : 1.0;
      bx.push_back(eps * h[q]);
      by.push_back(g[q] * eps * h[q]);
    }
    dx.emplace_back(alg, std::move(bx), true);
    dy.emplace_back(alg, std::move(by), true);
  }
  return {martingale_from_diffs(f, dx), martingale_from_diffs(f, dy)};
}

MartingalePair corner_tangent_pair(Rng& rng, Index N, std::vector<double> gamma) {
  require(N >= 1, ErrorCode::Domain, "corner_tangent_pair needs N >= 1");
  FiltrationPtr f = share(families::corner(N));
  if (gamma.empty()) {
    gamma.push_back(1.0);
    for (Index k = 1; k <= N; ++k) gamma.push_back(rng.sign());
  }
  require(static_cast<Index>(gamma.size()) == N + 1, ErrorCode::Structural, "corner_tangent_pair: need N + 1 signs");
  Martingale a = martingale_from_final(f, random_hermitian(f->algebra(), rng));
  std::vector<Operator> db;
  for (Index k = 0; k <= N; ++k) {
    Operator d = a.diff(static_cast<int>(k));
    if (k >= 1) {
      Matrix& b = d.mutable_block(0);
      for (Index i = 0; i + 1 < k; ++i) {
        b(i, k - 1) *= gamma[k];
        b(k - 1, i) *= gamma[k];
      }
      d.mark_hermitian();
    }
    db.push_back(std::move(d));
  }
  return {a, martingale_from_diffs(f, db)};
}

PositivePair diagonal_positive_pair(Rng& rng, int depth, Index m) {
  require(depth >= 1, ErrorCode::Domain, "diagonal_positive_pair needs depth >= 1");
  FiltrationPtr f = share(families::rademacher_full(depth, m));
  const AlgebraPtr& alg = f->algebra();
  const std::size_t nb = alg->num_blocks();
  PositivePair out{f, {}, {}};
  Matrix u0 = Matrix::Zero(m, m);
  for (Index j = 0; j < m; ++j) u0(j, j) = rng.uniform();
  out.u.emplace_back(alg, std::vector<Matrix>(nb, u0), true);
  out.v.push_back(out.u.front());
  for (int n = 1; n <= depth; ++n) {
    const std::size_t patterns = std::size_t{1} << (n - 1);
    std::vector<double> c(patterns * m), d(patterns * m);
    for (std::size_t i = 0; i < c.size(); ++i) {
      const double r = rng.uniform();
      c[i] = r * r * r * 4.0;
      d[i] = rng.uniform(-c[i], c[i]);
    }
    std::vector<Matrix> bu, bv;
    for (std::size_t s = 0; s < nb; ++s) {
      const std::size_t q = s & (patterns - 1);
      const double eps = ((s >> (n - 1)) & 1U) ? -1.0 : 1.0;
      Matrix mu = Matrix::Zero(m, m), mv = Matrix::Zero(m, m);
      for (Index j = 0; j < m; ++j) {
        const std::size_t i = q * static_cast<std::size_t>(m) + static_cast<std::size_t>(j);
        mu(j, j) = c[i] + d[i] * eps;
        mv(j, j) = c[i] - d[i] * eps;
      }
      bu.push_back(std::move(mu));
      bv.push_back(std::move(mv));
    }
    out.u.emplace_back(alg, std::move(bu), true);
    out.v.emplace_back(alg, std::move(bv), true);
  }
  return out;
}

PositivePair arrow_positive_pair(Rng& rng, Index N) {
  require(N >= 1, ErrorCode::Domain, "arrow_positive_pair needs N >= 1");
  FiltrationPtr f = share(families::corner(N));
  const AlgebraPtr& alg = f->algebra();
  PositivePair out{f, {}, {}};
  const double b0 = rng.uniform();
  out.u.push_back(Operator::scalar(alg, b0).mark_hermitian());
  out.v.push_back(out.u.front());
  for (Index k = 1; k <= N; ++k) {
    Matrix g(k, k);
    for (Index q = 0; q < k; ++q)
      for (Index p = 0; p < k; ++p) g(p, q) = rng.complex_gaussian();
    Matrix u = rng.uniform() * Matrix::Identity(N, N);
    u.topLeftCorner(k, k) = g * g.adjoint() / static_cast<double>(k);
    Matrix v = u;
    v.row(k - 1) *= -1.0;
    v.col(k - 1) *= -1.0;
    out.u.emplace_back(alg, std::vector<Matrix>{u}, true);
    out.v.emplace_back(alg, std::vector<Matrix>{v}, true);
  }
  return out;
}

}  // namespace ncgl
