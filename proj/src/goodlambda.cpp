#include "goodlambda.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "errors.hpp"

namespace ncgl {

Triple::Triple(Operator x_N, Martingale y_, Operator z_N)
    : x(std::move(x_N)), y(std::move(y_)), z(std::move(z_N)) {
  require(y.filtration != nullptr && !y.values.empty(), ErrorCode::Structural, "triple: empty martingale");
  const auto& alg = *y.filtration->algebra();
  require(x.algebra() == alg && z.algebra() == alg, ErrorCode::Structural,
          "triple: x, y, z must share one algebra");
  require_hermitian(x, "triple x_N");
  require_hermitian(z, "triple z_N");
  require(y.hermitian(), ErrorCode::Domain, "triple: y must be self-adjoint");
}

Triple scale(const Triple& t, double mu) { return Triple(mu * t.x, scale(t.y, mu), mu * t.z); }

namespace {

Operator sq(const Operator& a) { return (a * a).mark_hermitian(); }

std::string describe_instance(const Triple& t) {
  std::ostringstream os;
  os << t.y.filtration->name() << " N=" << t.y.N() << " dim=" << t.y.filtration->algebra()->total_dim();
  return os.str();
}

struct Prepared {
  CuculescuSeq R;
  Operator I_minus_RN;
  Operator xz;  // x^2 + z^2
};

Prepared prepare(const Triple& t, double level) {
  Prepared p{cuculescu_R(t.y, level), Operator::zero(t.y.filtration->algebra()), sq(t.x) + sq(t.z)};
  p.I_minus_RN = p.R.final_projection().complement().op();
  return p;
}

}  // namespace

TestingResult check_testing(const Triple& t, std::uint64_t seed, int samples) {
  const Filtration& f = *t.y.filtration;
  const auto& alg = f.algebra();
  const int N = t.y.N();
  CuculescuSeq R = cuculescu_R(t.y, 1.0);
  CuculescuSeq Q = cuculescu_Q(t.y, 2.0);
  const std::vector<Operator> dy = t.y.diffs();

  TestingResult res;
  res.defects = R.defects;
  res.defects.merge(Q.defects);

  const Operator x2 = sq(t.x);
  double lhs = 0;
  for (int n = 0; n <= N; ++n) {
    const Operator D = R.R(n - 1).op() - R.R(n).op();
    if (D.max_abs() == 0.0) continue;
    for (int k = n + 1; k <= N; ++k)
      lhs += real_trace(D * dy[k] * R.R(n - 1).op() * dy[k] * D);
  }
  const double rhs_i = real_trace(R.final_projection().complement().op() * x2);
  res.slack_i = rhs_i - lhs;

  const Operator z2 = sq(t.z);
  res.slack_ii = kInf;
  for (int k = 0; k <= N; ++k) {
    const Operator W = z2 - sq(dy[k]);
    auto test = [&](const Operator& P) { res.slack_ii = std::min(res.slack_ii, real_trace(P * W)); };
    test(Operator::identity(alg));
    for (int j = 0; j <= k; ++j) {
      test(R.R(j).op());
      test(Q.R(j).op());
    }
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(k));
    for (int s = 0; s < samples; ++s) {
      const Operator g = f.cond_exp(k, random_hermitian(alg, rng)).mark_hermitian();
      const Spectrum sp = eigh(g);
      const double cut = rng.uniform(sp.min(), sp.max());
      test(spectral_projection(g, Interval::above(cut)).op());
    }
  }
  const double tol_i = report_tolerance(rhs_i);
  const double tol_ii = report_tolerance(real_trace(z2));
  res.pass = res.slack_i >= -tol_i && res.slack_ii >= -tol_ii;
  return res;
}

StrongTestingResult check_strong_testing(const Triple& t) {
  const Filtration& f = *t.y.filtration;
  const int N = t.y.N();
  const std::vector<Operator> dy = t.y.diffs();
  const Operator x2 = sq(t.x);
  const Operator z2 = sq(t.z);
  StrongTestingResult res;
  res.margin_i = kInf;
  res.margin_ii = kInf;
  // tail = sum_{m>k} dy_m^2, built from the top down.
  Operator tail = Operator::zero(f.algebra());
  for (int k = N; k >= 0; --k) {
    Operator a = f.cond_exp(k, x2 - tail).mark_hermitian();
    res.margin_i = std::min(res.margin_i, min_eigenvalue(a));
    Operator b = (f.cond_exp(k, z2) - sq(dy[k])).mark_hermitian();
    res.margin_ii = std::min(res.margin_ii, min_eigenvalue(b));
    tail += sq(dy[k]);
  }
  res.pass = res.margin_i >= -1e-8 && res.margin_ii >= -1e-8;
  return res;
}

HypothesisFlag testing_flag(const Triple& t, std::uint64_t seed) {
  if (check_strong_testing(t).pass) return HypothesisFlag::StrongPass;
  return check_testing(t, seed).pass ? HypothesisFlag::SampledPass : HypothesisFlag::Unverified;
}

static HypothesisFlag level_flag(const Triple& t, std::uint64_t seed, double level) {
  return level == 1.0 ? testing_flag(t, seed) : testing_flag(scale(t, 1.0 / level), seed);
}

VerifyReport verify_core(const Triple& t, std::uint64_t seed, double level) {
  require(level > 0, ErrorCode::Domain, "verify_core: level must be positive");
  Prepared p = prepare(t, level);
  const auto& alg = t.y.filtration->algebra();
  const Operator ym = t.y.final_value() - Operator::scalar(alg, level);
  const double lhs = real_trace(p.I_minus_RN * ym * ym);
  const double rhs = 2.0 * real_trace(p.I_minus_RN * p.xz);
  VerifyReport r = make_report("goodlambda-core", lhs, rhs, 2.0, describe_instance(t), seed);
  r.flag = level_flag(t, seed, level);
  r.defects = p.R.defects;
  return r;
}

VerifyReport verify_tail(const Triple& t, double beta, std::uint64_t seed, double level) {
  require(beta > 1.0, ErrorCode::Domain, "verify_tail: beta must exceed 1");
  require(level > 0, ErrorCode::Domain, "verify_tail: level must be positive");
  Prepared p = prepare(t, level);
  CuculescuSeq Q = level == 1.0 ? cuculescu_Q(t.y, beta) : cuculescu_R(t.y, beta * level);
  const double c = 4.0 / ((beta - 1.0) * (beta - 1.0));
  const double lhs = level * level * real_trace(Q.final_projection().complement().op());
  const double rhs = c * real_trace(p.I_minus_RN * p.xz);
  std::ostringstream meta;
  meta << describe_instance(t) << " beta=" << beta;
  VerifyReport r = make_report("goodlambda-tail", lhs, rhs, c, meta.str(), seed);
  r.flag = level_flag(t, seed, level);
  r.defects = p.R.defects;
  r.defects.merge(Q.defects);
  return r;
}

VerifyReport verify_good_hom(const Triple& t, const CorrectedSeq& P, int k) {
  require(k >= P.k_min, ErrorCode::Domain, "verify_good_hom: k below the computed range");
  const int N = P.N();
  const double B = P.base;
  const double lhs = real_trace(P.at(N, k + 2).op() - P.at(N, k + 1).op());
  const double c = 4.0 * std::pow(B, -2.0 * k) / ((B - 1.0) * (B - 1.0));
  const double rhs = c * real_trace(P.at(N, k).complement().op() * (sq(t.x) + sq(t.z)));
  std::ostringstream meta;
  meta << describe_instance(t) << " B=" << B << " k=" << k;
  VerifyReport r = make_report("goodlambda-hom", lhs, rhs, c, meta.str());
  r.flag = testing_flag(t);
  r.defects = P.defects();
  return r;
}

double weak_max_constant(double p, double B) {
  require(p > 2.0, ErrorCode::Domain, "weak_max_constant: p must exceed 2");
  require(B > 1.0, ErrorCode::Domain, "weak_max_constant: B must exceed 1");
  return 2.0 * std::pow(B, p / 2.0) / (B - 1.0) / std::sqrt(1.0 - std::pow(B, 2.0 - p));
}

double main_constant(double p) {
  require(p > 2.0, ErrorCode::Domain, "main_constant: p must exceed 2");
  return 12.0 * p / std::sqrt(1.0 - std::pow(1.0 + 1.0 / p, 2.0 - p));
}

MomentConstant moment_constant(double p, double B) {
  const double w = weak_max_constant(p, B);
  const double d = std::pow(2.0 * p * std::pow(B, p - 1.0) * (B - 1.0) / (1.0 - std::pow(B, -p)), 1.0 / p);
  return {d * w, main_constant(p)};
}

MomentReport verify_moment(const Triple& t, double p, double B, std::uint64_t seed) {
  const MomentConstant mc = moment_constant(p, B);
  const double cw = weak_max_constant(p, B);
  const WeakMax plus = weak_max(t.y, B, +1);
  const WeakMax minus = weak_max(t.y, B, -1);
  const double X = std::hypot(schatten_norm(t.x, p), schatten_norm(t.z, p));
  const double yN = schatten_norm(t.y.final_value(), p);

  std::ostringstream os;
  os << describe_instance(t) << " p=" << p << " B=" << B;
  const std::string meta = os.str();
  const HypothesisFlag flag = check_strong_testing(t).pass ? HypothesisFlag::StrongPass : HypothesisFlag::Unverified;
  CuculescuDefects defects = plus.seq.defects();
  defects.merge(minus.seq.defects());

  MomentReport m;
  m.max_plus = make_report("moment-max+", schatten_norm(plus.a, p), cw * X, cw, meta, seed);
  m.max_minus = make_report("moment-max-", schatten_norm(minus.a, p), cw * X, cw, meta, seed);
  m.final_pB = make_report("moment-CpB", yN, mc.C_pB * X, mc.C_pB, meta, seed);
  m.final_main = make_report("moment-main", yN, mc.simplified * X, mc.simplified, meta, seed);
  for (VerifyReport* r : {&m.max_plus, &m.max_minus, &m.final_pB, &m.final_main}) {
    r->flag = flag;
    r->defects = defects;
  }
  m.fubini_plus = fubini_defect(plus, p);
  m.fubini_minus = fubini_defect(minus, p);
  m.distribution = distribution_defect(t.y, plus, minus);
  return m;
}

}  // namespace ncgl
