#include "cuculescu.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "errors.hpp"

namespace ncgl {

bool CuculescuDefects::ok() const {
  return adapted <= 1e-9 && decreasing <= 1e-9 && commuting <= 1e-8 && bounded <= 1e-8;
}

void CuculescuDefects::merge(const CuculescuDefects& o) {
  adapted = std::max(adapted, o.adapted);
  decreasing = std::max(decreasing, o.decreasing);
  commuting = std::max(commuting, o.commuting);
  bounded = std::max(bounded, o.bounded);
  snap_drift = std::max(snap_drift, o.snap_drift);
}

namespace {

double min_eig(const Matrix& m) {
  if (m.rows() == 0) return 0;
  Matrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// Recursion R_n = R_{n-1} I_{(-inf, threshold)}(R_{n-1} (s y_n) R_{n-1}).
CuculescuSeq run(const Martingale& y, double s, double threshold, double level) {
  const auto& alg = y.filtration->algebra();
  for (const auto& v : y.values) require_hermitian(v, "Cuculescu recursion");
  CuculescuSeq seq;
  seq.level = level;
  seq.proj.reserve(y.values.size() + 1);
  seq.proj.push_back(Projection::identity(alg));
  const std::size_t nb = alg->num_blocks();
  std::vector<Matrix> A(nb);
  std::vector<Eigen::SelfAdjointEigenSolver<Matrix>> es(nb);
  for (int n = 0; n <= y.N(); ++n) {
    const Operator& prev = seq.proj.back().op();
    const Operator& yn = y.values[n];
    double norm = 0;
    for (std::size_t i = 0; i < nb; ++i) {
      const Matrix& r = prev.block(i);
      Matrix a = s * (r * yn.block(i) * r);
      A[i] = 0.5 * (a + a.adjoint());
      es[i].compute(A[i]);
      norm = std::max(norm, es[i].eigenvalues().cwiseAbs().maxCoeff());
    }
    const double tol = spectral_tolerance(norm);
    const Interval below = Interval::below(threshold);
    std::vector<Matrix> blocks(nb);
    for (std::size_t i = 0; i < nb; ++i) {
      const Index d = alg->dim(i);
      const auto& vals = es[i].eigenvalues();
      std::vector<Index> keep;
      for (Index j = 0; j < d; ++j)
        if (below.contains(vals[j], tol)) keep.push_back(j);
      if (static_cast<Index>(keep.size()) == d) {
        blocks[i] = prev.block(i);
        continue;
      }
      Matrix v(d, static_cast<Index>(keep.size()));
      for (std::size_t j = 0; j < keep.size(); ++j) v.col(static_cast<Index>(j)) = es[i].eigenvectors().col(keep[j]);
      const Matrix e = v * v.adjoint();
      Matrix raw = prev.block(i) * e;
      raw = 0.5 * (raw + raw.adjoint()).eval();
      Eigen::SelfAdjointEigenSolver<Matrix> snap(raw);
      Matrix r = Matrix::Zero(d, d);
      for (Index j = 0; j < d; ++j) {
        const double lam = snap.eigenvalues()[j];
        seq.defects.snap_drift = std::max(seq.defects.snap_drift, std::min(std::abs(lam), std::abs(lam - 1.0)));
        if (lam > 0.5) r.noalias() += snap.eigenvectors().col(j) * snap.eigenvectors().col(j).adjoint();
      }
      blocks[i] = std::move(r);
    }
    if (seq.defects.snap_drift > 1e-6) {
      std::ostringstream msg;
      msg << "Cuculescu recursion: projection drift " << seq.defects.snap_drift << " at step " << n;
      fail(ErrorCode::Instability, msg.str());
    }
    Operator rn(alg, std::move(blocks));
    rn.mark_hermitian();
    // Structural properties of the new projection.
    const double scale_ref = 1.0 + norm;
    for (std::size_t i = 0; i < nb; ++i) {
      const Matrix& r = rn.block(i);
      const Matrix comm = r * A[i] - A[i] * r;
      if (comm.size() > 0)
        seq.defects.commuting = std::max(seq.defects.commuting, comm.cwiseAbs().maxCoeff() / scale_ref);
      seq.defects.decreasing = std::max(seq.defects.decreasing, -min_eig(prev.block(i) - r));
      const Matrix ryr = s * (r * yn.block(i) * r);
      seq.defects.bounded = std::max(seq.defects.bounded, -min_eig(threshold * r - ryr) / scale_ref);
    }
    seq.defects.adapted = std::max(seq.defects.adapted, max_diff(y.filtration->cond_exp(n, rn), rn));
    seq.proj.push_back(Projection::trusted(std::move(rn)));
  }
  return seq;
}

bool is_identity(const Matrix& m) {
  for (Index q = 0; q < m.cols(); ++q)
    for (Index p = 0; p < m.rows(); ++p)
      if (m(p, q) != (p == q ? cplx(1.0) : cplx(0.0))) return false;
  return true;
}

}  // namespace

CuculescuSeq cuculescu_R(const Martingale& y, double level) {
  require(level > 0 && std::isfinite(level), ErrorCode::Domain, "Cuculescu level must be positive");
  return run(y, 1.0 / level, 1.0, level);
}

CuculescuSeq cuculescu_Q(const Martingale& y, double beta) {
  require(beta > 1 && std::isfinite(beta), ErrorCode::Domain, "Q sequence needs beta > 1");
  return run(y, 1.0, beta, beta);
}

const Projection& CorrectedSeq::at(int n, int k) const {
  require(k >= k_min, ErrorCode::Domain, "corrected projection below k_min");
  const int kk = std::min(k, k_top);
  return P.at(static_cast<std::size_t>(kk - k_min)).at(static_cast<std::size_t>(n));
}

CuculescuDefects CorrectedSeq::defects() const {
  CuculescuDefects d;
  for (const auto& r : R) d.merge(r.defects);
  return d;
}

namespace {
double max_norm_of(const Martingale& y) {
  double m = 0;
  for (const auto& v : y.values) m = std::max(m, operator_norm(v));
  return m;
}

// Meet of e with the larger corrected projection f. Blocks where one side is
// the identity are copied exactly, so commuting diagonal data is reproduced
// exactly. Otherwise the meet is computed inside an orthonormal basis V of
// range(f), as the near-kernel of V* (I - e) V, which keeps the result
// nested in f to rounding.
Projection meet(const Projection& e, const Projection& f) {
  const auto& alg = e.op().algebra_ptr();
  std::vector<Matrix> blocks(alg->num_blocks());
  for (std::size_t i = 0; i < alg->num_blocks(); ++i) {
    const Matrix& eb = e.op().block(i);
    const Matrix& fb = f.op().block(i);
    if (is_identity(eb)) {
      blocks[i] = fb;
      continue;
    }
    if (is_identity(fb)) {
      blocks[i] = eb;
      continue;
    }
    const Index d = alg->dim(i);
    Eigen::SelfAdjointEigenSolver<Matrix> fs(0.5 * (fb + fb.adjoint()));
    Index r = 0;
    for (Index j = 0; j < d; ++j)
      if (fs.eigenvalues()[j] > 0.5) ++r;
    if (r == 0) {
      blocks[i] = Matrix::Zero(d, d);
      continue;
    }
    const Matrix V = fs.eigenvectors().rightCols(r);
    Matrix c = V.adjoint() * (Matrix::Identity(d, d) - eb) * V;
    c = 0.5 * (c + c.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> cs(c);
    Matrix p = Matrix::Zero(d, d);
    for (Index j = 0; j < r; ++j) {
      if (cs.eigenvalues()[j] >= 1e-8) break;
      const Eigen::VectorXcd w = V * cs.eigenvectors().col(j);
      p.noalias() += w * w.adjoint();
    }
    blocks[i] = std::move(p);
  }
  return Projection::trusted(Operator(alg, std::move(blocks), true));
}
}  // namespace

int corrected_k_min(double max_norm, double B) {
  require(B > 1, ErrorCode::Domain, "corrected projections need B > 1");
  const double thr = 1e-8 * (1.0 + max_norm);
  int k = static_cast<int>(std::floor(std::log(thr) / std::log(B)));
  while (std::pow(B, k + 1) <= thr) ++k;
  while (std::pow(B, k) > thr) --k;
  return k;
}

int corrected_k_top(double max_norm, double B) {
  require(B > 1, ErrorCode::Domain, "corrected projections need B > 1");
  const int kmin = corrected_k_min(max_norm, B);
  if (max_norm <= 0) return kmin;
  const int k = static_cast<int>(std::ceil(std::log(max_norm) / std::log(B))) + 1;
  return std::max(k, kmin);
}

CorrectedSeq corrected_P(const Martingale& y, double B) {
  require(B > 1 && std::isfinite(B), ErrorCode::Domain, "corrected projections need B > 1");
  const double M = max_norm_of(y);
  CorrectedSeq c;
  c.base = B;
  c.k_min = corrected_k_min(M, B);
  c.k_top = corrected_k_top(M, B);
  const int levels = c.k_top - c.k_min + 1;
  c.R.reserve(levels);
  for (int k = c.k_min; k <= c.k_top; ++k) c.R.push_back(cuculescu_R(y, std::pow(B, k)));
  c.P.assign(levels, {});
  const int N = y.N();
  auto& top = c.P[levels - 1];
  for (int n = 0; n <= N; ++n) top.push_back(c.R[levels - 1].R(n));
  for (int idx = levels - 2; idx >= 0; --idx) {
    auto& row = c.P[idx];
    row.reserve(N + 1);
    for (int n = 0; n <= N; ++n) row.push_back(meet(c.R[idx].R(n), c.P[idx + 1][n]));
  }
  return c;
}

double corrected_monotonicity_defect(const CorrectedSeq& c) {
  double worst = 0;
  for (int k = c.k_min; k <= c.k_top; ++k) {
    for (int n = 0; n <= c.N(); ++n) {
      const Operator& p = c.at(n, k).op();
      if (n > 0) worst = std::max(worst, -min_eigenvalue(c.at(n - 1, k).op() - p));
      if (k < c.k_top) worst = std::max(worst, -min_eigenvalue(c.at(n, k + 1).op() - p));
    }
  }
  return worst;
}

Martingale scale(const Martingale& y, double s) {
  Martingale out{y.filtration, {}};
  out.values.reserve(y.values.size());
  for (const auto& v : y.values) out.values.push_back(s * v);
  return out;
}

Martingale negate(const Martingale& y) { return scale(y, -1.0); }

WeakMax weak_max(const Martingale& y, double B, int sign) {
  require(sign == 1 || sign == -1, ErrorCode::Domain, "weak_max sign must be +1 or -1");
  CorrectedSeq c = corrected_P(sign > 0 ? y : negate(y), B);
  const int N = c.N();
  Operator a = Operator::zero(y.filtration->algebra());
  for (int k = c.k_min; k < c.k_top; ++k) {
    a += std::pow(B, k) * (c.at(N, k + 1).op() - c.at(N, k).op());
  }
  a.mark_hermitian();
  Projection residual = c.at(N, c.k_min);
  return WeakMax{std::move(a), std::move(residual), std::move(c)};
}

double fubini_defect(const WeakMax& w, double p) {
  const double q = p - 2.0;
  require(q > 0, ErrorCode::Domain, "summation identity needs p > 2");
  const auto& c = w.seq;
  const double B = c.base;
  const int N = c.N();
  const auto& alg = w.a.algebra_ptr();
  const Operator id = Operator::identity(alg);
  Operator lhs = Operator::zero(alg);
  for (int k = c.k_min; k <= c.k_top; ++k) lhs += std::pow(B, k * q) * (id - c.at(N, k).op());
  lhs += (std::pow(B, c.k_min * q) / (std::pow(B, q) - 1.0)) * (id - c.at(N, c.k_min).op());
  lhs.mark_hermitian();
  Operator rhs = (1.0 / (1.0 - std::pow(B, -q))) * pow_psd(w.a, q);
  const double scale_ref = schatten_norm(rhs, 2);
  const double diff = schatten_norm(lhs - rhs, 2);
  return scale_ref > 0 ? diff / scale_ref : diff;
}

namespace {
double tail_trace(const Spectrum& s, const TracialAlgebra& alg, double t, double tol) {
  const Interval iv = Interval::at_least(t);
  double acc = 0;
  for (std::size_t i = 0; i < s.values.size(); ++i)
    for (Index j = 0; j < s.values[i].size(); ++j)
      if (iv.contains(s.values[i][j], tol)) acc += alg.weight(i);
  return acc;
}
}  // namespace

double distribution_defect(const Martingale& y, const WeakMax& plus, const WeakMax& minus) {
  const auto& alg = y.filtration->algebra();
  Spectrum sy = eigh(y.final_value());
  for (auto& v : sy.values) v = v.cwiseAbs().eval();
  const Spectrum sp = eigh(plus.a);
  const Spectrum sm = eigh(minus.a);
  const double ty = spectral_tolerance(sy.max_abs());
  const double tp = spectral_tolerance(sp.max_abs());
  const double tm = spectral_tolerance(sm.max_abs());
  double worst = -kInf;
  const double B = plus.seq.base;
  for (int k = plus.seq.k_min; k <= plus.seq.k_top; ++k) {
    const double t = std::pow(B, k);
    const double lhs = tail_trace(sy, *alg, t, ty);
    const double rhs = tail_trace(sp, *alg, t, tp) + tail_trace(sm, *alg, t, tm);
    worst = std::max(worst, lhs - rhs);
  }
  return worst;
}

}  // namespace ncgl
