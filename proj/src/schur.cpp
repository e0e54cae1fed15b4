#include "schur.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>

#include "applications.hpp"
#include "errors.hpp"
#include "filtration.hpp"
#include "rng.hpp"

namespace ncgl {

std::string to_string(PatternKind k) {
  switch (k) {
    case PatternKind::ReversedL: return "reversed-L";
    case PatternKind::Triangular: return "triangular";
    case PatternKind::Diagonal: return "diagonal";
    case PatternKind::Custom: return "custom";
  }
  return "custom";
}

namespace {

void require_bits(const std::vector<int>& v, const char* what) {
  for (int b : v) require(b == 0 || b == 1, ErrorCode::Domain, std::string(what) + ": entries must be 0 or 1");
}

bool has_zero_diagonal(const Matrix& m) {
  for (Index i = 0; i < m.rows(); ++i)
    if (m(i, i) == cplx(0.0)) return true;
  return false;
}

void require_square(const Matrix& a, const char* what) {
  require(a.rows() == a.cols(), ErrorCode::Structural, std::string(what) + ": matrix must be square");
}

// Everything off the diagonal of the pattern, with ones on the diagonal.
Matrix unit_diagonal(const Matrix& m) {
  Matrix u = m;
  u.diagonal().setOnes();
  return u;
}

}  // namespace

Pattern Pattern::reversed_L(std::vector<int> m, std::vector<int> n) {
  require(m.size() == n.size() && !m.empty(), ErrorCode::Structural, "reversed_L: m and n need the same length N >= 1");
  require_bits(m, "reversed_L");
  require_bits(n, "reversed_L");
  const Index N = static_cast<Index>(m.size());
  Pattern p;
  p.kind = PatternKind::ReversedL;
  p.entries = Matrix::Zero(N, N);
  for (Index i = 0; i < N; ++i)
    for (Index j = 0; j < N; ++j) p.entries(i, j) = i == j ? n[i] : m[std::max(i, j)];
  p.m = std::move(m);
  p.n = std::move(n);
  return p;
}

Pattern Pattern::triangular(Index N) {
  require(N >= 1, ErrorCode::Structural, "triangular: N >= 1");
  Pattern p;
  p.kind = PatternKind::Triangular;
  p.entries = Matrix::Zero(N, N);
  for (Index j = 0; j < N; ++j)
    for (Index i = 0; i <= j; ++i) p.entries(i, j) = 1.0;
  return p;
}

Pattern Pattern::diagonal(std::vector<int> d) {
  require(!d.empty(), ErrorCode::Structural, "diagonal: N >= 1");
  require_bits(d, "diagonal");
  Pattern p;
  p.kind = PatternKind::Diagonal;
  p.entries = Matrix::Zero(static_cast<Index>(d.size()), static_cast<Index>(d.size()));
  for (std::size_t i = 0; i < d.size(); ++i) p.entries(static_cast<Index>(i), static_cast<Index>(i)) = d[i];
  p.n = std::move(d);
  return p;
}

Pattern Pattern::custom(Matrix entries) {
  require_square(entries, "custom pattern");
  Pattern p;
  p.kind = PatternKind::Custom;
  p.entries = std::move(entries);
  return p;
}

Pattern Pattern::interlace_pattern(Index N) {
  std::vector<int> bits(static_cast<std::size_t>(2 * N));
  for (std::size_t k = 0; k < bits.size(); ++k) bits[k] = k % 2 == 1;  // 1-based index k + 1 even
  return reversed_L(bits, bits);
}

Pattern Pattern::truncate(Index K) const {
  require(K >= 1 && K <= size(), ErrorCode::Structural, "truncate: size out of range");
  Pattern p = *this;
  p.entries = entries.topLeftCorner(K, K);
  if (!m.empty()) p.m.resize(static_cast<std::size_t>(K));
  if (!n.empty()) p.n.resize(static_cast<std::size_t>(K));
  return p;
}

Matrix schur_multiply(const Matrix& m, const Matrix& a) {
  require(m.rows() == a.rows() && m.cols() == a.cols(), ErrorCode::Structural, "schur_multiply: shape mismatch");
  return m.cwiseProduct(a);
}

Matrix schur_multiply(const Pattern& m, const Matrix& a) { return schur_multiply(m.entries, a); }

Matrix triangular_projection(const Matrix& a) {
  require_square(a, "triangular_projection");
  return a.triangularView<Eigen::Upper>();
}

Matrix interlace_t(const Matrix& a) {
  require_square(a, "interlace_t");
  const Index N = a.rows();
  Matrix t = Matrix::Zero(2 * N, 2 * N);
  for (Index i = 0; i < N; ++i)
    for (Index j = 0; j < N; ++j) t(2 * i, 2 * j + 1) = a(i, j);
  return t;
}

double schatten_norm(const Matrix& a, double p) {
  require(p >= 1.0, ErrorCode::Domain, "schatten_norm: p must be >= 1");
  if (a.size() == 0) return 0.0;
  const RealVector s = Eigen::BDCSVD<Matrix>(a).singularValues();
  const double top = s.maxCoeff();
  if (top == 0.0 || std::isinf(p)) return top;
  return top * std::pow((s / top).array().pow(p).sum(), 1.0 / p);
}

double schur_upper_constant(const Pattern& m, double p, bool self_adjoint) {
  require(p > 1.0 && std::isfinite(p), ErrorCode::Domain, "schur_upper_constant: need 1 < p < inf");
  const double q = std::max(p, p / (p - 1.0));
  const double parts = self_adjoint ? 1.0 : 2.0;
  switch (m.kind) {
    case PatternKind::Diagonal: return 1.0;
    // t(a) is not self-adjoint, so the general bound of the interlacing pattern applies.
    case PatternKind::Triangular: return 2.0 * ((1.0 + dominated_constant(q)) / 2.0 + 1.0);
    case PatternKind::ReversedL:
      return parts * ((1.0 + dominated_constant(q)) / 2.0 + (has_zero_diagonal(m.entries) ? 1.0 : 0.0));
    case PatternKind::Custom: break;
  }
  fail(ErrorCode::Domain, "schur_upper_constant: no bound for custom patterns");
}

namespace {

// Gradient of log ||x||_p, scaled by the largest singular value for stability.
Matrix log_norm_gradient(const Matrix& x, double p) {
  Eigen::BDCSVD<Matrix> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RealVector& s = svd.singularValues();
  const double top = s.size() ? s.maxCoeff() : 0.0;
  if (top == 0.0) return Matrix::Zero(x.rows(), x.cols());
  const RealVector r = s / top;
  const double denom = top * r.array().pow(p).sum();
  const RealVector w = r.array().pow(p - 1.0);
  return svd.matrixU() * w.cast<cplx>().asDiagonal() * svd.matrixV().adjoint() / denom;
}

double ratio(const Matrix& m, const Matrix& a, double p) {
  const double na = schatten_norm(a, p);
  return na == 0.0 ? 0.0 : schatten_norm(schur_multiply(m, a), p) / na;
}

// J_q(x) = U S^{q-1} V*, the duality map of S^q up to normalization.
Matrix duality_map(const Matrix& x, double q) {
  Eigen::BDCSVD<Matrix> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RealVector& s = svd.singularValues();
  const double top = s.size() ? s.maxCoeff() : 0.0;
  if (top == 0.0) return Matrix::Zero(x.rows(), x.cols());
  const RealVector w = (s / top).array().pow(q - 1.0);
  return svd.matrixU() * w.cast<cplx>().asDiagonal() * svd.matrixV().adjoint();
}

NormLowerBound ascend(const Matrix& m, Matrix a, double p, int budget) {
  NormLowerBound out;
  a /= a.norm();
  double best = ratio(m, a, p);
  double step = 0.5;
  const double pd = p / (p - 1.0);
  for (int it = 0; it < budget; ++it) {
    out.iterations = it + 1;
    // Nonlinear power step a <- J_{p'}(m^* J_p(m * a)); fall back to a
    // gradient step when it does not improve the ratio.
    Matrix pw = duality_map(schur_multiply(m.conjugate(), duality_map(schur_multiply(m, a), p)), pd);
    const double pn = pw.norm();
    if (pn > 0) {
      pw /= pn;
      const double r = ratio(m, pw, p);
      if (r > best * (1.0 + 1e-12)) {
        a = std::move(pw);
        best = r;
        continue;
      }
    }
    Matrix g = schur_ratio_gradient(m, a, p);
    const double gn = g.norm();
    if (gn < 1e-14) break;
    g /= gn;
    bool improved = false;
    while (step > 1e-10) {
      Matrix cand = a + step * g;
      cand /= cand.norm();
      const double r = ratio(m, cand, p);
      if (r > best) {
        a = std::move(cand);
        best = r;
        improved = true;
        step = std::min(2.0 * step, 1.0);
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;
  }
  out.value = best;
  out.argmax = std::move(a);
  return out;
}

}  // namespace

Matrix schur_ratio_gradient(const Matrix& m, const Matrix& a, double p) {
  require(p > 1.0 && std::isfinite(p), ErrorCode::Domain, "schur_ratio_gradient: need 1 < p < inf");
  // The adjoint of a |-> m * a for the real inner product is b |-> conj(m) * b.
  return schur_multiply(m.conjugate(), log_norm_gradient(schur_multiply(m, a), p)) - log_norm_gradient(a, p);
}

NormLowerBound schur_norm_lower(const Pattern& m, double p, int budget, std::uint64_t seed, int restarts) {
  require(budget >= 1, ErrorCode::Domain, "schur_norm_lower: budget must be positive");
  require(restarts >= 0, ErrorCode::Config, "schur_norm_lower: restarts must be nonnegative");
  require(p > 1.0 && std::isfinite(p), ErrorCode::Domain, "schur_norm_lower: need 1 < p < inf");
  const Index N = m.size();
  std::vector<Matrix> starts;
  Matrix h(N, N);
  for (Index i = 0; i < N; ++i)
    for (Index j = 0; j < N; ++j) h(i, j) = 1.0 / (static_cast<double>(i - j) + 0.5);
  starts.push_back(h);
  for (int r = 0; r < restarts; ++r) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(r));
    Matrix g(N, N);
    for (Index j = 0; j < N; ++j)
      for (Index i = 0; i < N; ++i) g(i, j) = rng.complex_gaussian();
    starts.push_back(g);
  }
  std::vector<std::future<NormLowerBound>> jobs;
  for (const auto& s : starts)
    jobs.push_back(std::async(std::launch::async, [&m, &s, p, budget] { return ascend(m.entries, s, p, budget); }));
  NormLowerBound best;
  best.value = -1;
  for (auto& j : jobs) {
    NormLowerBound r = j.get();
    if (r.value > best.value) best = std::move(r);
  }
  return best;
}

ReversedLTrial verify_reversed_L_once(const Pattern& m, double p, const Matrix& a, std::uint64_t seed) {
  require(m.kind == PatternKind::ReversedL, ErrorCode::Domain, "verify_reversed_L: pattern is not reversed-L");
  require(Pattern::reversed_L(m.m, m.n).entries == m.entries, ErrorCode::Domain,
          "verify_reversed_L: entries do not follow the reversed-L rule");
  require(p >= 2.0, ErrorCode::Domain, "verify_reversed_L needs p >= 2");
  const Index N = m.size();
  require(a.rows() == N && a.cols() == N, ErrorCode::Structural, "verify_reversed_L: shape mismatch");
  require((a - a.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + a.cwiseAbs().maxCoeff()), ErrorCode::Domain,
          "verify_reversed_L: a must be self-adjoint");

  FiltrationPtr f = share(families::corner(N));
  const AlgebraPtr& alg = f->algebra();
  const Matrix ah = 0.5 * (a + a.adjoint());
  const Martingale am = martingale_from_final(f, Operator(alg, {ah}, true));
  std::vector<Operator> db;
  for (Index k = 0; k <= N; ++k) {
    Operator d = am.diff(static_cast<int>(k));
    if (k >= 2) {
      const double gamma = 2.0 * m.m[static_cast<std::size_t>(k - 1)] - 1.0;
      Matrix& b = d.mutable_block(0);
      for (Index i = 0; i + 1 < k; ++i) {
        b(i, k - 1) *= gamma;
        b(k - 1, i) *= gamma;
      }
      d.mark_hermitian();
    }
    db.push_back(std::move(d));
  }
  const Martingale bm = martingale_from_diffs(f, db);
  const Matrix avg = 0.5 * (am.final_value().block(0) + bm.final_value().block(0));
  ReversedLTrial out;
  out.identity_defect = (schur_multiply(unit_diagonal(m.entries), ah) - avg).cwiseAbs().maxCoeff() /
                        std::max(1.0, ah.cwiseAbs().maxCoeff());
  const double c = schur_upper_constant(m, p, true);
  std::ostringstream meta;
  meta << "reversed-L N=" << N << " p=" << p;
  out.report = make_report("schur-reversed-l", schatten_norm(schur_multiply(m, ah), p), c * schatten_norm(ah, p), c,
                           meta.str(), seed);
  out.report.flag = verify_dominated(am, bm, p, 1.0, seed).flag;
  return out;
}

ReversedLReport verify_reversed_L(const Pattern& m, double p, int trials, std::uint64_t seed) {
  require(trials >= 1, ErrorCode::Config, "verify_reversed_L: trials must be positive");
  ReversedLReport out;
  out.min_margin = kInf;
  const Index N = m.size();
  for (int t = 0; t < trials; ++t) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(t));
    Matrix g(N, N);
    for (Index j = 0; j < N; ++j)
      for (Index i = 0; i < N; ++i) g(i, j) = rng.complex_gaussian();
    ReversedLTrial r = verify_reversed_L_once(m, p, 0.5 * (g + g.adjoint()), seed);
    out.max_identity_defect = std::max(out.max_identity_defect, r.identity_defect);
    out.min_margin = std::min(out.min_margin, r.report.margin);
    if (!r.report.pass) ++out.failures;
    out.trials.push_back(std::move(r));
  }
  return out;
}

}  // namespace ncgl
