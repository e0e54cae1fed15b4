#include "opalgebra.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "errors.hpp"

namespace ncgl {

TracialAlgebra::TracialAlgebra(std::vector<Index> dims, std::vector<double> weights)
    : dims_(std::move(dims)), weights_(std::move(weights)) {
  require(!dims_.empty(), ErrorCode::Structural, "algebra needs at least one block");
  require(dims_.size() == weights_.size(), ErrorCode::Structural,
          "algebra: number of weights differs from number of blocks");
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    require(dims_[i] > 0, ErrorCode::Structural, "algebra: block dimension must be positive");
    require(weights_[i] > 0 && std::isfinite(weights_[i]), ErrorCode::Structural,
            "algebra: block weights must be positive and finite");
  }
}

TracialAlgebra TracialAlgebra::matrix(Index d, double weight) {
  return TracialAlgebra({d}, {weight});
}

TracialAlgebra TracialAlgebra::rademacher(int depth) {
  require(depth >= 0 && depth <= 20, ErrorCode::Domain, "rademacher depth must lie in [0, 20]");
  const std::size_t n = std::size_t{1} << depth;
  return TracialAlgebra(std::vector<Index>(n, 1), std::vector<double>(n, std::ldexp(1.0, -depth)));
}

Index TracialAlgebra::total_dim() const {
  Index t = 0;
  for (Index d : dims_) t += d;
  return t;
}

double TracialAlgebra::trace_identity() const {
  double t = 0;
  for (std::size_t i = 0; i < dims_.size(); ++i) t += weights_[i] * static_cast<double>(dims_[i]);
  return t;
}

AlgebraPtr make_algebra(TracialAlgebra a) {
  return std::make_shared<const TracialAlgebra>(std::move(a));
}

TracialAlgebra tensor(const TracialAlgebra& a, const TracialAlgebra& b) {
  std::vector<Index> dims;
  std::vector<double> weights;
  dims.reserve(a.num_blocks() * b.num_blocks());
  weights.reserve(a.num_blocks() * b.num_blocks());
  for (std::size_t i = 0; i < a.num_blocks(); ++i) {
    for (std::size_t j = 0; j < b.num_blocks(); ++j) {
      dims.push_back(a.dim(i) * b.dim(j));
      weights.push_back(a.weight(i) * b.weight(j));
    }
  }
  return TracialAlgebra(std::move(dims), std::move(weights));
}

// ---------------------------------------------------------------------------
// Operator

Operator::Operator(AlgebraPtr algebra, std::vector<Matrix> blocks, bool hermitian)
    : algebra_(std::move(algebra)), blocks_(std::move(blocks)), hermitian_(hermitian) {
  require(algebra_ != nullptr, ErrorCode::Structural, "operator without algebra");
  require(blocks_.size() == algebra_->num_blocks(), ErrorCode::Structural,
          "operator: block count does not match the algebra");
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    require(blocks_[i].rows() == algebra_->dim(i) && blocks_[i].cols() == algebra_->dim(i),
            ErrorCode::Structural, "operator: block shape does not match the algebra");
  }
}

Operator Operator::zero(const AlgebraPtr& algebra) {
  std::vector<Matrix> blocks;
  blocks.reserve(algebra->num_blocks());
  for (Index d : algebra->dims()) blocks.push_back(Matrix::Zero(d, d));
  return Operator(algebra, std::move(blocks), true);
}

Operator Operator::identity(const AlgebraPtr& algebra) { return scalar(algebra, 1.0); }

Operator Operator::scalar(const AlgebraPtr& algebra, cplx value) {
  std::vector<Matrix> blocks;
  blocks.reserve(algebra->num_blocks());
  for (Index d : algebra->dims()) blocks.push_back(value * Matrix::Identity(d, d));
  return Operator(algebra, std::move(blocks), value.imag() == 0.0);
}

Operator& Operator::mark_hermitian() {
  for (auto& b : blocks_) {
    Matrix h = 0.5 * (b + b.adjoint());
    b = std::move(h);
  }
  hermitian_ = true;
  return *this;
}

Operator Operator::adjoint() const {
  std::vector<Matrix> blocks;
  blocks.reserve(blocks_.size());
  for (const auto& b : blocks_) blocks.push_back(b.adjoint());
  return Operator(algebra_, std::move(blocks), hermitian_);
}

Operator Operator::hermitian_part() const {
  Operator h = *this;
  h.mark_hermitian();
  return h;
}

Operator& Operator::operator+=(const Operator& o) {
  require_same_algebra(*this, o);
  for (std::size_t i = 0; i < blocks_.size(); ++i) blocks_[i] += o.blocks_[i];
  hermitian_ = hermitian_ && o.hermitian_;
  return *this;
}

Operator& Operator::operator-=(const Operator& o) {
  require_same_algebra(*this, o);
  for (std::size_t i = 0; i < blocks_.size(); ++i) blocks_[i] -= o.blocks_[i];
  hermitian_ = hermitian_ && o.hermitian_;
  return *this;
}

Operator& Operator::operator*=(double s) {
  for (auto& b : blocks_) b *= s;
  return *this;
}

double Operator::max_abs() const {
  double m = 0;
  for (const auto& b : blocks_) m = std::max(m, b.cwiseAbs().maxCoeff());
  return m;
}

Operator operator+(Operator a, const Operator& b) { return a += b; }
Operator operator-(Operator a, const Operator& b) { return a -= b; }
Operator operator-(const Operator& a) { return -1.0 * a; }

Operator operator*(const Operator& a, const Operator& b) {
  require_same_algebra(a, b);
  std::vector<Matrix> blocks;
  blocks.reserve(a.num_blocks());
  for (std::size_t i = 0; i < a.num_blocks(); ++i) blocks.push_back(a.block(i) * b.block(i));
  return Operator(a.algebra_ptr(), std::move(blocks), false);
}

Operator operator*(double s, Operator a) { return a *= s; }

Operator operator*(cplx s, const Operator& a) {
  std::vector<Matrix> blocks;
  blocks.reserve(a.num_blocks());
  for (const auto& b : a.blocks()) blocks.push_back(s * b);
  return Operator(a.algebra_ptr(), std::move(blocks), a.hermitian() && s.imag() == 0.0);
}

void require_same_algebra(const Operator& a, const Operator& b) {
  if (a.algebra_ptr() == b.algebra_ptr()) return;
  require(a.algebra() == b.algebra(), ErrorCode::Structural,
          "operands belong to different algebras");
}

void require_hermitian(const Operator& x, const char* what) {
  if (x.hermitian()) return;
  double skew = 0;
  for (const auto& b : x.blocks()) skew = std::max(skew, (b - b.adjoint()).cwiseAbs().maxCoeff());
  if (skew > 1e-10 * (1.0 + x.max_abs())) {
    std::ostringstream msg;
    msg << what << ": operator is not Hermitian (skew part " << skew << ")";
    fail(ErrorCode::Domain, msg.str());
  }
}

cplx trace(const Operator& x) {
  cplx t = 0;
  for (std::size_t i = 0; i < x.num_blocks(); ++i) t += x.algebra().weight(i) * x.block(i).trace();
  return t;
}

double real_trace(const Operator& x) { return trace(x).real(); }

namespace {

// Weighted l^p norm of per-block nonnegative values, scaled for stability.
double weighted_lp(const std::vector<RealVector>& values, const TracialAlgebra& alg, double p) {
  double vmax = 0;
  for (const auto& v : values)
    if (v.size() > 0) vmax = std::max(vmax, v.maxCoeff());
  if (std::isinf(p) || vmax == 0.0) return vmax;
  double acc = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    double s = 0;
    for (Index j = 0; j < values[i].size(); ++j) s += std::pow(values[i][j] / vmax, p);
    acc += alg.weight(i) * s;
  }
  return vmax * std::pow(acc, 1.0 / p);
}

std::vector<RealVector> singular_values(const Operator& x) {
  std::vector<RealVector> out;
  out.reserve(x.num_blocks());
  if (x.hermitian()) {
    for (const auto& b : x.blocks()) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(b, Eigen::EigenvaluesOnly);
      out.push_back(es.eigenvalues().cwiseAbs());
    }
  } else {
    for (const auto& b : x.blocks()) {
      Eigen::BDCSVD<Matrix> svd(b);
      out.push_back(svd.singularValues());
    }
  }
  return out;
}

}  // namespace

double schatten_norm(const Operator& x, double p) {
  require(p >= 1.0, ErrorCode::Domain, "schatten_norm: p must be >= 1");
  return weighted_lp(singular_values(x), x.algebra(), p);
}

double operator_norm(const Operator& x) { return schatten_norm(x, kInf); }

double max_diff(const Operator& a, const Operator& b) {
  require_same_algebra(a, b);
  double m = 0;
  for (std::size_t i = 0; i < a.num_blocks(); ++i)
    m = std::max(m, (a.block(i) - b.block(i)).cwiseAbs().maxCoeff());
  return m;
}

// ---------------------------------------------------------------------------
// Spectral calculus

bool Interval::contains(double v, double tol) const {
  if (std::isfinite(lower) && std::abs(v - lower) <= tol) v = lower;
  else if (std::isfinite(upper) && std::abs(v - upper) <= tol) v = upper;
  const bool above_lower = lower_closed ? v >= lower : v > lower;
  const bool below_upper = upper_closed ? v <= upper : v < upper;
  return above_lower && below_upper;
}

Projection Projection::checked(Operator e) {
  require_hermitian(e, "projection");
  e.mark_hermitian();
  const double err = max_diff(e * e, e);
  if (err > 1e-10) {
    std::ostringstream msg;
    msg << "projection: ||e^2 - e|| = " << err;
    fail(ErrorCode::Domain, msg.str());
  }
  return Projection(std::move(e));
}

Projection Projection::trusted(Operator e) {
  if (!e.hermitian()) e.mark_hermitian();
  return Projection(std::move(e));
}

Projection Projection::identity(const AlgebraPtr& algebra) {
  return Projection(Operator::identity(algebra));
}

Projection Projection::zero(const AlgebraPtr& algebra) { return Projection(Operator::zero(algebra)); }

Projection Projection::complement() const {
  return Projection(Operator::identity(op_.algebra_ptr()) - op_);
}

double Spectrum::max_abs() const {
  double m = 0;
  for (const auto& v : values)
    if (v.size() > 0) m = std::max(m, v.cwiseAbs().maxCoeff());
  return m;
}

double Spectrum::min() const {
  double m = kInf;
  for (const auto& v : values)
    if (v.size() > 0) m = std::min(m, v.minCoeff());
  return m;
}

double Spectrum::max() const {
  double m = -kInf;
  for (const auto& v : values)
    if (v.size() > 0) m = std::max(m, v.maxCoeff());
  return m;
}

Spectrum eigh(const Operator& a) {
  require_hermitian(a, "eigendecomposition");
  Spectrum s;
  s.values.reserve(a.num_blocks());
  s.vectors.reserve(a.num_blocks());
  for (const auto& b : a.blocks()) {
    Matrix h = 0.5 * (b + b.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    s.values.push_back(es.eigenvalues());
    s.vectors.push_back(es.eigenvectors());
  }
  return s;
}

Projection spectral_projection(const Spectrum& s, const AlgebraPtr& algebra, const Interval& b,
                               double tol) {
  std::vector<Matrix> blocks;
  blocks.reserve(s.values.size());
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    const auto& vals = s.values[i];
    const auto& vecs = s.vectors[i];
    const Index d = vals.size();
    Matrix p = Matrix::Zero(d, d);
    for (Index j = 0; j < d; ++j) {
      if (b.contains(vals[j], tol)) p.noalias() += vecs.col(j) * vecs.col(j).adjoint();
    }
    blocks.push_back(std::move(p));
  }
  Operator e(algebra, std::move(blocks));
  return Projection::trusted(std::move(e));
}

Projection spectral_projection(const Operator& a, const Interval& b) {
  const Spectrum s = eigh(a);
  return spectral_projection(s, a.algebra_ptr(), b, spectral_tolerance(s.max_abs()));
}

Operator func_calculus(const Spectrum& s, const AlgebraPtr& algebra,
                       const std::function<double(double)>& f, double norm) {
  const double ctol = cluster_tolerance(norm);
  std::vector<Matrix> blocks;
  blocks.reserve(s.values.size());
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    const auto& vals = s.values[i];
    const auto& vecs = s.vectors[i];
    const Index d = vals.size();
    RealVector mapped(d);
    Index start = 0;
    while (start < d) {
      Index stop = start + 1;
      while (stop < d && vals[stop] - vals[stop - 1] <= ctol) ++stop;
      const double mean = vals.segment(start, stop - start).mean();
      const double fv = f(mean);
      if (!std::isfinite(fv)) {
        std::ostringstream msg;
        msg << "functional calculus: function undefined at eigenvalue " << mean;
        fail(ErrorCode::Domain, msg.str());
      }
      for (Index j = start; j < stop; ++j) mapped[j] = fv;
      start = stop;
    }
    blocks.push_back(vecs * mapped.asDiagonal() * vecs.adjoint());
  }
  Operator out(algebra, std::move(blocks));
  return out.mark_hermitian();
}

Operator func_calculus(const Operator& a, const std::function<double(double)>& f) {
  const Spectrum s = eigh(a);
  return func_calculus(s, a.algebra_ptr(), f, s.max_abs());
}

namespace {
// Pointwise on each eigenvalue. Used for continuous f, where averaging a
// cluster first would only lose accuracy on small eigenvalues.
Operator pointwise_calculus(const Spectrum& s, const AlgebraPtr& algebra, const std::function<double(double)>& f) {
  std::vector<Matrix> blocks;
  blocks.reserve(s.values.size());
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    const auto& vals = s.values[i];
    RealVector mapped(vals.size());
    for (Index j = 0; j < vals.size(); ++j) {
      mapped[j] = f(vals[j]);
      if (!std::isfinite(mapped[j])) {
        std::ostringstream msg;
        msg << "functional calculus: function undefined at eigenvalue " << vals[j];
        fail(ErrorCode::Domain, msg.str());
      }
    }
    blocks.push_back(s.vectors[i] * mapped.asDiagonal() * s.vectors[i].adjoint());
  }
  return Operator(algebra, std::move(blocks), true);
}
}  // namespace

Operator pow_psd(const Operator& a, double r) {
  require(r > 0, ErrorCode::Domain, "pow_psd: exponent must be positive");
  const Spectrum s = eigh(a);
  const double neg_tol = 1e-10 * (1.0 + s.max_abs());
  return pointwise_calculus(s, a.algebra_ptr(), [&](double t) {
    if (t < -neg_tol) return std::numeric_limits<double>::quiet_NaN();
    return t <= 0.0 ? 0.0 : std::pow(t, r);
  });
}

Operator sqrt_psd(const Operator& a) { return pow_psd(a, 0.5); }

Operator abs_pow(const Operator& x, double r) {
  if (x.hermitian()) return pointwise_calculus(eigh(x), x.algebra_ptr(), [r](double t) { return std::pow(std::abs(t), r); });
  return pow_psd((x.adjoint() * x).mark_hermitian(), 0.5 * r);
}

Operator abs(const Operator& x) { return abs_pow(x, 1.0); }

Projection proj_meet(const Projection& e, const Projection& f) {
  require_same_algebra(e, f);
  const auto& alg = e.op().algebra();
  std::vector<Matrix> blocks;
  blocks.reserve(alg.num_blocks());
  for (std::size_t i = 0; i < alg.num_blocks(); ++i) {
    const Index d = alg.dim(i);
    const Matrix id = Matrix::Identity(d, d);
    Matrix sum = (id - e.op().block(i)) + (id - f.op().block(i));
    sum = 0.5 * (sum + sum.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> es(sum);
    Matrix p = Matrix::Zero(d, d);
    for (Index j = 0; j < d; ++j) {
      if (es.eigenvalues()[j] < 1e-8) p.noalias() += es.eigenvectors().col(j) * es.eigenvectors().col(j).adjoint();
    }
    blocks.push_back(std::move(p));
  }
  return Projection::trusted(Operator(e.op().algebra_ptr(), std::move(blocks)));
}

double min_eigenvalue(const Operator& a) {
  require_hermitian(a, "min_eigenvalue");
  double m = kInf;
  for (const auto& b : a.blocks()) {
    Matrix h = 0.5 * (b + b.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    m = std::min(m, es.eigenvalues().minCoeff());
  }
  return m;
}

bool psd_leq(const Operator& a, const Operator& b, double tol) {
  return min_eigenvalue(b - a) >= -tol;
}

Operator kron(const Operator& a, const Operator& b, const AlgebraPtr& product) {
  const auto& aa = a.algebra();
  const auto& ba = b.algebra();
  require(product->num_blocks() == aa.num_blocks() * ba.num_blocks(), ErrorCode::Structural,
          "kron: product algebra has the wrong number of blocks");
  std::vector<Matrix> blocks;
  blocks.reserve(product->num_blocks());
  for (std::size_t i = 0; i < aa.num_blocks(); ++i) {
    for (std::size_t j = 0; j < ba.num_blocks(); ++j) {
      const Matrix& x = a.block(i);
      const Matrix& y = b.block(j);
      const Index dy = y.rows();
      Matrix k(x.rows() * dy, x.cols() * dy);
      for (Index p = 0; p < x.rows(); ++p)
        for (Index q = 0; q < x.cols(); ++q) k.block(p * dy, q * dy, dy, dy) = x(p, q) * y;
      blocks.push_back(std::move(k));
    }
  }
  return Operator(product, std::move(blocks), a.hermitian() && b.hermitian());
}

}  // namespace ncgl
