#pragma once

// Finite-dimensional tracial von Neumann algebras modelled as weighted direct
// sums of full complex matrix blocks, together with the spectral calculus and
// Schatten norms used throughout the library.

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <limits>
#include <memory>
#include <vector>

namespace ncgl {

using Index = Eigen::Index;
using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Direct sum of matrix blocks M_{d_1} + ... + M_{d_m} with trace
/// tau(x) = sum_i w_i Tr(x_i).
class TracialAlgebra {
 public:
  TracialAlgebra(std::vector<Index> dims, std::vector<double> weights);

  /// Single block M_d with weight w.
  static TracialAlgebra matrix(Index d, double weight = 1.0);
  /// L^infty of 2^depth equally likely sign patterns: 2^depth blocks of size 1
  /// and weight 2^-depth. Block s encodes the signs, bit j <-> coordinate j.
  static TracialAlgebra rademacher(int depth);

  std::size_t num_blocks() const { return dims_.size(); }
  Index dim(std::size_t i) const { return dims_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }
  const std::vector<Index>& dims() const { return dims_; }
  const std::vector<double>& weights() const { return weights_; }
  Index total_dim() const;
  double trace_identity() const;

  bool operator==(const TracialAlgebra& other) const {
    return dims_ == other.dims_ && weights_ == other.weights_;
  }

 private:
  std::vector<Index> dims_;
  std::vector<double> weights_;
};

using AlgebraPtr = std::shared_ptr<const TracialAlgebra>;

AlgebraPtr make_algebra(TracialAlgebra a);

/// Spatial tensor product: blocks (i, j) in row-major order, dimension
/// d_i * e_j, weight w_i * v_j.
TracialAlgebra tensor(const TracialAlgebra& a, const TracialAlgebra& b);

/// Element of a TracialAlgebra: one square matrix per block.
class Operator {
 public:
  Operator(AlgebraPtr algebra, std::vector<Matrix> blocks, bool hermitian = false);

  static Operator zero(const AlgebraPtr& algebra);
  static Operator identity(const AlgebraPtr& algebra);
  static Operator scalar(const AlgebraPtr& algebra, cplx value);

  const TracialAlgebra& algebra() const { return *algebra_; }
  const AlgebraPtr& algebra_ptr() const { return algebra_; }
  std::size_t num_blocks() const { return blocks_.size(); }
  const Matrix& block(std::size_t i) const { return blocks_[i]; }
  const std::vector<Matrix>& blocks() const { return blocks_; }

  /// Mutable access drops the Hermitian flag; call mark_hermitian() after
  /// writing a Hermitian result.
  Matrix& mutable_block(std::size_t i) {
    hermitian_ = false;
    return blocks_[i];
  }

  bool hermitian() const { return hermitian_; }
  /// Symmetrizes the stored data and sets the flag.
  Operator& mark_hermitian();

  Operator adjoint() const;
  Operator hermitian_part() const;

  Operator& operator+=(const Operator& o);
  Operator& operator-=(const Operator& o);
  Operator& operator*=(double s);

  /// Largest absolute entry over all blocks.
  double max_abs() const;

 private:
  AlgebraPtr algebra_;
  std::vector<Matrix> blocks_;
  bool hermitian_ = false;
};

Operator operator+(Operator a, const Operator& b);
Operator operator-(Operator a, const Operator& b);
Operator operator-(const Operator& a);
Operator operator*(const Operator& a, const Operator& b);
Operator operator*(double s, Operator a);
Operator operator*(cplx s, const Operator& a);

void require_same_algebra(const Operator& a, const Operator& b);
/// Throws a domain error unless x is Hermitian to 1e-10 (1 + max|x_ij|).
void require_hermitian(const Operator& x, const char* what);

cplx trace(const Operator& x);
double real_trace(const Operator& x);

/// (tau(|x|^p))^{1/p}; p = kInf gives the operator norm (weights ignored).
double schatten_norm(const Operator& x, double p);
double operator_norm(const Operator& x);

/// Max absolute entrywise difference, used for approximate equality.
double max_diff(const Operator& a, const Operator& b);

/// Interval of the extended real line.
struct Interval {
  double lower = -kInf;
  double upper = kInf;
  bool lower_closed = false;
  bool upper_closed = false;

  static Interval below(double b) { return {-kInf, b, false, false}; }         // (-inf, b)
  static Interval at_least(double a) { return {a, kInf, true, false}; }        // [a, inf)
  static Interval above(double a) { return {a, kInf, false, false}; }          // (a, inf)
  static Interval at_most(double b) { return {-kInf, b, false, true}; }        // (-inf, b]
  static Interval closed(double a, double b) { return {a, b, true, true}; }    // [a, b]
  static Interval everything() { return {}; }

  /// Membership after the tie rule: a value within tol of an endpoint is
  /// treated as equal to that endpoint.
  bool contains(double v, double tol) const;
};

/// Operator known to be an orthogonal projection.
class Projection {
 public:
  /// Validates e^2 = e, e = e* to 1e-10.
  static Projection checked(Operator e);
  /// Internal constructor for results of spectral calculus.
  static Projection trusted(Operator e);

  static Projection identity(const AlgebraPtr& algebra);
  static Projection zero(const AlgebraPtr& algebra);

  const Operator& op() const { return op_; }
  operator const Operator&() const { return op_; }

  Projection complement() const;
  double rank_trace() const { return real_trace(op_); }

 private:
  explicit Projection(Operator e) : op_(std::move(e)) {}
  Operator op_;
};

/// Per-block Hermitian eigendecomposition with ascending eigenvalues.
struct Spectrum {
  std::vector<RealVector> values;
  std::vector<Matrix> vectors;

  double max_abs() const;
  double min() const;
  double max() const;
};

Spectrum eigh(const Operator& a);

/// Tie tolerance of the spectral calculus for an operator of norm `norm`.
inline double spectral_tolerance(double norm) { return 1e-10 * (1.0 + norm); }
/// Eigenvalues closer than this are merged into one spectral cluster.
inline double cluster_tolerance(double norm) { return 1e-8 * (1.0 + norm); }

Projection spectral_projection(const Operator& a, const Interval& b);
Projection spectral_projection(const Spectrum& s, const AlgebraPtr& algebra,
                               const Interval& b, double tol);

/// f(a) for Hermitian a. Eigenvalues are grouped into clusters and f is
/// evaluated at each cluster mean; a non-finite value of f is a domain error.
Operator func_calculus(const Operator& a, const std::function<double(double)>& f);
Operator func_calculus(const Spectrum& s, const AlgebraPtr& algebra,
                       const std::function<double(double)>& f, double norm);

/// a^{1/2} for a >= -1e-10 (1 + ||a||).
Operator sqrt_psd(const Operator& a);
/// a^r for PSD a and r > 0. Unlike func_calculus, the power is applied to
/// each eigenvalue separately.
Operator pow_psd(const Operator& a, double r);
/// |x| = (x* x)^{1/2}.
Operator abs(const Operator& x);
/// |x|^r = (x* x)^{r/2}.
Operator abs_pow(const Operator& x, double r);

/// Projection onto range(e) and range(f).
Projection proj_meet(const Projection& e, const Projection& f);

/// Smallest eigenvalue of a Hermitian operator over all blocks.
double min_eigenvalue(const Operator& a);
/// a <= b in the PSD order up to tol.
bool psd_leq(const Operator& a, const Operator& b, double tol);

/// a (x) b on `product`, which must equal tensor(a.algebra(), b.algebra()).
Operator kron(const Operator& a, const Operator& b, const AlgebraPtr& product);

}  // namespace ncgl
