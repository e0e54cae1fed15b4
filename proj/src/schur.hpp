#pragma once

// Schur (entrywise) multipliers on Schatten classes: zero-one patterns, the
// triangular projection, the interlacing map t and the reversed-L estimate.

#include <cstdint>
#include <string>
#include <vector>

#include "opalgebra.hpp"
#include "report.hpp"

namespace ncgl {

enum class PatternKind { ReversedL, Triangular, Diagonal, Custom };

std::string to_string(PatternKind k);

/// Zero-one N x N multiplier with its structural tag.
struct Pattern {
  PatternKind kind = PatternKind::Custom;
  Matrix entries;
  /// Reversed-L data, 0-based: m[k] for k >= 1 fills row and column k above
  /// and left of the diagonal (m[0] is unused), n[k] is the diagonal.
  std::vector<int> m;
  std::vector<int> n;

  Index size() const { return entries.rows(); }

  /// entry(i, j) = m_{max(i,j)} off the diagonal and n_i on it.
  static Pattern reversed_L(std::vector<int> m, std::vector<int> n);
  /// Ones on and above the diagonal.
  static Pattern triangular(Index N);
  /// diag(d) with d_i in {0, 1}.
  static Pattern diagonal(std::vector<int> d);
  /// Arbitrary matrix; entries need not be zero-one.
  static Pattern custom(Matrix entries);
  /// The reversed-L pattern with m_k = n_k = 1 exactly for even k (1-based),
  /// for which m * t(A) = t(T(A)). Size 2N.
  static Pattern interlace_pattern(Index N);

  /// Upper-left K x K truncation; keeps the tag.
  Pattern truncate(Index K) const;
};

Matrix schur_multiply(const Matrix& m, const Matrix& a);
Matrix schur_multiply(const Pattern& m, const Matrix& a);

/// (Ta)_ij = a_ij for i <= j, 0 otherwise.
Matrix triangular_projection(const Matrix& a);

/// 2N x 2N matrix with a_ij (1-based) at position (2i - 1, 2j).
Matrix interlace_t(const Matrix& a);

/// Schatten p-norm of a plain matrix (p = kInf gives the operator norm).
double schatten_norm(const Matrix& a, double p);

/// Upper bound for ||m * a||_p / ||a||_p used to cross-check lower bounds.
/// Self-adjoint a: (1 + dominated_constant(q))/2, plus 1 when some diagonal
/// entry is 0, with q = max(p, p'). General a: twice that (real and
/// imaginary parts). Triangular patterns use the bound of
/// interlace_pattern, diagonal patterns have norm <= 1. Custom patterns
/// raise a domain error.
double schur_upper_constant(const Pattern& m, double p, bool self_adjoint = false);

struct NormLowerBound {
  double value = 0;  // attained ratio ||m * a||_p / ||a||_p
  Matrix argmax;
  int iterations = 0;
};

/// Lower bound on ||m||_{S^p -> S^p}: best ratio over `restarts` seeded
/// Gaussian starts plus one Hilbert-type start a_ij = 1/(i - j + 1/2),
/// each refined by up to `budget` steps. A step is the nonlinear power
/// iteration a <- J_{p'}(m^* J_p(m * a)) when it improves the ratio, else
/// normalized gradient ascent on log ||m*a||_p - log ||a||_p with
/// backtracking. Restarts run concurrently; the result does not depend on
/// scheduling.
NormLowerBound schur_norm_lower(const Pattern& m, double p, int budget = 200, std::uint64_t seed = 0,
                                int restarts = 3);

/// Analytic gradient of log ||m*a||_p - log ||a||_p with respect to the real
/// inner product Re Tr(g* da).
Matrix schur_ratio_gradient(const Matrix& m, const Matrix& a, double p);

struct ReversedLTrial {
  VerifyReport report;
  /// max |(m^{(N)} * a - (a_N + b_N)/2)_ij| with the diagonal reduced to 1.
  double identity_defect = 0;
};

struct ReversedLReport {
  std::vector<ReversedLTrial> trials;
  double max_identity_defect = 0;
  double min_margin = 0;
  int failures = 0;
  bool pass() const { return failures == 0 && max_identity_defect <= 1e-12; }
};

/// For a random Hermitian a: Junge-Xu martingale a_k on the corner
/// filtration, tangent copy b with gamma_k = 2 m_k - 1, the identity
/// m^{(N)} * a = (a_N + b_N)/2 for the unit-diagonal part, and
/// ||m * a||_p <= schur_upper_constant(m, p) ||a||_p.
ReversedLTrial verify_reversed_L_once(const Pattern& m, double p, const Matrix& a, std::uint64_t seed = 0);
ReversedLReport verify_reversed_L(const Pattern& m, double p, int trials, std::uint64_t seed = 0);

}  // namespace ncgl
