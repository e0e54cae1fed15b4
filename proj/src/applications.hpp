#pragma once

// Embedding constructions and numerical checks of the classical martingale
// inequalities recovered from the good-lambda estimate: Burkholder-Gundy,
// martingale transforms, Stein and dual Doob, tangent sequences and the
// refined Doob inequality.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "filtration.hpp"
#include "goodlambda.hpp"
#include "report.hpp"

namespace ncgl {

/// Martingale y on an enlarged algebra together with the operators of the
/// associated triple and the defects of the construction identities.
struct EmbeddedInstance {
  FiltrationPtr filtration;
  Martingale y;
  Operator x_tilde;  // final value of the transferred martingale
  Operator z;
  std::string kind;  // "bg" or "doob"
  /// Largest entrywise error of the squared-difference identity.
  double identity_defect = 0;
  /// -min eig of the lower bound for y^2 (<= 0 when it holds).
  double domination_defect = 0;

  Triple triple() const { return Triple(x_tilde, y, z); }
};

// ---- Constants from the proofs. p = 2 cases use constant 1 where the
// inequality is an isometry or contraction at p = 2.

/// ||x_N||_p <= c ||S_N(x)||_p: 2^{1/2} main_constant(p); 1 at p = 2.
double bg_upper_constant(double p);
/// ||S_N(x)||_p <= c ||x_N||_p:
/// 12p (1 + 2^{2-4/p})^{1/2} (1 + 2^{p-2})^{1/p} / (1 - (1+1/p)^{2-p})^{1/2}.
double bg_lower_constant(double p);
/// main_constant(p) (1 + 2^{2-4/p})^{1/2}; 1 at p = 2.
double transform_constant(double p);
/// Dual Doob at exponent q >= 1: with r = 2q,
/// (2^{1/2} main_constant(r) 2^{1/r})^2; 1 at q = 1.
double dual_doob_constant(double q);
/// dual_doob_constant(p/2)^{1/2}; 1 at p = 2.
double stein_constant(double p);
/// main_constant(p) (1 + kappa^2 2^{2-4/p})^{1/2}; 1 at p = 2.
double dominated_constant(double p, double kappa = 1.0);
/// p >= 2: 1 + 2 dominated_constant(p, (1 + kappa)/2).
/// 1 <= p < 2 (kappa = 1): (bg_lower(2p) dominated(2p) bg_upper(2p))^2.
double positive_tangent_constant(double p, double kappa = 1.0);
/// p >= 2: (1 + 3 positive_tangent_constant(p)) / 2; 1 <= p < 2:
/// dual_doob_constant(p).
double refined_doob_constant(double p);

// ---- Burkholder-Gundy.

/// M_{N+2} (x) M instance with y_n = sum_{k<=n} (e_{1,k+2} + e_{k+2,1}) (x) dx_k,
/// x~_N = e_11 (x) x_N + sum_k e_{k+2,k+2} (x) dx_k and
/// z = (sum_k |dx~_k|^p)^{1/p}.
EmbeddedInstance bg_embed(const Martingale& x, double p = 2.0);

/// (sum_k ||dx_k||_p^p)^{1/p} <= 2^{1-2/p} ||x_N||_p.
VerifyReport interp_bound(const Martingale& x, double p);

struct BGReport {
  VerifyReport upper;   // ||x_N||_p <= c ||S_N(x)||_p
  VerifyReport lower;   // ||S_N(x)||_p <= c ||x_N||_p
  VerifyReport interp;  // interp_bound
  /// Good-lambda moment bound on the embedded triple, when requested.
  std::optional<MomentReport> chain;

  bool pass() const { return upper.pass && lower.pass && interp.pass && (!chain || chain->pass()); }
};

/// Both directions for p >= 2. With `chain` the moment bound for the
/// embedded triple is verified as well (B = 1 + 1/p).
BGReport verify_bg(const Martingale& x, double p, bool chain = false, std::uint64_t seed = 0);

// ---- Martingale transforms.

/// dy_n = v_n dx_n.
Martingale transform(const Martingale& x, const std::vector<double>& v);

/// p >= 2: ||y_N||_p <= transform_constant(p) ||x_N||_p. For 1 < p < 2 the
/// report is flagged duality-only: the transform is self-dual, so
/// |tau(y_N w)| <= transform_constant(p') ||x_N||_p ||w||_p' is tested for
/// the norming element w of y_N and `samples` random Hermitian w.
VerifyReport verify_transform(const Martingale& x, const std::vector<double>& v, double p,
                              std::uint64_t seed = 0, int samples = 20);

// ---- Dual Doob and Stein.

/// M_{N+2} (x) L^inf(2^{N+1} signs) (x) M instance with
/// x = z = e_11 (x) 1 (x) (sum u_k)^{1/2} + sum_k e_{k+2,k+2} (x) 1 (x) u_k^{1/2}
/// and dy_k = (e_{1,k+2} + e_{k+2,1}) (x) eps_k (x) E_k(u_k)^{1/2}.
/// Requires u.size() <= f.N() + 1.
EmbeddedInstance doob_embed(const std::vector<Operator>& u, const FiltrationPtr& f);

struct DoobReport {
  VerifyReport main;
  std::optional<MomentReport> chain;
  bool pass() const { return main.pass && (!chain || chain->pass()); }
};

/// ||sum E_n(u_n)||_q <= dual_doob_constant(q) ||sum u_n||_q for PSD u, q >= 1.
DoobReport verify_dual_doob(const std::vector<Operator>& u, const FiltrationPtr& f, double q,
                            bool chain = false, std::uint64_t seed = 0);

/// ||(sum |E_n u_n|^2)^{1/2}||_p <= stein_constant(p) ||(sum |u_n|^2)^{1/2}||_p, p >= 2.
VerifyReport verify_stein(const std::vector<Operator>& u, const FiltrationPtr& f, double p,
                          std::uint64_t seed = 0);

// ---- Tangent sequences.

struct TangentCheck {
  bool tangent = false;
  /// max over n and spectral clusters of ||E_{n-1}(chi(a_n)) - E_{n-1}(chi(b_n))||.
  double max_deviation = 0;
  /// max over n and m < min(dim, number of spectral clusters) of the same for
  /// a_n^m, b_n^m, relative to (1 + ||a||)^m.
  double moment_deviation = 0;
};

/// Hermitian adapted sequences a, b on f. Throws a domain error for
/// non-adapted input.
TangentCheck check_tangent(const std::vector<Operator>& a, const std::vector<Operator>& b,
                           const Filtration& f);

struct CounterexampleReport {
  int N = 0;
  double p = 0;
  double weak_lhs = 0;   // tau(I_[1,inf)(|y_N|))
  double tau_abs_x = 0;  // tau(|x_N|)
  double ratio = 0;      // weak_lhs / tau_abs_x
  double norm_y = 0;     // ||y_N||_p
  double norm_x = 0;     // ||x_N||_p
  double norm_ratio = 0;
  double lower_ratio = 0;  // (N+1)^{1/p} / (2^{1/p} N^{1/2})
  TangentCheck tangency;
  Martingale x;
  Martingale y;
};

/// dx_n = eps_n (x) (e_{1,n+1} + e_{n+1,1}), dy_n = eps_n (x) (e_11 + e_{n+1,n+1})
/// on L^inf(2^N signs) (x) M_{N+1}; N odd, 1 <= N <= 13.
CounterexampleReport tangent_counterexample(int N, double p);

/// ||y_N||_p <= dominated_constant(p, kappa) ||x_N||_p under
/// E_{n-1}(dy_n^2) <= E_{n-1}(dx_n^2) and ||dy_n||_p <= kappa ||dx_n||_p.
VerifyReport verify_dominated(const Martingale& x, const Martingale& y, double p, double kappa = 1.0,
                              std::uint64_t seed = 0);

/// ||sum v_n||_p <= positive_tangent_constant(p, kappa) ||sum u_n||_p for
/// tangent positive u, v. With `relaxed` the hypotheses are
/// E_{n-1}(v_n) = E_{n-1}(u_n), E_{n-1}(v_n^2) <= E_{n-1}(u_n^2) and
/// ||v_n||_p <= kappa ||u_n||_p (p >= 2 only).
VerifyReport verify_positive_tangent(const std::vector<Operator>& u, const std::vector<Operator>& v,
                                     const Filtration& f, double p, bool relaxed = false,
                                     double kappa = 1.0, std::uint64_t seed = 0);

/// ||sum E_{n-1}(u_n)||_p <= refined_doob_constant(p) ||sum u_n||_p for an
/// adapted PSD sequence, E_{-1} = E_0.
VerifyReport refined_doob(const std::vector<Operator>& u, const Filtration& f, double p,
                          std::uint64_t seed = 0);

// ---- Tangent pair generators.

struct MartingalePair {
  Martingale x;
  Martingale y;
};

/// Rademacher-full(depth, m): dx_n = eps_n (x) h_n and dy_n = g_n eps_n (x) h_n
/// for n >= 1, with h_n Hermitian and g_n = +-1 depending on eps_1..eps_{n-1};
/// dx_0 = dy_0.
MartingalePair sign_tangent_pair(Rng& rng, int depth, Index m);

/// Corner filtration on M_N: Junge-Xu martingale differences of a random
/// Hermitian matrix and their arrow-tangent copy with column k multiplied by
/// gamma_k (given, or random signs when empty).
MartingalePair corner_tangent_pair(Rng& rng, Index N, std::vector<double> gamma = {});

struct PositivePair {
  FiltrationPtr filtration;
  std::vector<Operator> u;
  std::vector<Operator> v;
};

/// Diagonal classical tangent sums on rademacher-full(depth, m): coordinate
/// j of u_n is c + d eps_n with c >= |d| depending on the earlier signs, v_n
/// flips eps_n.
PositivePair diagonal_positive_pair(Rng& rng, int depth, Index m);

/// Positive arrow matrices on the corner filtration of M_N: u_k has a random
/// PSD k x k corner and beta_k >= 0 elsewhere on the diagonal, v_k flips the
/// sign of row and column k.
PositivePair arrow_positive_pair(Rng& rng, Index N);

}  // namespace ncgl
