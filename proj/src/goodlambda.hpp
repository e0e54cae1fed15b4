#pragma once

// Good-lambda testing conditions for triples (x_N, y, z_N) and numerical
// checks of the distributional and moment inequalities they license.

#include <cstdint>

#include "cuculescu.hpp"
#include "filtration.hpp"
#include "report.hpp"

namespace ncgl {

struct Triple {
  Operator x;  // x_N, Hermitian
  Martingale y;
  Operator z;  // z_N, Hermitian

  /// Validates that x, z live on the algebra of y and are Hermitian.
  Triple(Operator x_N, Martingale y_, Operator z_N);
};

/// Triple (mu x, mu y, mu z).
Triple scale(const Triple& t, double mu);

struct TestingResult {
  bool pass = false;
  /// tau((I - R_N) x^2) - sum_n sum_{k>n} tau(D_n dy_k R_{n-1} dy_k D_n),
  /// D_n = R_{n-1} - R_n.
  double slack_i = 0;
  /// min over k and sampled projections P in M_k of tau(P z^2 P) - tau(P dy_k^2 P).
  double slack_ii = 0;
  CuculescuDefects defects;
};

/// Conditions (i) and (ii) with R at level 1. The projections tested in (ii)
/// for index k are I, R_j and Q_j (beta = 2) for j <= k, and `samples`
/// random spectral projections of E_k(h) for Gaussian Hermitian h, drawn
/// from Rng::stream(seed, k).
TestingResult check_testing(const Triple& t, std::uint64_t seed = 0, int samples = 50);

struct StrongTestingResult {
  bool pass = false;
  /// min_k min eig(E_k(x^2) - sum_{m>k} E_k(dy_m^2)).
  double margin_i = 0;
  /// min_k min eig(E_k(z^2) - dy_k^2).
  double margin_ii = 0;
};

/// Strong conditions; pass iff both margins are >= -1e-8.
StrongTestingResult check_strong_testing(const Triple& t);

/// StrongPass if the strong conditions hold, else SampledPass or Unverified
/// according to check_testing.
HypothesisFlag testing_flag(const Triple& t, std::uint64_t seed = 0);

/// tau((I - R_N)(y_N - I)^2) <= 2 tau((I - R_N)(x^2 + z^2)).
/// With level l != 1, R is built at level l and I is replaced by l I, which
/// is the same inequality for the triple divided by l, multiplied by l^2.
VerifyReport verify_core(const Triple& t, std::uint64_t seed = 0, double level = 1.0);

/// tau(I - Q_N) <= 4 (beta - 1)^{-2} tau((I - R_N)(x^2 + z^2)). With level
/// l, Q is built at beta l, R at l and the left side is multiplied by l^2.
VerifyReport verify_tail(const Triple& t, double beta, std::uint64_t seed = 0, double level = 1.0);

/// tau(P_N^{B^{k+2}} - P_N^{B^{k+1}}) <= 4 B^{-2k} (B - 1)^{-2}
/// tau((I - P_N^{B^k})(x^2 + z^2)), with P the corrected projections of y.
VerifyReport verify_good_hom(const Triple& t, const CorrectedSeq& P, int k);

struct MomentConstant {
  double C_pB = 0;
  double simplified = 0;
};

/// 2 B^{p/2} (B - 1)^{-1} / (1 - B^{2-p})^{1/2}, the constant for a_N^+-.
double weak_max_constant(double p, double B);
/// C_{p,B} = (2p B^{p-1}(B-1) / (1 - B^{-p}))^{1/p} weak_max_constant(p, B)
/// and 12p / (1 - (1 + 1/p)^{2-p})^{1/2}. Requires p > 2, B > 1.
MomentConstant moment_constant(double p, double B);
/// 12p / (1 - (1 + 1/p)^{2-p})^{1/2}, p > 2.
double main_constant(double p);

struct MomentReport {
  VerifyReport max_plus;    // ||a_N^+||_p
  VerifyReport max_minus;   // ||a_N^-||_p
  VerifyReport final_pB;    // ||y_N||_p against C_{p,B}
  VerifyReport final_main;  // ||y_N||_p against main_constant(p)
  double fubini_plus = 0;
  double fubini_minus = 0;
  double distribution = 0;

  bool pass() const { return max_plus.pass && max_minus.pass && final_pB.pass && final_main.pass; }
};

MomentReport verify_moment(const Triple& t, double p, double B, std::uint64_t seed = 0);

}  // namespace ncgl
