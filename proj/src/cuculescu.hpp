#pragma once

// Cuculescu projections R_n, their two-parameter corrections P_n^{B^k} and
// the weak maximal operators a_N^+ and a_N^-.

#include <vector>

#include "filtration.hpp"
#include "opalgebra.hpp"

namespace ncgl {

/// Worst observed violation of the structural properties of a Cuculescu
/// sequence. Tolerances are relative to 1 + ||R_{n-1} y_n R_{n-1} / level||.
struct CuculescuDefects {
  double adapted = 0;     // ||E_n(R_n) - R_n||
  double decreasing = 0;  // -min eig(R_{n-1} - R_n)
  double commuting = 0;   // ||[R_n, R_{n-1} y_n R_{n-1}]||
  double bounded = 0;     // -min eig(R_n - R_n y_n R_n)
  double snap_drift = 0;  // distance of the raw product to a projection

  bool ok() const;
  void merge(const CuculescuDefects& o);
};

struct CuculescuSeq {
  double level = 1.0;
  /// proj[0] = R_{-1} = I and proj[n + 1] = R_n.
  std::vector<Projection> proj;
  CuculescuDefects defects;

  int N() const { return static_cast<int>(proj.size()) - 2; }
  /// R_n for n >= -1.
  const Projection& R(int n) const { return proj.at(static_cast<std::size_t>(n + 1)); }
  const Projection& final_projection() const { return proj.back(); }
};

/// R_{-1} = I, R_n = R_{n-1} I_{(-inf,1)}(R_{n-1} (y_n / level) R_{n-1}).
CuculescuSeq cuculescu_R(const Martingale& y, double level);
/// Q_{-1} = I, Q_n = Q_{n-1} I_{(-inf,beta)}(Q_{n-1} y_n Q_{n-1}).
CuculescuSeq cuculescu_Q(const Martingale& y, double beta);

struct CorrectedSeq {
  double base = 2.0;
  int k_min = 0;
  int k_top = 0;
  /// R^{B^k} for k in [k_min, k_top].
  std::vector<CuculescuSeq> R;
  /// P[k - k_min][n] = P_n^{B^k}.
  std::vector<std::vector<Projection>> P;

  /// P_n^{B^k}; identity for k > k_top. Requires k >= k_min.
  const Projection& at(int n, int k) const;
  int N() const { return static_cast<int>(P.front().size()) - 1; }
  CuculescuDefects defects() const;
};

/// Largest k such that B^k <= 1e-8 (1 + max_norm).
int corrected_k_min(double max_norm, double B);
/// Smallest level index beyond which every R^{B^l} is the identity.
int corrected_k_top(double max_norm, double B);

CorrectedSeq corrected_P(const Martingale& y, double B);

/// Worst violation of P_n^{B^l} <= P_m^{B^k} over adjacent (n, k) pairs.
double corrected_monotonicity_defect(const CorrectedSeq& c);

struct WeakMax {
  Operator a;
  /// P_N^{B^{k_min}}: spectral mass below B^{k_min}, where a vanishes.
  Projection residual;
  CorrectedSeq seq;
};

/// a_N^+ = sum_k B^k (P_N^{B^{k+1}} - P_N^{B^k}) for sign = +1, and the same
/// construction on -y for sign = -1.
WeakMax weak_max(const Martingale& y, double B, int sign);

/// Both sides of the summation identity for the exponent q = p - 2 > 0:
/// sum_{k >= k_min} B^{kq} (I - P_N^{B^k}) plus the geometric tail over
/// k < k_min, against (a_N^+)^q / (1 - B^{-q}). Returns the relative
/// difference in Hilbert-Schmidt norm.
double fubini_defect(const WeakMax& w, double p);

/// Largest violation of tau(I_[B^k,inf)(|y_N|)) <= tau(I_[B^k,inf)(a^+)) +
/// tau(I_[B^k,inf)(a^-)) over the k grid.
double distribution_defect(const Martingale& y, const WeakMax& plus, const WeakMax& minus);

Martingale negate(const Martingale& y);
Martingale scale(const Martingale& y, double s);

}  // namespace ncgl
