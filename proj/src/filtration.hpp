#pragma once

// Structured filtrations E_0 <= E_1 <= ... <= E_N on tensor products of
// tracial factors, the martingales they generate and the associated square
// functions.
//
// The algebra of a filtration is a tensor product F_0 (x) F_1 (x) ... of
// factors. Every level assigns one factor-local conditional expectation to
// each factor; the level's expectation is their tensor product.

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "opalgebra.hpp"
#include "rng.hpp"

namespace ncgl {

namespace ce {
/// x -> tau(x)/tau(I) I on the factor.
struct Trivial {};
/// Identity map.
struct Full {};
/// Corner expectation on a single block M_d: keeps the upper-left k x k
/// corner and replaces the remaining diagonal by its average.
struct Corner {
  Index k = 0;
};
/// Classical expectation on 2^depth sign patterns given the first n signs.
struct RademacherAverage {
  int n = 0;
};
}  // namespace ce

using FactorCE = std::variant<ce::Trivial, ce::Full, ce::Corner, ce::RademacherAverage>;

/// Tensor product of factor-local expectations, one entry per factor.
struct CEDescriptor {
  std::vector<FactorCE> factors;
};

std::string describe(const FactorCE& d);
std::string describe(const CEDescriptor& d);

class Filtration {
 public:
  /// Validates factor/descriptor compatibility and that the levels increase.
  Filtration(std::vector<TracialAlgebra> factors, std::vector<CEDescriptor> levels,
             std::string name = "custom");

  const AlgebraPtr& algebra() const { return algebra_; }
  const std::vector<TracialAlgebra>& factors() const { return factors_; }
  const std::vector<CEDescriptor>& levels() const { return levels_; }
  const std::string& name() const { return name_; }

  /// Index of the last level.
  int N() const { return static_cast<int>(levels_.size()) - 1; }

  /// E_n(x); n = -1 is aliased to level 0.
  Operator cond_exp(int n, const Operator& x) const;

  /// Linearly independent spanning set of the range of E_n.
  std::vector<Operator> range_basis(int n) const;

  /// New filtration on `factor` (x) (this algebra); `front_levels[n]` is the
  /// descriptor of the new factor at level n.
  Filtration prepend(const TracialAlgebra& factor, const std::vector<FactorCE>& front_levels,
                     std::string name) const;

 private:
  int clamp_level(int n) const;

  std::vector<TracialAlgebra> factors_;
  std::vector<CEDescriptor> levels_;
  std::string name_;
  AlgebraPtr algebra_;
  // Products of the factors strictly left / right of factor f.
  std::vector<TracialAlgebra> left_;
  std::vector<TracialAlgebra> right_;
};

using FiltrationPtr = std::shared_ptr<const Filtration>;

Operator cond_exp(const Filtration& f, int n, const Operator& x);

/// Orthogonal projection of x onto span(range_basis(n)) in the inner product
/// tau(a* b), by solving the Gram system. Independent of cond_exp.
Operator ce_oracle(const Filtration& f, int n, const Operator& x);

/// Named filtration families.
namespace families {
/// M_d with E_0 = normalized trace and E_1 = identity.
Filtration trivial_full(Index d);
/// Junge-Xu corner filtration on M_d with levels 0..d.
Filtration corner(Index d);
/// Classical dyadic filtration on 2^depth sign patterns, levels 0..depth.
Filtration rademacher(int depth);
/// L^infty(2^depth signs) (x) M_m; level 0 is the trivial algebra, level
/// n >= 1 conditions on the first n signs and keeps the matrix factor.
Filtration rademacher_matrix(int depth, Index m);
/// L^infty(2^depth signs) (x) M_m with level n = RademacherAverage(n) (x) Full.
Filtration rademacher_full(int depth, Index m);
/// L^infty(2^depth signs) (x) M_m with level n = RademacherAverage(min(n, depth))
/// (x) Corner(min(n, m)); there are max(depth, m) + 1 levels.
Filtration rademacher_corner(int depth, Index m);
}  // namespace families

FiltrationPtr share(Filtration f);

/// Adapted sequence x_0..x_N with x_n = E_n(x_N).
struct Martingale {
  FiltrationPtr filtration;
  std::vector<Operator> values;

  int N() const { return static_cast<int>(values.size()) - 1; }
  const Operator& final_value() const { return values.back(); }
  /// dx_0 = x_0, dx_n = x_n - x_{n-1}.
  Operator diff(int n) const;
  std::vector<Operator> diffs() const;
  bool hermitian() const;
};

Martingale martingale_from_final(const FiltrationPtr& f, const Operator& final_value);
/// Martingale with the given difference sequence (partial sums).
Martingale martingale_from_diffs(const FiltrationPtr& f, const std::vector<Operator>& diffs);

/// Largest violation of adaptedness and of E_n(x_{n+1}) = x_n.
double martingale_defect(const Martingale& m);

struct SquareFunctions {
  Operator S;  // (sum dx_k* dx_k)^{1/2}
  Operator s;  // (sum E_{k-1}(dx_k* dx_k))^{1/2}, E_{-1} = E_0
  Operator z;  // (sum |dx_k|^p)^{1/p}
};

Operator square_function(const Martingale& m);
Operator conditioned_square_function(const Martingale& m);
/// (sum_k |dx_k|^p)^{1/p}, p >= 2.
Operator diagonal_p_function(const Martingale& m, double p);
SquareFunctions square_functions(const Martingale& m, double p);

/// Complex Gaussian entries, Hermitized.
Operator random_hermitian(const AlgebraPtr& algebra, Rng& rng);
/// Complex Gaussian entries.
Operator random_operator(const AlgebraPtr& algebra, Rng& rng);
/// Random PSD operator g* g / dim.
Operator random_psd(const AlgebraPtr& algebra, Rng& rng);

/// Martingale of a random Hermitian final value, normalized to ||x_N||_p = 1
/// when `normalize_p` is set.
Martingale random_martingale(const FiltrationPtr& f, Rng& rng,
                             std::optional<double> normalize_p = std::nullopt);

}  // namespace ncgl
