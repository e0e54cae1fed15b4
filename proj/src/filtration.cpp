#include "filtration.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <bit>
#include <sstream>

#include "errors.hpp"

namespace ncgl {

namespace {

template <class... Fs>
struct Overload : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overload(Fs...) -> Overload<Fs...>;

const TracialAlgebra kUnit = TracialAlgebra::matrix(1);

TracialAlgebra product_of(const std::vector<TracialAlgebra>& fs, std::size_t from, std::size_t to) {
  TracialAlgebra acc = kUnit;
  for (std::size_t i = from; i < to; ++i) acc = tensor(acc, fs[i]);
  return acc;
}

// Depth of a factor of the form L^infty(2^depth signs), or -1.
int rademacher_depth(const TracialAlgebra& f) {
  const std::size_t n = f.num_blocks();
  if (!std::has_single_bit(n)) return -1;
  for (std::size_t i = 0; i < n; ++i) {
    if (f.dim(i) != 1 || f.weight(i) != f.weight(0)) return -1;
  }
  return std::countr_zero(n);
}

bool is_single_block(const TracialAlgebra& f) { return f.num_blocks() == 1; }

// Position of a descriptor in the increasing chain of subalgebras available on
// its factor; Full is the top of every chain.
int rank_of(const FactorCE& d, const TracialAlgebra& f) {
  const int top = is_single_block(f) ? static_cast<int>(f.dim(0))
                  : rademacher_depth(f) >= 0 ? rademacher_depth(f)
                                             : 1;
  return std::visit(Overload{
                        [](const ce::Trivial&) { return 0; },
                        [&](const ce::Full&) { return top; },
                        [&](const ce::Corner& c) {
                          require(is_single_block(f), ErrorCode::Structural,
                                  "Corner expectation needs a single matrix block");
                          require(c.k >= 0 && c.k <= f.dim(0), ErrorCode::Structural,
                                  "Corner level outside [0, d]");
                          return static_cast<int>(c.k);
                        },
                        [&](const ce::RademacherAverage& r) {
                          const int depth = rademacher_depth(f);
                          require(depth >= 0, ErrorCode::Structural,
                                  "RademacherAverage needs a factor of 2^depth equal scalar blocks");
                          require(r.n >= 0 && r.n <= depth, ErrorCode::Structural,
                                  "RademacherAverage level outside [0, depth]");
                          return r.n;
                        },
                    },
                    d);
}

using FactorElement = std::vector<Matrix>;

void apply_trivial(const TracialAlgebra& f, FactorElement& e) {
  cplx t = 0;
  for (std::size_t i = 0; i < e.size(); ++i) t += f.weight(i) * e[i].trace();
  t /= f.trace_identity();
  for (auto& b : e) {
    b.setZero();
    b.diagonal().setConstant(t);
  }
}

void apply_corner(Index k, FactorElement& e) {
  Matrix& m = e[0];
  const Index d = m.rows();
  if (k >= d) return;
  const cplx mean = m.diagonal().tail(d - k).mean();
  const Matrix corner = m.topLeftCorner(k, k);
  m.setZero();
  m.topLeftCorner(k, k) = corner;
  m.diagonal().tail(d - k).setConstant(mean);
}

void apply_rademacher(int n, FactorElement& e, std::vector<cplx>& sums) {
  const std::size_t groups = std::size_t{1} << n;
  const std::size_t mask = groups - 1;
  const double count = static_cast<double>(e.size() / groups);
  sums.assign(groups, 0.0);
  for (std::size_t s = 0; s < e.size(); ++s) sums[s & mask] += e[s](0, 0);
  for (std::size_t s = 0; s < e.size(); ++s) e[s](0, 0) = sums[s & mask] / count;
}

bool acts_as_identity(const FactorCE& d, const TracialAlgebra& f) {
  if (std::holds_alternative<ce::Full>(d)) return true;
  if (const auto* c = std::get_if<ce::Corner>(&d)) return c->k >= f.dim(0);
  if (const auto* r = std::get_if<ce::RademacherAverage>(&d)) return r->n == rademacher_depth(f);
  return false;
}

// Spanning set of the range of a factor-local expectation.
std::vector<FactorElement> factor_range_basis(const FactorCE& d, const TracialAlgebra& f) {
  std::vector<FactorElement> out;
  auto zero = [&] {
    FactorElement e;
    for (Index dim : f.dims()) e.push_back(Matrix::Zero(dim, dim));
    return e;
  };
  auto full = [&] {
    for (std::size_t i = 0; i < f.num_blocks(); ++i) {
      for (Index p = 0; p < f.dim(i); ++p) {
        for (Index q = 0; q < f.dim(i); ++q) {
          FactorElement e = zero();
          e[i](p, q) = 1.0;
          out.push_back(std::move(e));
        }
      }
    }
  };
  if (acts_as_identity(d, f)) {
    full();
    return out;
  }
  std::visit(Overload{
                 [&](const ce::Trivial&) {
                   FactorElement e = zero();
                   for (auto& b : e) b.setIdentity();
                   out.push_back(std::move(e));
                 },
                 [&](const ce::Full&) { full(); },
                 [&](const ce::Corner& c) {
                   const Index dim = f.dim(0);
                   FactorElement rest = zero();
                   rest[0].diagonal().tail(dim - c.k).setOnes();
                   out.push_back(std::move(rest));
                   for (Index p = 0; p < c.k; ++p) {
                     for (Index q = 0; q < c.k; ++q) {
                       FactorElement e = zero();
                       e[0](p, q) = 1.0;
                       out.push_back(std::move(e));
                     }
                   }
                 },
                 [&](const ce::RademacherAverage& r) {
                   const std::size_t groups = std::size_t{1} << r.n;
                   for (std::size_t g = 0; g < groups; ++g) {
                     FactorElement e = zero();
                     for (std::size_t s = 0; s < f.num_blocks(); ++s)
                       if ((s & (groups - 1)) == g) e[s](0, 0) = 1.0;
                     out.push_back(std::move(e));
                   }
                 },
             },
             d);
  return out;
}

}  // namespace

std::string describe(const FactorCE& d) {
  return std::visit(Overload{
                        [](const ce::Trivial&) { return std::string("Trivial"); },
                        [](const ce::Full&) { return std::string("Full"); },
                        [](const ce::Corner& c) { return "Corner(" + std::to_string(c.k) + ")"; },
                        [](const ce::RademacherAverage& r) {
                          return "RademacherAverage(" + std::to_string(r.n) + ")";
                        },
                    },
                    d);
}

std::string describe(const CEDescriptor& d) {
  std::string s;
  for (std::size_t i = 0; i < d.factors.size(); ++i) {
    if (i) s += " (x) ";
    s += describe(d.factors[i]);
  }
  return s;
}

Filtration::Filtration(std::vector<TracialAlgebra> factors, std::vector<CEDescriptor> levels,
                       std::string name)
    : factors_(std::move(factors)), levels_(std::move(levels)), name_(std::move(name)) {
  require(!factors_.empty(), ErrorCode::Structural, "filtration needs at least one factor");
  require(!levels_.empty(), ErrorCode::Structural, "filtration needs at least one level");
  std::vector<int> previous(factors_.size(), -1);
  for (std::size_t n = 0; n < levels_.size(); ++n) {
    const auto& lv = levels_[n].factors;
    require(lv.size() == factors_.size(), ErrorCode::Structural,
            "filtration level " + std::to_string(n) + " has the wrong number of factor descriptors");
    for (std::size_t f = 0; f < factors_.size(); ++f) {
      const int r = rank_of(lv[f], factors_[f]);
      require(r >= previous[f], ErrorCode::Structural,
              "filtration levels are not increasing at level " + std::to_string(n));
      previous[f] = r;
    }
  }
  TracialAlgebra all = factors_[0];
  for (std::size_t f = 1; f < factors_.size(); ++f) all = tensor(all, factors_[f]);
  algebra_ = make_algebra(std::move(all));
  for (std::size_t f = 0; f < factors_.size(); ++f) {
    left_.push_back(product_of(factors_, 0, f));
    right_.push_back(product_of(factors_, f + 1, factors_.size()));
  }
}

int Filtration::clamp_level(int n) const {
  if (n == -1) return 0;
  require(n >= 0 && n <= N(), ErrorCode::Domain,
          "conditional expectation level " + std::to_string(n) + " outside [-1, " +
              std::to_string(N()) + "]");
  return n;
}

Operator Filtration::cond_exp(int n, const Operator& x) const {
  n = clamp_level(n);
  require(x.algebra() == *algebra_, ErrorCode::Structural,
          "conditional expectation: operator is not on the filtration's algebra");
  const bool herm = x.hermitian();
  std::vector<Matrix> blocks = x.blocks();
  FactorElement elem;
  std::vector<cplx> scratch;
  for (std::size_t f = 0; f < factors_.size(); ++f) {
    const FactorCE& d = levels_[n].factors[f];
    const TracialAlgebra& F = factors_[f];
    if (acts_as_identity(d, F)) continue;
    const TracialAlgebra& L = left_[f];
    const TracialAlgebra& R = right_[f];
    const std::size_t nf = F.num_blocks();
    const std::size_t nr = R.num_blocks();
    if (const auto* ra = std::get_if<ce::RademacherAverage>(&d)) {
      // Commutative factor: average whole blocks over the free sign bits.
      const std::size_t groups = std::size_t{1} << ra->n;
      const std::size_t mask = groups - 1;
      const double count = static_cast<double>(nf / groups);
      for (std::size_t l = 0; l < L.num_blocks(); ++l)
        for (std::size_t r = 0; r < nr; ++r) {
          std::vector<Matrix> sums(groups, Matrix::Zero(blocks[l * nf * nr + r].rows(), blocks[l * nf * nr + r].cols()));
          for (std::size_t i = 0; i < nf; ++i) sums[i & mask] += blocks[(l * nf + i) * nr + r];
          for (auto& m : sums) m /= count;
          for (std::size_t i = 0; i < nf; ++i) blocks[(l * nf + i) * nr + r] = sums[i & mask];
        }
      continue;
    }
    elem.resize(nf);
    for (std::size_t i = 0; i < nf; ++i) elem[i].resize(F.dim(i), F.dim(i));
    for (std::size_t l = 0; l < L.num_blocks(); ++l) {
      const Index ld = L.dim(l);
      for (std::size_t r = 0; r < nr; ++r) {
        const Index rd = R.dim(r);
        for (Index pl = 0; pl < ld; ++pl)
          for (Index ql = 0; ql < ld; ++ql)
            for (Index pr = 0; pr < rd; ++pr)
              for (Index qr = 0; qr < rd; ++qr) {
                for (std::size_t i = 0; i < nf; ++i) {
                  const Index a = F.dim(i);
                  const Matrix& src = blocks[(l * nf + i) * nr + r];
                  for (Index p = 0; p < a; ++p)
                    for (Index q = 0; q < a; ++q)
                      elem[i](p, q) = src((pl * a + p) * rd + pr, (ql * a + q) * rd + qr);
                }
                std::visit(Overload{
                               [&](const ce::Trivial&) { apply_trivial(F, elem); },
                               [](const ce::Full&) {},
                               [&](const ce::Corner& c) { apply_corner(c.k, elem); },
                               [&](const ce::RademacherAverage& ra) {
                                 apply_rademacher(ra.n, elem, scratch);
                               },
                           },
                           d);
                for (std::size_t i = 0; i < nf; ++i) {
                  const Index a = F.dim(i);
                  Matrix& dst = blocks[(l * nf + i) * nr + r];
                  for (Index p = 0; p < a; ++p)
                    for (Index q = 0; q < a; ++q)
                      dst((pl * a + p) * rd + pr, (ql * a + q) * rd + qr) = elem[i](p, q);
                }
              }
      }
    }
  }
  Operator out(algebra_, std::move(blocks));
  if (herm) out.mark_hermitian();
  return out;
}

std::vector<Operator> Filtration::range_basis(int n) const {
  n = clamp_level(n);
  // Build product elements factor by factor with algebras F_0 (x) ... (x) F_f.
  AlgebraPtr prefix = make_algebra(factors_[0]);
  std::vector<Operator> acc;
  for (auto& e : factor_range_basis(levels_[n].factors[0], factors_[0]))
    acc.emplace_back(prefix, std::move(e), true);
  for (std::size_t f = 1; f < factors_.size(); ++f) {
    AlgebraPtr fac = make_algebra(factors_[f]);
    AlgebraPtr next =
        f + 1 == factors_.size() ? algebra_ : make_algebra(tensor(*prefix, factors_[f]));
    std::vector<Operator> local;
    for (auto& e : factor_range_basis(levels_[n].factors[f], factors_[f]))
      local.emplace_back(fac, std::move(e), true);
    std::vector<Operator> grown;
    grown.reserve(acc.size() * local.size());
    for (const auto& a : acc)
      for (const auto& b : local) grown.push_back(kron(a, b, next));
    acc = std::move(grown);
    prefix = next;
  }
  if (factors_.size() == 1) {
    for (auto& a : acc) a = Operator(algebra_, a.blocks());
  }
  return acc;
}

Filtration Filtration::prepend(const TracialAlgebra& factor,
                               const std::vector<FactorCE>& front_levels, std::string name) const {
  require(front_levels.size() == levels_.size(), ErrorCode::Structural,
          "prepend: one descriptor per level is required");
  std::vector<TracialAlgebra> fs;
  fs.push_back(factor);
  fs.insert(fs.end(), factors_.begin(), factors_.end());
  std::vector<CEDescriptor> lv;
  for (std::size_t n = 0; n < levels_.size(); ++n) {
    CEDescriptor d;
    d.factors.push_back(front_levels[n]);
    d.factors.insert(d.factors.end(), levels_[n].factors.begin(), levels_[n].factors.end());
    lv.push_back(std::move(d));
  }
  return Filtration(std::move(fs), std::move(lv), std::move(name));
}

Operator cond_exp(const Filtration& f, int n, const Operator& x) { return f.cond_exp(n, x); }

Operator ce_oracle(const Filtration& f, int n, const Operator& x) {
  const auto& alg = *f.algebra();
  require(x.algebra() == alg, ErrorCode::Structural,
          "ce_oracle: operator is not on the filtration's algebra");
  const std::vector<Operator> basis = f.range_basis(n);
  Index len = 0;
  for (Index d : alg.dims()) len += d * d;
  auto vectorize = [&](const Operator& a) {
    Eigen::VectorXcd v(len);
    Index pos = 0;
    for (std::size_t i = 0; i < alg.num_blocks(); ++i) {
      const double s = std::sqrt(alg.weight(i));
      const Index d = alg.dim(i);
      for (Index q = 0; q < d; ++q)
        for (Index p = 0; p < d; ++p) v[pos++] = s * a.block(i)(p, q);
    }
    return v;
  };
  Matrix V(len, static_cast<Index>(basis.size()));
  for (std::size_t j = 0; j < basis.size(); ++j) V.col(static_cast<Index>(j)) = vectorize(basis[j]);
  const Matrix G = V.adjoint() * V;
  Eigen::SelfAdjointEigenSolver<Matrix> es(G, Eigen::EigenvaluesOnly);
  const double gmax = es.eigenvalues().maxCoeff();
  const double gmin = es.eigenvalues().minCoeff();
  require(gmax > 0 && gmin > 1e-12 * gmax, ErrorCode::NumericalRank,
          "ce_oracle: Gram matrix of the range basis is singular");
  const Eigen::VectorXcd rhs = V.adjoint() * vectorize(x);
  const Eigen::VectorXcd c = G.ldlt().solve(rhs);
  const Eigen::VectorXcd proj = V * c;
  std::vector<Matrix> blocks;
  Index pos = 0;
  for (std::size_t i = 0; i < alg.num_blocks(); ++i) {
    const double s = std::sqrt(alg.weight(i));
    const Index d = alg.dim(i);
    Matrix b(d, d);
    for (Index q = 0; q < d; ++q)
      for (Index p = 0; p < d; ++p) b(p, q) = proj[pos++] / s;
    blocks.push_back(std::move(b));
  }
  Operator out(f.algebra(), std::move(blocks));
  if (x.hermitian()) out.mark_hermitian();
  return out;
}

namespace families {

Filtration trivial_full(Index d) {
  return Filtration({TracialAlgebra::matrix(d)}, {{{ce::Trivial{}}}, {{ce::Full{}}}},
                    "trivial-full(" + std::to_string(d) + ")");
}

Filtration corner(Index d) {
  require(d >= 1, ErrorCode::Domain, "corner filtration needs d >= 1");
  std::vector<CEDescriptor> levels;
  for (Index k = 0; k <= d; ++k) levels.push_back({{ce::Corner{k}}});
  return Filtration({TracialAlgebra::matrix(d)}, std::move(levels),
                    "corner(" + std::to_string(d) + ")");
}

Filtration rademacher(int depth) {
  std::vector<CEDescriptor> levels;
  for (int n = 0; n <= depth; ++n) levels.push_back({{ce::RademacherAverage{n}}});
  return Filtration({TracialAlgebra::rademacher(depth)}, std::move(levels),
                    "rademacher(" + std::to_string(depth) + ")");
}

Filtration rademacher_matrix(int depth, Index m) {
  require(depth >= 1 && m >= 1, ErrorCode::Domain, "rademacher_matrix needs depth, m >= 1");
  std::vector<CEDescriptor> levels;
  levels.push_back({{ce::RademacherAverage{0}, ce::Trivial{}}});
  for (int n = 1; n <= depth; ++n) levels.push_back({{ce::RademacherAverage{n}, ce::Full{}}});
  return Filtration({TracialAlgebra::rademacher(depth), TracialAlgebra::matrix(m)},
                    std::move(levels),
                    "rademacher-matrix(" + std::to_string(depth) + "," + std::to_string(m) + ")");
}

Filtration rademacher_full(int depth, Index m) {
  require(depth >= 0 && m >= 1, ErrorCode::Domain, "rademacher_full needs depth >= 0, m >= 1");
  std::vector<CEDescriptor> levels;
  for (int n = 0; n <= depth; ++n) levels.push_back({{ce::RademacherAverage{n}, ce::Full{}}});
  return Filtration({TracialAlgebra::rademacher(depth), TracialAlgebra::matrix(m)},
                    std::move(levels),
                    "rademacher-full(" + std::to_string(depth) + "," + std::to_string(m) + ")");
}

Filtration rademacher_corner(int depth, Index m) {
  require(depth >= 0 && m >= 1, ErrorCode::Domain, "rademacher_corner needs depth >= 0, m >= 1");
  const int top = std::max(depth, static_cast<int>(m));
  std::vector<CEDescriptor> levels;
  for (int n = 0; n <= top; ++n) {
    levels.push_back({{ce::RademacherAverage{std::min(n, depth)},
                       ce::Corner{std::min<Index>(n, m)}}});
  }
  return Filtration({TracialAlgebra::rademacher(depth), TracialAlgebra::matrix(m)},
                    std::move(levels),
                    "rademacher-corner(" + std::to_string(depth) + "," + std::to_string(m) + ")");
}

}  // namespace families

FiltrationPtr share(Filtration f) { return std::make_shared<const Filtration>(std::move(f)); }

Operator Martingale::diff(int n) const {
  require(n >= 0 && n <= N(), ErrorCode::Domain, "martingale difference index out of range");
  if (n == 0) return values[0];
  return values[n] - values[n - 1];
}

std::vector<Operator> Martingale::diffs() const {
  std::vector<Operator> d;
  d.reserve(values.size());
  for (int n = 0; n <= N(); ++n) d.push_back(diff(n));
  return d;
}

bool Martingale::hermitian() const {
  return std::all_of(values.begin(), values.end(), [](const Operator& v) { return v.hermitian(); });
}

Martingale martingale_from_final(const FiltrationPtr& f, const Operator& final_value) {
  Martingale m{f, {}};
  m.values.reserve(f->N() + 1);
  for (int n = 0; n < f->N(); ++n) m.values.push_back(f->cond_exp(n, final_value));
  Operator last = final_value;
  if (last.algebra_ptr() != f->algebra()) last = Operator(f->algebra(), last.blocks(), last.hermitian());
  m.values.push_back(std::move(last));
  return m;
}

Martingale martingale_from_diffs(const FiltrationPtr& f, const std::vector<Operator>& diffs) {
  require(static_cast<int>(diffs.size()) == f->N() + 1, ErrorCode::Structural,
          "martingale_from_diffs: need one difference per level");
  Martingale m{f, {}};
  for (std::size_t n = 0; n < diffs.size(); ++n) {
    Operator d(f->algebra(), diffs[n].blocks(), diffs[n].hermitian());
    if (n == 0) {
      m.values.push_back(std::move(d));
    } else {
      m.values.push_back(m.values.back() + d);
    }
  }
  return m;
}

double martingale_defect(const Martingale& m) {
  double worst = 0;
  for (int n = 0; n <= m.N(); ++n) {
    worst = std::max(worst, max_diff(m.filtration->cond_exp(n, m.values[n]), m.values[n]));
    if (n < m.N())
      worst = std::max(worst, max_diff(m.filtration->cond_exp(n, m.values[n + 1]), m.values[n]));
  }
  return worst;
}

namespace {
Operator abs_square(const Operator& d) {
  Operator s = d.adjoint() * d;
  return s.mark_hermitian();
}
}  // namespace

Operator square_function(const Martingale& m) {
  Operator acc = Operator::zero(m.filtration->algebra());
  for (int k = 0; k <= m.N(); ++k) acc += abs_square(m.diff(k));
  return sqrt_psd(acc.mark_hermitian());
}

Operator conditioned_square_function(const Martingale& m) {
  Operator acc = Operator::zero(m.filtration->algebra());
  for (int k = 0; k <= m.N(); ++k) acc += m.filtration->cond_exp(k - 1, abs_square(m.diff(k)));
  return sqrt_psd(acc.mark_hermitian());
}

Operator diagonal_p_function(const Martingale& m, double p) {
  require(p >= 2, ErrorCode::Domain, "diagonal p-function needs p >= 2");
  Operator acc = Operator::zero(m.filtration->algebra());
  for (int k = 0; k <= m.N(); ++k) acc += abs_pow(m.diff(k), p);
  return pow_psd(acc.mark_hermitian(), 1.0 / p);
}

SquareFunctions square_functions(const Martingale& m, double p) {
  return {square_function(m), conditioned_square_function(m), diagonal_p_function(m, p)};
}

Operator random_operator(const AlgebraPtr& algebra, Rng& rng) {
  std::vector<Matrix> blocks;
  for (Index d : algebra->dims()) {
    Matrix b(d, d);
    for (Index q = 0; q < d; ++q)
      for (Index p = 0; p < d; ++p) b(p, q) = rng.complex_gaussian();
    blocks.push_back(std::move(b));
  }
  return Operator(algebra, std::move(blocks));
}

Operator random_hermitian(const AlgebraPtr& algebra, Rng& rng) {
  Operator x = random_operator(algebra, rng);
  return x.mark_hermitian();
}

Operator random_psd(const AlgebraPtr& algebra, Rng& rng) {
  Operator g = random_operator(algebra, rng);
  std::vector<Matrix> blocks;
  for (const auto& b : g.blocks()) blocks.push_back(b.adjoint() * b / static_cast<double>(b.rows()));
  Operator out(algebra, std::move(blocks));
  return out.mark_hermitian();
}

Martingale random_martingale(const FiltrationPtr& f, Rng& rng, std::optional<double> normalize_p) {
  Operator x = random_hermitian(f->algebra(), rng);
  if (normalize_p) {
    const double nrm = schatten_norm(x, *normalize_p);
    if (nrm > 0) x *= 1.0 / nrm;
  }
  return martingale_from_final(f, x);
}

}  // namespace ncgl
