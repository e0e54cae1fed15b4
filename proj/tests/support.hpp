#pragma once

#include <Eigen/SVD>

#include "filtration.hpp"
#include "opalgebra.hpp"
#include "rng.hpp"

namespace ncgl::testing {

inline Operator from_blocks(std::vector<Index> dims, std::vector<double> weights,
                            std::vector<Matrix> blocks) {
  return Operator(make_algebra(TracialAlgebra(std::move(dims), std::move(weights))),
                  std::move(blocks));
}

inline Matrix diag(std::initializer_list<double> v) {
  RealVector d(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) d[i++] = x;
  return d.cast<cplx>().asDiagonal();
}

// Numerical rank of a matrix by SVD.
inline Index svd_rank(const Matrix& m, double tol = 1e-8) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  Index r = 0;
  for (Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > tol) ++r;
  return r;
}

// Orthonormal basis of the range of a Hermitian projection-like matrix.
inline Matrix range_basis(const Matrix& e, double tol = 1e-6) {
  Eigen::JacobiSVD<Matrix> svd(e, Eigen::ComputeThinU);
  Index r = 0;
  for (Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > tol) ++r;
  return svd.matrixU().leftCols(r);
}

// Random projection of rank r in M_d.
inline Matrix random_projection(Index d, Index r, Rng& rng) {
  Matrix g(d, r);
  for (Index q = 0; q < r; ++q)
    for (Index p = 0; p < d; ++p) g(p, q) = rng.complex_gaussian();
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(d, r);
  return q * q.adjoint();
}

inline Matrix random_matrix(Index rows, Index cols, Rng& rng) {
  Matrix g(rows, cols);
  for (Index q = 0; q < cols; ++q)
    for (Index p = 0; p < rows; ++p) g(p, q) = rng.complex_gaussian();
  return g;
}

}  // namespace ncgl::testing
