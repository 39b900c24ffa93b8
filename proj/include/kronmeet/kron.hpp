#pragma once

#include "kronmeet/error.hpp"

#include <Eigen/Core>

namespace kronmeet {

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Kronecker product: block (r, c) of the result is a(r, c) * b.
template <typename DerivedA, typename DerivedB>
DenseMatrix<typename DerivedA::Scalar> kron(const Eigen::MatrixBase<DerivedA>& a,
                                            const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  const Eigen::Index br = b.rows(), bc = b.cols();
  DenseMatrix<Scalar> out(a.rows() * br, a.cols() * bc);
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c)
      out.block(r * br, c * bc, br, bc) = a(r, c) * b;
  return out;
}

/// Stacks the columns of `c` into one vector.
template <typename Derived>
DenseVector<typename Derived::Scalar> vec(const Eigen::MatrixBase<Derived>& c) {
  DenseMatrix<typename Derived::Scalar> copy = c;
  return Eigen::Map<const DenseVector<typename Derived::Scalar>>(copy.data(), copy.size());
}

/// Inverse of `vec` for a matrix with `rows` rows.
template <typename Derived>
DenseMatrix<typename Derived::Scalar> unvec(const Eigen::MatrixBase<Derived>& v, Eigen::Index rows) {
  if (rows <= 0 || v.size() % rows != 0) {
    throw Error(ErrorKind::DimensionMismatch, "vector length is not a multiple of the row count");
  }
  DenseVector<typename Derived::Scalar> copy = v;
  return Eigen::Map<const DenseMatrix<typename Derived::Scalar>>(copy.data(), rows, v.size() / rows);
}

}  // namespace kronmeet
