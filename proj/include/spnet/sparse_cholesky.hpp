#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <memory>

#include "spnet/network.hpp"

namespace spnet {

/// Sparse Cholesky factorization of a symmetric positive definite matrix
/// (fill-reducing ordering, supernodal when profitable). Only the lower
/// triangle of the input is read. Solves with one factorization are not
/// safe to run concurrently; distinct factorizations are independent.
class SparseCholesky {
public:
  SparseCholesky();
  explicit SparseCholesky(const SparseMatrix& A);
  ~SparseCholesky();
  SparseCholesky(SparseCholesky&&) noexcept;
  SparseCholesky& operator=(SparseCholesky&&) noexcept;

  /// Throws SingularError when the matrix is not positive definite.
  void factorize(const SparseMatrix& A);

  bool ready() const { return static_cast<bool>(impl_); }
  Index size() const { return size_; }
  /// Nonzeros in the triangular factor.
  double factor_nonzeros() const { return factor_nnz_; }

  Vector solve(const Vector& b) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& B) const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  Index size_ = 0;
  double factor_nnz_ = 0.0;
};

} // namespace spnet
