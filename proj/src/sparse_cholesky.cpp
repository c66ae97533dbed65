#include "spnet/sparse_cholesky.hpp"

#include <Eigen/CholmodSupport>

#include <string>

#include "spnet/error.hpp"

namespace spnet {

namespace {
// Below this size AMD alone is cheap and good enough.
constexpr Index kNestedDissectionSize = 20000;
} // namespace

struct SparseCholesky::Impl {
  Eigen::CholmodDecomposition<SparseMatrix, Eigen::Lower> chol;
};

SparseCholesky::SparseCholesky() = default;
SparseCholesky::~SparseCholesky() = default;
SparseCholesky::SparseCholesky(SparseCholesky&&) noexcept = default;
SparseCholesky& SparseCholesky::operator=(SparseCholesky&&) noexcept = default;

SparseCholesky::SparseCholesky(const SparseMatrix& A) { factorize(A); }

void SparseCholesky::factorize(const SparseMatrix& A) {
  if (A.rows() != A.cols()) throw ShapeError("Cholesky needs a square matrix");
  impl_.reset();
  size_ = static_cast<Index>(A.rows());
  factor_nnz_ = 0.0;
  if (size_ == 0) {
    impl_ = std::make_unique<Impl>();
    return;
  }
  auto impl = std::make_unique<Impl>();
  impl->chol.cholmod().print = 0;
  impl->chol.setMode(Eigen::CholmodAuto);
  if (size_ >= kNestedDissectionSize) {
    cholmod_common& common = impl->chol.cholmod();
    common.nmethods = 2;
    common.method[0].ordering = CHOLMOD_AMD;
    common.method[1].ordering = CHOLMOD_METIS;
  }
  impl->chol.compute(A);
  if (impl->chol.info() != Eigen::Success)
    throw SingularError("Cholesky factorization failed on a " + std::to_string(size_) + "x" +
                        std::to_string(size_) + " matrix (not positive definite)");
  factor_nnz_ = impl->chol.cholmod().lnz;
  cholmod_free_work(&impl->chol.cholmod());
  impl_ = std::move(impl);
}

Vector SparseCholesky::solve(const Vector& b) const {
  if (!impl_) throw Error("Cholesky solve before factorization");
  if (b.size() != size_) throw ShapeError("right-hand side size does not match the factorization");
  if (size_ == 0) return Vector();
  Vector x = impl_->chol.solve(b);
  return x;
}

Eigen::MatrixXd SparseCholesky::solve(const Eigen::MatrixXd& B) const {
  if (!impl_) throw Error("Cholesky solve before factorization");
  if (B.rows() != size_) throw ShapeError("right-hand side size does not match the factorization");
  if (size_ == 0) return Eigen::MatrixXd(0, B.cols());
  Eigen::MatrixXd X = impl_->chol.solve(B);
  return X;
}

} // namespace spnet
