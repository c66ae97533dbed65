#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "spnet/network.hpp"

namespace spnet {

/// Collects lower-triangle contributions of a symmetric matrix and returns the
/// full matrix with the upper triangle mirrored from the lower one, so the
/// result equals its transpose bit for bit. Contributions are flushed into a
/// compressed accumulator in bounded batches to keep peak memory low.
class LowerAssembler {
public:
  explicit LowerAssembler(Index size, std::size_t batch = std::size_t{1} << 23);

  /// Adds value at (row, col); entries above the diagonal are moved below it.
  void add(Index row, Index col, double value);

  SparseMatrix finish();

private:
  void flush();

  Index size_;
  std::size_t batch_;
  std::vector<Eigen::Triplet<double>> pending_;
  SparseMatrix lower_;
};

/// A(rows, cols) for sorted, duplicate-free index lists.
SparseMatrix submatrix(const SparseMatrix& A, std::span<const Index> rows, std::span<const Index> cols);

/// Principal submatrix A(dofs, dofs).
inline SparseMatrix principal_submatrix(const SparseMatrix& A, std::span<const Index> dofs) {
  return submatrix(A, dofs, dofs);
}

/// Coordinate text export ("%%MatrixMarket matrix coordinate real general",
/// 1-based indices, full precision).
void write_matrix_market(std::ostream& out, const SparseMatrix& A);

} // namespace spnet
