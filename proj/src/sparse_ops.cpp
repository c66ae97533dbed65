#include "spnet/sparse_ops.hpp"

#include <cstdio>
#include <ostream>
#include <utility>

#include "spnet/error.hpp"

namespace spnet {

LowerAssembler::LowerAssembler(Index size, std::size_t batch) : size_(size), batch_(batch), lower_(size, size) {
  pending_.reserve(std::min<std::size_t>(batch_, 1u << 16));
}

void LowerAssembler::add(Index row, Index col, double value) {
  if (row < col) std::swap(row, col);
  pending_.emplace_back(row, col, value);
  if (pending_.size() >= batch_) flush();
}

void LowerAssembler::flush() {
  if (pending_.empty()) return;
  SparseMatrix part(size_, size_);
  part.setFromTriplets(pending_.begin(), pending_.end());
  pending_.clear();
  if (lower_.nonZeros() == 0) {
    lower_ = std::move(part);
  } else {
    SparseMatrix sum = lower_ + part;
    lower_ = std::move(sum);
  }
}

SparseMatrix LowerAssembler::finish() {
  flush();
  pending_.shrink_to_fit();
  SparseMatrix full = lower_.selfadjointView<Eigen::Lower>();
  lower_ = SparseMatrix(size_, size_);
  full.makeCompressed();
  return full;
}

SparseMatrix submatrix(const SparseMatrix& A, std::span<const Index> rows, std::span<const Index> cols) {
  std::vector<Index> local(static_cast<std::size_t>(A.rows()), -1);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= A.rows()) throw ShapeError("submatrix row index out of range");
    local[rows[i]] = static_cast<Index>(i);
  }

  std::vector<int> outer(cols.size() + 1, 0);
  std::vector<int> inner;
  std::vector<double> values;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (cols[j] < 0 || cols[j] >= A.cols()) throw ShapeError("submatrix column index out of range");
    for (SparseMatrix::InnerIterator it(A, cols[j]); it; ++it) {
      const Index r = local[it.row()];
      if (r < 0) continue;
      inner.push_back(r);
      values.push_back(it.value());
    }
    outer[j + 1] = static_cast<int>(inner.size());
  }
  const Eigen::Map<const SparseMatrix> view(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()),
                                            static_cast<Index>(inner.size()), outer.data(), inner.data(),
                                            values.data());
  return SparseMatrix(view);
}

void write_matrix_market(std::ostream& out, const SparseMatrix& A) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << A.rows() << ' ' << A.cols() << ' ' << A.nonZeros() << '\n';
  char buf[96];
  for (Index j = 0; j < A.outerSize(); ++j) {
    for (SparseMatrix::InnerIterator it(A, j); it; ++it) {
      std::snprintf(buf, sizeof buf, "%d %d %.17g\n", static_cast<int>(it.row()) + 1, j + 1, it.value());
      out << buf;
    }
  }
}

} // namespace spnet
