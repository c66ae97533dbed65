#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "spnet/mesh.hpp"
#include "spnet/models.hpp"
#include "spnet/sparse_cholesky.hpp"

namespace spnet {

/// z = B r for a symmetric positive definite B.
class Preconditioner {
public:
  virtual ~Preconditioner() = default;
  virtual Index size() const = 0;
  virtual Vector apply(const Vector& r) const = 0;
};

class IdentityPreconditioner final : public Preconditioner {
public:
  explicit IdentityPreconditioner(Index size) : size_(size) {}
  Index size() const override { return size_; }
  Vector apply(const Vector& r) const override { return r; }

private:
  Index size_;
};

struct SchwarzOptions {
  int patch_layers = 1;
  bool coarse = true;
};

struct SchwarzStats {
  Index coarse_dimension = 0;
  Index patches = 0;
  Index skipped_patches = 0;
  Index largest_patch = 0;
  Index min_overlap = 0;  // fewest patches covering one free dof
  Index max_overlap = 0;  // most patches covering one free dof
  double factor_nonzeros = 0.0;
  double setup_seconds = 0.0;
  bool mesh_finer_than_2r0 = false;
};

/// Two-level additive Schwarz preconditioner
///   B r = Phi0 (Phi0^T K Phi0)^-1 Phi0^T r + sum_j E_j K_j^-1 E_j^T r,
/// with exact Cholesky solves on the coarse space and on every patch.
class SchwarzPreconditioner final : public Preconditioner {
public:
  /// Coarse space from the free Q1 basis functions (one copy per component),
  /// one patch per mesh node holding the free dofs of the network nodes where
  /// its basis function is positive (the open star of the node, closed along
  /// the domain boundary). Throws AssumptionViolation on empty elements and
  /// SingularError when a coarse or local matrix cannot be factorized.
  SchwarzPreconditioner(const SpatialNetwork& net, const BoxMesh& mesh, const AssembledOperator& op,
                        const SchwarzOptions& options = {});

  /// Explicit subspaces: optional coarse basis (free dofs x coarse dim) and
  /// sorted dof lists of the local spaces.
  SchwarzPreconditioner(const SparseMatrix& K, std::optional<SparseMatrix> coarse_basis,
                        std::vector<std::vector<Index>> patches);

  Index size() const override { return size_; }
  Vector apply(const Vector& r) const override;

  const SchwarzStats& stats() const { return stats_; }
  const std::vector<std::vector<Index>>& patches() const { return patches_; }
  const std::optional<SparseMatrix>& coarse_basis() const { return coarse_basis_; }

private:
  void setup(const SparseMatrix& K);

  Index size_ = 0;
  std::optional<SparseMatrix> coarse_basis_;
  SparseCholesky coarse_;
  std::vector<std::vector<Index>> patches_;
  std::vector<SparseCholesky> local_;
  SchwarzStats stats_;
};

/// Coarse basis on the free dofs: column c * m0 + k holds phi_k on the free
/// dofs of component c.
SparseMatrix coarse_basis_matrix(const BoxMesh& mesh, const BasisRestriction& basis, const AssembledOperator& op);

struct PCGOptions {
  double tol = 1e-8;
  int max_iterations = 2000;
  const Vector* reference = nullptr;  // exact solution for K-norm error tracking
};

struct PCGReport {
  int iterations = 0;
  bool converged = false;
  std::vector<double> residuals;  // (r, z)^1/2 at each iterate, starting with the initial one
  std::vector<double> k_errors;   // |u - u_l|_K when a reference is given
  std::vector<double> rates;      // k_errors[l] / k_errors[l-1], l >= 1
  double mean_rate = 0.0;         // mean of rates over l >= 2
  double max_rate = 0.0;          // max of rates over l >= 2
  double solve_seconds = 0.0;
};

/// Preconditioned conjugate gradients from a zero initial guess. Stops when
/// (r, z)^1/2 <= tol times its initial value. Throws BreakdownError on a
/// nonpositive (r, z) or (K p, p).
Vector pcg_solve(const SparseMatrix& K, const Vector& rhs, const Preconditioner& B, const PCGOptions& options,
                 PCGReport* report = nullptr);

/// Mean and max of rates over l >= 2 (the first reduction is excluded).
void summarize_rates(PCGReport& report);

struct ReferenceSolution {
  enum class Method { cholesky, pcg };
  Vector u;
  Method method = Method::cholesky;
  double relative_residual = 0.0;
};

/// Direct sparse Cholesky solve with iterative refinement while the system has
/// at most `direct_limit` dofs, otherwise PCG with the given preconditioner to
/// a relative residual of 1e-13.
ReferenceSolution reference_solve(const SparseMatrix& K, const Vector& rhs, const Preconditioner* fallback = nullptr,
                                  Index direct_limit = 4'000'000);

struct SpectrumEstimate {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  bool dense = false;
  std::vector<double> eigenvalues;  // full spectrum when dense
  int steps = 0;

  double condition() const { return lambda_max / lambda_min; }
};

/// Extreme eigenvalues of P = B K: a dense generalized eigensolve of
/// (K B K, K) for at most dense_limit dofs, otherwise Lanczos in the K inner
/// product with `steps` steps.
SpectrumEstimate estimate_P_spectrum(const SparseMatrix& K, const Preconditioner& B, int steps = 80,
                                     Index dense_limit = 300);

/// (sqrt(kappa) - 1) / (sqrt(kappa) + 1).
double theorem_rate(double kappa);

} // namespace spnet
