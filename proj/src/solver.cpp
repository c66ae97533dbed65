#include "spnet/solver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "spnet/error.hpp"
#include "spnet/fibergen.hpp"
#include "spnet/parallel.hpp"
#include "spnet/sparse_ops.hpp"

namespace spnet {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Vector gather(const Vector& v, const std::vector<Index>& dofs) {
  Vector out(static_cast<Index>(dofs.size()));
  for (std::size_t i = 0; i < dofs.size(); ++i) out[static_cast<Index>(i)] = v[dofs[i]];
  return out;
}

} // namespace

SparseMatrix coarse_basis_matrix(const BoxMesh& mesh, const BasisRestriction& basis, const AssembledOperator& op) {
  const Index m0 = mesh.free_node_count();
  const Index N = op.node_count;
  std::vector<Eigen::Triplet<double>> triplets;
  for (Index k = 0; k < m0; ++k) {
    for (SparseMatrix::InnerIterator it(basis.phi, k); it; ++it) {
      for (int c = 0; c < op.components; ++c) {
        const Index dof = op.free_index[c * N + static_cast<Index>(it.row())];
        if (dof >= 0) triplets.emplace_back(dof, c * m0 + k, it.value());
      }
    }
  }
  SparseMatrix phi0(op.free_count(), op.components * m0);
  phi0.setFromTriplets(triplets.begin(), triplets.end());
  phi0.makeCompressed();
  return phi0;
}

SchwarzPreconditioner::SchwarzPreconditioner(const SpatialNetwork& net, const BoxMesh& mesh,
                                             const AssembledOperator& op, const SchwarzOptions& options) {
  const auto start = Clock::now();
  if (op.node_count != net.node_count()) throw ShapeError("operator does not belong to this network");
  const BasisRestriction basis = restrict_basis(mesh, net);
  for (Index e = 0; e < mesh.element_count(); ++e)
    if (basis.element_nodes[e].empty())
      throw AssumptionViolation("mesh element " + std::to_string(e) + " contains no network nodes (H = " +
                                std::to_string(mesh.H()) + "); use a larger H");

  size_ = op.free_count();
  if (options.coarse) {
    SparseMatrix phi0 = coarse_basis_matrix(mesh, basis, op);
    for (Index j = 0; j < phi0.cols(); ++j)
      if (phi0.col(j).nonZeros() == 0)
        throw SingularError("coarse basis column " + std::to_string(j) + " (mesh node " +
                            std::to_string(j % mesh.free_node_count()) + ") has no free network dofs");
    coarse_basis_ = std::move(phi0);
  }

  const Index N = op.node_count;
  const int dim = mesh.dimension();
  const auto counts = mesh.elements_per_axis();
  for (Index j = 0; j < mesh.node_count(); ++j) {
    // Region interior relative to the domain: a node on the region's boundary
    // inside the domain is excluded, one on the domain boundary is kept.
    const auto lattice = mesh.node_lattice(j);
    std::array<double, 3> lo{}, hi{};
    std::array<bool, 3> lo_open{}, hi_open{};
    for (int a = 0; a < dim; ++a) {
      const int lo_lat = std::max(lattice[a] - options.patch_layers, 0);
      const int hi_lat = std::min(lattice[a] + options.patch_layers, counts[a]);
      const double w = mesh.grid().cell_width(a);
      lo[a] = lo_lat * w;
      hi[a] = hi_lat == counts[a] ? mesh.domain().lengths[a] : hi_lat * w;
      lo_open[a] = lo_lat > 0;
      hi_open[a] = hi_lat < counts[a];
    }
    auto interior = [&](const Point& p) {
      for (int a = 0; a < dim; ++a) {
        const double tol = 1e-12 * mesh.domain().lengths[a];
        if (lo_open[a] && !(p[a] > lo[a] + tol)) return false;
        if (hi_open[a] && !(p[a] < hi[a] - tol)) return false;
      }
      return true;
    };
    std::vector<Index> dofs;
    for (Index e : mesh.patch_of_node(j, options.patch_layers))
      for (Index x : basis.element_nodes[e]) {
        if (!interior(net.position(x))) continue;
        for (int c = 0; c < op.components; ++c)
          if (const Index d = op.free_index[c * N + x]; d >= 0) dofs.push_back(d);
      }
    if (dofs.empty()) {
      ++stats_.skipped_patches;
      continue;
    }
    std::sort(dofs.begin(), dofs.end());
    patches_.push_back(std::move(dofs));
  }
  stats_.mesh_finer_than_2r0 = mesh.H() < 2.0 * net.max_edge_length();
  setup(op.matrix);
  stats_.setup_seconds = seconds_since(start);
}

SchwarzPreconditioner::SchwarzPreconditioner(const SparseMatrix& K, std::optional<SparseMatrix> coarse_basis,
                                             std::vector<std::vector<Index>> patches)
    : size_(static_cast<Index>(K.rows())), coarse_basis_(std::move(coarse_basis)), patches_(std::move(patches)) {
  const auto start = Clock::now();
  if (coarse_basis_ && coarse_basis_->rows() != size_) throw ShapeError("coarse basis rows must match the operator");
  for (auto& p : patches_) {
    if (!std::is_sorted(p.begin(), p.end())) std::sort(p.begin(), p.end());
    for (Index d : p)
      if (d < 0 || d >= size_) throw ShapeError("patch dof out of range");
  }
  setup(K);
  stats_.setup_seconds = seconds_since(start);
}

void SchwarzPreconditioner::setup(const SparseMatrix& K) {
  if (K.rows() != K.cols() || K.rows() != size_) throw ShapeError("operator size does not match the subspaces");
  if (coarse_basis_) {
    const SparseMatrix KPhi = K * *coarse_basis_;
    const SparseMatrix A0 = coarse_basis_->transpose() * KPhi;
    try {
      coarse_.factorize(A0);
    } catch (const SingularError&) {
      throw SingularError("coarse Galerkin matrix (dimension " + std::to_string(A0.rows()) +
                          ") is not positive definite; the restricted basis is linearly dependent");
    }
    stats_.coarse_dimension = static_cast<Index>(A0.rows());
    stats_.factor_nonzeros += coarse_.factor_nonzeros();
  }

  local_.clear();
  local_.resize(patches_.size());
  parallel_for(static_cast<Index>(patches_.size()), [&](Index j) {
    try {
      local_[j].factorize(principal_submatrix(K, patches_[j]));
    } catch (const SingularError&) {
      throw SingularError("local matrix of patch " + std::to_string(j) + " (" + std::to_string(patches_[j].size()) +
                          " dofs) is not positive definite");
    }
  });

  std::vector<Index> cover(size_, 0);
  stats_.patches = static_cast<Index>(patches_.size());
  for (std::size_t j = 0; j < patches_.size(); ++j) {
    stats_.largest_patch = std::max<Index>(stats_.largest_patch, static_cast<Index>(patches_[j].size()));
    stats_.factor_nonzeros += local_[j].factor_nonzeros();
    for (Index d : patches_[j]) ++cover[d];
  }
  if (size_ > 0) {
    const auto [lo, hi] = std::minmax_element(cover.begin(), cover.end());
    stats_.min_overlap = *lo;
    stats_.max_overlap = *hi;
  }
}

Vector SchwarzPreconditioner::apply(const Vector& r) const {
  if (r.size() != size_) throw ShapeError("residual size does not match the preconditioner");
  Vector z = Vector::Zero(size_);
  if (coarse_basis_) {
    const Vector rc = coarse_basis_->transpose() * r;
    z += *coarse_basis_ * coarse_.solve(rc);
  }
  const Index count = static_cast<Index>(patches_.size());
  if (thread_count() <= 1) {
    for (Index j = 0; j < count; ++j) {
      const Vector x = local_[j].solve(gather(r, patches_[j]));
      for (std::size_t i = 0; i < patches_[j].size(); ++i) z[patches_[j][i]] += x[static_cast<Index>(i)];
    }
    return z;
  }
  std::vector<Vector> parts(patches_.size());
  parallel_for(count, [&](Index j) { parts[j] = local_[j].solve(gather(r, patches_[j])); });
  for (Index j = 0; j < count; ++j)
    for (std::size_t i = 0; i < patches_[j].size(); ++i) z[patches_[j][i]] += parts[j][static_cast<Index>(i)];
  return z;
}

void summarize_rates(PCGReport& report) {
  report.mean_rate = 0.0;
  report.max_rate = 0.0;
  const std::size_t first = report.rates.size() > 1 ? 1 : 0;
  std::size_t used = 0;
  for (std::size_t l = first; l < report.rates.size(); ++l) {
    report.mean_rate += report.rates[l];
    report.max_rate = std::max(report.max_rate, report.rates[l]);
    ++used;
  }
  if (used) report.mean_rate /= static_cast<double>(used);
}

Vector pcg_solve(const SparseMatrix& K, const Vector& rhs, const Preconditioner& B, const PCGOptions& options,
                 PCGReport* report) {
  const auto start = Clock::now();
  const Index n = static_cast<Index>(K.rows());
  if (K.cols() != n || rhs.size() != n || B.size() != n) throw ShapeError("PCG operands differ in size");
  if (options.reference && options.reference->size() != n) throw ShapeError("reference solution has the wrong size");

  PCGReport local;
  PCGReport& rep = report ? *report : local;
  rep = PCGReport{};
  Vector x = Vector::Zero(n);
  auto track_error = [&] {
    if (!options.reference) return;
    const Vector e = *options.reference - x;
    rep.k_errors.push_back(std::sqrt(std::max(0.0, e.dot(K * e))));
    const std::size_t l = rep.k_errors.size();
    if (l >= 2) {
      const double prev = rep.k_errors[l - 2];
      rep.rates.push_back(prev > 0.0 ? rep.k_errors[l - 1] / prev : 0.0);
    }
  };

  track_error();
  if (rhs.lpNorm<Eigen::Infinity>() == 0.0) {
    rep.converged = true;
    rep.residuals.push_back(0.0);
    rep.solve_seconds = seconds_since(start);
    return x;
  }

  Vector r = rhs;
  Vector z = B.apply(r);
  double rz = r.dot(z);
  if (!(rz > 0.0)) throw BreakdownError("preconditioned residual (r, z) = " + std::to_string(rz) + " is not positive");
  const double initial = std::sqrt(rz);
  rep.residuals.push_back(initial);
  Vector p = z;
  for (int it = 1; it <= options.max_iterations; ++it) {
    const Vector q = K * p;
    const double pq = p.dot(q);
    if (!(pq > 0.0)) throw BreakdownError("search direction has nonpositive energy (K p, p) = " + std::to_string(pq));
    const double a = rz / pq;
    x += a * p;
    r -= a * q;
    z = B.apply(r);
    const double rz_new = r.dot(z);
    rep.iterations = it;
    track_error();
    if (rz_new < 0.0) throw BreakdownError("preconditioned residual (r, z) became negative");
    const double res = std::sqrt(rz_new);
    rep.residuals.push_back(res);
    if (res <= options.tol * initial) {
      rep.converged = true;
      break;
    }
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  summarize_rates(rep);
  rep.solve_seconds = seconds_since(start);
  return x;
}

ReferenceSolution reference_solve(const SparseMatrix& K, const Vector& rhs, const Preconditioner* fallback,
                                  Index direct_limit) {
  ReferenceSolution out;
  const double bnorm = rhs.norm();
  if (bnorm == 0.0) {
    out.u = Vector::Zero(rhs.size());
    return out;
  }
  if (K.rows() <= direct_limit || !fallback) {
    const SparseCholesky chol(K);
    out.method = ReferenceSolution::Method::cholesky;
    out.u = chol.solve(rhs);
    for (int k = 0; k < 3; ++k) {
      const Vector res = rhs - K * out.u;
      if (res.norm() <= 1e-15 * bnorm) break;
      out.u += chol.solve(res);
    }
  } else {
    out.method = ReferenceSolution::Method::pcg;
    PCGOptions opts;
    opts.tol = 1e-13;
    opts.max_iterations = 20000;
    out.u = pcg_solve(K, rhs, *fallback, opts);
  }
  out.relative_residual = (rhs - K * out.u).norm() / bnorm;
  return out;
}

SpectrumEstimate estimate_P_spectrum(const SparseMatrix& K, const Preconditioner& B, int steps, Index dense_limit) {
  const Index n = static_cast<Index>(K.rows());
  if (B.size() != n) throw ShapeError("preconditioner size does not match the operator");
  SpectrumEstimate est;
  if (n == 0) return est;

  if (n <= dense_limit) {
    Eigen::MatrixXd Bd(n, n);
    for (Index i = 0; i < n; ++i) Bd.col(i) = B.apply(Vector::Unit(n, i));
    Bd = 0.5 * (Bd + Bd.transpose()).eval();
    const Eigen::MatrixXd Kd(K);
    const Eigen::MatrixXd A = Kd * Bd * Kd;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(A, Kd);
    if (eig.info() != Eigen::Success) throw SingularError("dense eigensolve of B K failed");
    est.dense = true;
    est.eigenvalues.assign(eig.eigenvalues().data(), eig.eigenvalues().data() + n);
    est.lambda_min = est.eigenvalues.front();
    est.lambda_max = est.eigenvalues.back();
    est.steps = static_cast<int>(n);
    return est;
  }

  const int m = static_cast<int>(std::min<Index>(steps, n));
  Eigen::MatrixXd V(n, m), KV(n, m);
  const CounterRng rng(0xa5a5);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = rng.uniform(i) - 0.5;
  Vector Kv = K * v;
  double norm = std::sqrt(v.dot(Kv));
  std::vector<double> alpha, beta;
  int j = 0;
  for (; j < m; ++j) {
    V.col(j) = v / norm;
    KV.col(j) = Kv / norm;
    Vector w = B.apply(KV.col(j));
    alpha.push_back(w.dot(KV.col(j)));
    for (int pass = 0; pass < 2; ++pass) {
      const Eigen::VectorXd c = KV.leftCols(j + 1).transpose() * w;
      w -= V.leftCols(j + 1) * c;
    }
    Kv = K * w;
    const double b = std::sqrt(std::max(0.0, w.dot(Kv)));
    if (j + 1 == m || b <= 1e-12 * std::abs(alpha.back())) {
      ++j;
      break;
    }
    beta.push_back(b);
    v = w;
    norm = b;
  }
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(j, j);
  for (int i = 0; i < j; ++i) {
    T(i, i) = alpha[i];
    if (i + 1 < j) T(i, i + 1) = T(i + 1, i) = beta[i];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(T, Eigen::EigenvaluesOnly);
  est.lambda_min = eig.eigenvalues()(0);
  est.lambda_max = eig.eigenvalues()(j - 1);
  est.steps = j;
  return est;
}

double theorem_rate(double kappa) {
  if (!(kappa >= 1.0)) throw ShapeError("condition number must be at least 1");
  const double s = std::sqrt(kappa);
  return (s - 1.0) / (s + 1.0);
}

} // namespace spnet
