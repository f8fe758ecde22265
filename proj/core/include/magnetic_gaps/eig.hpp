#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

namespace magnetic_gaps {

using Complex = std::complex<double>;
using SparseMatrixC = Eigen::SparseMatrix<Complex, Eigen::ColMajor, int>;
using Triplet = Eigen::Triplet<Complex, int>;

// Immutable sparse Hermitian matrix with a Gershgorin norm bound.
class SparseHermitianOperator {
 public:
  SparseHermitianOperator() = default;
  // Throws InvalidArgument unless max|M - M^H| <= rel_tol * max|M|.
  explicit SparseHermitianOperator(SparseMatrixC matrix, double rel_tol = 1e-13);
  static SparseHermitianOperator from_triplets(int dimension, const std::vector<Triplet>& triplets,
                                               double rel_tol = 1e-13);

  int dimension() const noexcept { return static_cast<int>(matrix_.rows()); }
  const SparseMatrixC& matrix() const noexcept { return matrix_; }
  double norm_estimate() const noexcept { return norm_estimate_; }
  // Lower Gershgorin bound on the spectrum.
  double lower_bound() const noexcept { return lower_bound_; }
  // max|M - M^H| / max|M|.
  double hermiticity_defect() const noexcept { return defect_; }
  Eigen::VectorXd diagonal() const;

  Eigen::MatrixXcd apply(const Eigen::MatrixXcd& x) const { return matrix_ * x; }

 private:
  SparseMatrixC matrix_;
  double norm_estimate_ = 0.0;
  double lower_bound_ = 0.0;
  double defect_ = 0.0;
};

// Relative Hermiticity defect of an arbitrary sparse matrix.
double hermiticity_defect(const SparseMatrixC& m);

enum class PreconditionerKind {
  None,
  Jacobi,
  // Exact solve with (A + shift I) via a sparse LDL^H factorization.
  ShiftedFactorization,
};

struct EigOptions {
  int m = 1;
  double tol = 1e-8;
  int max_iter = 1000;
  int block_size = 0;  // 0 means m + 4
  std::uint64_t seed = 1;
  int stagnation_window = 40;
  PreconditionerKind preconditioner = PreconditionerKind::Jacobi;
  double shift = 0.0;
  // Optional starting vectors (columns); the rest of the block is random.
  const Eigen::MatrixXcd* initial = nullptr;
  // Called once per iteration with (iteration, min residual, current lambda_m).
  std::function<void(int, double, double)> monitor;
};

struct SliceMeta {
  double h = 0.0;
  int grid = 0;
  double box = 0.0;
  double tol = 0.0;
  double norm_estimate = 0.0;
  int iterations = 0;
};

// Low part of a spectrum with residual certificates.
struct SpectrumSlice {
  std::vector<double> eigenvalues;
  std::vector<double> residuals;
  Eigen::MatrixXcd vectors;
  SliceMeta meta;

  int size() const { return static_cast<int>(eigenvalues.size()); }
};

// m lowest eigenpairs by block LOBPCG with full reorthonormalization.
// Throws SolverStagnation or BlockDeflationFailure.
SpectrumSlice lowest_eigs(const SparseHermitianOperator& op, const EigOptions& options);

// Uniform double in [0,1) from a 64-bit engine draw; identical on every platform.
double uniform01(std::uint64_t bits);
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace magnetic_gaps
