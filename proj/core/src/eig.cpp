#include "magnetic_gaps/eig.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <sstream>

#include "magnetic_gaps/error.hpp"

namespace magnetic_gaps {

double hermiticity_defect(const SparseMatrixC& m) {
  double scale = 0.0;
  for (int k = 0; k < m.outerSize(); ++k) {
    for (SparseMatrixC::InnerIterator it(m, k); it; ++it) scale = std::max(scale, std::abs(it.value()));
  }
  if (scale == 0.0) return 0.0;
  const SparseMatrixC diff = m - SparseMatrixC(m.adjoint());
  double defect = 0.0;
  for (int k = 0; k < diff.outerSize(); ++k) {
    for (SparseMatrixC::InnerIterator it(diff, k); it; ++it) defect = std::max(defect, std::abs(it.value()));
  }
  return defect / scale;
}

SparseHermitianOperator::SparseHermitianOperator(SparseMatrixC matrix, double rel_tol)
    : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols()) throw Error(ErrorKind::InvalidArgument, "operator must be square");
  matrix_.makeCompressed();
  defect_ = magnetic_gaps::hermiticity_defect(matrix_);
  if (defect_ > rel_tol) {
    std::ostringstream os;
    os << "operator is not Hermitian: relative defect " << defect_;
    throw Error(ErrorKind::InvalidArgument, os.str());
  }
  // Column sums equal row sums up to the defect.
  const int n = dimension();
  Eigen::VectorXd off = Eigen::VectorXd::Zero(n), diag = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < n; ++k) {
    for (SparseMatrixC::InnerIterator it(matrix_, k); it; ++it) {
      if (it.row() == it.col()) {
        diag[k] = it.value().real();
      } else {
        off[k] += std::abs(it.value());
      }
    }
  }
  norm_estimate_ = n > 0 ? (diag.cwiseAbs() + off).maxCoeff() : 0.0;
  lower_bound_ = n > 0 ? (diag - off).minCoeff() : 0.0;
}

SparseHermitianOperator SparseHermitianOperator::from_triplets(int dimension, const std::vector<Triplet>& triplets,
                                                               double rel_tol) {
  SparseMatrixC m(dimension, dimension);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return SparseHermitianOperator(std::move(m), rel_tol);
}

Eigen::VectorXd SparseHermitianOperator::diagonal() const { return matrix_.diagonal().real(); }

double uniform01(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer over the pair
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

class Preconditioner {
 public:
  virtual ~Preconditioner() = default;
  virtual Eigen::MatrixXcd apply(const Eigen::MatrixXcd& r) const = 0;
};

class IdentityPreconditioner final : public Preconditioner {
 public:
  Eigen::MatrixXcd apply(const Eigen::MatrixXcd& r) const override { return r; }
};

class JacobiPreconditioner final : public Preconditioner {
 public:
  explicit JacobiPreconditioner(const SparseHermitianOperator& op) {
    // Shift by the Gershgorin lower bound so every entry is positive.
    const Eigen::VectorXd d = op.diagonal();
    const double floor = std::max(1e-14 * op.norm_estimate(), 1e-300);
    inv_ = Eigen::VectorXd(d.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      const double v = d[i] - op.lower_bound();
      inv_[i] = 1.0 / std::max(v, floor);
    }
  }
  Eigen::MatrixXcd apply(const Eigen::MatrixXcd& r) const override { return inv_.asDiagonal() * r; }

 private:
  Eigen::VectorXd inv_;
};

class FactorizedPreconditioner final : public Preconditioner {
 public:
  FactorizedPreconditioner(const SparseHermitianOperator& op, double shift) {
    SparseMatrixC shifted = op.matrix();
    SparseMatrixC id(shifted.rows(), shifted.cols());
    id.setIdentity();
    shifted += Complex(shift, 0.0) * id;
    solver_.compute(shifted);
    if (solver_.info() != Eigen::Success) {
      throw Error(ErrorKind::InvalidArgument, "shifted preconditioner factorization failed");
    }
  }
  Eigen::MatrixXcd apply(const Eigen::MatrixXcd& r) const override { return solver_.solve(r); }

 private:
  Eigen::SimplicialLDLT<SparseMatrixC, Eigen::Lower> solver_;
};

// Orthonormalize the columns of v against the orthonormal columns q and among
// themselves (two-pass classical Gram-Schmidt); columns that lose more than
// drop_tol of their norm are discarded.
Eigen::MatrixXcd orthonormalize(const Eigen::MatrixXcd* q, Eigen::MatrixXcd v, double drop_tol) {
  const Eigen::Index n = v.rows();
  Eigen::VectorXd norms0 = v.colwise().norm().transpose();
  if (q && q->cols() > 0) {
    for (int pass = 0; pass < 2; ++pass) v -= (*q) * (q->adjoint() * v);
  }
  Eigen::MatrixXcd out(n, v.cols());
  Eigen::Index kept = 0;
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    Eigen::VectorXcd col = v.col(j);
    if (!(norms0[j] > 0.0)) continue;
    for (int pass = 0; pass < 2 && kept > 0; ++pass) {
      col -= out.leftCols(kept) * (out.leftCols(kept).adjoint() * col);
    }
    const double nrm = col.norm();
    if (!(nrm > drop_tol * norms0[j])) continue;
    out.col(kept++) = col / nrm;
  }
  return out.leftCols(kept);
}

std::unique_ptr<Preconditioner> make_preconditioner(const SparseHermitianOperator& op, const EigOptions& o) {
  switch (o.preconditioner) {
    case PreconditionerKind::None:
      return std::make_unique<IdentityPreconditioner>();
    case PreconditionerKind::Jacobi:
      return std::make_unique<JacobiPreconditioner>(op);
    case PreconditionerKind::ShiftedFactorization: {
      // Keep A + shift I positive definite.
      const double shift = std::max(o.shift, -op.lower_bound()) + 1e-12 * op.norm_estimate();
      return std::make_unique<FactorizedPreconditioner>(op, shift);
    }
  }
  return std::make_unique<IdentityPreconditioner>();
}

}  // namespace

SpectrumSlice lowest_eigs(const SparseHermitianOperator& op, const EigOptions& options) {
  const int n = op.dimension();
  const int m = options.m;
  if (m < 1 || !(options.tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "EigOptions needs m >= 1, tol > 0");
  if (4 * m >= n) {
    std::ostringstream os;
    os << "m = " << m << " must be below dimension/4 = " << n / 4.0;
    throw Error(ErrorKind::InvalidArgument, os.str());
  }
  int bs = options.block_size > 0 ? options.block_size : m + 4;
  bs = std::max(bs, m);
  bs = std::min(bs, n / 3);

  const double scale = std::max(op.norm_estimate(), 1e-300);
  const double threshold = options.tol * scale;
  const auto precond = make_preconditioner(op, options);

  std::mt19937_64 rng(options.seed);
  Eigen::MatrixXcd x(n, bs);
  int given = 0;
  if (options.initial) {
    given = static_cast<int>(std::min<Eigen::Index>(options.initial->cols(), bs));
    if (options.initial->rows() != n) throw Error(ErrorKind::InvalidArgument, "initial block has wrong row count");
    x.leftCols(given) = options.initial->leftCols(given);
  }
  for (int j = given; j < bs; ++j) {
    for (int i = 0; i < n; ++i) {
      const double re = uniform01(rng()) - 0.5;
      const double im = uniform01(rng()) - 0.5;
      x(i, j) = Complex(re, im);
    }
  }
  x = orthonormalize(nullptr, std::move(x), 1e-10);
  if (x.cols() < bs) throw Error(ErrorKind::BlockDeflationFailure, "starting block is rank deficient");

  Eigen::MatrixXcd ax = op.apply(x);
  Eigen::VectorXd lambda;
  {
    Eigen::MatrixXcd g = x.adjoint() * ax;
    g = (g + g.adjoint()).eval() * 0.5;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g);
    x = x * es.eigenvectors();
    ax = ax * es.eigenvectors();
    lambda = es.eigenvalues();
  }

  Eigen::MatrixXcd p;  // search directions, orthonormal when present
  std::vector<double> res(bs);
  double best = std::numeric_limits<double>::infinity();
  int since_best = 0;
  int iter = 0;
  for (;; ++iter) {
    Eigen::MatrixXcd r = ax - x * lambda.asDiagonal();
    std::vector<int> active;
    double worst = 0.0, min_res = std::numeric_limits<double>::infinity();
    for (int j = 0; j < bs; ++j) {
      res[j] = r.col(j).norm();
      if (j < m) {
        worst = std::max(worst, res[j]);
        min_res = std::min(min_res, res[j]);
      }
      if (res[j] > threshold) active.push_back(j);
    }
    if (options.monitor) options.monitor(iter, min_res, lambda[m - 1]);
    if (worst <= threshold) break;
    if (iter >= options.max_iter) {
      std::ostringstream os;
      os << "no convergence after " << options.max_iter << " iterations (max residual " << worst / scale << ")";
      throw Error(ErrorKind::SolverStagnation, os.str());
    }
    if (worst < (1.0 - 1e-3) * best) {
      best = worst;
      since_best = 0;
    } else if (++since_best > options.stagnation_window) {
      std::ostringstream os;
      os << "residual stagnated at " << worst / scale << " for " << options.stagnation_window << " iterations";
      throw Error(ErrorKind::SolverStagnation, os.str());
    }

    Eigen::MatrixXcd ra(n, active.size());
    for (size_t a = 0; a < active.size(); ++a) ra.col(a) = r.col(active[a]);
    Eigen::MatrixXcd w = orthonormalize(&x, precond->apply(ra), 1e-12);
    Eigen::MatrixXcd xw(n, x.cols() + w.cols());
    xw << x, w;
    Eigen::MatrixXcd pn;
    if (p.cols() > 0) pn = orthonormalize(&xw, p, 1e-12);

    const Eigen::Index nw = w.cols(), np = pn.cols();
    Eigen::MatrixXcd s(n, bs + nw + np);
    s.leftCols(bs) = x;
    if (nw) s.middleCols(bs, nw) = w;
    if (np) s.rightCols(np) = pn;
    Eigen::MatrixXcd as(n, s.cols());
    as.leftCols(bs) = ax;
    if (nw + np) as.rightCols(nw + np) = op.apply(s.rightCols(nw + np));

    Eigen::MatrixXcd g = s.adjoint() * as;
    g = (g + g.adjoint()).eval() * 0.5;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g);
    const Eigen::MatrixXcd c = es.eigenvectors().leftCols(bs);
    lambda = es.eigenvalues().head(bs);
    x = s * c;
    ax = as * c;
    if (nw + np) {
      p = s.rightCols(nw + np) * c.bottomRows(nw + np);
    } else {
      p.resize(n, 0);
    }

    // Keep X orthonormal against accumulated rounding.
    const double drift = (x.adjoint() * x - Eigen::MatrixXcd::Identity(bs, bs)).cwiseAbs().maxCoeff();
    if (drift > 1e-10) {
      x = orthonormalize(nullptr, std::move(x), 1e-10);
      if (x.cols() < bs) throw Error(ErrorKind::BlockDeflationFailure, "iterate block lost rank");
      ax = op.apply(x);
      Eigen::MatrixXcd gx = x.adjoint() * ax;
      gx = (gx + gx.adjoint()).eval() * 0.5;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ex(gx);
      x = x * ex.eigenvectors();
      ax = ax * ex.eigenvectors();
      lambda = ex.eigenvalues();
    }
  }

  SpectrumSlice out;
  out.eigenvalues.assign(lambda.data(), lambda.data() + m);
  out.vectors = x.leftCols(m);
  for (int j = 0; j < m; ++j) {
    const double rj = (ax.col(j) - lambda[j] * x.col(j)).norm();
    if (!(rj <= threshold * x.col(j).norm() * (1.0 + 1e-12))) {
      throw Error(ErrorKind::SolverStagnation, "residual certificate failed on output");
    }
    out.residuals.push_back(rj);
  }
  out.meta.tol = options.tol;
  out.meta.norm_estimate = op.norm_estimate();
  out.meta.iterations = iter;
  return out;
}

}  // namespace magnetic_gaps
