#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "magnetic_gaps/eig.hpp"
#include "magnetic_gaps/polynomial.hpp"

namespace magnetic_gaps {

// Polynomial 1-form (a1, a2), homogeneous of degree k+1.
struct HomogeneousGauge {
  int degree = 1;
  Polynomial2 a1;
  Polynomial2 a2;

  int order() const noexcept { return degree - 1; }
  Polynomial2 curl() const { return a2.d1() - a1.d2(); }
};

// A = (-X2, X1) b0(X) / (k+2). Throws InvalidArgument if b0 is zero or not homogeneous.
HomogeneousGauge poincare_gauge(const Polynomial2& b0);
// Adds d(chi); chi must be homogeneous of degree k+2 so the result stays homogeneous.
HomogeneousGauge add_gradient(const HomogeneousGauge& gauge, const Polynomial2& chi);

// Exponent (2k+2)/(k+2) of the gap scale.
double scaling_exponent(int k);

struct ModelProblem {
  HomogeneousGauge gauge;
  double h = 1.0;
  double box_halfwidth = 1.0;
  int grid_n = 128;  // interior points per axis
  Eigen::Matrix2d metric0 = Eigen::Matrix2d::Identity();

  double spacing() const { return 2.0 * box_halfwidth / (grid_n + 1); }
};

// Six semiclassical lengths: 6 (h / s)^{1/(k+2)} with s = max of |b0| on the unit circle.
double default_box(const Polynomial2& b0, double h);
ModelProblem make_model_problem(const Polynomial2& b0, double h, int grid_n = 128, double box = 0.0);

// Throws ResolutionError unless spacing <= h^{1/(k+2)}/8.
void validate(const ModelProblem& problem);

// Dirichlet finite differences with Peierls link phases exp(-(i/h) int A.dl).
SparseHermitianOperator assemble_model(const ModelProblem& problem);

struct ModelSolveOptions {
  double tol = 1e-8;
  std::uint64_t seed = 1;
  bool check_truncation = true;
  PreconditionerKind preconditioner = PreconditionerKind::ShiftedFactorization;
  int max_iter = 1000;
  std::function<void(int, double, double)> monitor;
};

struct ModelSpectrum {
  SpectrumSlice slice;
  // max |lambda(1.25 L) - lambda(L)|, 0 if not checked.
  double truncation_shift = 0.0;
  // Energy up to which the slice is validated.
  double validity_top = 0.0;
};

// Throws SolverStagnation, TruncationDominated, OutOfValidatedRange.
ModelSpectrum model_spectrum(const ModelProblem& problem, int m, const ModelSolveOptions& options = {});

struct ScalingOptions {
  int grid_1 = 128;
  int grid_2 = 160;
  ModelSolveOptions solve;
};

struct ScalingReport {
  std::vector<double> scaled_1;
  std::vector<double> scaled_2;
  double max_rel_deviation = 0.0;
};

// Compares eig(K^h)/h^{(2k+2)/(k+2)} at two values of h on different grids.
ScalingReport scaling_check(const Polynomial2& b0, double h1, double h2, int m, const ScalingOptions& options = {});

struct Level {
  double value = 0.0;
  int multiplicity = 0;
};

// Groups eigenvalues closer than threshold (chained) into multiplets.
std::vector<Level> merge_levels(const std::vector<double>& sorted_values, double threshold);
// Merge threshold used for a slice: 2 x tol x norm estimate.
double merge_threshold(const SpectrumSlice& slice);

// Gaps (lambda_m, lambda_{m+1}) between merged multiplets with relative width above rel_width_min.
std::vector<std::pair<double, double>> model_gaps(const SpectrumSlice& slice, double rel_width_min);

// Eigenvalues <= lambda with multiplicity; OutOfValidatedRange above the largest computed eigenvalue.
int count_below(const SpectrumSlice& slice, double lambda);

// Max over eigenvectors of h <|b0| u, u> / <K u, u>.
double lower_bound_ratio(const ModelProblem& problem, const SpectrumSlice& slice);

}  // namespace magnetic_gaps
