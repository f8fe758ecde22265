#include "magnetic_gaps/model_op.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "magnetic_gaps/error.hpp"

namespace magnetic_gaps {

namespace {

// 3-point Gauss-Legendre on [0,1].
constexpr double kGaussT[3] = {0.5 - 0.3872983346207417, 0.5, 0.5 + 0.3872983346207417};
constexpr double kGaussW[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

// int_p^{p+d} A.dl for a polynomial 1-form.
double link_integral(const HomogeneousGauge& g, double px, double py, double dx, double dy) {
  double s = 0.0;
  for (int q = 0; q < 3; ++q) {
    const double x = px + kGaussT[q] * dx, y = py + kGaussT[q] * dy;
    s += kGaussW[q] * (g.a1(x, y) * dx + g.a2(x, y) * dy);
  }
  return s;
}

}  // namespace

HomogeneousGauge poincare_gauge(const Polynomial2& b0) {
  const int k = b0.degree();
  if (k < 0) throw Error(ErrorKind::InvalidArgument, "leading form is identically zero");
  if (!b0.is_homogeneous(k)) throw Error(ErrorKind::InvalidArgument, "leading form is not homogeneous");
  HomogeneousGauge g;
  g.degree = k + 1;
  g.a1 = b0.times_monomial(0, 1, -1.0 / (k + 2));
  g.a2 = b0.times_monomial(1, 0, 1.0 / (k + 2));
  return g;
}

HomogeneousGauge add_gradient(const HomogeneousGauge& gauge, const Polynomial2& chi) {
  if (!chi.is_homogeneous(gauge.degree + 1)) {
    throw Error(ErrorKind::InvalidArgument, "gauge function must be homogeneous of degree k+2");
  }
  HomogeneousGauge g = gauge;
  g.a1 += chi.d1();
  g.a2 += chi.d2();
  return g;
}

double scaling_exponent(int k) { return (2.0 * k + 2.0) / (k + 2.0); }

double default_box(const Polynomial2& b0, double h) {
  const int k = b0.degree();
  const double s = b0.max_on_unit_circle();
  if (!(s > 0.0)) throw Error(ErrorKind::InvalidArgument, "leading form vanishes on the unit circle");
  return 6.0 * std::pow(h / s, 1.0 / (k + 2));
}

ModelProblem make_model_problem(const Polynomial2& b0, double h, int grid_n, double box) {
  ModelProblem p;
  p.gauge = poincare_gauge(b0);
  p.h = h;
  p.grid_n = grid_n;
  p.box_halfwidth = box > 0.0 ? box : default_box(b0, h);
  return p;
}

void validate(const ModelProblem& problem) {
  if (!(problem.h > 0.0) || !(problem.box_halfwidth > 0.0) || problem.grid_n < 3) {
    throw Error(ErrorKind::InvalidArgument, "model problem needs h > 0, L > 0, grid_n >= 3");
  }
  const int k = problem.gauge.order();
  const double limit = std::pow(problem.h, 1.0 / (k + 2)) / 8.0;
  if (problem.spacing() > limit) {
    std::ostringstream os;
    os << "grid spacing " << problem.spacing() << " exceeds h^{1/(k+2)}/8 = " << limit;
    throw Error(ErrorKind::ResolutionError, os.str());
  }
  const Eigen::Matrix2d& g = problem.metric0;
  if (g(0, 1) != g(1, 0) || !(g(0, 0) > 0.0) || !(g.determinant() > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "metric g(0) must be symmetric positive definite");
  }
}

SparseHermitianOperator assemble_model(const ModelProblem& problem) {
  validate(problem);
  const int n = problem.grid_n;
  const double d = problem.spacing();
  const double l = problem.box_halfwidth;
  const double c = problem.h * problem.h / (d * d);
  const Eigen::Matrix2d ginv = problem.metric0.inverse();

  struct Dir {
    int di, dj;
    double w;
  };
  std::vector<Dir> dirs = {{1, 0, ginv(0, 0)}, {0, 1, ginv(1, 1)}};
  if (ginv(0, 1) != 0.0) {
    dirs.push_back({1, 1, 0.5 * ginv(0, 1)});
    dirs.push_back({1, -1, -0.5 * ginv(0, 1)});
  }
  double wsum = 0.0;
  for (const auto& dir : dirs) wsum += dir.w;

  std::vector<Triplet> t;
  t.reserve(static_cast<size_t>(n) * n * (1 + 2 * dirs.size()));
  auto index = [n](int i, int j) { return i * n + j; };
  for (int i = 0; i < n; ++i) {
    const double x = -l + (i + 1) * d;
    for (int j = 0; j < n; ++j) {
      const double y = -l + (j + 1) * d;
      const int p = index(i, j);
      t.emplace_back(p, p, Complex(2.0 * wsum * c, 0.0));
      for (const auto& dir : dirs) {
        const int qi = i + dir.di, qj = j + dir.dj;
        if (qi < 0 || qi >= n || qj < 0 || qj >= n) continue;
        const double phase = -link_integral(problem.gauge, x, y, dir.di * d, dir.dj * d) / problem.h;
        const Complex u = std::polar(1.0, phase);
        const int q = index(qi, qj);
        t.emplace_back(p, q, -dir.w * c * u);
        t.emplace_back(q, p, -dir.w * c * std::conj(u));
      }
    }
  }
  return SparseHermitianOperator::from_triplets(n * n, t);
}

namespace {

// Restarts with a doubled block when a near-degenerate cluster wider than the
// block stalls the iteration; block is updated to the size that converged.
SpectrumSlice solve_model(const ModelProblem& problem, int m, const ModelSolveOptions& options, int& block) {
  const auto op = assemble_model(problem);
  const int k = problem.gauge.order();
  const Polynomial2 b0 = problem.gauge.curl();
  EigOptions eo;
  eo.m = m;
  eo.tol = options.tol;
  eo.seed = options.seed;
  eo.max_iter = options.max_iter;
  eo.preconditioner = options.preconditioner;
  eo.monitor = options.monitor;
  eo.shift = std::pow(problem.h, scaling_exponent(k)) * std::pow(b0.max_on_unit_circle(), 2.0 / (k + 2));
  const int cap = op.dimension() / 3;
  if (block < m + 4) block = m + 4;
  SpectrumSlice s;
  for (;;) {
    eo.block_size = std::min(block, cap);
    try {
      s = lowest_eigs(op, eo);
      break;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::SolverStagnation || eo.block_size >= cap || block >= 8 * (m + 4)) throw;
      block *= 2;
    }
  }
  s.meta.h = problem.h;
  s.meta.grid = problem.grid_n;
  s.meta.box = problem.box_halfwidth;
  return s;
}

}  // namespace

ModelSpectrum model_spectrum(const ModelProblem& problem, int m, const ModelSolveOptions& options) {
  if (m < 1) throw Error(ErrorKind::InvalidArgument, "levels must be >= 1");
  ModelSpectrum out;
  // A constant form has a macroscopically degenerate lowest level in the box;
  // a wide block separates it from the slowly converging edge-state tail.
  int block = problem.gauge.order() == 0 ? std::max(m + 4, 32) : m + 4;
  out.slice = solve_model(problem, m, options, block);
  const double d = problem.spacing();
  out.validity_top = 0.1 * problem.h * problem.h / (d * d);
  if (out.slice.eigenvalues.back() > out.validity_top) {
    std::ostringstream os;
    os << "eigenvalue " << out.slice.eigenvalues.back() << " exceeds the discretization validity top "
       << out.validity_top;
    throw Error(ErrorKind::OutOfValidatedRange, os.str());
  }
  if (options.check_truncation) {
    // Grow the box to ~1.25 L at fixed spacing.
    const int j = static_cast<int>(std::ceil(0.125 * (problem.grid_n + 1)));
    ModelProblem big = problem;
    big.box_halfwidth = problem.box_halfwidth + j * d;
    big.grid_n = problem.grid_n + 2 * j;
    const SpectrumSlice s2 = solve_model(big, m, options, block);
    for (int i = 0; i < m; ++i) {
      out.truncation_shift = std::max(out.truncation_shift, std::abs(s2.eigenvalues[i] - out.slice.eigenvalues[i]));
    }
    const double limit = 10.0 * options.tol * out.slice.meta.norm_estimate;
    if (out.truncation_shift > limit) {
      std::ostringstream os;
      os << "eigenvalues shift by " << out.truncation_shift << " when the box grows to " << big.box_halfwidth
         << " (limit " << limit << ")";
      throw Error(ErrorKind::TruncationDominated, os.str());
    }
  }
  return out;
}

ScalingReport scaling_check(const Polynomial2& b0, double h1, double h2, int m, const ScalingOptions& options) {
  if (!(h1 > 0.0 && h1 <= 1.0 && h2 > 0.0 && h2 <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "scaling_check needs h1, h2 in (0,1]");
  }
  const int k = b0.degree();
  const double e = scaling_exponent(k);
  ScalingReport r;
  const auto p1 = make_model_problem(b0, h1, options.grid_1);
  const auto s1 = model_spectrum(p1, m, options.solve).slice;
  SpectrumSlice s2 = s1;
  if (h2 != h1) {
    s2 = model_spectrum(make_model_problem(b0, h2, options.grid_2), m, options.solve).slice;
  }
  for (int i = 0; i < m; ++i) {
    r.scaled_1.push_back(s1.eigenvalues[i] / std::pow(h1, e));
    r.scaled_2.push_back(h2 == h1 ? r.scaled_1.back() : s2.eigenvalues[i] / std::pow(h2, e));
    const double dev = std::abs(r.scaled_2[i] - r.scaled_1[i]) / std::abs(r.scaled_1[i]);
    r.max_rel_deviation = std::max(r.max_rel_deviation, dev);
  }
  return r;
}

std::vector<Level> merge_levels(const std::vector<double>& v, double threshold) {
  std::vector<Level> out;
  double sum = 0.0;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i > 0 && v[i] - v[i - 1] <= threshold) {
      sum += v[i];
      ++out.back().multiplicity;
    } else {
      if (!out.empty()) out.back().value = sum / out.back().multiplicity;
      out.push_back({v[i], 1});
      sum = v[i];
    }
  }
  if (!out.empty()) out.back().value = sum / out.back().multiplicity;
  return out;
}

double merge_threshold(const SpectrumSlice& slice) { return 2.0 * slice.meta.tol * slice.meta.norm_estimate; }

std::vector<std::pair<double, double>> model_gaps(const SpectrumSlice& slice, double rel_width_min) {
  const auto levels = merge_levels(slice.eigenvalues, merge_threshold(slice));
  std::vector<std::pair<double, double>> out;
  for (size_t i = 0; i + 1 < levels.size(); ++i) {
    const double lo = levels[i].value, hi = levels[i + 1].value;
    if ((hi - lo) / hi > rel_width_min) out.emplace_back(lo, hi);
  }
  return out;
}

int count_below(const SpectrumSlice& slice, double lambda) {
  if (slice.eigenvalues.empty() || lambda > slice.eigenvalues.back()) {
    throw Error(ErrorKind::OutOfValidatedRange, "count requested above the computed part of the spectrum");
  }
  return static_cast<int>(std::upper_bound(slice.eigenvalues.begin(), slice.eigenvalues.end(), lambda) -
                          slice.eigenvalues.begin());
}

double lower_bound_ratio(const ModelProblem& problem, const SpectrumSlice& slice) {
  const int n = problem.grid_n;
  const double d = problem.spacing();
  const double l = problem.box_halfwidth;
  const Polynomial2 b0 = problem.gauge.curl();
  Eigen::VectorXd weight(n * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) weight[i * n + j] = std::abs(b0(-l + (i + 1) * d, -l + (j + 1) * d));
  }
  double ratio = 0.0;
  for (int c = 0; c < slice.vectors.cols(); ++c) {
    const auto u = slice.vectors.col(c);
    const double pot = (weight.array() * u.cwiseAbs2().array()).sum() / u.squaredNorm();
    ratio = std::max(ratio, problem.h * pot / slice.eigenvalues[c]);
  }
  return ratio;
}

}  // namespace magnetic_gaps
