// One line per criterion: "criterion <i>: PASS|FAIL <measurements>".
// Usage: acceptance [i ...]; no arguments runs all nine.

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "magnetic_gaps/bloch.hpp"
#include "magnetic_gaps/eig.hpp"
#include "magnetic_gaps/error.hpp"
#include "magnetic_gaps/fields.hpp"
#include "magnetic_gaps/harness.hpp"
#include "magnetic_gaps/intervals.hpp"
#include "magnetic_gaps/model_op.hpp"

namespace mg = magnetic_gaps;
using std::numbers::pi;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

mg::Polynomial2 radial_k2() {
  const double c = 4.0 * pi * pi * pi;
  return mg::Polynomial2::monomial(2, 0, c) + mg::Polynomial2::monomial(0, 2, c);
}

double slope_fit(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0.0, sxx = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

// Landau levels of B = 2 pi at h = 1/N: the lowest three clusters of N
// eigenvalues each sit at (2m+1) 2 pi h.
void landau_oracle(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto field = mg::PeriodicScalarField::constant(2.0 * pi);
  double worst = 0.0;
  for (int n : {4, 8}) {
    const double h = mg::flux_quantized_h(field, n);
    const int grid = mg::auto_grid(n);
    const auto bs = mg::bloch_spectrum(field, h, 2, 6.0 * 2.0 * pi * h, grid);
    for (const auto& s : bs.slices) {
      o.require(s.size() >= 3 * n, "fewer than three levels below the cutoff at N=" + std::to_string(n));
      for (int i = 0; i < std::min(s.size(), 3 * n); ++i) {
        const int m = i / n;
        worst = std::max(worst, rel(s.eigenvalues[i], (2 * m + 1) * 2.0 * pi * h));
      }
    }
    o.detail << " N=" << n << " grid=" << grid;
  }
  const double wall = seconds_since(t0);
  o.detail << " max_rel_dev=" << worst << " wall_s=" << wall;
  o.require(worst <= 5e-3, "relative deviation above 0.5%");
  o.require(wall <= 120.0, "runtime above 2 minutes");
}

void model_scaling(Outcome& o) {
  const auto k2 = mg::scaling_check(radial_k2(), 1.0, 0.25, 4);
  const auto k0 = mg::scaling_check(mg::Polynomial2::constant(1.0), 1.0, 0.25, 4);
  o.detail << " k2_max_rel_dev=" << k2.max_rel_deviation << " k0_max_rel_dev=" << k0.max_rel_deviation;
  o.require(k2.scaled_1.size() == 4 && k2.max_rel_deviation <= 5e-3, "k=2 scaling above 0.5%");
  o.require(k0.max_rel_deviation <= 5e-3, "k=0 scaling above 0.5%");
}

void gauge_invariance(Outcome& o) {
  auto p = mg::make_model_problem(radial_k2(), 1.0, 96);
  auto q = p;
  q.gauge = mg::add_gradient(p.gauge, mg::Polynomial2::monomial(3, 1, 0.7) + mg::Polynomial2::monomial(0, 4, 0.2));
  mg::ModelSolveOptions so;
  so.tol = 1e-10;
  so.check_truncation = false;
  const auto a = mg::model_spectrum(p, 4, so);
  const auto b = mg::model_spectrum(q, 4, so);
  double model_dev = 0.0;
  for (int i = 0; i < 4; ++i) model_dev = std::max(model_dev, rel(b.slice.eigenvalues[i], a.slice.eigenvalues[i]));

  const auto field = mg::PeriodicScalarField::test_field();
  double bloch_dev = 0.0;
  for (const mg::Point th : {mg::Point{0.0, 0.0}, mg::Point{2.1, 0.4}, mg::Point{pi, pi}}) {
    mg::EigOptions eo;
    eo.m = 6;
    eo.tol = 1e-10;
    eo.preconditioner = mg::PreconditionerKind::ShiftedFactorization;
    eo.shift = 2.0 * pi * 0.25;
    const auto x = mg::lowest_eigs(mg::assemble_bloch(mg::make_bloch_problem(field, 0.25, th, 64)), eo);
    const auto y = mg::lowest_eigs(
        mg::assemble_bloch(mg::make_bloch_problem(field, 0.25, th, 64, mg::LinearGauge::AltLandau)), eo);
    for (int i = 0; i < 6; ++i) bloch_dev = std::max(bloch_dev, rel(y.eigenvalues[i], x.eigenvalues[i]));
  }
  o.detail << " model_max_rel_dev=" << model_dev << " bloch_max_rel_dev=" << bloch_dev;
  o.require(model_dev <= 1e-9, "model spectra differ between gauges");
  o.require(bloch_dev <= 1e-9, "Bloch spectra differ between gauges");
}

void test_field_gaps(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  auto config = mg::read_verification_config(std::string(MAGNETIC_GAPS_TEST_DATA) + "/verify_test_field.cfg");
  config.output_dir = "acceptance_criterion_4";
  const auto r = mg::run_verification(config);
  const double wall = seconds_since(t0);
  o.require(!r.partial, "partial sweep: " + r.partial_reason);
  const double l1 = r.ladder.levels.at(0).value;
  o.detail << " lambda1=" << l1 << " lambda2=" << r.ladder.levels.at(1).value;
  double prev = INFINITY;
  bool monotone = true;
  for (const auto& row : r.rows) {
    const double dev = std::abs(row.clusters.at(0).center - l1);
    monotone = monotone && dev < prev;
    prev = dev;
    o.detail << " N=" << row.n << ":dev=" << dev << ",gap1=" << (row.verdicts.at(0).empty ? "empty" : "occupied");
  }
  o.detail << " N0=" << (r.n0 ? std::to_string(*r.n0) : std::string("none")) << " wall_s=" << wall;
  o.require(monotone, "(i) ground cluster deviation not decreasing");
  o.require(r.n0.has_value() && *r.n0 <= 12, "(ii) predicted interval occupied at the largest N");
}

void transfer_exactness(Outcome& o) {
  std::mt19937_64 rng(20240501);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int valid = 0, rejected = 0, nest_fail = 0;
  double worst_dual = 0.0;
  while (valid < 10000) {
    const double a = 0.5 + 4.5 * u(rng);
    const double b = a + 0.5 + 4.5 * u(rng);
    mg::TransferParams p;
    p.rho = 1.0 + 1e-3 + u(rng);
    p.beta1 = 1.0 + u(rng);
    p.beta2 = 1.0 + u(rng);
    p.gamma1 = 1e-3 + 0.5 * u(rng);
    p.gamma2 = 1e-3 + 0.5 * u(rng);
    p.eps1 = 1e-3 + 0.5 * u(rng);
    p.eps2 = 1e-3 + 0.2 * u(rng) * b / p.rho;
    p.lambda01 = -u(rng);
    p.lambda02 = -u(rng);
    p.alpha1 = a + p.gamma1 + 1.0 + 50.0 * u(rng);
    p.alpha2 = b + p.gamma2 + 1.0 + 50.0 * u(rng);
    mg::TransferResult r;
    try {
      r = mg::transfer(p, {a, b});
    } catch (const mg::Error& e) {
      if (e.kind() != mg::ErrorKind::ConditionViolated) throw;
      ++rejected;
      continue;
    }
    ++valid;
    if (!(r.a2 > a && r.b2 < b)) ++nest_fail;
    worst_dual = std::max(worst_dual, rel(mg::dual_b1(p, r.b2), b));
  }
  mg::TransferParams degenerate;
  degenerate.alpha1 = degenerate.alpha2 = 1e12;
  const auto d = mg::transfer(degenerate, {2.0, 5.0});
  const double degenerate_dev = std::max(std::abs(d.a2 - 2.0), std::abs(d.b2 - 5.0));
  o.detail << " draws=" << valid << " rejected_preconditions=" << rejected << " nest_failures=" << nest_fail
           << " max_dual_rel_err=" << worst_dual << " degenerate_dev=" << degenerate_dev;
  o.require(nest_fail == 0, "a2 > a1 and b2 < b1 violated");
  o.require(worst_dual <= 1e-12, "duality round trip above 1e-12");
  o.require(degenerate_dev <= 1e-9, "degenerate limit moved the window");
}

double golden_max(int k) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.0, hi = 2.0 / k;
  double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  double f1 = mg::shrink_rate(k, x1), f2 = mg::shrink_rate(k, x2);
  while (hi - lo > 1e-13) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = mg::shrink_rate(k, x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = mg::shrink_rate(k, x1);
    }
  }
  return 0.5 * (lo + hi);
}

void kappa_optimizer(Outcome& o) {
  double worst = 0.0;
  for (int k = 1; k <= 6; ++k) {
    const auto r = mg::optimal_kappa(k);
    const long long q = 2 * k + 5;
    const bool exact = r.kappa_exact.num * q == 2 * r.kappa_exact.den &&
                       r.s_exact.num * q * (k + 2) == 2 * r.s_exact.den;
    o.require(exact, "k=" + std::to_string(k) + " rational mismatch");
    worst = std::max(worst, std::abs(golden_max(k) - r.kappa_star));
    if (k == 2) o.detail << " k2=" << r.kappa_exact.to_string() << "," << r.s_exact.to_string();
  }
  o.detail << " max_golden_dev=" << worst;
  o.require(worst <= 1e-10, "golden-section maximizer disagrees");
}

void rate_sharpness(Outcome& o) {
  const mg::EstimateConstants c;
  const double s = mg::optimal_kappa(c.k).s_star;
  std::vector<double> lx, ly;
  double lo = INFINITY, hi = 0.0;
  int thrown = 0, invalid = 0;
  double first_ok = 0.0;
  for (int i = 0; i <= 20; ++i) {
    const double h = std::pow(10.0, -2.0 - 0.5 * i);
    mg::TransferResult r;
    try {
      r = mg::transfer(mg::estimate_params(c, h), {2.0, 5.0});
    } catch (const mg::Error& e) {
      if (e.kind() != mg::ErrorKind::ConditionViolated) throw;
      ++thrown;
      continue;
    }
    if (!r.valid) ++invalid;
    if (first_ok == 0.0) first_ok = h;
    const double q = std::abs(r.a2 - 2.0) / std::pow(h, s);
    lo = std::min(lo, q);
    hi = std::max(hi, q);
    lx.push_back(std::log(h));
    ly.push_back(std::log(std::abs(r.a2 - 2.0)));
  }
  const double slope = lx.size() >= 2 ? slope_fit(lx, ly) : NAN;
  o.detail << " s_star=" << s << " samples=21 preconditions_failed=" << thrown << " largest_admissible_h=" << first_ok
           << " invalid_windows=" << invalid << " ratio_band=" << hi / lo << " slope=" << slope;
  o.require(thrown == 0, "transfer preconditions fail on part of the range");
  o.require(hi / lo <= 10.0, "ratio band wider than 10");
  o.require(std::abs(slope - s) <= 0.02, "slope outside s* +- 0.02");
}

void eigensolver_oracle(Outcome& o) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> dim(50, 200);
  std::normal_distribution<double> g;
  double worst = 0.0;
  bool identical = true;
  for (int t = 0; t < 50; ++t) {
    const int n = dim(rng);
    Eigen::MatrixXcd a(n, n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) a(i, j) = mg::Complex(g(rng), g(rng));
    a = (a + a.adjoint()).eval() / 2.0;
    const mg::SparseHermitianOperator op(a.sparseView());
    mg::EigOptions eo;
    eo.m = 10;
    eo.tol = 1e-10;
    eo.seed = 100 + t;
    const auto s = mg::lowest_eigs(op, eo);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> dense(a, Eigen::EigenvaluesOnly);
    for (int i = 0; i < 10; ++i) worst = std::max(worst, rel(s.eigenvalues[i], dense.eigenvalues()(i)));
    if (t % 10 == 0) {
      const auto again = mg::lowest_eigs(op, eo);
      identical = identical && again.eigenvalues == s.eigenvalues && again.vectors == s.vectors;
    }
  }
  o.detail << " operators=50 max_rel_dev=" << worst << " repeat_bit_identical=" << (identical ? "yes" : "no");
  o.require(worst <= 1e-8, "eigenvalues differ from dense oracle");
  o.require(identical, "repeated runs differ");
}

void zero_analysis(Outcome& o) {
  const auto zeros = mg::analyze_zeros(mg::PeriodicScalarField::test_field());
  o.require(zeros.size() == 2, "expected two zeros");
  if (zeros.size() != 2) return;
  const double c = 4.0 * pi * pi * pi;
  double pos = 0.0, coef = 0.0;
  const mg::Point expect[2] = {{0.0, 0.0}, {0.5, 0.5}};
  for (int i = 0; i < 2; ++i) {
    const auto& z = zeros[i];
    pos = std::max(pos, mg::torus_distance(z.position, expect[i]));
    o.require(z.order == 2, "order is not 2");
    const auto t = mg::taylor_leading(mg::PeriodicScalarField::test_field(), z.position, 2);
    coef = std::max({coef, std::abs(t.coefficient(2, 0) - c), std::abs(t.coefficient(0, 2) - c),
                     std::abs(t.coefficient(1, 1))});
  }
  o.detail << " zeros=2 k=" << zeros[0].order << "," << zeros[1].order << " max_position_err=" << pos
           << " max_coefficient_err=" << coef;
  o.require(pos <= 1e-10, "zero positions off");
  o.require(coef <= 1e-10, "Taylor coefficients off");
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<void(Outcome&)>> criteria{landau_oracle,    model_scaling,   gauge_invariance,
                                                            test_field_gaps,  transfer_exactness, kappa_optimizer,
                                                            rate_sharpness,   eigensolver_oracle, zero_analysis};
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
  if (which.empty()) {
    for (int i = 1; i <= 9; ++i) which.push_back(i);
  }
  bool all = true;
  for (int i : which) {
    if (i < 1 || i > 9) {
      std::fprintf(stderr, "unknown criterion %d\n", i);
      return 64;
    }
    Outcome o;
    try {
      criteria[i - 1](o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [error: " << e.what() << "]";
    }
    std::printf("criterion %d: %s%s\n", i, o.pass ? "PASS" : "FAIL", o.detail.str().c_str());
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
