#pragma once

#include <array>
#include <complex>
#include <map>
#include <utility>
#include <vector>

#include "magnetic_gaps/polynomial.hpp"

namespace magnetic_gaps {

using Point = std::array<double, 2>;

// Real trigonometric polynomial B(x,y) = sum c_mn exp(2 pi i (m x + n y)) on the unit torus.
class PeriodicScalarField {
 public:
  using Modes = std::map<std::pair<int, int>, std::complex<double>>;

  PeriodicScalarField() = default;
  // Accepts any subset of modes; missing conjugate partners are filled in.
  // Throws InvalidArgument if a stored pair violates c_{-m,-n} = conj(c_mn)
  // or a mode exceeds max_mode.
  PeriodicScalarField(int max_mode, Modes modes);

  static PeriodicScalarField constant(double b);
  // 2 pi (1 - cos 2 pi x cos 2 pi y).
  static PeriodicScalarField test_field();

  int max_mode() const noexcept { return max_mode_; }
  const Modes& modes() const noexcept { return modes_; }
  std::complex<double> coefficient(int m, int n) const;
  double mean() const { return coefficient(0, 0).real(); }
  double max_coefficient() const;

  std::complex<double> eval_complex(double x, double y) const;
  double operator()(double x, double y) const;
  // Mixed partial derivative d^p/dx^p d^q/dy^q, real part.
  double derivative(int p, int q, double x, double y) const;

  // Field x -> B(x - v), so zeros move by +v.
  PeriodicScalarField shifted(double vx, double vy) const;
  PeriodicScalarField operator*(const PeriodicScalarField& other) const;
  PeriodicScalarField operator*(double s) const;
  PeriodicScalarField operator+(const PeriodicScalarField& other) const;

  // Trapezoid quadrature of B over the cell on an n x n grid.
  double flux(int n = 0) const;

 private:
  int max_mode_ = 0;
  Modes modes_;
};

// Real part of the series; throws InvalidArgument if the imaginary part exceeds
// 1e-12 max|c| (field not real).
double eval_field(const PeriodicScalarField& field, const Point& p);

struct ZeroSearchOptions {
  int seed_grid = 64;
  double tol = 1e-10;
  int newton_max_iter = 200;
  // Post-check every refined zero with vanishing_order.
  bool check_order = true;
};

std::vector<Point> find_zeros(const PeriodicScalarField& field, const ZeroSearchOptions& options = {});
std::vector<Point> find_zeros(const PeriodicScalarField& field, int seed_grid, double tol);

struct OrderEstimate {
  int k = 0;
  double comp_lower = 0.0;
  double comp_upper = 0.0;
  double slope = 0.0;
};

struct OrderOptions {
  int n_radii = 9;
  // LowerBoundFailure if min_angle |B|/r^k < lower_floor * comp_upper.
  double lower_floor = 1e-2;
  // |B(zero)| must not exceed this times max|c| (precondition).
  double zero_tol = 1e-8;
};

OrderEstimate vanishing_order(const PeriodicScalarField& field, const Point& zero, double probe_radius,
                              int n_angles, const OrderOptions& options = {});

// Degree-k Taylor form of B at zero, in local coordinates X = x - zero.
Polynomial2 taylor_leading(const PeriodicScalarField& field, const Point& zero, int k);

struct ZeroDatum {
  Point position{0.0, 0.0};
  int order = 0;
  Polynomial2 leading_form;
  double comp_lower = 0.0;
  double comp_upper = 0.0;
  double probe_radius = 0.0;
};

// find_zeros + vanishing_order + taylor_leading. The probe radius is
// min(max_probe, a quarter of the distance to the nearest other zero).
std::vector<ZeroDatum> analyze_zeros(const PeriodicScalarField& field, const ZeroSearchOptions& options = {},
                                     double max_probe = 0.05, int n_angles = 64);

// Distance on the unit torus.
double torus_distance(const Point& a, const Point& b);
// Wrap into [0,1)^2; coordinates within 1e-12 of 1 map to 0.
Point wrap_unit(const Point& p);

}  // namespace magnetic_gaps
