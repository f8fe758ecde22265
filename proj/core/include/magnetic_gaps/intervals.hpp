#pragma once

#include <string>

namespace magnetic_gaps {

struct TransferParams {
  double rho = 1.0;
  double alpha1 = 1.0;
  double alpha2 = 1.0;
  double beta1 = 1.0;
  double beta2 = 1.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double eps1 = 1e-300;
  double eps2 = 1e-300;
  double lambda01 = 0.0;
  double lambda02 = 0.0;
};

// Throws InvalidArgument on a field outside its range.
void validate(const TransferParams& p);

struct GapWindow {
  double a = 0.0;
  double b = 1.0;
};

// Throws InvalidArgument unless a < b.
GapWindow make_window(double a, double b);

struct TransferResult {
  double a2 = 0.0;
  double b2 = 0.0;
  // Side conditions alpha2 > b2 + gamma2 and b2 > a2.
  bool valid = false;
  std::string violated;  // empty when valid
};

// (a1, b1) -> (a2, b2). Throws ConditionViolated when alpha1 > a1 + gamma1,
// b1/rho > eps2 or the b2 denominator sign fails.
TransferResult transfer(const TransferParams& p, const GapWindow& w);

// b1 recomputed from b2 by the swapped formula.
double dual_b1(const TransferParams& p, double b2);

struct EstimateConstants {
  double c_rho = 1.0;
  double c_gamma = 1.0;
  double c_alpha = 1.0;
  double c_beta = 1.0;
  double c_eps = 1.0;
  int k = 2;
  double kappa = 2.0 / 9.0;
};

struct EstimateExponents {
  double gamma = 0.0;
  double alpha = 0.0;
  double eps = 0.0;
};

EstimateExponents estimate_exponents(int k, double kappa);
TransferParams estimate_params(const EstimateConstants& c, double h);
// epsilon of the second lower bound, fixed to (2 - k kappa)/2.
double lower_bound_epsilon(int k, double kappa);

double shrink_rate(int k, double kappa);

struct Rational {
  long long num = 0;
  long long den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string to_string() const;
};

struct OptimalKappa {
  double kappa_star = 0.0;
  double s_star = 0.0;
  Rational kappa_exact;
  Rational s_exact;
};

OptimalKappa optimal_kappa(int k);

}  // namespace magnetic_gaps
