#include "magnetic_gaps/intervals.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "magnetic_gaps/error.hpp"

namespace magnetic_gaps {

namespace {

using Real = long double;

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorKind::InvalidArgument, what);
}

Rational reduced(long long num, long long den) {
  const long long g = std::gcd(num, den);
  return {num / g, den / g};
}

}  // namespace

void validate(const TransferParams& p) {
  require(p.rho >= 1.0, "rho must be >= 1");
  require(p.alpha1 > 0.0 && p.alpha2 > 0.0, "alpha must be > 0");
  require(p.beta1 >= 1.0 && p.beta2 >= 1.0, "beta must be >= 1");
  require(p.gamma1 >= 0.0 && p.gamma2 >= 0.0, "gamma must be >= 0");
  require(p.eps1 > 0.0 && p.eps2 > 0.0, "eps must be > 0");
  require(p.lambda01 <= 0.0 && p.lambda02 <= 0.0, "lambda0 must be <= 0");
}

GapWindow make_window(double a, double b) {
  if (!(a < b)) {
    std::ostringstream os;
    os << "window needs a < b, got (" << a << ", " << b << ")";
    throw Error(ErrorKind::InvalidArgument, os.str());
  }
  return {a, b};
}

TransferResult transfer(const TransferParams& p, const GapWindow& w) {
  validate(p);
  make_window(w.a, w.b);
  const Real rho = p.rho, a1 = w.a, b1 = w.b;
  const Real al1 = p.alpha1, al2 = p.alpha2, be1 = p.beta1, be2 = p.beta2;
  const Real g1 = p.gamma1, g2 = p.gamma2, e1 = p.eps1, e2 = p.eps2;
  const Real l1 = p.lambda01, l2 = p.lambda02;

  const Real d1 = al1 - a1 - g1;
  if (!(d1 > 0)) throw Error(ErrorKind::ConditionViolated, "alpha1 > a1 + gamma1");
  const Real shifted = b1 / rho - e2;
  if (!(shifted > 0)) throw Error(ErrorKind::ConditionViolated, "b1/rho > eps2");
  const Real t = shifted / be2;
  const Real d2 = al2 - 2 * l2 + t;
  if (!(d2 > 0)) throw Error(ErrorKind::ConditionViolated, "denominator sign");

  const Real u = a1 + g1 - l1;
  const Real a2 = rho * (be1 * (a1 + g1 + u * u / d1) + e1);
  const Real b2 = (t * (al2 - g2) - al2 * g2 + 2 * l2 * g2 - l2 * l2) / d2;

  TransferResult r;
  r.a2 = static_cast<double>(a2);
  r.b2 = static_cast<double>(b2);
  if (!(al2 > b2 + g2)) {
    r.violated = "alpha2 > b2 + gamma2";
  } else if (!(b2 > a2)) {
    r.violated = "b2 > a2";
  }
  r.valid = r.violated.empty();
  return r;
}

double dual_b1(const TransferParams& p, double b2) {
  const Real rho = p.rho, be2 = p.beta2, g2 = p.gamma2, e2 = p.eps2, l2 = p.lambda02, al2 = p.alpha2;
  const Real x = static_cast<Real>(b2) + g2;
  const Real u = x - l2;
  return static_cast<double>(rho * (be2 * (x + u * u / (al2 - x)) + e2));
}

EstimateExponents estimate_exponents(int k, double kappa) {
  const double e = (2.0 * k + 2.0) / (k + 2.0);
  return {2.0 - 2.0 * kappa - e, 1.0 + k * kappa - e, (2.0 * k + 3.0) * kappa - e};
}

TransferParams estimate_params(const EstimateConstants& c, double h) {
  if (!(h > 0.0 && h < 1.0)) throw Error(ErrorKind::InvalidArgument, "h must lie in (0,1)");
  if (c.k < 1 || !(c.kappa > 0.0) || !(c.kappa * c.k < 2.0)) {
    throw Error(ErrorKind::InvalidArgument, "estimate constants need k >= 1 and 0 < kappa < 2/k");
  }
  if (!(c.c_rho > 0 && c.c_gamma > 0 && c.c_alpha > 0 && c.c_beta > 0 && c.c_eps > 0)) {
    throw Error(ErrorKind::InvalidArgument, "estimate constants must be positive");
  }
  const auto ex = estimate_exponents(c.k, c.kappa);
  const Real hk = std::pow(static_cast<Real>(h), static_cast<Real>(c.kappa));
  TransferParams p;
  p.rho = static_cast<double>(1 + c.c_rho * hk);
  p.beta1 = p.beta2 = static_cast<double>(1 + c.c_beta * hk);
  p.gamma1 = p.gamma2 = c.c_gamma * std::pow(h, ex.gamma);
  p.alpha1 = p.alpha2 = c.c_alpha * std::pow(h, ex.alpha);
  p.eps1 = p.eps2 = c.c_eps * std::pow(h, ex.eps);
  p.lambda01 = p.lambda02 = 0.0;
  return p;
}

double lower_bound_epsilon(int k, double kappa) { return (2.0 - k * kappa) / 2.0; }

double shrink_rate(int k, double kappa) {
  if (k < 1 || !(kappa > 0.0) || !(kappa < 2.0 / k)) {
    throw Error(ErrorKind::InvalidArgument, "shrink_rate needs k >= 1 and 0 < kappa < 2/k");
  }
  const double e = (2.0 * k + 2.0) / (k + 2.0);
  return std::min((2.0 * k + 3.0) * kappa - e, 2.0 - 2.0 * kappa - e);
}

std::string Rational::to_string() const {
  std::ostringstream os;
  os << num << "/" << den;
  return os.str();
}

OptimalKappa optimal_kappa(int k) {
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "k must be >= 1");
  OptimalKappa out;
  out.kappa_exact = reduced(2, 2LL * k + 5);
  out.s_exact = reduced(2, (2LL * k + 5) * (k + 2));
  out.kappa_star = out.kappa_exact.value();
  out.s_star = out.s_exact.value();
  return out;
}

}  // namespace magnetic_gaps
