#pragma once

#include <map>
#include <string>
#include <utility>

namespace magnetic_gaps {

// Exponent pair (p, q) of the monomial X1^p X2^q.
using Exponent = std::pair<int, int>;

// Real polynomial in two variables, sparse in its monomials.
class Polynomial2 {
 public:
  using Terms = std::map<Exponent, double>;

  Polynomial2() = default;
  explicit Polynomial2(Terms terms);

  static Polynomial2 monomial(int p, int q, double c);
  static Polynomial2 constant(double c) { return monomial(0, 0, c); }

  double coefficient(int p, int q) const;
  void set_coefficient(int p, int q, double c);
  const Terms& terms() const noexcept { return terms_; }

  // Highest total degree with a nonzero coefficient, -1 for the zero polynomial.
  int degree() const;
  bool is_zero() const;
  // True when every nonzero term has total degree d (the zero polynomial is homogeneous of any degree).
  bool is_homogeneous(int d) const;

  double operator()(double x1, double x2) const;

  Polynomial2 d1() const;
  Polynomial2 d2() const;
  Polynomial2 times_monomial(int p, int q, double c) const;

  Polynomial2& operator+=(const Polynomial2& other);
  Polynomial2& operator-=(const Polynomial2& other);
  Polynomial2& operator*=(double s);

  friend Polynomial2 operator+(Polynomial2 a, const Polynomial2& b) { return a += b; }
  friend Polynomial2 operator-(Polynomial2 a, const Polynomial2& b) { return a -= b; }
  friend Polynomial2 operator*(Polynomial2 a, double s) { return a *= s; }
  friend Polynomial2 operator*(double s, Polynomial2 a) { return a *= s; }

  // Largest coefficient magnitude.
  double max_abs() const;
  // Max over the 2n sample angles of |p(cos t, sin t)|.
  double max_on_unit_circle(int n = 256) const;

  std::string to_string() const;

 private:
  Terms terms_;
};

// Coefficientwise |a - b| <= tol.
bool approx_equal(const Polynomial2& a, const Polynomial2& b, double tol);

}  // namespace magnetic_gaps
