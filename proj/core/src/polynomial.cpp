#include "magnetic_gaps/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace magnetic_gaps {

Polynomial2::Polynomial2(Terms terms) : terms_(std::move(terms)) {}

Polynomial2 Polynomial2::monomial(int p, int q, double c) {
  Polynomial2 out;
  out.terms_[{p, q}] = c;
  return out;
}

double Polynomial2::coefficient(int p, int q) const {
  auto it = terms_.find({p, q});
  return it == terms_.end() ? 0.0 : it->second;
}

void Polynomial2::set_coefficient(int p, int q, double c) { terms_[{p, q}] = c; }

int Polynomial2::degree() const {
  int d = -1;
  for (const auto& [e, c] : terms_) {
    if (c != 0.0) d = std::max(d, e.first + e.second);
  }
  return d;
}

bool Polynomial2::is_zero() const {
  return std::all_of(terms_.begin(), terms_.end(), [](const auto& t) { return t.second == 0.0; });
}

bool Polynomial2::is_homogeneous(int d) const {
  return std::all_of(terms_.begin(), terms_.end(), [d](const auto& t) {
    return t.second == 0.0 || t.first.first + t.first.second == d;
  });
}

double Polynomial2::operator()(double x1, double x2) const {
  double sum = 0.0;
  for (const auto& [e, c] : terms_) {
    if (c == 0.0) continue;
    double term = c;
    for (int i = 0; i < e.first; ++i) term *= x1;
    for (int i = 0; i < e.second; ++i) term *= x2;
    sum += term;
  }
  return sum;
}

Polynomial2 Polynomial2::d1() const {
  Polynomial2 out;
  for (const auto& [e, c] : terms_) {
    if (e.first > 0) out.terms_[{e.first - 1, e.second}] += c * e.first;
  }
  return out;
}

Polynomial2 Polynomial2::d2() const {
  Polynomial2 out;
  for (const auto& [e, c] : terms_) {
    if (e.second > 0) out.terms_[{e.first, e.second - 1}] += c * e.second;
  }
  return out;
}

Polynomial2 Polynomial2::times_monomial(int p, int q, double s) const {
  Polynomial2 out;
  for (const auto& [e, c] : terms_) out.terms_[{e.first + p, e.second + q}] += c * s;
  return out;
}

Polynomial2& Polynomial2::operator+=(const Polynomial2& other) {
  for (const auto& [e, c] : other.terms_) terms_[e] += c;
  return *this;
}

Polynomial2& Polynomial2::operator-=(const Polynomial2& other) {
  for (const auto& [e, c] : other.terms_) terms_[e] -= c;
  return *this;
}

Polynomial2& Polynomial2::operator*=(double s) {
  for (auto& [e, c] : terms_) c *= s;
  return *this;
}

double Polynomial2::max_abs() const {
  double m = 0.0;
  for (const auto& [e, c] : terms_) m = std::max(m, std::abs(c));
  return m;
}

double Polynomial2::max_on_unit_circle(int n) const {
  double m = 0.0;
  for (int i = 0; i < 2 * n; ++i) {
    const double t = std::numbers::pi * i / n;
    m = std::max(m, std::abs((*this)(std::cos(t), std::sin(t))));
  }
  return m;
}

std::string Polynomial2::to_string() const {
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  for (const auto& [e, c] : terms_) {
    if (c == 0.0) continue;
    if (!first) os << " + ";
    os << c << "*X1^" << e.first << "*X2^" << e.second;
    first = false;
  }
  if (first) os << "0";
  return os.str();
}

bool approx_equal(const Polynomial2& a, const Polynomial2& b, double tol) {
  const Polynomial2 diff = a - b;
  return diff.max_abs() <= tol;
}

}  // namespace magnetic_gaps
