#include "magnetic_gaps/fields.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>

#include "magnetic_gaps/error.hpp"

namespace magnetic_gaps {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

std::complex<double> ipow(std::complex<double> z, int p) {
  std::complex<double> out(1.0, 0.0);
  for (int i = 0; i < p; ++i) out *= z;
  return out;
}

}  // namespace

PeriodicScalarField::PeriodicScalarField(int max_mode, Modes modes) : max_mode_(max_mode) {
  if (max_mode < 0) throw Error(ErrorKind::InvalidArgument, "max_mode must be >= 0");
  double scale = 0.0;
  for (const auto& [mn, c] : modes) scale = std::max(scale, std::abs(c));
  const double tol = 1e-12 * std::max(scale, 1e-300);
  for (const auto& [mn, c] : modes) {
    const auto [m, n] = mn;
    if (std::abs(m) > max_mode || std::abs(n) > max_mode) {
      std::ostringstream os;
      os << "mode (" << m << "," << n << ") exceeds max_mode " << max_mode;
      throw Error(ErrorKind::InvalidArgument, os.str());
    }
    auto partner = modes.find({-m, -n});
    if (partner != modes.end() && std::abs(partner->second - std::conj(c)) > tol) {
      std::ostringstream os;
      os << "mode (" << m << "," << n << ") breaks reality: partner is not the conjugate";
      throw Error(ErrorKind::InvalidArgument, os.str());
    }
  }
  for (const auto& [mn, c] : modes) {
    modes_[mn] = c;
    modes_[{-mn.first, -mn.second}] = std::conj(c);
  }
  // The constant mode of a real field is real.
  auto it = modes_.find({0, 0});
  if (it != modes_.end()) it->second = it->second.real();
}

PeriodicScalarField PeriodicScalarField::constant(double b) { return PeriodicScalarField(0, {{{0, 0}, b}}); }

PeriodicScalarField PeriodicScalarField::test_field() {
  const double q = -kTwoPi / 4.0;
  return PeriodicScalarField(1, {{{0, 0}, kTwoPi}, {{1, 1}, q}, {{1, -1}, q}});
}

std::complex<double> PeriodicScalarField::coefficient(int m, int n) const {
  auto it = modes_.find({m, n});
  return it == modes_.end() ? std::complex<double>() : it->second;
}

double PeriodicScalarField::max_coefficient() const {
  double s = 0.0;
  for (const auto& [mn, c] : modes_) s = std::max(s, std::abs(c));
  return s;
}

std::complex<double> PeriodicScalarField::eval_complex(double x, double y) const {
  std::complex<double> sum;
  for (const auto& [mn, c] : modes_) {
    sum += c * std::polar(1.0, kTwoPi * (mn.first * x + mn.second * y));
  }
  return sum;
}

double PeriodicScalarField::operator()(double x, double y) const { return eval_complex(x, y).real(); }

double PeriodicScalarField::derivative(int p, int q, double x, double y) const {
  std::complex<double> sum;
  for (const auto& [mn, c] : modes_) {
    const auto fm = ipow({0.0, kTwoPi * mn.first}, p);
    const auto fn = ipow({0.0, kTwoPi * mn.second}, q);
    sum += c * fm * fn * std::polar(1.0, kTwoPi * (mn.first * x + mn.second * y));
  }
  return sum.real();
}

PeriodicScalarField PeriodicScalarField::shifted(double vx, double vy) const {
  Modes out;
  for (const auto& [mn, c] : modes_) out[mn] = c * std::polar(1.0, -kTwoPi * (mn.first * vx + mn.second * vy));
  return PeriodicScalarField(max_mode_, std::move(out));
}

PeriodicScalarField PeriodicScalarField::operator*(const PeriodicScalarField& other) const {
  Modes out;
  for (const auto& [a, ca] : modes_) {
    for (const auto& [b, cb] : other.modes_) out[{a.first + b.first, a.second + b.second}] += ca * cb;
  }
  return PeriodicScalarField(max_mode_ + other.max_mode_, std::move(out));
}

PeriodicScalarField PeriodicScalarField::operator*(double s) const {
  Modes out = modes_;
  for (auto& [mn, c] : out) c *= s;
  return PeriodicScalarField(max_mode_, std::move(out));
}

PeriodicScalarField PeriodicScalarField::operator+(const PeriodicScalarField& other) const {
  Modes out = modes_;
  for (const auto& [mn, c] : other.modes_) out[mn] += c;
  return PeriodicScalarField(std::max(max_mode_, other.max_mode_), std::move(out));
}

double PeriodicScalarField::flux(int n) const {
  if (n <= 0) n = 2 * max_mode_ + 2;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) sum += (*this)(static_cast<double>(i) / n, static_cast<double>(j) / n);
  }
  return sum / (static_cast<double>(n) * n);
}

double eval_field(const PeriodicScalarField& field, const Point& p) {
  const auto v = field.eval_complex(p[0], p[1]);
  if (std::abs(v.imag()) > 1e-12 * std::max(field.max_coefficient(), 1e-300)) {
    throw Error(ErrorKind::InvalidArgument, "field is not real at the evaluation point");
  }
  return v.real();
}

double torus_distance(const Point& a, const Point& b) {
  double d2 = 0.0;
  for (int i = 0; i < 2; ++i) {
    double d = std::abs(a[i] - b[i]);
    d -= std::floor(d);
    d = std::min(d, 1.0 - d);
    d2 += d * d;
  }
  return std::sqrt(d2);
}

Point wrap_unit(const Point& p) {
  Point out;
  for (int i = 0; i < 2; ++i) {
    double v = p[i] - std::floor(p[i]);
    if (v >= 1.0 - 1e-12) v = 0.0;
    if (std::abs(v) < 1e-300) v = 0.0;  // no signed zero
    out[i] = v;
  }
  return out;
}

namespace {

// Largest extent of a connected sublevel component, in cell units; infinity if
// the component wraps around the torus.
double component_diameter(const std::vector<char>& marked, std::vector<char>& seen, int n, int i0, int j0) {
  const int unset = std::numeric_limits<int>::min();
  std::vector<std::pair<int, int>> unwrapped(static_cast<size_t>(n) * n, {unset, unset});
  std::queue<std::pair<int, int>> todo;
  todo.push({i0, j0});
  unwrapped[static_cast<size_t>(i0) * n + j0] = {i0, j0};
  seen[static_cast<size_t>(i0) * n + j0] = 1;
  int lo_i = i0, hi_i = i0, lo_j = j0, hi_j = j0;
  bool wraps = false;
  while (!todo.empty()) {
    const auto [ui, uj] = todo.front();
    todo.pop();
    for (int di = -1; di <= 1; ++di) {
      for (int dj = -1; dj <= 1; ++dj) {
        if (di == 0 && dj == 0) continue;
        const int vi = ui + di, vj = uj + dj;
        const int wi = ((vi % n) + n) % n, wj = ((vj % n) + n) % n;
        const size_t idx = static_cast<size_t>(wi) * n + wj;
        if (!marked[idx]) continue;
        if (seen[idx]) {
          if (unwrapped[idx] != std::make_pair(vi, vj)) wraps = true;
          continue;
        }
        seen[idx] = 1;
        unwrapped[idx] = {vi, vj};
        lo_i = std::min(lo_i, vi);
        hi_i = std::max(hi_i, vi);
        lo_j = std::min(lo_j, vj);
        hi_j = std::max(hi_j, vj);
        todo.push({vi, vj});
      }
    }
  }
  if (wraps) return std::numeric_limits<double>::infinity();
  return std::hypot(hi_i - lo_i, hi_j - lo_j) / n;
}

}  // namespace

std::vector<Point> find_zeros(const PeriodicScalarField& field, const ZeroSearchOptions& options) {
  const int n = options.seed_grid;
  if (n < 16) throw Error(ErrorKind::InvalidArgument, "seed_grid must be >= 16");
  if (!(options.tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tol must be > 0");

  std::vector<double> value(static_cast<size_t>(n) * n);
  double vmin = std::numeric_limits<double>::infinity(), vmax = -vmin;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double v = field(static_cast<double>(i) / n, static_cast<double>(j) / n);
      value[static_cast<size_t>(i) * n + j] = v;
      vmin = std::min(vmin, v);
      vmax = std::max(vmax, v);
    }
  }
  // A continuous field taking both signs vanishes along a curve.
  if (vmin < -options.tol && vmax > options.tol) {
    throw Error(ErrorKind::DegenerateZeroSet, "field changes sign, its zero set is not isolated");
  }

  std::vector<char> marked(value.size()), seen(value.size());
  for (size_t i = 0; i < value.size(); ++i) marked[i] = std::abs(value[i]) <= options.tol;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const size_t idx = static_cast<size_t>(i) * n + j;
      if (!marked[idx] || seen[idx]) continue;
      const double diam = component_diameter(marked, seen, n, i, j);
      if (diam > 4.0 / n) {
        std::ostringstream os;
        os << "sublevel set {|B| <= " << options.tol << "} has a component of diameter " << diam
           << " near (" << static_cast<double>(i) / n << "," << static_cast<double>(j) / n << ")";
        throw Error(ErrorKind::DegenerateZeroSet, os.str());
      }
    }
  }

  auto absval = [&](int i, int j) {
    return std::abs(value[static_cast<size_t>((i + n) % n) * n + (j + n) % n]);
  };

  std::vector<Point> zeros;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double v = absval(i, j);
      bool is_min = true;
      for (int di = -1; di <= 1 && is_min; ++di) {
        for (int dj = -1; dj <= 1; ++dj) {
          if ((di != 0 || dj != 0) && absval(i + di, j + dj) < v) {
            is_min = false;
            break;
          }
        }
      }
      if (!is_min) continue;

      Eigen::Vector2d p(static_cast<double>(i) / n, static_cast<double>(j) / n);
      const Eigen::Vector2d seed = p;
      Eigen::Vector2d best = p;
      double best_val = std::abs(field(p[0], p[1]));
      bool converged = false;
      for (int it = 0; it < options.newton_max_iter && best_val > 0.0; ++it) {
        Eigen::Vector2d g(field.derivative(1, 0, p[0], p[1]), field.derivative(0, 1, p[0], p[1]));
        if (g.norm() == 0.0) {
          converged = true;
          break;
        }
        Eigen::Matrix2d hess;
        hess << field.derivative(2, 0, p[0], p[1]), field.derivative(1, 1, p[0], p[1]),
            field.derivative(1, 1, p[0], p[1]), field.derivative(0, 2, p[0], p[1]);
        Eigen::JacobiSVD<Eigen::Matrix2d> svd(hess, Eigen::ComputeFullU | Eigen::ComputeFullV);
        svd.setThreshold(1e-12);
        const Eigen::Vector2d step = svd.solve(g);
        p -= step;
        if (!p.allFinite() || (p - seed).norm() > 0.5) {
          std::ostringstream os;
          os << "Newton refinement from seed (" << seed[0] << "," << seed[1] << ") left the seed cell";
          throw Error(ErrorKind::NewtonDivergence, os.str());
        }
        const double val = std::abs(field(p[0], p[1]));
        if (val < best_val) {
          best_val = val;
          best = p;
        }
        if (step.norm() < 1e-15) {
          converged = true;
          break;
        }
      }
      if (best_val > options.tol) {
        if (converged) continue;  // critical point with B != 0
        std::ostringstream os;
        os << "Newton refinement from seed (" << seed[0] << "," << seed[1] << ") did not converge in "
           << options.newton_max_iter << " iterations";
        throw Error(ErrorKind::NewtonDivergence, os.str());
      }
      const Point z = wrap_unit({best[0], best[1]});
      const bool dup = std::any_of(zeros.begin(), zeros.end(),
                                   [&](const Point& q) { return torus_distance(q, z) < 1e-6; });
      if (!dup) zeros.push_back(z);
    }
  }
  std::sort(zeros.begin(), zeros.end());

  if (options.check_order) {
    for (size_t a = 0; a < zeros.size(); ++a) {
      double nearest = 1.0;
      for (size_t b = 0; b < zeros.size(); ++b) {
        if (a != b) nearest = std::min(nearest, torus_distance(zeros[a], zeros[b]));
      }
      try {
        vanishing_order(field, zeros[a], std::min(0.05, nearest / 4.0), 64);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NonIntegerOrder && e.kind() != ErrorKind::LowerBoundFailure) throw;
        std::ostringstream os;
        os << "zero at (" << zeros[a][0] << "," << zeros[a][1] << ") is not isolated: " << e.what();
        throw Error(ErrorKind::DegenerateZeroSet, os.str());
      }
    }
  }
  return zeros;
}

std::vector<Point> find_zeros(const PeriodicScalarField& field, int seed_grid, double tol) {
  ZeroSearchOptions options;
  options.seed_grid = seed_grid;
  options.tol = tol;
  return find_zeros(field, options);
}

OrderEstimate vanishing_order(const PeriodicScalarField& field, const Point& zero, double probe_radius,
                              int n_angles, const OrderOptions& options) {
  if (!(probe_radius > 0.0) || n_angles < 4 || options.n_radii < 2) {
    throw Error(ErrorKind::InvalidArgument, "vanishing_order needs probe_radius > 0, n_angles >= 4");
  }
  const double scale = std::max(field.max_coefficient(), 1e-300);
  if (std::abs(field(zero[0], zero[1])) > options.zero_tol * scale) {
    std::ostringstream os;
    os << "(" << zero[0] << "," << zero[1] << ") is not a zero of the field";
    throw Error(ErrorKind::InvalidArgument, os.str());
  }

  const int nr = options.n_radii;
  std::vector<double> radii(nr), log_max(nr);
  std::vector<std::vector<double>> samples(nr, std::vector<double>(n_angles));
  for (int i = 0; i < nr; ++i) {
    const double r = probe_radius * std::pow(0.25, 1.0 - static_cast<double>(i) / (nr - 1));
    radii[i] = r;
    double mx = 0.0;
    for (int a = 0; a < n_angles; ++a) {
      const double t = kTwoPi * a / n_angles;
      const double v = std::abs(field(zero[0] + r * std::cos(t), zero[1] + r * std::sin(t)));
      samples[i][a] = v;
      mx = std::max(mx, v);
    }
    if (!(mx > 0.0)) throw Error(ErrorKind::LowerBoundFailure, "field vanishes on a whole probe circle");
    log_max[i] = std::log(mx);
  }

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < nr; ++i) {
    const double x = std::log(radii[i]);
    sx += x;
    sy += log_max[i];
    sxx += x * x;
    sxy += x * log_max[i];
  }
  OrderEstimate out;
  out.slope = (nr * sxy - sx * sy) / (nr * sxx - sx * sx);
  out.k = static_cast<int>(std::lround(out.slope));
  if (std::abs(out.slope - out.k) > 0.1 || out.k < 1) {
    std::ostringstream os;
    os << "log-log slope " << out.slope << " is not within 0.1 of a positive integer";
    throw Error(ErrorKind::NonIntegerOrder, os.str());
  }

  out.comp_lower = std::numeric_limits<double>::infinity();
  out.comp_upper = 0.0;
  std::vector<double> ring_min(nr);
  for (int i = 0; i < nr; ++i) {
    const double rk = std::pow(radii[i], out.k);
    ring_min[i] = std::numeric_limits<double>::infinity();
    for (double v : samples[i]) {
      const double ratio = v / rk;
      ring_min[i] = std::min(ring_min[i], ratio);
      out.comp_lower = std::min(out.comp_lower, ratio);
      out.comp_upper = std::max(out.comp_upper, ratio);
    }
  }
  for (int i = 0; i < nr; ++i) {
    if (ring_min[i] < options.lower_floor * out.comp_upper) {
      std::ostringstream os;
      os << "min |B|/r^" << out.k << " = " << ring_min[i] << " at r = " << radii[i]
         << " falls below the floor (two-sided bound fails)";
      throw Error(ErrorKind::LowerBoundFailure, os.str());
    }
  }
  return out;
}

Polynomial2 taylor_leading(const PeriodicScalarField& field, const Point& zero, int k) {
  if (k < 0) throw Error(ErrorKind::InvalidArgument, "order must be >= 0");
  Polynomial2 out;
  for (int p = k; p >= 0; --p) {
    const int q = k - p;
    out.set_coefficient(p, q, field.derivative(p, q, zero[0], zero[1]) / (factorial(p) * factorial(q)));
  }
  return out;
}

std::vector<ZeroDatum> analyze_zeros(const PeriodicScalarField& field, const ZeroSearchOptions& options,
                                     double max_probe, int n_angles) {
  const auto zeros = find_zeros(field, options);
  std::vector<ZeroDatum> out;
  for (size_t a = 0; a < zeros.size(); ++a) {
    double nearest = 1.0;
    for (size_t b = 0; b < zeros.size(); ++b) {
      if (a != b) nearest = std::min(nearest, torus_distance(zeros[a], zeros[b]));
    }
    ZeroDatum d;
    d.position = zeros[a];
    d.probe_radius = std::min(max_probe, nearest / 4.0);
    const auto order = vanishing_order(field, d.position, d.probe_radius, n_angles);
    d.order = order.k;
    d.comp_lower = order.comp_lower;
    d.comp_upper = order.comp_upper;
    d.leading_form = taylor_leading(field, d.position, d.order);
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace magnetic_gaps
