#include "magnetic_gaps/bloch.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <numbers>
#include <sstream>
#include <thread>

#include "magnetic_gaps/error.hpp"

namespace magnetic_gaps {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kGaussT[3] = {0.5 - 0.3872983346207417, 0.5, 0.5 + 0.3872983346207417};
constexpr double kGaussW[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

}  // namespace

Point CellGauge::periodic_part(double x, double y) const {
  return {-psi.derivative(0, 1, x, y), psi.derivative(1, 0, x, y)};
}

Point CellGauge::potential(double x, double y) const {
  Point a = periodic_part(x, y);
  if (linear == LinearGauge::Landau) {
    a[1] += mean_field * x;
  } else {
    a[0] -= mean_field * y;
  }
  return a;
}

double CellGauge::curl_defect(const PeriodicScalarField& field) const {
  const int n = 2 * std::max(field.max_mode(), psi.max_mode()) + 1;
  double defect = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double x = static_cast<double>(i) / n, y = static_cast<double>(j) / n;
      const double curl = mean_field + psi.derivative(2, 0, x, y) + psi.derivative(0, 2, x, y);
      defect = std::max(defect, std::abs(curl - field(x, y)));
    }
  }
  return defect / std::max(field.max_coefficient(), 1e-300);
}

int effective_flux(const PeriodicScalarField& field, double h) {
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidArgument, "h must be > 0");
  const double q = field.mean() / (kTwoPi * h);
  const double nearest = std::round(q);
  if (std::abs(q - nearest) > 1e-9) {
    std::ostringstream os;
    os.precision(17);
    const double lo = std::floor(q), hi = std::ceil(q);
    os << "effective flux Q = " << q << " is not an integer; nearest admissible h:";
    for (double n : {lo, hi}) {
      if (n != 0.0) os << " " << field.mean() / (kTwoPi * n) << " (Q=" << n << ")";
    }
    throw Error(ErrorKind::NonIntegerFlux, os.str());
  }
  return static_cast<int>(nearest);
}

double flux_quantized_h(const PeriodicScalarField& field, int n) {
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "flux quantum count must be nonzero");
  return field.mean() / (kTwoPi * n);
}

CellGauge build_gauge(const PeriodicScalarField& field, double h, LinearGauge linear) {
  effective_flux(field, h);
  CellGauge g;
  g.mean_field = field.mean();
  g.linear = linear;
  PeriodicScalarField::Modes modes;
  for (const auto& [mn, c] : field.modes()) {
    const auto [m, n] = mn;
    if (m == 0 && n == 0) continue;
    modes[mn] = -c / (4.0 * std::numbers::pi * std::numbers::pi * (m * m + n * n));
  }
  g.psi = PeriodicScalarField(field.max_mode(), std::move(modes));
  return g;
}

BlochProblem make_bloch_problem(const PeriodicScalarField& field, double h, const Point& theta, int grid_n,
                                LinearGauge linear) {
  BlochProblem p;
  p.field = field;
  p.h = h;
  p.theta = theta;
  p.grid_n = grid_n;
  p.gauge = build_gauge(field, h, linear);
  return p;
}

void validate(const BlochProblem& problem) {
  if (problem.grid_n < 4) throw Error(ErrorKind::InvalidArgument, "grid_n must be >= 4");
  effective_flux(problem.field, problem.h);
  const int n = problem.grid_n;
  const double d = problem.spacing();
  double bmax = 0.0, amax = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double x = i * d, y = j * d;
      bmax = std::max(bmax, std::abs(problem.field(x, y)));
      const Point a = problem.gauge.periodic_part(x, y);
      amax = std::max(amax, std::hypot(a[0], a[1]));
    }
  }
  const double plaquette = bmax * d * d / problem.h;
  const double phase = amax * d / problem.h;
  if (plaquette > 0.25 || phase > 0.25) {
    std::ostringstream os;
    os << "grid " << n << " under-resolves the field: plaquette flux " << plaquette << ", periodic phase " << phase
       << " (limit 0.25)";
    throw Error(ErrorKind::ResolutionError, os.str());
  }
}

SparseHermitianOperator assemble_bloch(const BlochProblem& problem) {
  validate(problem);
  const int n = problem.grid_n;
  const double d = problem.spacing();
  const double h = problem.h;
  const double c = h * h / (d * d);
  const CellGauge& g = problem.gauge;
  const double bbar = g.mean_field;

  auto link = [&](double px, double py, double dx, double dy) {
    double s = 0.0;
    for (int q = 0; q < 3; ++q) {
      const Point a = g.potential(px + kGaussT[q] * dx, py + kGaussT[q] * dy);
      s += kGaussW[q] * (a[0] * dx + a[1] * dy);
    }
    return std::polar(1.0, -s / h);
  };

  std::vector<Triplet> t;
  t.reserve(static_cast<size_t>(n) * n * 5);
  for (int i = 0; i < n; ++i) {
    const double x = i * d;
    for (int j = 0; j < n; ++j) {
      const double y = j * d;
      const int p = i * n + j;
      t.emplace_back(p, p, Complex(4.0 * c, 0.0));

      Complex u1 = link(x, y, d, 0.0);
      if (i == n - 1) {
        u1 *= std::polar(1.0, problem.theta[0]);
        if (g.linear == LinearGauge::Landau) u1 *= std::polar(1.0, bbar * y / h);
      }
      const int q1 = ((i + 1) % n) * n + j;
      t.emplace_back(p, q1, -c * u1);
      t.emplace_back(q1, p, -c * std::conj(u1));

      Complex u2 = link(x, y, 0.0, d);
      if (j == n - 1) {
        u2 *= std::polar(1.0, problem.theta[1]);
        if (g.linear == LinearGauge::AltLandau) u2 *= std::polar(1.0, -bbar * x / h);
      }
      const int q2 = i * n + (j + 1) % n;
      t.emplace_back(p, q2, -c * u2);
      t.emplace_back(q2, p, -c * std::conj(u2));
    }
  }
  return SparseHermitianOperator::from_triplets(n * n, t);
}

double bloch_validity_top(double h, int grid_n) { return 0.1 * h * h * grid_n * grid_n; }

int auto_grid(int n_flux) {
  return std::max(48, static_cast<int>(std::ceil(32.0 * std::sqrt(static_cast<double>(std::abs(n_flux))))));
}

std::vector<std::pair<double, double>> merge_bands(std::vector<double> values, double delta) {
  std::sort(values.begin(), values.end());
  std::vector<std::pair<double, double>> out;
  for (double v : values) {
    if (!out.empty() && v - out.back().second <= delta) {
      out.back().second = v;
    } else {
      out.emplace_back(v, v);
    }
  }
  return out;
}

int worker_threads(int requested) {
  int n = requested;
  if (n <= 0) {
    if (const char* env = std::getenv("MAGNETIC_GAPS_THREADS")) n = std::atoi(env);
  }
  if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
  return std::max(n, 1);
}

namespace {

SpectrumSlice solve_fiber(const PeriodicScalarField& field, double h, const Point& theta, int grid_n, double cutoff,
                          int m, const BlochOptions& options, std::uint64_t seed) {
  const BlochProblem problem = make_bloch_problem(field, h, theta, grid_n, options.linear);
  const SparseHermitianOperator op = assemble_bloch(problem);
  Eigen::MatrixXcd warm;
  for (;;) {
    if (4 * m >= op.dimension()) {
      throw Error(ErrorKind::OutOfValidatedRange, "too many eigenvalues below the cutoff for this grid");
    }
    EigOptions eo;
    eo.m = m;
    eo.tol = options.tol;
    eo.seed = seed;
    eo.preconditioner = PreconditionerKind::ShiftedFactorization;
    eo.shift = cutoff;
    eo.monitor = options.monitor;
    if (warm.cols() > 0) eo.initial = &warm;
    SpectrumSlice s = lowest_eigs(op, eo);
    if (s.eigenvalues.back() > cutoff) {
      const auto keep = std::upper_bound(s.eigenvalues.begin(), s.eigenvalues.end(), cutoff) - s.eigenvalues.begin();
      s.eigenvalues.resize(keep);
      s.residuals.resize(keep);
      s.vectors = s.vectors.leftCols(keep).eval();
      s.meta.h = h;
      s.meta.grid = grid_n;
      return s;
    }
    warm = std::move(s.vectors);
    m *= 2;
  }
}

}  // namespace

BandSpectrum bloch_spectrum(const PeriodicScalarField& field, double h, int theta_samples, double cutoff, int grid_n,
                            const BlochOptions& options) {
  if (theta_samples < 1) throw Error(ErrorKind::InvalidArgument, "theta_samples must be >= 1");
  if (!(cutoff > 0.0)) throw Error(ErrorKind::InvalidArgument, "cutoff must be > 0");
  effective_flux(field, h);
  const double top = bloch_validity_top(h, grid_n);
  if (cutoff > top) {
    std::ostringstream os;
    os << "cutoff " << cutoff << " exceeds the discretization validity top 0.1 h^2/spacing^2 = " << top;
    throw Error(ErrorKind::OutOfValidatedRange, os.str());
  }

  BandSpectrum out;
  out.h = h;
  out.grid_n = grid_n;
  out.theta_samples = theta_samples;
  out.cutoff = cutoff;
  out.delta = options.delta_rel * cutoff;
  for (int a = 0; a < theta_samples; ++a) {
    for (int b = 0; b < theta_samples; ++b) {
      out.thetas.push_back({kTwoPi * a / theta_samples, kTwoPi * b / theta_samples});
    }
  }
  const int count = static_cast<int>(out.thetas.size());
  out.slices.resize(count);
  std::vector<std::exception_ptr> errors(count);

  // The first fiber calibrates the block size for the rest.
  int m_rest = options.initial_m;
  try {
    out.slices[0] = solve_fiber(field, h, out.thetas[0], grid_n, cutoff, options.initial_m, options,
                                mix_seed(options.seed, 0));
    const int c0 = out.slices[0].size();
    m_rest = std::max(options.initial_m, c0 + std::max(4, c0 / 4));
  } catch (...) {
    errors[0] = std::current_exception();
  }

  std::atomic<int> next{1};
  auto worker = [&]() {
    for (int i = next++; i < count; i = next++) {
      try {
        out.slices[i] = solve_fiber(field, h, out.thetas[i], grid_n, cutoff, m_rest, options,
                                    mix_seed(options.seed, static_cast<std::uint64_t>(i)));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int nthreads = std::min(worker_threads(options.threads), std::max(count - 1, 1));
  if (!errors[0]) {
    if (nthreads <= 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
    }
  }

  std::ostringstream failed;
  int nfail = 0;
  std::string first;
  for (int i = 0; i < count; ++i) {
    if (!errors[i]) continue;
    if (nfail++ == 0) {
      try {
        std::rethrow_exception(errors[i]);
      } catch (const std::exception& e) {
        first = e.what();
      }
    }
    failed << " " << i;
  }
  if (errors[0] && nfail == 1) {
    std::rethrow_exception(errors[0]);
  }
  if (nfail > 0) {
    throw Error(ErrorKind::PartialSweep, "theta solves failed at indices" + failed.str() + ": " + first);
  }

  std::vector<double> all;
  for (const auto& s : out.slices) all.insert(all.end(), s.eigenvalues.begin(), s.eigenvalues.end());
  out.bands = merge_bands(std::move(all), out.delta);
  return out;
}

std::vector<std::pair<double, double>> detect_gaps(const std::vector<std::pair<double, double>>& bands,
                                                   double cutoff, double exponent, double h) {
  const double scale = std::pow(h, exponent);
  std::vector<std::pair<double, double>> out;
  double prev = 0.0;
  for (const auto& [lo, hi] : bands) {
    if (lo > cutoff) break;
    if (lo > prev) out.emplace_back(prev / scale, lo / scale);
    prev = std::max(prev, hi);
  }
  if (prev < cutoff) out.emplace_back(prev / scale, cutoff / scale);
  return out;
}

std::vector<std::pair<double, double>> detect_gaps(const BandSpectrum& bands, double exponent, double h) {
  return detect_gaps(bands.bands, bands.cutoff, exponent, h);
}

}  // namespace magnetic_gaps
