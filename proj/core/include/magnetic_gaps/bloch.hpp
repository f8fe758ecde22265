#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "magnetic_gaps/eig.hpp"
#include "magnetic_gaps/fields.hpp"

namespace magnetic_gaps {

// Linear part carrying the mean field.
enum class LinearGauge {
  Landau,     // (0, Bbar x1), wrap phase exp(i Bbar x2 / h) on e1
  AltLandau,  // (-Bbar x2, 0), wrap phase exp(-i Bbar x1 / h) on e2
};

// A = A_per + linear part with dA = B; A_per = (-d2 psi, d1 psi), Laplacian psi = B - Bbar.
struct CellGauge {
  double mean_field = 0.0;
  PeriodicScalarField psi;
  LinearGauge linear = LinearGauge::Landau;

  Point periodic_part(double x, double y) const;
  Point potential(double x, double y) const;
  // max |curl A - B| / max|c| on a (2M+1)^2 grid.
  double curl_defect(const PeriodicScalarField& field) const;
};

// Integer Q = c00 / (2 pi h); throws NonIntegerFlux otherwise.
int effective_flux(const PeriodicScalarField& field, double h);
// h = c00 / (2 pi N).
double flux_quantized_h(const PeriodicScalarField& field, int n);

CellGauge build_gauge(const PeriodicScalarField& field, double h, LinearGauge linear = LinearGauge::Landau);

struct BlochProblem {
  PeriodicScalarField field;
  double h = 1.0;
  Point theta{0.0, 0.0};
  int grid_n = 64;
  CellGauge gauge;

  double spacing() const { return 1.0 / grid_n; }
};

BlochProblem make_bloch_problem(const PeriodicScalarField& field, double h, const Point& theta, int grid_n,
                                LinearGauge linear = LinearGauge::Landau);

// Throws ResolutionError unless the plaquette flux max|B| spacing^2/h and the
// periodic phase max|A_per| spacing/h are both at most 1/4.
void validate(const BlochProblem& problem);

// Periodic 5-point stencil with Peierls phases and magnetic-periodic wrap phases.
SparseHermitianOperator assemble_bloch(const BlochProblem& problem);

// Discretization validity top 0.1 h^2 / spacing^2.
double bloch_validity_top(double h, int grid_n);
// max(48, ceil(32 sqrt(N))).
int auto_grid(int n_flux);

struct BlochOptions {
  double tol = 1e-8;
  std::uint64_t seed = 1;
  double delta_rel = 1e-3;
  // 0 means MAGNETIC_GAPS_THREADS or hardware concurrency.
  int threads = 0;
  LinearGauge linear = LinearGauge::Landau;
  int initial_m = 8;
  // Called from worker threads; must be thread safe.
  std::function<void(int, double, double)> monitor;
};

struct BandSpectrum {
  double h = 0.0;
  int grid_n = 0;
  int theta_samples = 0;
  double cutoff = 0.0;
  double delta = 0.0;
  std::vector<Point> thetas;
  // Per theta, eigenvalues <= cutoff (ascending) with certificates.
  std::vector<SpectrumSlice> slices;
  std::vector<std::pair<double, double>> bands;
};

// Chain-merge sorted values into closed bands at resolution delta.
std::vector<std::pair<double, double>> merge_bands(std::vector<double> values, double delta);

// All eigenvalues <= cutoff on a theta_samples^2 quasimomentum grid.
// Throws PartialSweep naming the failed theta indices.
BandSpectrum bloch_spectrum(const PeriodicScalarField& field, double h, int theta_samples, double cutoff, int grid_n,
                            const BlochOptions& options = {});

// Complements of the bands inside (0, cutoff), divided by h^exponent.
std::vector<std::pair<double, double>> detect_gaps(const std::vector<std::pair<double, double>>& bands,
                                                   double cutoff, double exponent, double h);
std::vector<std::pair<double, double>> detect_gaps(const BandSpectrum& bands, double exponent, double h);

// Worker count from MAGNETIC_GAPS_THREADS (0 or unset = hardware concurrency).
int worker_threads(int requested = 0);

}  // namespace magnetic_gaps
