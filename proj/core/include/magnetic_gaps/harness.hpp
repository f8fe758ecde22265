#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "magnetic_gaps/bloch.hpp"
#include "magnetic_gaps/fields.hpp"
#include "magnetic_gaps/io.hpp"
#include "magnetic_gaps/model_op.hpp"

namespace magnetic_gaps {

struct LadderOptions {
  int model_grid = 192;
  double tol = 1e-8;
  std::uint64_t seed = 1;
  // Flux quanta of the torus used for a constant leading form.
  int landau_flux = 8;
};

struct ModelLadder {
  int k = 0;
  double exponent = 0.0;
  // Distinct rescaled levels; multiplicity summed over zeros (per flux quantum when k = 0).
  std::vector<Level> levels;
};

// Sorted union of eig(K^1_j) over the zeros, lowest m distinct values.
// Throws InvalidConfig if the zeros do not share one vanishing order.
ModelLadder build_model_ladder(const std::vector<ZeroDatum>& zeros, int m, const LadderOptions& options = {});
ModelLadder build_model_ladder(const PeriodicScalarField& field, int m, const LadderOptions& options = {});

struct PredictedInterval {
  int m = 0;  // between levels m and m+1 (1-based)
  double a = 0.0;
  double b = 0.0;

  std::pair<double, double> absolute(double h, double exponent) const;
};

std::vector<PredictedInterval> predict_intervals(const std::vector<double>& ladder, double margin);
std::vector<PredictedInterval> predict_intervals(const ModelLadder& ladder, double margin);

struct VerificationConfig {
  std::string field_path;
  std::optional<PeriodicScalarField> field;
  std::vector<int> n_schedule;
  int theta_samples = 8;
  int grid_n = 0;  // 0 = auto rule
  int model_levels = 2;
  double cutoff_multiplier = 1.5;
  double margin = 0.1;
  std::string output_dir;
  int n_min_pass = 0;  // 0 = first entry of the schedule
  std::uint64_t seed = 1;
  double tol = 1e-8;
  int model_grid = 192;
  int threads = 0;
  bool svg = true;
  // Replaces zero analysis when non-empty (oracle injection).
  std::vector<ZeroDatum> injected_zeros;
};

// Flat key = value config; relative field paths resolve against base_dir.
VerificationConfig verification_config_from(const KeyValues& kv, const std::string& base_dir = "");
VerificationConfig read_verification_config(const std::string& path);
// Throws InvalidConfig.
void validate(const VerificationConfig& config);

struct ClusterStat {
  double center = 0.0;
  double width = 0.0;
  int count = 0;
};

struct IntervalVerdict {
  int m = 0;
  double a = 0.0;
  double b = 0.0;
  bool empty = false;
  double min_distance = 0.0;
};

struct GapRow {
  int n = 0;
  double h = 0.0;
  int grid = 0;
  double cutoff = 0.0;  // absolute
  std::vector<ClusterStat> clusters;
  std::vector<IntervalVerdict> verdicts;
  std::vector<std::pair<double, double>> bands;  // absolute
  std::vector<std::vector<double>> fibers;      // rescaled eigenvalues per theta
  double wall_seconds = 0.0;
};

struct GapReport {
  ModelLadder ladder;
  std::vector<PredictedInterval> intervals;
  std::vector<GapRow> rows;
  int theta_samples = 0;
  double tol = 0.0;
  int model_grid = 0;
  bool partial = false;
  std::string partial_reason;
  int failed_n = 0;
  bool pass = false;
  std::optional<int> n0;
};

// Emptiness and distance of each interval against bands, on the rescaled axis.
std::vector<IntervalVerdict> verdicts_from_bands(const std::vector<std::pair<double, double>>& bands, double h,
                                                 double exponent, const std::vector<PredictedInterval>& intervals);

// Cluster m collects, per fiber, the eigenvalues with index in [c_{m-1}, c_m),
// c_m the cumulative ladder multiplicity.
std::vector<ClusterStat> cluster_stats(const std::vector<std::vector<double>>& fibers, const std::vector<int>& counts);

GapReport run_verification(const VerificationConfig& config);

void write_report(const GapReport& report, const VerificationConfig& config, const std::string& dir);

}  // namespace magnetic_gaps
