#include "magnetic_gaps/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "magnetic_gaps/error.hpp"
#include "magnetic_gaps/svg.hpp"

namespace magnetic_gaps {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Lowest complete levels of a single leading form; the top multiplet may be cut
// by the block and is dropped.
std::vector<Level> form_levels(const Polynomial2& b0, int m, const LadderOptions& o) {
  const int k = b0.degree();
  if (k == 0) {
    // Constant form: a flux-quantized torus avoids the box edge states.
    const int q = o.landau_flux;
    const auto field = PeriodicScalarField::constant(kTwoPi * q);
    const int grid = auto_grid(q);
    const auto problem = make_bloch_problem(field, 1.0, {0.0, 0.0}, grid);
    const auto op = assemble_bloch(problem);
    EigOptions eo;
    eo.m = (m + 1) * q;
    eo.tol = o.tol;
    eo.seed = o.seed;
    eo.preconditioner = PreconditionerKind::ShiftedFactorization;
    eo.shift = kTwoPi * q;
    const auto s = lowest_eigs(op, eo);
    const double scale = std::abs(b0.coefficient(0, 0)) / (kTwoPi * q);
    std::vector<double> v;
    for (double e : s.eigenvalues) v.push_back(e * scale);
    auto levels = merge_levels(v, merge_threshold(s) * scale);
    for (auto& l : levels) l.multiplicity = std::max(1, static_cast<int>(std::lround(l.multiplicity / double(q))));
    if (static_cast<int>(levels.size()) < m) {
      throw Error(ErrorKind::SolverStagnation, "Landau torus did not resolve the requested levels");
    }
    levels.resize(m);
    return levels;
  }
  int count = m + 3;
  for (;;) {
    auto problem = make_model_problem(b0, 1.0, o.model_grid);
    ModelSolveOptions so;
    so.tol = o.tol;
    so.seed = o.seed;
    const auto spec = model_spectrum(problem, count, so);
    auto levels = merge_levels(spec.slice.eigenvalues, merge_threshold(spec.slice));
    if (static_cast<int>(levels.size()) > m) {
      levels.resize(m);
      return levels;
    }
    count *= 2;
  }
}

}  // namespace

ModelLadder build_model_ladder(const std::vector<ZeroDatum>& zeros, int m, const LadderOptions& options) {
  if (m < 1) throw Error(ErrorKind::InvalidArgument, "ladder needs m >= 1");
  if (zeros.empty()) throw Error(ErrorKind::InvalidArgument, "field has no zeros, the model operator is empty");
  ModelLadder out;
  out.k = zeros.front().order;
  for (const auto& z : zeros) {
    if (z.order != out.k) {
      throw Error(ErrorKind::InvalidConfig, "zeros have different vanishing orders; the gap scale is not common");
    }
  }
  out.exponent = scaling_exponent(out.k);

  // Zeros with the same leading form share one spectrum.
  std::vector<std::pair<Polynomial2, int>> groups;
  for (const auto& z : zeros) {
    const double tol = 1e-12 * std::max(z.leading_form.max_abs(), 1e-300);
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const auto& g) { return approx_equal(g.first, z.leading_form, tol); });
    if (it == groups.end()) {
      groups.push_back({z.leading_form, 1});
    } else {
      ++it->second;
    }
  }
  std::vector<Level> all;
  double thr = 0.0;
  for (const auto& [form, count] : groups) {
    auto levels = form_levels(form, m, options);
    for (auto& l : levels) {
      l.multiplicity *= count;
      all.push_back(l);
    }
    // Cross-zero merge at 2 tol relative to the level.
    thr = std::max(thr, 2.0 * options.tol * levels.back().value);
  }
  std::sort(all.begin(), all.end(), [](const Level& a, const Level& b) { return a.value < b.value; });
  for (const auto& l : all) {
    if (!out.levels.empty() && l.value - out.levels.back().value <= thr) {
      out.levels.back().multiplicity += l.multiplicity;
    } else {
      out.levels.push_back(l);
    }
  }
  out.levels.resize(std::min<size_t>(out.levels.size(), m));
  return out;
}

ModelLadder build_model_ladder(const PeriodicScalarField& field, int m, const LadderOptions& options) {
  return build_model_ladder(analyze_zeros(field), m, options);
}

std::pair<double, double> PredictedInterval::absolute(double h, double exponent) const {
  const double s = std::pow(h, exponent);
  return {a * s, b * s};
}

std::vector<PredictedInterval> predict_intervals(const std::vector<double>& ladder, double margin) {
  if (ladder.size() < 2) throw Error(ErrorKind::InvalidArgument, "ladder needs at least 2 levels");
  if (!(margin > 0.0 && margin < 0.5)) throw Error(ErrorKind::InvalidArgument, "margin must lie in (0, 1/2)");
  std::vector<PredictedInterval> out;
  for (size_t i = 0; i + 1 < ladder.size(); ++i) {
    const double gap = ladder[i + 1] - ladder[i];
    out.push_back({static_cast<int>(i) + 1, ladder[i] + margin * gap, ladder[i + 1] - margin * gap});
  }
  return out;
}

std::vector<PredictedInterval> predict_intervals(const ModelLadder& ladder, double margin) {
  std::vector<double> v;
  for (const auto& l : ladder.levels) v.push_back(l.value);
  return predict_intervals(v, margin);
}

namespace {

std::vector<int> split_ints(const std::string& key, const std::string& value) {
  std::vector<int> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const auto e = item.find_last_not_of(" \t");
    out.push_back(static_cast<int>(parse_int(key, item.substr(b, e - b + 1))));
  }
  return out;
}

}  // namespace

VerificationConfig verification_config_from(const KeyValues& kv, const std::string& base_dir) {
  VerificationConfig c;
  for (const auto& [key, value] : kv) {
    if (key == "field") {
      std::filesystem::path p(value);
      if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
      c.field_path = p.string();
    } else if (key == "n_schedule") {
      c.n_schedule = split_ints(key, value);
    } else if (key == "theta_samples") {
      c.theta_samples = static_cast<int>(parse_int(key, value));
    } else if (key == "grid") {
      c.grid_n = value == "auto" ? 0 : static_cast<int>(parse_int(key, value));
    } else if (key == "model_levels") {
      c.model_levels = static_cast<int>(parse_int(key, value));
    } else if (key == "cutoff_multiplier") {
      c.cutoff_multiplier = parse_double(key, value);
    } else if (key == "margin") {
      c.margin = parse_double(key, value);
    } else if (key == "output_dir") {
      std::filesystem::path p(value);
      if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
      c.output_dir = p.string();
    } else if (key == "n_min_pass") {
      c.n_min_pass = static_cast<int>(parse_int(key, value));
    } else if (key == "seed") {
      c.seed = static_cast<std::uint64_t>(parse_int(key, value));
    } else if (key == "tol") {
      c.tol = parse_double(key, value);
    } else if (key == "model_grid") {
      c.model_grid = static_cast<int>(parse_int(key, value));
    } else if (key == "threads") {
      c.threads = static_cast<int>(parse_int(key, value));
    } else if (key == "svg") {
      if (value != "true" && value != "false") throw Error(ErrorKind::InvalidConfig, "svg must be true or false");
      c.svg = value == "true";
    } else if (key == "constant_zero") {
      // k = 0 oracle: one zero whose leading form is the constant b.
      ZeroDatum z;
      z.order = 0;
      z.leading_form = Polynomial2::constant(parse_double(key, value));
      c.injected_zeros = {z};
    } else {
      throw Error(ErrorKind::InvalidConfig, "unknown config key " + key);
    }
  }
  if (c.field_path.empty()) throw Error(ErrorKind::InvalidConfig, "config needs a field");
  return c;
}

VerificationConfig read_verification_config(const std::string& path) {
  const auto kv = read_key_values(path);
  return verification_config_from(kv, std::filesystem::path(path).parent_path().string());
}

void validate(const VerificationConfig& c) {
  auto fail = [](const std::string& why) { throw Error(ErrorKind::InvalidConfig, why); };
  if (c.n_schedule.empty()) fail("N schedule is empty");
  for (size_t i = 0; i < c.n_schedule.size(); ++i) {
    if (c.n_schedule[i] < 1) fail("N schedule entries must be positive");
    if (i > 0 && c.n_schedule[i] <= c.n_schedule[i - 1]) fail("N schedule must be strictly increasing");
  }
  if (!(c.margin > 0.0 && c.margin < 0.5)) fail("margin must lie in (0, 1/2)");
  if (c.theta_samples < 1) fail("theta_samples must be >= 1");
  if (c.model_levels < 2) fail("model_levels must be >= 2");
  if (!(c.cutoff_multiplier > 1.0)) fail("cutoff_multiplier must be > 1");
  if (c.grid_n < 0 || c.model_grid < 8) fail("grid sizes must be positive");
  if (!(c.tol > 0.0)) fail("tol must be > 0");
  if (!c.field && c.field_path.empty()) fail("config needs a field");
}

std::vector<IntervalVerdict> verdicts_from_bands(const std::vector<std::pair<double, double>>& bands, double h,
                                                 double exponent, const std::vector<PredictedInterval>& intervals) {
  const double s = std::pow(h, exponent);
  std::vector<IntervalVerdict> out;
  for (const auto& iv : intervals) {
    IntervalVerdict v{iv.m, iv.a, iv.b, true, std::numeric_limits<double>::infinity()};
    for (const auto& [lo_abs, hi_abs] : bands) {
      const double lo = lo_abs / s, hi = hi_abs / s;
      double d = 0.0;
      if (hi < iv.a) {
        d = iv.a - hi;
      } else if (lo > iv.b) {
        d = lo - iv.b;
      } else {
        v.empty = false;
      }
      v.min_distance = std::min(v.min_distance, d);
    }
    out.push_back(v);
  }
  return out;
}

std::vector<ClusterStat> cluster_stats(const std::vector<std::vector<double>>& fibers,
                                       const std::vector<int>& counts) {
  std::vector<ClusterStat> out;
  int start = 0;
  for (int c : counts) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
    int n = 0;
    for (const auto& f : fibers) {
      for (int i = start; i < start + c && i < static_cast<int>(f.size()); ++i) {
        lo = std::min(lo, f[i]);
        hi = std::max(hi, f[i]);
        sum += f[i];
        ++n;
      }
    }
    ClusterStat s;
    s.count = n;
    if (n > 0) {
      s.center = sum / n;
      s.width = hi - lo;
    }
    out.push_back(s);
    start += c;
  }
  return out;
}

GapReport run_verification(const VerificationConfig& config) {
  validate(config);
  const PeriodicScalarField field = config.field ? *config.field : read_field(config.field_path);
  const auto zeros = config.injected_zeros.empty() ? analyze_zeros(field) : config.injected_zeros;

  GapReport report;
  report.theta_samples = config.theta_samples;
  report.tol = config.tol;
  report.model_grid = config.model_grid;
  LadderOptions lo;
  lo.model_grid = config.model_grid;
  lo.tol = config.tol;
  lo.seed = config.seed;
  report.ladder = build_model_ladder(zeros, config.model_levels, lo);
  report.intervals = predict_intervals(report.ladder, config.margin);
  const double e = report.ladder.exponent;
  const double top = report.ladder.levels.back().value;

  BlochOptions bo;
  bo.tol = config.tol;
  bo.seed = config.seed;
  bo.threads = config.threads;
  for (int n : config.n_schedule) {
    GapRow row;
    row.n = n;
    row.h = flux_quantized_h(field, n);
    row.grid = config.grid_n > 0 ? config.grid_n : auto_grid(n);
    const double scale = std::pow(row.h, e);
    row.cutoff = config.cutoff_multiplier * top * scale;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const auto bs = bloch_spectrum(field, row.h, config.theta_samples, row.cutoff, row.grid, bo);
      row.bands = bs.bands;
      for (const auto& s : bs.slices) {
        std::vector<double> f;
        for (double v : s.eigenvalues) f.push_back(v / scale);
        row.fibers.push_back(std::move(f));
      }
    } catch (const Error& err) {
      report.partial = true;
      report.partial_reason = err.what();
      report.failed_n = n;
      break;
    }
    row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::vector<int> counts;
    const int q = std::abs(effective_flux(field, row.h));
    for (const auto& l : report.ladder.levels) counts.push_back(report.ladder.k == 0 ? l.multiplicity * q : l.multiplicity);
    row.clusters = cluster_stats(row.fibers, counts);
    row.verdicts = verdicts_from_bands(row.bands, row.h, e, report.intervals);
    report.rows.push_back(std::move(row));
  }

  const int n_min = config.n_min_pass > 0 ? config.n_min_pass : config.n_schedule.front();
  auto row_ok = [](const GapRow& r) {
    return std::all_of(r.verdicts.begin(), r.verdicts.end(), [](const IntervalVerdict& v) { return v.empty; });
  };
  report.pass = !report.partial;
  for (const auto& r : report.rows) {
    if (r.n >= n_min && !row_ok(r)) report.pass = false;
  }
  if (!report.partial) {
    for (size_t i = report.rows.size(); i-- > 0;) {
      if (!row_ok(report.rows[i])) break;
      report.n0 = report.rows[i].n;
    }
  }
  if (!config.output_dir.empty()) write_report(report, config, config.output_dir);
  return report;
}

void write_report(const GapReport& report, const VerificationConfig& config, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path base(dir);
  const size_t nl = report.ladder.levels.size(), ni = report.intervals.size();

  std::ofstream csv(base / "report.csv");
  csv << "status,N,h,grid,theta_samples,cutoff";
  for (size_t m = 1; m <= nl; ++m) csv << ",cluster" << m << "_center,cluster" << m << "_width,cluster" << m << "_count";
  for (size_t i = 1; i <= ni; ++i) csv << ",gap" << i << "_a,gap" << i << "_b,gap" << i << "_empty,gap" << i << "_min_distance";
  csv << "\n";
  for (const auto& r : report.rows) {
    csv << "ok," << r.n << "," << format_double(r.h) << "," << r.grid << "," << report.theta_samples << ","
        << format_double(r.cutoff);
    for (const auto& c : r.clusters) csv << "," << format_double(c.center) << "," << format_double(c.width) << "," << c.count;
    for (const auto& v : r.verdicts) {
      csv << "," << format_double(v.a) << "," << format_double(v.b) << "," << (v.empty ? "yes" : "no") << ","
          << format_double(v.min_distance);
    }
    csv << "\n";

    std::ofstream bands(base / ("bands_N" + std::to_string(r.n) + ".csv"));
    write_bands_csv(bands, r.bands);
  }
  if (report.partial) {
    csv << "PARTIAL," << report.failed_n << ",nan,0," << report.theta_samples << ",nan";
    for (size_t m = 0; m < nl; ++m) csv << ",nan,nan,0";
    for (size_t i = 0; i < ni; ++i) csv << ",nan,nan,no,nan";
    csv << "\n";
  }

  std::ofstream sum(base / "summary.txt");
  const std::time_t now = std::time(nullptr);
  char stamp[64];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  sum << "magnetic-gaps " << MAGNETIC_GAPS_VERSION << "\n";
  sum << "generated " << stamp << "\n";
  sum << "field " << config.field_path << "\n";
  sum << "seed " << config.seed << " tol " << format_double(config.tol) << " theta_samples " << config.theta_samples
      << " model_grid " << config.model_grid << " margin " << format_double(config.margin) << " cutoff_multiplier "
      << format_double(config.cutoff_multiplier) << "\n";
  sum << "vanishing order k = " << report.ladder.k << ", exponent " << format_double(report.ladder.exponent) << "\n";
  sum << "model ladder:";
  for (const auto& l : report.ladder.levels) sum << " " << format_double(l.value) << " (x" << l.multiplicity << ")";
  sum << "\npredicted intervals:";
  for (const auto& iv : report.intervals) sum << " (" << format_double(iv.a) << ", " << format_double(iv.b) << ")";
  sum << "\n";
  for (const auto& r : report.rows) {
    sum << "N=" << r.n << " h=" << format_double(r.h) << " grid=" << r.grid << " wall=" << r.wall_seconds << "s";
    for (const auto& v : r.verdicts) {
      sum << " | gap" << v.m << " " << (v.empty ? "empty" : "OCCUPIED") << " dist=" << format_double(v.min_distance);
    }
    if (!r.clusters.empty()) {
      const auto& c = r.clusters.front();
      sum << " | ground cluster center " << format_double(c.center) << " width " << format_double(c.width);
    }
    sum << "\n";
  }
  if (report.partial) sum << "PARTIAL: N=" << report.failed_n << ": " << report.partial_reason << "\n";
  sum << "N0 " << (report.n0 ? std::to_string(*report.n0) : std::string("none")) << "\n";
  sum << "verdict " << (report.partial ? "PARTIAL" : report.pass ? "PASS" : "FAIL") << "\n";

  if (config.svg) {
    SpectrumPlot plot;
    plot.title = "rescaled Bloch spectrum vs 1/N";
    for (const auto& r : report.rows) {
      for (const auto& f : r.fibers) {
        for (double v : f) plot.points.emplace_back(1.0 / r.n, v);
      }
    }
    for (const auto& l : report.ladder.levels) plot.guides.push_back(l.value);
    for (const auto& iv : report.intervals) plot.bands.emplace_back(iv.a, iv.b);
    std::ofstream svg(base / "spectrum.svg");
    write_svg(svg, plot);
  }
}

}  // namespace magnetic_gaps
