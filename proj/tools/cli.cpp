#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>

#include "magnetic_gaps/bloch.hpp"
#include "magnetic_gaps/error.hpp"
#include "magnetic_gaps/fields.hpp"
#include "magnetic_gaps/harness.hpp"
#include "magnetic_gaps/intervals.hpp"
#include "magnetic_gaps/io.hpp"
#include "magnetic_gaps/model_op.hpp"

namespace magnetic_gaps::cli {

namespace {

struct Common {
  std::uint64_t seed = 1;
  int verbose = 0;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::ParseError:
    case ErrorKind::InvalidConfig:
      return kExitUsage;
    default:
      return kExitNumeric;
  }
}

void log_config(std::ostream& err, const CLI::App& sub, const Common& common) {
  err << "# magnetic-gaps " << MAGNETIC_GAPS_VERSION << " " << sub.get_name() << " seed=" << common.seed;
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string& name = opt->get_lnames().front();
    if (name == "help") continue;
    std::string value;
    if (opt->count() > 0) {
      for (const auto& r : opt->results()) value += (value.empty() ? "" : ";") + r;
      if (value.empty()) value = "true";
    } else {
      value = opt->get_default_str();
      if (value.empty()) value = opt->get_expected_min() == 0 ? "false" : "-";
    }
    err << " " << name << "=" << value;
  }
  err << "\n";
}

std::function<void(int, double, double)> make_monitor(std::ostream& err, const Common& common) {
  if (common.verbose < 1) return {};
  auto mutex = std::make_shared<std::mutex>();
  return [&err, mutex](int iter, double min_res, double lambda_m) {
    std::lock_guard<std::mutex> lock(*mutex);
    err << "# " << iter << "," << format_double(min_res) << "," << format_double(lambda_m) << "\n";
  };
}

void write_spectrum_csv(std::ostream& out, const BandSpectrum& bs) {
  out << "theta1,theta2,index,eigenvalue\n";
  for (size_t t = 0; t < bs.slices.size(); ++t) {
    const auto& s = bs.slices[t];
    for (int i = 0; i < s.size(); ++i) {
      out << format_double(bs.thetas[t][0]) << "," << format_double(bs.thetas[t][1]) << "," << i + 1 << ","
          << format_double(s.eigenvalues[i]) << "\n";
    }
  }
}

void write_gaps_csv(std::ostream& out, const std::vector<std::pair<double, double>>& gaps) {
  out << "lo,hi\n";
  for (const auto& [lo, hi] : gaps) out << format_double(lo) << "," << format_double(hi) << "\n";
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectral gaps of magnetic Schroedinger operators near zeros of the field", "magnetic-gaps"};
  app.set_help_flag("--help", "Print help and exit");
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(MAGNETIC_GAPS_VERSION));
  Common common;
  app.add_option("--seed", common.seed, "Random seed for every solver");
  app.add_flag("-v,--verbose", common.verbose, "Stream solver diagnostics to stderr");

  // zeros
  auto* zeros = app.add_subcommand("zeros", "Locate zeros of B and their vanishing orders");
  std::string field_path;
  int zgrid = 64;
  double ztol = 1e-10, probe = 0.05;
  int angles = 64;
  zeros->add_option("--field", field_path, "Field file")->required();
  zeros->add_option("--grid", zgrid, "Seed grid per axis");
  zeros->add_option("--tol", ztol, "Zero tolerance on |B|");
  zeros->add_option("--probe", probe, "Largest probe radius");
  zeros->add_option("--angles", angles, "Probe angles");

  // model-spectrum
  auto* model = app.add_subcommand("model-spectrum", "Low spectrum of the model operator at one zero");
  int zero_index = 0, levels = 4, mgrid = 128;
  double mh = 1.0, box = 0.0, mtol = 1e-8;
  bool scaled = false, no_trunc = false;
  model->add_option("--field", field_path, "Field file")->required();
  model->add_option("--zero-index", zero_index, "Zero index in the zeros listing (0-based)");
  model->add_option("--h", mh, "Semiclassical parameter")->required();
  model->add_option("--levels", levels, "Number of eigenvalues")->required();
  model->add_option("--box", box, "Box half-width (default: six semiclassical lengths)");
  model->add_option("--grid", mgrid, "Interior points per axis");
  model->add_option("--tol", mtol, "Relative residual tolerance");
  model->add_flag("--scaled", scaled, "Divide by h^((2k+2)/(k+2))");
  model->add_flag("--no-truncation-check", no_trunc, "Skip the 1.25 L recomputation");

  // bloch-spectrum and bands share their flags
  double bh = 0.0, cutoff = 0.0, btol = 1e-8, delta_rel = 1e-3, exponent = NAN;
  int theta_grid = 8, bgrid = 0;
  std::string replay;
  auto add_bloch_flags = [&](CLI::App* sub, bool replayable) {
    auto* f = sub->add_option("--field", field_path, "Field file");
    auto* h = sub->add_option("--h", bh, "Semiclassical parameter, c00/(2 pi h) must be an integer");
    auto* c = sub->add_option("--cutoff", cutoff, "Energy cutoff (absolute units)");
    if (!replayable) {
      c->required();
      f->required();
      h->required();
    }
    sub->add_option("--theta-grid", theta_grid, "Quasimomentum samples per axis");
    sub->add_option("--grid", bgrid, "Grid points per axis on the cell (default: max(48, 32 sqrt(Q)))");
    sub->add_option("--tol", btol, "Relative residual tolerance");
    sub->add_option("--delta-rel", delta_rel, "Band merge resolution relative to the cutoff");
  };
  auto* bloch = app.add_subcommand("bloch-spectrum", "Fiber eigenvalues below a cutoff over a theta grid");
  add_bloch_flags(bloch, false);
  auto* bands = app.add_subcommand("bands", "Merged bands below a cutoff, or gaps with --exponent");
  add_bloch_flags(bands, true);
  bands->add_option("--exponent", exponent, "Print gaps divided by h^exponent instead of bands");
  bands->add_option("--replay", replay, "Read a bands or spectrum CSV instead of solving");

  // verify-gaps
  auto* verify = app.add_subcommand("verify-gaps", "End-to-end gap verification along an N schedule");
  std::string config_path;
  verify->add_option("--config", config_path, "Flat key = value config")->required();

  // transfer
  auto* tr = app.add_subcommand("transfer", "Transfer a gap window (a1,b1) -> (a2,b2)");
  std::string params_path;
  double a1 = 0.0, b1 = 0.0;
  tr->add_option("--params", params_path, "Flat key = value parameter file")->required();
  tr->add_option("--a1", a1, "Lower end of the input window")->required();
  tr->add_option("--b1", b1, "Upper end of the input window")->required();

  // kappa
  auto* kap = app.add_subcommand("kappa", "Optimal cutoff exponent and shrink rate");
  int kk = 2;
  kap->add_option("--k", kk, "Vanishing order")->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  if (argv.empty()) argv.push_back("magnetic-gaps");
  CLI::App* active = &app;
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
    for (CLI::App* sub : app.get_subcommands()) active = sub;
    if (active == tr && !(a1 < b1)) throw UsageError("transfer needs --a1 < --b1");
    if (active == bands && replay.empty() && (field_path.empty() || !(bh > 0.0) || !(cutoff > 0.0))) {
      throw UsageError("bands needs --field, --h and --cutoff unless --replay is given");
    }
    if (active == bands && !replay.empty() && !std::isnan(exponent) && (!(bh > 0.0) || !(cutoff > 0.0))) {
      throw UsageError("bands --replay with --exponent needs --h and --cutoff");
    }
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << MAGNETIC_GAPS_VERSION << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    CLI::App* failing = &app;
    for (CLI::App* sub : app.get_subcommands()) failing = sub;
    err << "error: " << e.what() << "\n" << failing->help();
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n" << active->help();
    return kExitUsage;
  }

  log_config(err, *active, common);
  try {
    if (active == zeros) {
      const auto field = read_field(field_path);
      ZeroSearchOptions zo;
      zo.seed_grid = zgrid;
      zo.tol = ztol;
      const auto data = analyze_zeros(field, zo, probe, angles);
      out << "x,y,k,comp_lower,comp_upper\n";
      for (const auto& z : data) {
        out << format_double(z.position[0]) << "," << format_double(z.position[1]) << "," << z.order << ","
            << format_double(z.comp_lower) << "," << format_double(z.comp_upper) << "\n";
      }
      return kExitOk;
    }

    if (active == model) {
      const auto field = read_field(field_path);
      const auto data = analyze_zeros(field);
      if (zero_index < 0 || zero_index >= static_cast<int>(data.size())) {
        err << "error: --zero-index " << zero_index << " out of range (" << data.size() << " zeros)\n";
        return kExitUsage;
      }
      const auto& z = data[zero_index];
      const auto problem = make_model_problem(z.leading_form, mh, mgrid, box);
      ModelSolveOptions so;
      so.tol = mtol;
      so.seed = common.seed;
      so.check_truncation = !no_trunc;
      so.monitor = make_monitor(err, common);
      const auto spec = model_spectrum(problem, levels, so);
      const double s = scaled ? std::pow(mh, scaling_exponent(z.order)) : 1.0;
      err << "# k=" << z.order << " box=" << format_double(problem.box_halfwidth)
          << " truncation_shift=" << format_double(spec.truncation_shift) << "\n";
      out << "index,eigenvalue,residual\n";
      for (int i = 0; i < spec.slice.size(); ++i) {
        out << i + 1 << "," << format_double(spec.slice.eigenvalues[i] / s) << ","
            << format_double(spec.slice.residuals[i] / s) << "\n";
      }
      return kExitOk;
    }

    if (active == bloch || (active == bands && replay.empty())) {
      const auto field = read_field(field_path);
      const int grid = bgrid > 0 ? bgrid : auto_grid(effective_flux(field, bh));
      BlochOptions bo;
      bo.tol = btol;
      bo.seed = common.seed;
      bo.delta_rel = delta_rel;
      bo.monitor = make_monitor(err, common);
      const auto bs = bloch_spectrum(field, bh, theta_grid, cutoff, grid, bo);
      if (active == bloch) {
        write_spectrum_csv(out, bs);
      } else if (std::isnan(exponent)) {
        write_bands_csv(out, bs.bands);
      } else {
        write_gaps_csv(out, detect_gaps(bs, exponent, bh));
      }
      return kExitOk;
    }

    if (active == bands) {
      const auto table = read_csv(replay);
      std::vector<std::pair<double, double>> b;
      if (table.column("eigenvalue") >= 0) {
        std::vector<double> v;
        const int col = table.column("eigenvalue");
        for (const auto& row : table.rows) v.push_back(parse_double("eigenvalue", row[col]));
        double scale = cutoff;
        if (!(scale > 0.0)) {
          for (double x : v) scale = std::max(scale, std::abs(x));
        }
        b = merge_bands(std::move(v), delta_rel * scale);
      } else {
        b = bands_from_csv(table);
      }
      if (std::isnan(exponent)) {
        write_bands_csv(out, b);
      } else {
        write_gaps_csv(out, detect_gaps(b, cutoff, exponent, bh));
      }
      return kExitOk;
    }

    if (active == verify) {
      auto config = read_verification_config(config_path);
      if (app.get_option("--seed")->count() > 0) config.seed = common.seed;
      const auto report = run_verification(config);
      out << "ladder";
      for (const auto& l : report.ladder.levels) out << " " << format_double(l.value);
      out << "\n";
      for (const auto& r : report.rows) {
        out << "N=" << r.n;
        for (const auto& v : r.verdicts) out << " gap" << v.m << "=" << (v.empty ? "empty" : "occupied");
        out << "\n";
      }
      if (report.partial) {
        err << "error: PARTIAL report: " << report.partial_reason << "\n";
        return kExitNumeric;
      }
      out << "N0 " << (report.n0 ? std::to_string(*report.n0) : std::string("none")) << "\n";
      out << (report.pass ? "PASS" : "FAIL") << "\n";
      return report.pass ? kExitOk : kExitGapViolation;
    }

    if (active == tr) {
      const auto params = transfer_params_from(read_key_values(params_path));
      try {
        const auto r = transfer(params, {a1, b1});
        out << format_double(r.a2) << " " << format_double(r.b2) << " valid:"
            << (r.valid ? std::string("yes") : "no:" + r.violated) << "\n";
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::ConditionViolated) throw;
        std::string which = e.what();
        which = which.substr(which.find(": ") + 2);
        out << "nan nan valid:no:" << which << "\n";
        return kExitNumeric;
      }
      return kExitOk;
    }

    if (active == kap) {
      const auto o = optimal_kappa(kk);
      out << "kappa_star " << o.kappa_exact.to_string() << " " << format_double(o.kappa_star) << " s_star "
          << o.s_exact.to_string() << " " << format_double(o.s_star) << "\n";
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    if (exit_code(e.kind()) == kExitUsage) err << active->help();
    return exit_code(e.kind());
  }
  return kExitUsage;
}

}  // namespace magnetic_gaps::cli
