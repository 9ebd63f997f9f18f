// bornlab: command-line front end.
//
// Exit codes: 0 success / all literal verdicts pass, 1 a literal verdict
// failed, 2 usage or configuration error, 3 numerical instability.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "bornlab/config.hpp"
#include "bornlab/csv.hpp"
#include "bornlab/errors.hpp"
#include "bornlab/harness.hpp"
#include "bornlab/madelung.hpp"
#include "svg.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;
using namespace bornlab;

namespace {

constexpr int kExitVerdict = 1;
constexpr int kExitUsage = 2;
constexpr int kExitUnstable = 3;

// Relative output paths land under $BORNLAB_OUT_DIR when it is set.
fs::path output_path(const std::string& p) {
  fs::path path(p);
  if (path.is_absolute()) return path;
  if (const char* dir = std::getenv("BORNLAB_OUT_DIR"); dir && *dir) return fs::path(dir) / path;
  return path;
}

void write_text(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  csv::write_atomically(output_path(out), text);
}

LabConfig load(const std::string& path) {
  if (path.empty()) return {};
  if (!fs::exists(path)) throw ConfigError("--config", "file '" + path + "' not found");
  return load_config(path);
}

ReportFormat format_from(const std::string& s) {
  return s == "csv" ? ReportFormat::csv : ReportFormat::json;
}

Json masked_norms(const madelung::MaskedField& f) {
  return {{"max", f.max_abs()}, {"l2", f.l2()}};
}

struct Options {
  std::string config;
  std::string out;
  std::string out_dir = ".";
  std::string svg;
  std::string events;
  std::string format = "json";
  std::string preset;
  int points = 1001;
  std::int64_t n = 0;
  std::uint64_t seed = 1;
  int seed_count = 0;
  std::int64_t n_min = 100;
  std::int64_t n_max = 100000;
  int grid_points = 13;
  int steps = 100;
  int snapshot_every = 10;
  std::size_t count = 10000;
};

int cmd_density(const Options& o) {
  const LabConfig cfg = load(o.config);
  const auto& ex = cfg.experiment;
  ex.geometry.validate();
  const DensityModel d = double_slit_density(ex.geometry, ex.interval);
  std::vector<double> xs, ys;
  std::string text = "t_mm,intensity\n";
  for (int i = 0; i < o.points; ++i) {
    const double t = o.points == 1 ? ex.interval.lo
                                   : ex.interval.lo + ex.interval.width() * i / (o.points - 1);
    const double t_exact = i == o.points - 1 && o.points > 1 ? ex.interval.hi : t;
    const double v = d(t_exact);
    xs.push_back(t_exact);
    ys.push_back(v);
    text += csv::format_double(t_exact) + ',' + csv::format_double(v) + '\n';
  }
  write_text(o.out.empty() ? "density.csv" : o.out, text);
  if (!o.svg.empty()) {
    csv::write_atomically(output_path(o.svg),
                          svg::line_chart(xs, ys, {"Double-slit intensity", "t (mm)", "intensity"}));
  }
  return 0;
}

int cmd_moments(const Options& o) {
  const LabConfig cfg = load(o.config);
  const auto& ex = cfg.experiment;
  ex.validate();
  const Interval m = ex.centered_moment_interval();
  const DensityModel d = double_slit_density(
      ex.geometry, Interval{std::min(ex.interval.lo, m.lo + ex.geometry.center_mm),
                            std::max(ex.interval.hi, m.hi + ex.geometry.center_mm)});
  const MomentIntegrals mi = moment_integrals(d, m, ex.quadrature);
  const double sigma = std::sqrt(mi.second / mi.mass);
  const double rho = mi.third_absolute / mi.mass;
  Json j{{"moment_interval", {{"lo", m.lo}, {"hi", m.hi}}},
         {"mass", mi.mass},
         {"second", mi.second},
         {"third_absolute", mi.third_absolute},
         {"sigma", sigma},
         {"rho", rho},
         {"rho_over_sigma3", mi.ratio()}};
  write_text(o.out, j.dump(2) + "\n");
  return 0;
}

int cmd_bound(const Options& o) {
  const LabConfig cfg = load(o.config);
  const auto& ex = cfg.experiment;
  ex.validate();
  const Interval m = ex.centered_moment_interval();
  const DensityModel d = double_slit_density(
      ex.geometry, Interval{std::min(ex.interval.lo, m.lo + ex.geometry.center_mm),
                            std::max(ex.interval.hi, m.hi + ex.geometry.center_mm)});
  const double ratio = moment_integrals(d, m, ex.quadrature).ratio();
  Json j{{"zolotarev_constant", ex.constants.lower},
         {"rho_over_sigma3", ratio},
         {"rhs_lower_const", ex.constants.lower * ratio},
         {"rhs_upper_const", ex.constants.upper() * ratio}};
  if (o.n > 0) {
    const double root = std::sqrt(static_cast<double>(o.n));
    j["N"] = o.n;
    j["rhs_with_sqrtN_lower"] = ex.constants.lower * ratio / root;
    j["rhs_with_sqrtN_upper"] = ex.constants.upper() * ratio / root;
  }
  write_text(o.out, j.dump(2) + "\n");
  return 0;
}

int cmd_sample(const Options& o) {
  const LabConfig cfg = load(o.config);
  const auto& ex = cfg.experiment;
  ex.validate();
  const DensityModel d = double_slit_density(ex.geometry, ex.interval);
  const auto events = sample_events(d, ex.interval, o.n, RngSeed{o.seed}, ex.quadrature);
  write_events_csv(output_path(o.out.empty() ? "events.csv" : o.out), events);
  return 0;
}

int finish_report(const ConvergenceReport& report, const ExperimentConfig& ex, const Options& o,
                  const std::string& fallback) {
  const ReportFormat fmt = format_from(o.format);
  emit_report(report, fmt, output_path(o.out.empty() ? fallback : o.out));
  const auto& s = report.summary;
  std::cerr << "rows " << s.rows << "; pass lower " << s.lower_const << ", upper " << s.upper_const
            << ", sqrtN lower " << s.with_sqrtN_lower << ", sqrtN upper " << s.with_sqrtN_upper
            << "\n";
  return literal_verdicts_pass(report, ex.variants) ? 0 : kExitVerdict;
}

int cmd_verify(const Options& o) {
  const LabConfig cfg = load(o.config);
  const auto& ex = cfg.experiment;
  ex.validate();
  const auto events = ingest_events(o.events, ex.interval);
  return finish_report(verify_events(ex, events), ex, o,
                       o.format == "csv" ? "verify.csv" : "verify.json");
}

int cmd_replicate(const Options& o) {
  LabConfig cfg = load(o.config);
  auto& ex = cfg.experiment;
  if (o.seed_count > 0) {
    ex.seeds.clear();
    for (int s = 1; s <= o.seed_count; ++s) ex.seeds.push_back(static_cast<std::uint64_t>(s));
  }
  ex.validate();
  return finish_report(run_replication(ex), ex, o,
                       o.format == "csv" ? "report.csv" : "report.json");
}

int cmd_sweep(const Options& o) {
  const LabConfig cfg = load(o.config);
  const auto& ex = cfg.experiment;
  ex.validate();
  const auto grid = geometric_grid(o.n_min, o.n_max, o.grid_points);
  std::vector<std::uint64_t> seeds;
  const int count = o.seed_count > 0 ? o.seed_count : 30;
  for (int s = 0; s < count; ++s) seeds.push_back(o.seed + static_cast<std::uint64_t>(s));
  const SweepResult result = run_convergence_sweep(ex, grid, seeds);
  write_text(o.out.empty() ? "sweep.json" : o.out, serialize_sweep(result));
  std::cerr << "slope " << result.slope << "\n";
  if (!o.svg.empty()) {
    std::vector<double> xs, ys;
    for (const auto& p : result.points) {
      xs.push_back(static_cast<double>(p.N));
      ys.push_back(p.median_sup_deviation);
    }
    csv::write_atomically(output_path(o.svg),
                          svg::line_chart(xs, ys, {"Median sup deviation", "N", "sup deviation", true, true}));
  }
  return 0;
}

MadelungSetup madelung_setup(const LabConfig& cfg, const Options& o) {
  MadelungSetup setup = cfg.madelung;
  if (!o.preset.empty()) {
    try {
      setup.preset = preset_from_string(o.preset);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("--preset", e.what());
    }
  }
  return setup;
}

std::string snapshot_name(int step, const char* kind) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "snapshot_%06d_%s.csv", step, kind);
  return buf;
}

int cmd_madelung(const Options& o) {
  const LabConfig cfg = load(o.config);
  const MadelungSetup setup = madelung_setup(cfg, o);
  const fs::path dir = output_path(o.out_dir);
  fs::create_directories(dir);

  const madelung::Potential v = setup.effective_potential();
  madelung::SplitStepPropagator prop(setup.grid, v);
  madelung::WaveField w = setup.initial_state(cfg.experiment.geometry);
  madelung::PolarField prev = madelung::decompose_polar(w, setup.node_threshold);
  const double norm0 = w.norm();

  Json snaps = Json::array();
  auto snapshot = [&](int step, const madelung::PolarField& p, const madelung::PolarField* before) {
    madelung::write_wave_csv(dir / snapshot_name(step, "wave"), w);
    madelung::write_polar_csv(dir / snapshot_name(step, "polar"), p);
    Json s{{"step", step}, {"time", w.time}, {"norm", w.norm()}};
    if (before) {
      s["hj"] = masked_norms(madelung::hj_residual(*before, p, v));
      s["continuity"] = masked_norms(madelung::continuity_residual(*before, p));
    } else {
      s["hj"] = nullptr;
      s["continuity"] = nullptr;
    }
    snaps.push_back(s);
  };

  snapshot(0, prev, nullptr);
  const int every = std::max(1, o.snapshot_every);
  for (int step = 1; step <= o.steps; ++step) {
    prop.step(w);
    madelung::PolarField next = madelung::decompose_polar(w, setup.node_threshold);
    if (step % every == 0 || step == o.steps) snapshot(step, next, &prev);
    prev = std::move(next);
  }

  Json summary{{"preset", std::string(to_string(setup.preset))},
               {"potential", std::string(madelung::to_string(v.kind))},
               {"grid",
                {{"x_min", setup.grid.x_min},
                 {"x_max", setup.grid.x_max},
                 {"points", setup.grid.points},
                 {"dt", setup.grid.dt},
                 {"mass", setup.grid.mass},
                 {"hbar", setup.grid.hbar}}},
               {"steps", o.steps},
               {"norm_drift", std::abs(w.norm() - norm0) / norm0},
               {"snapshots", snaps}};
  csv::write_atomically(dir / "residuals.json", summary.dump(2) + "\n");
  return 0;
}

int cmd_trajectories(const Options& o) {
  const LabConfig cfg = load(o.config);
  const MadelungSetup setup = madelung_setup(cfg, o);
  if (o.count < 1) throw ConfigError("--count", "must be >= 1");
  const madelung::Potential v = setup.effective_potential();
  madelung::SplitStepPropagator prop(setup.grid, v);
  madelung::WaveField w = setup.initial_state(cfg.experiment.geometry);
  madelung::PolarField now = madelung::decompose_polar(w, setup.node_threshold);
  madelung::TrajectoryEnsemble e = madelung::sample_ensemble(now, o.count, RngSeed{o.seed});
  for (int step = 0; step < o.steps; ++step) {
    prop.step(w);
    madelung::PolarField next = madelung::decompose_polar(w, setup.node_threshold);
    e = madelung::advect_trajectories(e, now, next);
    now = std::move(next);
  }
  madelung::write_trajectories_csv(output_path(o.out.empty() ? "trajectories.csv" : o.out), e);
  const double ks = madelung::ensemble_ks_distance(e, now);
  Json j{{"count", o.count},
         {"steps", o.steps},
         {"time", e.time},
         {"ks_distance", ks},
         {"ks_reference", 2.0 / std::sqrt(static_cast<double>(o.count))},
         {"node_collisions", e.node_collisions}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Born-rule frequency and Madelung-picture numerics", "bornlab"};
  app.require_subcommand(1, 1);
  Options o;

  auto config_flag = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "Configuration JSON (defaults apply when omitted)");
  };
  auto out_flag = [&](CLI::App* sub, const std::string& what) { sub->add_option("--out", o.out, what); };
  auto format_flag = [&](CLI::App* sub) {
    sub->add_option("--format", o.format, "Report format")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
  };

  auto* density = app.add_subcommand("density", "Tabulate the double-slit intensity");
  config_flag(density);
  out_flag(density, "Output CSV (t_mm,intensity); default density.csv");
  density->add_option("--points", o.points, "Evenly spaced samples including both ends")
      ->check(CLI::Range(1, 10000000))
      ->capture_default_str();
  density->add_option("--svg", o.svg, "Also write an SVG line chart");

  auto* moments = app.add_subcommand("moments", "Central moments over the moment interval");
  config_flag(moments);
  out_flag(moments, "Output JSON; default stdout");

  auto* bound = app.add_subcommand("bound", "Right-hand sides of the bound");
  config_flag(bound);
  out_flag(bound, "Output JSON; default stdout");
  bound->add_option("--n", o.n, "Also report the 1/sqrt(N) forms for this N")->check(CLI::PositiveNumber);

  auto* sample = app.add_subcommand("sample", "Draw detection events from the density");
  config_flag(sample);
  out_flag(sample, "Output CSV (index,t_mm); default events.csv");
  sample->add_option("--n", o.n, "Number of events")->required()->check(CLI::NonNegativeNumber);
  sample->add_option("--seed", o.seed, "Generator seed")->capture_default_str();

  auto* verify = app.add_subcommand("verify", "Check the bound against an events file");
  config_flag(verify);
  verify->add_option("--events", o.events, "Events CSV (index,t_mm)")->required();
  out_flag(verify, "Report path; default verify.json or verify.csv");
  format_flag(verify);

  auto* replicate = app.add_subcommand("replicate", "Sample, bin and verify every configured tuple");
  config_flag(replicate);
  out_flag(replicate, "Report path; default report.json or report.csv");
  format_flag(replicate);
  replicate->add_option("--seed-count", o.seed_count, "Use seeds 1..K instead of the configured list")
      ->check(CLI::PositiveNumber);

  auto* sweep = app.add_subcommand("sweep", "Median sup deviation against N and its log-log slope");
  config_flag(sweep);
  out_flag(sweep, "Output JSON; default sweep.json");
  sweep->add_option("--n-min", o.n_min, "Smallest N")->check(CLI::PositiveNumber)->capture_default_str();
  sweep->add_option("--n-max", o.n_max, "Largest N")->check(CLI::PositiveNumber)->capture_default_str();
  sweep->add_option("--grid-points", o.grid_points, "Geometric grid size")
      ->check(CLI::Range(2, 1000))
      ->capture_default_str();
  sweep->add_option("--seed", o.seed, "First seed")->capture_default_str();
  sweep->add_option("--seed-count", o.seed_count, "Number of consecutive seeds (default 30)")
      ->check(CLI::PositiveNumber);
  sweep->add_option("--svg", o.svg, "Also write an SVG log-log chart");

  auto* mad = app.add_subcommand("madelung", "Evolve a wave field and record residuals");
  config_flag(mad);
  mad->add_option("--preset", o.preset, "plane_wave, free_gaussian, harmonic_ground or double_slit");
  mad->add_option("--steps", o.steps, "Time steps")->check(CLI::NonNegativeNumber)->capture_default_str();
  mad->add_option("--snapshot-every", o.snapshot_every, "Steps between snapshots")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  mad->add_option("--out-dir", o.out_dir, "Directory for snapshots and residuals.json")
      ->capture_default_str();

  auto* traj = app.add_subcommand("trajectories", "Advect a trajectory ensemble along grad S / m");
  config_flag(traj);
  traj->add_option("--preset", o.preset, "plane_wave, free_gaussian, harmonic_ground or double_slit");
  traj->add_option("--count", o.count, "Number of trajectories")->capture_default_str();
  traj->add_option("--steps", o.steps, "Time steps")->check(CLI::NonNegativeNumber)->capture_default_str();
  traj->add_option("--seed", o.seed, "Generator seed")->capture_default_str();
  out_flag(traj, "Output CSV (index,x); default trajectories.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*density) return cmd_density(o);
    if (*moments) return cmd_moments(o);
    if (*bound) return cmd_bound(o);
    if (*sample) return cmd_sample(o);
    if (*verify) return cmd_verify(o);
    if (*replicate) return cmd_replicate(o);
    if (*sweep) return cmd_sweep(o);
    if (*mad) return cmd_madelung(o);
    if (*traj) return cmd_trajectories(o);
  } catch (const UnstableStep& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUnstable;
  } catch (const NonConvergence& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUnstable;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
