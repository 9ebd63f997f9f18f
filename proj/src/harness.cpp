#include "bornlab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "bornlab/csv.hpp"
#include "bornlab/errors.hpp"
#include "bornlab/statistics.hpp"

namespace bornlab {

std::string_view to_string(Orientations o) {
  switch (o) {
    case Orientations::both:
      return "both";
    case Orientations::from_a:
      return "from_a";
    case Orientations::from_b:
      return "from_b";
  }
  return "both";
}

Orientations orientations_from_string(std::string_view s) {
  if (s == "both") return Orientations::both;
  if (s == "from_a") return Orientations::from_a;
  if (s == "from_b") return Orientations::from_b;
  throw std::invalid_argument("unknown orientation '" + std::string(s) + "'");
}

std::vector<std::int64_t> default_n_values() { return {13, 54, 101, 200, 227, 302, 448, 613, 803}; }

void ExperimentConfig::validate() const {
  geometry.validate();
  interval.validate();
  if (n_values.empty()) throw std::invalid_argument("n_values must not be empty");
  for (auto n : n_values) {
    if (n < 1) throw std::invalid_argument("every N must be >= 1");
  }
  if (bin_counts.empty()) throw std::invalid_argument("bin_counts must not be empty");
  for (int b : bin_counts) {
    if (b < 1) throw std::invalid_argument("every bin count must be >= 1");
  }
  if (seeds.empty()) throw std::invalid_argument("seeds must not be empty");
  if (moment_interval) moment_interval->validate();
  quadrature.validate();
  if (!(constants.lower > 0.0) || !(constants.upper_factor > 0.0)) {
    throw std::invalid_argument("bound constants must be positive");
  }
}

Interval ExperimentConfig::centered_moment_interval() const {
  const double mu = geometry.center_mm;
  if (moment_interval) return {moment_interval->lo - mu, moment_interval->hi - mu};
  const double half = 0.5 * interval.width();
  return {-half, half};
}

std::vector<BinningScheme> ExperimentConfig::schemes() const {
  std::vector<int> bins = bin_counts;
  std::sort(bins.begin(), bins.end());
  bins.erase(std::unique(bins.begin(), bins.end()), bins.end());
  std::vector<BinningScheme> out;
  for (int b : bins) {
    if (orientations != Orientations::from_b) out.push_back({b, BinOrigin::from_a, interval});
    if (orientations != Orientations::from_a) out.push_back({b, BinOrigin::from_b, interval});
  }
  return out;
}

ExperimentConfig figure_buildup_preset() {
  ExperimentConfig cfg;
  cfg.n_values = {7, 209, 1004, 6235};
  return cfg;
}

ReportSummary summarize(std::span<const ReportRow> rows) {
  ReportSummary s;
  s.rows = static_cast<std::int64_t>(rows.size());
  for (const auto& row : rows) {
    const auto& v = row.report.verdicts;
    s.lower_const += v.lower_const;
    s.upper_const += v.upper_const;
    s.with_sqrtN_lower += v.with_sqrtN_lower;
    s.with_sqrtN_upper += v.with_sqrtN_upper;
  }
  return s;
}

void canonicalize(ConvergenceReport& report) {
  auto key = [](const ReportRow& r) {
    return std::tuple(r.report.N, r.report.scheme.bin_count,
                      static_cast<int>(r.report.scheme.origin), r.seed);
  };
  std::stable_sort(report.rows.begin(), report.rows.end(),
                   [&](const ReportRow& a, const ReportRow& b) { return key(a) < key(b); });
  report.summary = summarize(report.rows);
}

bool literal_verdicts_pass(const ConvergenceReport& report,
                           std::span<const ConstantVariant> variants) {
  return std::all_of(report.rows.begin(), report.rows.end(), [&](const ReportRow& row) {
    return std::all_of(variants.begin(), variants.end(), [&](ConstantVariant v) {
      return v == ConstantVariant::lower_bound_constant ? row.report.verdicts.lower_const
                                                        : row.report.verdicts.upper_const;
    });
  });
}

namespace {

// Quantities shared by every tuple of one experiment.
struct Prepared {
  std::vector<BinningScheme> schemes;
  std::map<int, std::vector<double>> edge_cdf;  // by bin count
  double rhs_lower = 0.0;
  double rhs_upper = 0.0;
};

Prepared prepare(const ExperimentConfig& cfg, const DensityModel& density) {
  Prepared p;
  p.schemes = cfg.schemes();
  for (const auto& s : p.schemes) {
    if (!p.edge_cdf.contains(s.bin_count)) {
      p.edge_cdf[s.bin_count] = theoretical_edge_cdf(density, s, cfg.quadrature);
    }
  }
  const double ratio =
      moment_integrals(density, cfg.centered_moment_interval(), cfg.quadrature).ratio();
  p.rhs_lower = cfg.constants.lower * ratio;
  p.rhs_upper = cfg.constants.upper() * ratio;
  return p;
}

void append_rows(const Prepared& p, std::span<const EventRecord> events, std::uint64_t seed,
                 std::vector<ReportRow>& rows) {
  for (const auto& scheme : p.schemes) {
    const EmpiricalHistogram h = bin_events(events, scheme);
    const double sup = sup_deviation(h, p.edge_cdf.at(scheme.bin_count));
    rows.push_back({seed, make_report(h, sup, p.rhs_lower, p.rhs_upper)});
  }
}

DensityModel configured_density(const ExperimentConfig& cfg) {
  // The moment interval may reach beyond the event window; cover both.
  Interval support = cfg.interval;
  const Interval m = cfg.centered_moment_interval();
  support.lo = std::min(support.lo, m.lo + cfg.geometry.center_mm);
  support.hi = std::max(support.hi, m.hi + cfg.geometry.center_mm);
  return double_slit_density(cfg.geometry, support);
}

}  // namespace

ConvergenceReport run_replication(const ExperimentConfig& cfg) {
  cfg.validate();
  return run_replication(cfg, configured_density(cfg));
}

ConvergenceReport run_replication(const ExperimentConfig& cfg, const DensityModel& density) {
  cfg.validate();
  const Prepared prepared = prepare(cfg, density);
  const InverseCdf inverse(density, cfg.interval, cfg.quadrature);

  ConvergenceReport report;
  for (const auto N : cfg.n_values) {
    for (const auto seed : cfg.seeds) {
      const auto events =
          sample_events(inverse, N, RngSeed{mix_seed(seed, static_cast<std::uint64_t>(N))});
      append_rows(prepared, events, seed, report.rows);
    }
  }
  canonicalize(report);
  return report;
}

ConvergenceReport verify_events(const ExperimentConfig& cfg, std::span<const EventRecord> events) {
  cfg.validate();
  if (events.empty()) throw EmptyHistogram("no events to verify");
  const Prepared prepared = prepare(cfg, configured_density(cfg));
  ConvergenceReport report;
  append_rows(prepared, events, 0, report.rows);
  canonicalize(report);
  return report;
}

std::vector<std::int64_t> geometric_grid(std::int64_t lo, std::int64_t hi, int count) {
  if (lo < 1 || hi < lo || count < 1) throw std::invalid_argument("invalid geometric grid");
  std::vector<std::int64_t> out;
  for (int i = 0; i < count; ++i) {
    const double f = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    const double v = std::exp(std::log(double(lo)) + f * (std::log(double(hi)) - std::log(double(lo))));
    out.push_back(static_cast<std::int64_t>(std::llround(v)));
  }
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

SweepResult run_convergence_sweep(const ExperimentConfig& cfg, std::span<const std::int64_t> n_grid,
                                  std::span<const std::uint64_t> seeds) {
  cfg.validate();
  return run_convergence_sweep(cfg, configured_density(cfg), n_grid, seeds);
}

SweepResult run_convergence_sweep(const ExperimentConfig& cfg, const DensityModel& density,
                                  std::span<const std::int64_t> n_grid,
                                  std::span<const std::uint64_t> seeds) {
  cfg.validate();
  if (seeds.empty()) throw std::invalid_argument("sweep needs at least one seed");
  std::vector<std::int64_t> grid(n_grid.begin(), n_grid.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (grid.size() < 2) throw SlopeUndefined("sweep needs at least two distinct N");

  const Prepared prepared = prepare(cfg, density);
  const InverseCdf inverse(density, cfg.interval, cfg.quadrature);
  const BinningScheme primary = prepared.schemes.front();

  SweepResult result;
  std::vector<double> xs, ys;
  for (const auto N : grid) {
    std::vector<double> sups;
    for (const auto seed : seeds) {
      const auto events =
          sample_events(inverse, N, RngSeed{mix_seed(seed, static_cast<std::uint64_t>(N))});
      const auto first = result.report.rows.size();
      append_rows(prepared, events, seed, result.report.rows);
      for (auto i = first; i < result.report.rows.size(); ++i) {
        if (result.report.rows[i].report.scheme == primary) {
          sups.push_back(result.report.rows[i].report.sup_deviation);
        }
      }
    }
    const double med = median(sups);
    result.points.push_back({N, med});
    xs.push_back(static_cast<double>(N));
    ys.push_back(med);
  }
  result.slope = loglog_slope(xs, ys);
  canonicalize(result.report);
  return result;
}

std::vector<EventRecord> ingest_events(const std::filesystem::path& path,
                                       const Interval& interval) {
  interval.validate();
  std::vector<EventRecord> events;
  std::vector<std::size_t> outside;
  std::ostringstream lines;
  for (const auto& row : csv::read(path, "index,t_mm")) {
    const EventRecord e{csv::parse_double(row.fields[1], row.line),
                        csv::parse_integer(row.fields[0], row.line)};
    if (!interval.contains(e.position)) {
      if (outside.size() < 20) lines << (outside.empty() ? "" : ", ") << "line " << row.line;
      outside.push_back(events.size());
    }
    events.push_back(e);
  }
  if (!outside.empty()) {
    throw OutOfInterval(std::to_string(outside.size()) + " event(s) outside [" +
                            std::to_string(interval.lo) + ", " + std::to_string(interval.hi) +
                            "]: " + lines.str(),
                        std::move(outside));
  }
  return events;
}

}  // namespace bornlab
