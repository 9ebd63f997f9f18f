#ifndef BORNLAB_HARNESS_HPP
#define BORNLAB_HARNESS_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bornlab/berry_esseen.hpp"
#include "bornlab/born_density.hpp"
#include "bornlab/sampler.hpp"

namespace bornlab {

enum class Orientations { both, from_a, from_b };

std::string_view to_string(Orientations o);
Orientations orientations_from_string(std::string_view s);

/// Default event counts: nine values between 13 and 803.
std::vector<std::int64_t> default_n_values();

struct ExperimentConfig {
  SlitGeometry geometry;
  Interval interval{-1.0, 1.0};
  std::vector<std::int64_t> n_values = default_n_values();
  std::vector<int> bin_counts{10};
  Orientations orientations = Orientations::both;
  std::vector<std::uint64_t> seeds{1};
  std::vector<ConstantVariant> variants{ConstantVariant::lower_bound_constant,
                                        ConstantVariant::plus_16_percent};
  /// Detector coordinates (mm). Unset: the event interval recentered at mu.
  std::optional<Interval> moment_interval;
  QuadratureConfig quadrature;
  BoundConstants constants;

  void validate() const;

  /// Moment interval in coordinates measured from the pattern center.
  Interval centered_moment_interval() const;

  /// Every (bin count, orientation) scheme, in canonical order.
  std::vector<BinningScheme> schemes() const;
};

/// Preset for the pattern build-up counts shown in the experiment's figure.
ExperimentConfig figure_buildup_preset();

struct ReportRow {
  std::uint64_t seed = 0;
  BoundReport report;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct ReportSummary {
  std::int64_t rows = 0;
  std::int64_t lower_const = 0;
  std::int64_t upper_const = 0;
  std::int64_t with_sqrtN_lower = 0;
  std::int64_t with_sqrtN_upper = 0;

  friend bool operator==(const ReportSummary&, const ReportSummary&) = default;
};

struct ConvergenceReport {
  std::vector<ReportRow> rows;
  ReportSummary summary;

  friend bool operator==(const ConvergenceReport&, const ConvergenceReport&) = default;
};

ReportSummary summarize(std::span<const ReportRow> rows);

/// Sorts rows by (N, bin count, origin, seed) and recomputes the summary.
void canonicalize(ConvergenceReport& report);

/// True when every row passes the literal-form verdict of each listed variant.
bool literal_verdicts_pass(const ConvergenceReport& report,
                           std::span<const ConstantVariant> variants);

/// Sample, bin and verify every (N, seed, scheme) tuple of `cfg`. Events for
/// a given (N, seed) are drawn from the stream mix_seed(seed, N) and shared
/// by all binning schemes.
ConvergenceReport run_replication(const ExperimentConfig& cfg);
ConvergenceReport run_replication(const ExperimentConfig& cfg, const DensityModel& density);

/// Bins externally supplied events under every scheme of `cfg`; rows carry seed 0.
ConvergenceReport verify_events(const ExperimentConfig& cfg, std::span<const EventRecord> events);

struct SweepPoint {
  std::int64_t N = 0;
  double median_sup_deviation = 0.0;
};

struct SweepResult {
  ConvergenceReport report;
  std::vector<SweepPoint> points;
  double slope = 0.0;
};

/// `count` integers spaced geometrically from lo to hi (duplicates removed).
std::vector<std::int64_t> geometric_grid(std::int64_t lo, std::int64_t hi, int count);

/// Median sup-deviation over seeds for each N (first scheme of `cfg`) and
/// the least-squares log-log slope. Throws SlopeUndefined for one N.
SweepResult run_convergence_sweep(const ExperimentConfig& cfg, std::span<const std::int64_t> n_grid,
                                  std::span<const std::uint64_t> seeds);
SweepResult run_convergence_sweep(const ExperimentConfig& cfg, const DensityModel& density,
                                  std::span<const std::int64_t> n_grid,
                                  std::span<const std::uint64_t> seeds);

/// Reads an `index,t_mm` events file, keeping file order. Throws ParseError,
/// EmptyFile, or OutOfInterval naming the offending rows.
std::vector<EventRecord> ingest_events(const std::filesystem::path& path, const Interval& interval);

enum class ReportFormat { json, csv };

std::string serialize_report(const ConvergenceReport& report, ReportFormat format);
ConvergenceReport parse_report(std::string_view text, ReportFormat format);
void emit_report(const ConvergenceReport& report, ReportFormat format,
                 const std::filesystem::path& path);

std::string serialize_sweep(const SweepResult& result);

}  // namespace bornlab

#endif  // BORNLAB_HARNESS_HPP
