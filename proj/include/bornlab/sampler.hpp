#ifndef BORNLAB_SAMPLER_HPP
#define BORNLAB_SAMPLER_HPP

#include <complex>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <vector>

#include "bornlab/berry_esseen.hpp"
#include "bornlab/density_model.hpp"
#include "bornlab/interval.hpp"
#include "bornlab/quadrature.hpp"

namespace bornlab {

struct RngSeed {
  std::uint64_t value = 0;
  friend bool operator==(const RngSeed&, const RngSeed&) = default;
};

/**
 * Uniform stream used by every sampler: std::mt19937_64 seeded with the raw
 * 64-bit seed, each draw mapped to [0, 1) as (x >> 11) * 2^-53. Both pieces
 * are fully specified by the C++ standard, so streams are identical across
 * platforms and standard libraries. Changing either is a format break.
 */
class UniformStream {
 public:
  explicit UniformStream(RngSeed seed) : engine_(seed.value) {}
  double next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

/// splitmix64 finalizer; derives independent per-task seeds from a base seed.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt);

struct EventRecord {
  double position = 0.0;  // mm
  std::int64_t index = 0;

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

/**
 * Inverse of the normalized CDF of a density on an interval.
 *
 * A 4096-cell cumulative table brackets the root; inside the bracketing cell
 * a safeguarded Newton iteration (bisection fallback) on the quadrature CDF
 * drives |cdf(x) - u| below 1e-12. Immutable after construction.
 */
class InverseCdf {
 public:
  static constexpr int kDefaultCells = 4096;

  InverseCdf(DensityModel d, Interval iv, QuadratureConfig cfg = {}, int cells = kDefaultCells);

  /// x with cdf(x) = u; u = 0 maps to the interval start.
  double operator()(double u) const;

  /// Normalized CDF through the table plus one in-cell integral.
  double cdf(double x) const;

  const Interval& interval() const { return iv_; }
  double mass() const { return mass_; }

 private:
  double partial(std::size_t cell, double x) const;

  DensityModel density_;
  Interval iv_;
  QuadratureConfig cfg_;
  std::vector<double> edges_;
  std::vector<double> cumulative_;  // normalized, cumulative_[0] = 0, back() = 1
  std::vector<std::vector<double>> cell_cuts_;
  double mass_ = 0.0;
};

/// One-shot inverse-CDF draw (builds the table on every call).
double inverse_cdf_sample(const DensityModel& d, const Interval& iv, double u,
                          const QuadratureConfig& cfg = {});

std::vector<EventRecord> sample_events(const InverseCdf& inverse, std::int64_t N, RngSeed seed);
std::vector<EventRecord> sample_events(const DensityModel& d, const Interval& iv, std::int64_t N,
                                       RngSeed seed, const QuadratureConfig& cfg = {});

/// Half-open bins, last bin closed. Throws OutOfInterval listing bad indices.
EmpiricalHistogram bin_events(std::span<const EventRecord> events, const BinningScheme& scheme);

struct OutcomeFrequency {
  std::int64_t count = 0;
  double frequency = 0.0;
};

/// Categorical sampling with probabilities |a_i|^2 / sum |a_j|^2.
std::vector<OutcomeFrequency> discrete_frequencies(std::span<const std::complex<double>> amplitudes,
                                                   std::int64_t N, RngSeed seed);
std::vector<OutcomeFrequency> discrete_frequencies(std::span<const double> amplitudes,
                                                   std::int64_t N, RngSeed seed);

/// Events CSV (`index,t_mm`).
void write_events_csv(const std::filesystem::path& path, std::span<const EventRecord> events);
std::vector<EventRecord> read_events_csv(const std::filesystem::path& path);

}  // namespace bornlab

#endif  // BORNLAB_SAMPLER_HPP
