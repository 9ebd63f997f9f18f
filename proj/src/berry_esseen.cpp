#include "bornlab/berry_esseen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include "bornlab/born_density.hpp"
#include "bornlab/errors.hpp"

namespace bornlab {

std::string_view to_string(ConstantVariant v) {
  return v == ConstantVariant::lower_bound_constant ? "lower_bound_constant" : "plus_16_percent";
}

ConstantVariant constant_variant_from_string(std::string_view s) {
  if (s == "lower_bound_constant") return ConstantVariant::lower_bound_constant;
  if (s == "plus_16_percent") return ConstantVariant::plus_16_percent;
  throw std::invalid_argument("unknown constant variant '" + std::string(s) + "'");
}

double zolotarev_constant() {
  return (3.0 + std::sqrt(10.0)) / (6.0 * std::sqrt(2.0 * std::numbers::pi));
}

double MomentIntegrals::ratio() const {
  if (!(mass > std::numeric_limits<double>::min())) throw ZeroMass("moment mass is not positive");
  if (!(second > std::numeric_limits<double>::min())) {
    throw ZeroVariance("second central moment is not positive");
  }
  return third_absolute * std::sqrt(mass) / (second * std::sqrt(second));
}

MomentIntegrals moment_integrals(const DensityModel& d, const Interval& moment_iv,
                                 const QuadratureConfig& cfg) {
  moment_iv.validate();
  const DensityModel centered = d.centered();
  MomentIntegrals m;
  m.mass = integrate_density(centered, [](double) { return 1.0; }, moment_iv, cfg);
  m.second = central_moment(centered, 2, false, moment_iv, cfg);
  m.third_absolute = central_moment(centered, 3, true, moment_iv, cfg);
  return m;
}

double bound_rhs(const DensityModel& d, const Interval& moment_iv, ConstantVariant variant,
                 const QuadratureConfig& cfg, const BoundConstants& constants) {
  return constants.value(variant) * moment_integrals(d, moment_iv, cfg).ratio();
}

std::string_view to_string(BinOrigin o) { return o == BinOrigin::from_a ? "from_a" : "from_b"; }

BinOrigin bin_origin_from_string(std::string_view s) {
  if (s == "from_a") return BinOrigin::from_a;
  if (s == "from_b") return BinOrigin::from_b;
  throw std::invalid_argument("unknown bin origin '" + std::string(s) + "'");
}

void BinningScheme::validate() const {
  if (bin_count < 1) throw std::invalid_argument("bin_count must be >= 1");
  interval.validate();
}

double BinningScheme::edge(int k) const {
  if (k <= 0) return interval.lo;
  if (k >= bin_count) return interval.hi;
  return interval.lo + interval.width() * static_cast<double>(k) / bin_count;
}

std::vector<double> BinningScheme::edges() const {
  std::vector<double> out(static_cast<std::size_t>(bin_count) + 1);
  for (int k = 0; k <= bin_count; ++k) out[static_cast<std::size_t>(k)] = edge(k);
  return out;
}

void EmpiricalHistogram::validate() const {
  scheme.validate();
  if (counts.size() != static_cast<std::size_t>(scheme.bin_count)) {
    throw std::invalid_argument("histogram has " + std::to_string(counts.size()) +
                                " counts for " + std::to_string(scheme.bin_count) + " bins");
  }
  if (std::any_of(counts.begin(), counts.end(), [](auto c) { return c < 0; })) {
    throw std::invalid_argument("histogram counts must be non-negative");
  }
  if (std::accumulate(counts.begin(), counts.end(), std::int64_t{0}) != total_N) {
    throw std::invalid_argument("histogram counts do not sum to total_N");
  }
}

namespace {

// Number of whole bins between the scheme origin and x.
int whole_bins(const BinningScheme& s, double x) {
  if (s.origin == BinOrigin::from_a) {
    int j = 0;
    while (j < s.bin_count && s.edge(j + 1) <= x) ++j;
    return j;
  }
  int j = 0;
  while (j < s.bin_count && s.edge(s.bin_count - j - 1) >= x) ++j;
  return j;
}

void require_events(const EmpiricalHistogram& h) {
  if (h.total_N <= 0) throw EmptyHistogram("histogram holds no events");
}

}  // namespace

double empirical_cdf(const EmpiricalHistogram& h, double x) {
  require_events(h);
  if (!h.scheme.interval.contains(x)) {
    throw OutOfSupport("x = " + std::to_string(x) + " outside the binning interval");
  }
  const int j = whole_bins(h.scheme, x);
  const auto sum = std::accumulate(h.counts.begin(), h.counts.begin() + j, std::int64_t{0});
  return static_cast<double>(sum) / static_cast<double>(h.total_N);
}

std::vector<double> theoretical_edge_cdf(const DensityModel& d, const BinningScheme& scheme,
                                         const QuadratureConfig& cfg) {
  scheme.validate();
  const Interval& iv = scheme.interval;
  const double mass = total_mass(d, iv, cfg);
  const auto edges = scheme.edges();
  std::vector<double> out(edges.size(), 0.0);
  double running = 0.0;
  for (std::size_t k = 1; k < edges.size(); ++k) {
    running += integrate_density(d, [](double) { return 1.0; }, {edges[k - 1], edges[k]}, cfg);
    out[k] = std::clamp(running / mass, 0.0, 1.0);
  }
  out.back() = 1.0;
  return out;
}

double sup_deviation(const EmpiricalHistogram& h, std::span<const double> edge_cdf) {
  require_events(h);
  const int n = h.scheme.bin_count;
  if (edge_cdf.size() != static_cast<std::size_t>(n) + 1) {
    throw std::invalid_argument("edge CDF table does not match the binning scheme");
  }
  const double total = static_cast<double>(h.total_N);
  double sup = 0.0;
  std::int64_t running = 0;
  for (int j = 0; j <= n; ++j) {
    if (j > 0) running += h.counts[static_cast<std::size_t>(j - 1)];
    // Label edge j is physical edge j (from a) or n - j (from b).
    const double theory = h.scheme.origin == BinOrigin::from_a
                              ? edge_cdf[static_cast<std::size_t>(j)]
                              : 1.0 - edge_cdf[static_cast<std::size_t>(n - j)];
    sup = std::max(sup, std::abs(static_cast<double>(running) / total - theory));
  }
  return std::min(sup, 1.0);
}

double sup_deviation(const EmpiricalHistogram& h, const DensityModel& d,
                     const QuadratureConfig& cfg) {
  require_events(h);
  return sup_deviation(h, theoretical_edge_cdf(d, h.scheme, cfg));
}

BoundReport make_report(const EmpiricalHistogram& h, double sup, double rhs_lower,
                        double rhs_upper) {
  BoundReport r;
  r.N = h.total_N;
  r.sup_deviation = sup;
  r.rhs_lower_const = rhs_lower;
  r.rhs_upper_const = rhs_upper;
  const double root_n = std::sqrt(static_cast<double>(h.total_N));
  r.rhs_with_sqrtN_lower = rhs_lower / root_n;
  r.rhs_with_sqrtN_upper = rhs_upper / root_n;
  r.verdicts.lower_const = sup <= r.rhs_lower_const;
  r.verdicts.upper_const = sup <= r.rhs_upper_const;
  r.verdicts.with_sqrtN_lower = sup <= r.rhs_with_sqrtN_lower;
  r.verdicts.with_sqrtN_upper = sup <= r.rhs_with_sqrtN_upper;
  r.scheme = h.scheme;
  return r;
}

BoundReport verify_inequality(const EmpiricalHistogram& h, const DensityModel& d,
                              const Interval& moment_iv, const QuadratureConfig& cfg,
                              const BoundConstants& constants) {
  h.validate();
  require_events(h);
  const double ratio = moment_integrals(d, moment_iv, cfg).ratio();
  return make_report(h, sup_deviation(h, d, cfg), constants.lower * ratio,
                     constants.upper() * ratio);
}

}  // namespace bornlab
