#ifndef BORNLAB_BERRY_ESSEEN_HPP
#define BORNLAB_BERRY_ESSEEN_HPP

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bornlab/density_model.hpp"
#include "bornlab/interval.hpp"
#include "bornlab/quadrature.hpp"

namespace bornlab {

enum class ConstantVariant { lower_bound_constant, plus_16_percent };

std::string_view to_string(ConstantVariant v);
ConstantVariant constant_variant_from_string(std::string_view s);

/// (3 + sqrt(10)) / (6 sqrt(2 pi)) ~ 0.409732.
double zolotarev_constant();

/// Slack factor allowed on top of the lower-bound constant.
inline constexpr double kUpperConstantFactor = 1.16;

/// Constants used on the right-hand side. Defaults are the lower-bound constant
/// and +16%; overriding `lower` is how a forced-failure run is expressed.
struct BoundConstants {
  double lower = zolotarev_constant();
  double upper_factor = kUpperConstantFactor;

  double upper() const { return lower * upper_factor; }
  double value(ConstantVariant v) const {
    return v == ConstantVariant::lower_bound_constant ? lower : upper();
  }
};

/// The three raw integrals entering the bound, over a centered moment interval.
struct MomentIntegrals {
  double mass = 0.0;               // integral of |psi|^2
  double second = 0.0;             // integral of t^2 |psi|^2
  double third_absolute = 0.0;     // integral of |t|^3 |psi|^2

  /// rho_raw * mass^(1/2) / sigma_raw^3, equal to rho / sigma^3 of the normalized law.
  double ratio() const;
};

/// Evaluates the moment integrals of d.centered() over `moment_iv`, which is
/// expressed in coordinates measured from the density's center.
MomentIntegrals moment_integrals(const DensityModel& d, const Interval& moment_iv,
                                 const QuadratureConfig& cfg = {});

/// C * rho_raw * M^(1/2) / sigma_raw^3 for the chosen constant.
double bound_rhs(const DensityModel& d, const Interval& moment_iv, ConstantVariant variant,
                 const QuadratureConfig& cfg = {}, const BoundConstants& constants = {});

enum class BinOrigin { from_a, from_b };

std::string_view to_string(BinOrigin o);
BinOrigin bin_origin_from_string(std::string_view s);

/**
 * Equal-width bins over `interval`. Edge k sits at lo + k (hi - lo) / n for
 * k = 0..n regardless of origin; the origin only decides which end bin
 * labels (and cumulative sums) start from.
 */
struct BinningScheme {
  int bin_count = 10;
  BinOrigin origin = BinOrigin::from_a;
  Interval interval{};

  void validate() const;
  double edge(int k) const;
  std::vector<double> edges() const;

  friend bool operator==(const BinningScheme&, const BinningScheme&) = default;
};

/// Counts are stored in label order: counts[0] is the bin at the scheme origin.
struct EmpiricalHistogram {
  BinningScheme scheme;
  std::vector<std::int64_t> counts;
  std::int64_t total_N = 0;

  void validate() const;

  friend bool operator==(const EmpiricalHistogram&, const EmpiricalHistogram&) = default;
};

/// Fraction of events in the j(x) whole bins lying between the origin and x.
double empirical_cdf(const EmpiricalHistogram& h, double x);

/// Normalized theoretical CDF at every physical edge, k = 0..n.
std::vector<double> theoretical_edge_cdf(const DensityModel& d, const BinningScheme& scheme,
                                         const QuadratureConfig& cfg = {});

/// Max over bin edges of |empirical CDF - theoretical CDF|, both accumulated
/// from the scheme's origin.
double sup_deviation(const EmpiricalHistogram& h, const DensityModel& d,
                     const QuadratureConfig& cfg = {});

/// Same, from precomputed physical-edge CDF values (see theoretical_edge_cdf).
double sup_deviation(const EmpiricalHistogram& h, std::span<const double> edge_cdf);

struct Verdicts {
  bool lower_const = false;
  bool upper_const = false;
  bool with_sqrtN_lower = false;
  bool with_sqrtN_upper = false;

  bool literal() const { return lower_const && upper_const; }
  friend bool operator==(const Verdicts&, const Verdicts&) = default;
};

struct BoundReport {
  std::int64_t N = 0;
  double sup_deviation = 0.0;
  double rhs_lower_const = 0.0;
  double rhs_upper_const = 0.0;
  double rhs_with_sqrtN_lower = 0.0;
  double rhs_with_sqrtN_upper = 0.0;
  Verdicts verdicts;
  BinningScheme scheme;

  friend bool operator==(const BoundReport&, const BoundReport&) = default;
};

/// Builds a report from a measured deviation and the two literal RHS values.
BoundReport make_report(const EmpiricalHistogram& h, double sup, double rhs_lower,
                        double rhs_upper);

/**
 * Evaluates both sides of the bound for one histogram. The literal form
 * (no 1/sqrt(N)) is reported next to the classical form that divides the
 * right-hand side by sqrt(N).
 */
BoundReport verify_inequality(const EmpiricalHistogram& h, const DensityModel& d,
                              const Interval& moment_iv, const QuadratureConfig& cfg = {},
                              const BoundConstants& constants = {});

}  // namespace bornlab

#endif  // BORNLAB_BERRY_ESSEEN_HPP
