#ifndef BORNLAB_BORN_DENSITY_HPP
#define BORNLAB_BORN_DENSITY_HPP

#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

#include "bornlab/density_model.hpp"
#include "bornlab/interval.hpp"
#include "bornlab/quadrature.hpp"

namespace bornlab {

/**
 * Two-slit apparatus. Lengths keep the units of their names; every
 * derived quantity is expressed on the detector axis in millimetres.
 *
 * The defaults describe a 600 eV electron beam through 62 nm slits with a
 * 272 nm period; they are configuration values, not reference data.
 */
struct SlitGeometry {
  double slit_width_nm = 62.0;
  double slit_separation_nm = 272.0;
  double screen_distance_mm = 240.0;
  double wavelength_pm = 50.0;
  double center_mm = 0.0;
  double peak_height = 1.0;

  void validate() const;

  double slit_width_mm() const { return slit_width_nm * 1e-6; }
  double slit_separation_mm() const { return slit_separation_nm * 1e-6; }
  double wavelength_mm() const { return wavelength_pm * 1e-9; }

  friend bool operator==(const SlitGeometry&, const SlitGeometry&) = default;
};

/// Single-slit envelope wavenumber m(t) in 1/mm, evaluated pointwise in t.
double envelope_m(const SlitGeometry& g, double t_mm);

/// Two-slit fringe wavenumber n(t) in 1/mm; n(t) / m(t) = d / w for all t.
double fringe_n(const SlitGeometry& g, double t_mm);

/// sin(x)/x with the removable point at 0 resolved.
double sinc(double x);

/// Symmetric window about the center holding four envelope nulls per side.
Interval default_support(const SlitGeometry& g);

/// Envelope nulls m(t)(t - mu) = k*pi inside `iv`, ascending.
std::vector<double> envelope_zeros(const SlitGeometry& g, const Interval& iv);

/// Fringe nulls n(t)(t - mu) = (k + 1/2)*pi inside `iv`, ascending.
std::vector<double> fringe_zeros(const SlitGeometry& g, const Interval& iv);

/**
 * The double-slit Born intensity
 *
 *   I0 cos^2(n(t)(t - mu)) [sin(m(t)(t - mu)) / (m(t)(t - mu))]^2,
 *
 * with the sinc singularity at t = mu resolved to I0. Zeros of both
 * factors inside the support are attached for quadrature pre-subdivision.
 */
DensityModel double_slit_density(const SlitGeometry& g,
                                 std::optional<Interval> support = std::nullopt);

/// Mass of `d` over `iv`; throws ZeroMass when the result is not positive.
double total_mass(const DensityModel& d, const Interval& iv, const QuadratureConfig& cfg = {});

/// Normalized CDF on `iv`; throws OutOfSupport when x lies outside it.
double cdf(const DensityModel& d, const Interval& iv, double x, const QuadratureConfig& cfg = {});

/// Piecewise-linear density through strictly increasing knots.
class TabulatedDensity {
 public:
  struct Knot {
    double t_mm;
    double value;
  };

  explicit TabulatedDensity(std::vector<Knot> knots);

  /// Reads a CSV with header `t_mm,intensity`.
  static TabulatedDensity from_csv(const std::filesystem::path& path);

  double operator()(double t) const;
  const std::vector<Knot>& knots() const { return knots_; }
  Interval support() const { return {knots_.front().t_mm, knots_.back().t_mm}; }

  /// Wraps the table as a DensityModel with its knots as kinks.
  DensityModel model(double center = 0.0) const;

 private:
  std::vector<Knot> knots_;
};

}  // namespace bornlab

#endif  // BORNLAB_BORN_DENSITY_HPP
