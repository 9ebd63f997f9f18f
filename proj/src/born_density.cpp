#include "bornlab/born_density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "bornlab/csv.hpp"
#include "bornlab/errors.hpp"

namespace bornlab {

namespace {

double common_factor(const SlitGeometry& g, double t_mm) {
  const double offset = g.center_mm - t_mm;
  return std::numbers::pi /
         (std::sqrt(g.screen_distance_mm * g.screen_distance_mm + offset * offset) *
          g.wavelength_mm());
}

// Coordinates where the phase a * delta / sqrt(L^2 + delta^2) hits first_phase + k*pi.
std::vector<double> nulls(const SlitGeometry& g, const Interval& iv, double aperture_mm,
                          double first_phase) {
  std::vector<double> out;
  const double L = g.screen_distance_mm;
  const double a = std::numbers::pi * aperture_mm / g.wavelength_mm();
  for (double phase = first_phase;; phase += std::numbers::pi) {
    const double s = phase / a;
    if (s >= 1.0) break;
    const double delta = L * s / std::sqrt(1.0 - s * s);
    if (delta > std::max(g.center_mm - iv.lo, iv.hi - g.center_mm)) break;
    for (double t : {g.center_mm - delta, g.center_mm + delta}) {
      if (t > iv.lo && t < iv.hi) out.push_back(t);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

void SlitGeometry::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw InvalidGeometry(std::string(name) + " must be positive and finite");
    }
  };
  positive(slit_width_nm, "slit width");
  positive(slit_separation_nm, "slit separation");
  positive(screen_distance_mm, "screen distance");
  positive(wavelength_pm, "wavelength");
  positive(peak_height, "peak height");
  if (!std::isfinite(center_mm)) throw InvalidGeometry("pattern center must be finite");
  if (!(slit_separation_nm > slit_width_nm)) {
    throw InvalidGeometry("slit separation must exceed slit width");
  }
}

double envelope_m(const SlitGeometry& g, double t_mm) {
  return g.slit_width_mm() * common_factor(g, t_mm);
}

double fringe_n(const SlitGeometry& g, double t_mm) {
  return g.slit_separation_mm() * common_factor(g, t_mm);
}

double sinc(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 * (1.0 - x2 / 20.0);
  }
  return std::sin(x) / x;
}

Interval default_support(const SlitGeometry& g) {
  g.validate();
  // Halfway between the fourth and fifth envelope null.
  const double s = 4.5 * g.wavelength_mm() / g.slit_width_mm();
  const double half = s < 1.0 ? g.screen_distance_mm * s / std::sqrt(1.0 - s * s)
                              : g.screen_distance_mm;
  return {g.center_mm - half, g.center_mm + half};
}

std::vector<double> envelope_zeros(const SlitGeometry& g, const Interval& iv) {
  return nulls(g, iv, g.slit_width_mm(), std::numbers::pi);
}

std::vector<double> fringe_zeros(const SlitGeometry& g, const Interval& iv) {
  return nulls(g, iv, g.slit_separation_mm(), 0.5 * std::numbers::pi);
}

DensityModel double_slit_density(const SlitGeometry& g, std::optional<Interval> support) {
  g.validate();
  const Interval iv = support.value_or(default_support(g));
  iv.validate();

  std::vector<double> zeros = envelope_zeros(g, iv);
  const auto fringes = fringe_zeros(g, iv);
  zeros.insert(zeros.end(), fringes.begin(), fringes.end());

  auto intensity = [g](double t) {
    const double delta = t - g.center_mm;
    const double fringe = std::cos(fringe_n(g, t) * delta);
    const double envelope = sinc(envelope_m(g, t) * delta);
    return g.peak_height * fringe * fringe * envelope * envelope;
  };
  return DensityModel(intensity, iv, std::move(zeros), {}, g.center_mm);
}

double total_mass(const DensityModel& d, const Interval& iv, const QuadratureConfig& cfg) {
  iv.validate();
  const double mass = integrate_density(d, [](double) { return 1.0; }, iv, cfg);
  if (!(mass > std::numeric_limits<double>::min())) {
    throw ZeroMass("density has no positive mass on [" + std::to_string(iv.lo) + ", " +
                   std::to_string(iv.hi) + "]");
  }
  return mass;
}

double cdf(const DensityModel& d, const Interval& iv, double x, const QuadratureConfig& cfg) {
  iv.validate();
  if (!iv.contains(x)) {
    throw OutOfSupport("x = " + std::to_string(x) + " outside [" + std::to_string(iv.lo) + ", " +
                       std::to_string(iv.hi) + "]");
  }
  if (x == iv.lo) return 0.0;
  const double mass = total_mass(d, iv, cfg);
  if (x == iv.hi) return 1.0;
  const double partial = integrate_density(d, [](double) { return 1.0; }, {iv.lo, x}, cfg);
  return std::clamp(partial / mass, 0.0, 1.0);
}

TabulatedDensity::TabulatedDensity(std::vector<Knot> knots) : knots_(std::move(knots)) {
  if (knots_.size() < 2) throw std::invalid_argument("tabulated density needs at least 2 knots");
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    if (!std::isfinite(knots_[i].t_mm) || !std::isfinite(knots_[i].value)) {
      throw std::invalid_argument("tabulated density knot " + std::to_string(i) +
                                  " is not finite");
    }
    if (knots_[i].value < 0.0) {
      throw std::invalid_argument("tabulated density knot " + std::to_string(i) +
                                  " has negative intensity");
    }
    if (i > 0 && !(knots_[i].t_mm > knots_[i - 1].t_mm)) {
      throw std::invalid_argument("tabulated density knots must be strictly increasing");
    }
  }
}

TabulatedDensity TabulatedDensity::from_csv(const std::filesystem::path& path) {
  std::vector<Knot> knots;
  double previous = -std::numeric_limits<double>::infinity();
  for (const auto& row : csv::read(path, "t_mm,intensity")) {
    const double t = csv::parse_double(row.fields[0], row.line);
    const double v = csv::parse_double(row.fields[1], row.line);
    if (!(t > previous)) throw ParseError("t_mm must be strictly increasing", row.line);
    if (v < 0.0) throw ParseError("intensity must be non-negative", row.line);
    previous = t;
    knots.push_back({t, v});
  }
  if (knots.size() < 2) throw ParseError("a density table needs at least 2 rows", 0);
  return TabulatedDensity(std::move(knots));
}

double TabulatedDensity::operator()(double t) const {
  if (t <= knots_.front().t_mm) return t == knots_.front().t_mm ? knots_.front().value : 0.0;
  if (t >= knots_.back().t_mm) return t == knots_.back().t_mm ? knots_.back().value : 0.0;
  const auto hi = std::upper_bound(knots_.begin(), knots_.end(), t,
                                   [](double x, const Knot& k) { return x < k.t_mm; });
  const auto lo = hi - 1;
  const double frac = (t - lo->t_mm) / (hi->t_mm - lo->t_mm);
  return lo->value + frac * (hi->value - lo->value);
}

DensityModel TabulatedDensity::model(double center) const {
  std::vector<double> kinks;
  kinks.reserve(knots_.size());
  for (const auto& k : knots_) kinks.push_back(k.t_mm);
  auto self = std::make_shared<const TabulatedDensity>(*this);
  return DensityModel([self](double t) { return (*self)(t); }, support(), {}, std::move(kinks),
                      center);
}

}  // namespace bornlab
