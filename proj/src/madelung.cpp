#include "bornlab/madelung.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include "bornlab/csv.hpp"
#include "bornlab/errors.hpp"

namespace bornlab::madelung {

namespace {

using Index = Eigen::Index;
using namespace std::complex_literals;

Index wrap_index(Index j, Index n) { return ((j % n) + n) % n; }

double wrap_phase(double phi) { return std::remainder(phi, 2.0 * std::numbers::pi); }

Mask dilate(const Mask& mask, Index radius) {
  const Index n = mask.size();
  Mask out = Mask::Constant(n, false);
  for (Index j = 0; j < n; ++j) {
    if (!mask[j]) continue;
    for (Index r = -radius; r <= radius; ++r) out[wrap_index(j + r, n)] = true;
  }
  return out;
}

RealField gradient4(const RealField& f, double dx) {
  const Index n = f.size();
  RealField out(n);
  for (Index j = 0; j < n; ++j) {
    const double fp1 = f[wrap_index(j + 1, n)];
    const double fm1 = f[wrap_index(j - 1, n)];
    const double fp2 = f[wrap_index(j + 2, n)];
    const double fm2 = f[wrap_index(j - 2, n)];
    out[j] = (8.0 * (fp1 - fm1) - (fp2 - fm2)) / (12.0 * dx);
  }
  return out;
}

void require_same_grid(const PolarField& a, const PolarField& b) {
  if (!(a.grid == b.grid) || a.R.size() != b.R.size()) {
    throw std::invalid_argument("snapshots live on different grids");
  }
}

double snapshot_dt(const PolarField& prev, const PolarField& next) {
  const double dt = next.time - prev.time;
  if (!(dt > 0.0)) throw std::invalid_argument("snapshots must be in increasing time order");
  return dt;
}

}  // namespace

void Grid::validate() const {
  if (!(std::isfinite(x_min) && std::isfinite(x_max) && x_max > x_min)) {
    throw std::invalid_argument("grid needs finite x_min < x_max");
  }
  if (points < 16 || (points & (points - 1)) != 0) {
    throw std::invalid_argument("grid points must be a power of two >= 16");
  }
  if (!(dt > 0.0)) throw std::invalid_argument("grid dt must be positive");
  if (!(mass > 0.0)) throw std::invalid_argument("grid mass must be positive");
  if (!(hbar > 0.0)) throw std::invalid_argument("grid hbar must be positive");
}

RealField Grid::coordinates() const {
  return x_min + dx() * RealField::LinSpaced(points, 0.0, static_cast<double>(points - 1));
}

RealField Grid::wavenumbers() const {
  RealField k(points);
  const double base = 2.0 * std::numbers::pi / length();
  for (Index j = 0; j < points; ++j) {
    k[j] = base * static_cast<double>(j < points / 2 ? j : j - points);
  }
  return k;
}

double WaveField::norm() const { return psi.abs2().sum() * grid.dx(); }

Potential Potential::harmonic(double omega, double center) {
  Potential v;
  v.kind = Kind::harmonic;
  v.omega = omega;
  v.center = center;
  return v;
}

Potential Potential::double_slit_barrier(double height, double thickness, double slit_width,
                                         double slit_separation, double center) {
  if (!(slit_separation > slit_width) || !(thickness > slit_separation + slit_width)) {
    throw std::invalid_argument("barrier must enclose two disjoint openings");
  }
  Potential v;
  v.kind = Kind::barrier_double_slit_1d;
  v.height = height;
  v.thickness = thickness;
  v.slit_width = slit_width;
  v.slit_separation = slit_separation;
  v.center = center;
  return v;
}

Potential Potential::tabulated(RealField values) {
  Potential v;
  v.kind = Kind::tabulated;
  v.table = std::move(values);
  return v;
}

RealField Potential::sample(const Grid& grid) const {
  const RealField x = grid.coordinates();
  RealField out = RealField::Zero(grid.points);
  switch (kind) {
    case Kind::free:
      break;
    case Kind::harmonic:
      out = 0.5 * grid.mass * omega * omega * (x - center).square();
      break;
    case Kind::barrier_double_slit_1d:
      for (Index j = 0; j < x.size(); ++j) {
        const double u = x[j] - center;
        const bool inside = std::abs(u) < 0.5 * thickness;
        const bool open = std::abs(std::abs(u) - 0.5 * slit_separation) < 0.5 * slit_width;
        out[j] = inside && !open ? height : 0.0;
      }
      break;
    case Kind::tabulated:
      if (table.size() != grid.points) {
        throw std::invalid_argument("tabulated potential has " + std::to_string(table.size()) +
                                    " values for " + std::to_string(grid.points) + " points");
      }
      out = table;
      break;
  }
  if (!out.allFinite()) throw std::invalid_argument("potential is not finite on the grid");
  return out;
}

std::string_view to_string(Potential::Kind kind) {
  switch (kind) {
    case Potential::Kind::free:
      return "free";
    case Potential::Kind::harmonic:
      return "harmonic";
    case Potential::Kind::barrier_double_slit_1d:
      return "barrier_double_slit_1d";
    case Potential::Kind::tabulated:
      return "tabulated";
  }
  return "free";
}

Potential::Kind potential_kind_from_string(std::string_view s) {
  if (s == "free") return Potential::Kind::free;
  if (s == "harmonic") return Potential::Kind::harmonic;
  if (s == "barrier_double_slit_1d") return Potential::Kind::barrier_double_slit_1d;
  if (s == "tabulated") return Potential::Kind::tabulated;
  throw std::invalid_argument("unknown potential kind '" + std::string(s) + "'");
}

SplitStepPropagator::SplitStepPropagator(const Grid& grid, const Potential& potential)
    : grid_(grid) {
  grid_.validate();
  const RealField v = potential.sample(grid_);
  const RealField k = grid_.wavenumbers();
  half_kick_ = (-1i * v * (0.5 * grid_.dt / grid_.hbar)).exp();
  kinetic_ = (-1i * k.square() * (grid_.hbar * grid_.dt / (2.0 * grid_.mass))).exp();
  work_.resize(grid_.points);
  spectrum_.resize(grid_.points);
}

void SplitStepPropagator::step(WaveField& w) {
  if (!(w.grid == grid_) || w.psi.size() != grid_.points) {
    throw std::invalid_argument("wave field does not match the propagator grid");
  }
  const double before = w.norm();
  work_ = (w.psi * half_kick_).matrix();
  fft_.fwd(spectrum_, work_);
  spectrum_.array() *= kinetic_;
  fft_.inv(work_, spectrum_);
  w.psi = work_.array() * half_kick_;
  w.time += grid_.dt;

  const double after = w.norm();
  if (!w.psi.allFinite() || !(std::abs(after - before) <= 1e-9 * before)) {
    throw UnstableStep("norm drift " + std::to_string(std::abs(after - before) / before) +
                       " in one step at t = " + std::to_string(w.time));
  }
}

WaveField evolve_step(const WaveField& w, const Potential& v) {
  SplitStepPropagator propagator(w.grid, v);
  WaveField out = w;
  propagator.step(out);
  return out;
}

PolarField decompose_polar(const WaveField& w, double node_threshold) {
  const Index n = w.psi.size();
  PolarField p;
  p.grid = w.grid;
  p.time = w.time;
  p.R = w.psi.abs();
  const double cutoff = node_threshold * p.R.maxCoeff();
  p.node_mask = p.R < cutoff;
  p.S = RealField::Zero(n);

  const double hbar = w.grid.hbar;
  bool in_segment = false;
  double phase = 0.0;
  double previous_arg = 0.0;
  for (Index j = 0; j < n; ++j) {
    if (p.node_mask[j]) {
      in_segment = false;
      continue;
    }
    const double arg = std::arg(w.psi[j]);
    phase = in_segment ? phase + wrap_phase(arg - previous_arg) : arg;
    previous_arg = arg;
    in_segment = true;
    p.S[j] = hbar * phase;
  }
  return p;
}

ComplexField recompose(const PolarField& p) {
  return p.R * (1i * p.S / p.grid.hbar).exp();
}

double MaskedField::max_abs() const {
  double m = 0.0;
  for (Index j = 0; j < values.size(); ++j) {
    if (!mask[j]) m = std::max(m, std::abs(values[j]));
  }
  return m;
}

double MaskedField::l2() const {
  double s = 0.0;
  for (Index j = 0; j < values.size(); ++j) {
    if (!mask[j]) s += values[j] * values[j];
  }
  return std::sqrt(s * dx);
}

double MaskedField::weighted_l2(const RealField& weights) const {
  double s = 0.0;
  double w = 0.0;
  for (Index j = 0; j < values.size(); ++j) {
    if (mask[j]) continue;
    s += weights[j] * values[j] * values[j];
    w += weights[j];
  }
  return w > 0.0 ? std::sqrt(s / w) : 0.0;
}

Index MaskedField::unmasked_count() const { return values.size() - mask.count(); }

RealField laplacian(const RealField& f, double dx) {
  const Index n = f.size();
  RealField out(n);
  for (Index j = 0; j < n; ++j) {
    const double fp1 = f[wrap_index(j + 1, n)];
    const double fm1 = f[wrap_index(j - 1, n)];
    const double fp2 = f[wrap_index(j + 2, n)];
    const double fm2 = f[wrap_index(j - 2, n)];
    // Grouped so that a constant field cancels exactly.
    out[j] = ((16.0 * (fp1 + fm1) - (fp2 + fm2)) - 30.0 * f[j]) / (12.0 * dx * dx);
  }
  return out;
}

MaskedField action_gradient(const PolarField& p) {
  const Index n = p.S.size();
  const double hbar = p.grid.hbar;
  const double dx = p.grid.dx();
  // d[j] = wrapped phase increment from j to j + 1.
  RealField d(n);
  for (Index j = 0; j < n; ++j) {
    d[j] = wrap_phase((p.S[wrap_index(j + 1, n)] - p.S[j]) / hbar);
  }
  MaskedField out{RealField::Zero(n), dilate(p.node_mask, 2), dx};
  for (Index j = 0; j < n; ++j) {
    if (out.mask[j]) continue;
    const double near = d[wrap_index(j - 1, n)] + d[j];
    const double far = near + d[wrap_index(j - 2, n)] + d[wrap_index(j + 1, n)];
    out.values[j] = hbar * (8.0 * near - far) / (12.0 * dx);
  }
  return out;
}

MaskedField velocity_field(const PolarField& p) {
  MaskedField v = action_gradient(p);
  v.values /= p.grid.mass;
  return v;
}

MaskedField quantum_potential(const PolarField& p) {
  const Index n = p.R.size();
  const RealField lap = laplacian(p.R, p.grid.dx());
  MaskedField q{RealField::Zero(n), dilate(p.node_mask, 2), p.grid.dx()};
  const double scale = -p.grid.hbar * p.grid.hbar / (2.0 * p.grid.mass);
  for (Index j = 0; j < n; ++j) {
    if (!q.mask[j]) q.values[j] = scale * lap[j] / p.R[j];
  }
  return q;
}

MaskedField hj_residual(const PolarField& prev, const PolarField& next, const Potential& v) {
  require_same_grid(prev, next);
  const double dt = snapshot_dt(prev, next);
  const Grid& grid = prev.grid;
  const RealField potential = v.sample(grid);

  auto spatial = [&](const PolarField& p) {
    MaskedField grad = action_gradient(p);
    const MaskedField q = quantum_potential(p);
    grad.values = grad.values.square() / (2.0 * grid.mass) + potential + q.values;
    grad.mask = grad.mask || q.mask;
    return grad;
  };
  const MaskedField a = spatial(prev);
  const MaskedField b = spatial(next);

  const Index n = prev.R.size();
  MaskedField out{RealField::Zero(n), a.mask || b.mask, grid.dx()};
  for (Index j = 0; j < n; ++j) {
    if (out.mask[j]) continue;
    const double dS = grid.hbar * wrap_phase((next.S[j] - prev.S[j]) / grid.hbar);
    out.values[j] = dS / dt + 0.5 * (a.values[j] + b.values[j]);
  }
  return out;
}

MaskedField hj_residual(std::span<const PolarField> history, const Potential& v) {
  if (history.size() < 2) throw InsufficientHistory("HJ residual needs two snapshots");
  return hj_residual(history[history.size() - 2], history.back(), v);
}

MaskedField continuity_residual(const PolarField& prev, const PolarField& next) {
  require_same_grid(prev, next);
  const double dt = snapshot_dt(prev, next);
  const Grid& grid = prev.grid;

  auto divergence = [&](const PolarField& p) {
    MaskedField flux = velocity_field(p);
    flux.values *= p.R.square();
    MaskedField div{gradient4(flux.values, grid.dx()), dilate(flux.mask, 2), grid.dx()};
    return div;
  };
  const MaskedField a = divergence(prev);
  const MaskedField b = divergence(next);

  const Index n = prev.R.size();
  MaskedField out{RealField::Zero(n), a.mask || b.mask, grid.dx()};
  for (Index j = 0; j < n; ++j) {
    if (out.mask[j]) continue;
    const double dRho = next.R[j] * next.R[j] - prev.R[j] * prev.R[j];
    out.values[j] = dRho / dt + 0.5 * (a.values[j] + b.values[j]);
  }
  return out;
}

MaskedField continuity_residual(std::span<const PolarField> history) {
  if (history.size() < 2) throw InsufficientHistory("continuity residual needs two snapshots");
  return continuity_residual(history[history.size() - 2], history.back());
}

ClassicalityResult classicality_check(const PolarField& p, double tol) {
  ClassicalityResult result;
  const double peak = p.R.maxCoeff();
  const double length = p.grid.length();
  if (!(peak > 0.0)) {
    result.measure = std::numeric_limits<double>::infinity();
    result.diagnostic = RealField::Constant(p.R.size(), result.measure);
    return result;
  }
  result.diagnostic = laplacian(p.R, p.grid.dx()).abs() * (length * length / peak);
  result.measure = result.diagnostic.maxCoeff();
  result.classical = result.measure < tol;
  return result;
}

WaveField plane_wave(const Grid& grid, int mode, double amplitude) {
  grid.validate();
  const double k = 2.0 * std::numbers::pi * mode / grid.length();
  return {grid, amplitude * (1i * k * grid.coordinates()).exp(), 0.0};
}

WaveField gaussian_packet(const Grid& grid, double sigma, double x0, double k0) {
  grid.validate();
  if (!(sigma > 0.0)) throw std::invalid_argument("packet width must be positive");
  const RealField x = grid.coordinates();
  const double norm = std::pow(2.0 * std::numbers::pi * sigma * sigma, -0.25);
  const ComplexField exponent =
      -(x - x0).square().cast<std::complex<double>>() / (4.0 * sigma * sigma) + 1i * k0 * x;
  return {grid, norm * exponent.exp(), 0.0};
}

WaveField harmonic_ground_state(const Grid& grid, double omega, double center) {
  grid.validate();
  const double a = grid.mass * omega / grid.hbar;
  const RealField x = grid.coordinates();
  const RealField amplitude = std::pow(a / std::numbers::pi, 0.25) * (-0.5 * a * (x - center).square()).exp();
  return {grid, amplitude.cast<std::complex<double>>(), 0.0};
}

WaveField double_slit_screen_state(const Grid& grid, const SlitGeometry& g) {
  grid.validate();
  const DensityModel d = double_slit_density(g, Interval{grid.x_min, grid.x_max});
  const RealField x = grid.coordinates();
  RealField amplitude(grid.points);
  for (Index j = 0; j < grid.points; ++j) amplitude[j] = std::sqrt(d(x[j]));
  return {grid, amplitude.cast<std::complex<double>>(), 0.0};
}

double free_gaussian_variance(double sigma, double t, double mass, double hbar) {
  const double spread = hbar * t / (2.0 * mass * sigma * sigma);
  return sigma * sigma * (1.0 + spread * spread);
}

void write_wave_csv(const std::filesystem::path& path, const WaveField& w) {
  const RealField x = w.grid.coordinates();
  std::string out = "x,re_psi,im_psi\n";
  for (Index j = 0; j < x.size(); ++j) {
    out += csv::format_double(x[j]) + ',' + csv::format_double(w.psi[j].real()) + ',' +
           csv::format_double(w.psi[j].imag()) + '\n';
  }
  csv::write_atomically(path, out);
}

void write_polar_csv(const std::filesystem::path& path, const PolarField& p) {
  const RealField x = p.grid.coordinates();
  std::string out = "x,R,S,node_mask\n";
  for (Index j = 0; j < x.size(); ++j) {
    out += csv::format_double(x[j]) + ',' + csv::format_double(p.R[j]) + ',' +
           csv::format_double(p.S[j]) + ',' + (p.node_mask[j] ? "1" : "0") + '\n';
  }
  csv::write_atomically(path, out);
}

void write_trajectories_csv(const std::filesystem::path& path, const TrajectoryEnsemble& e) {
  std::string out = "index,x\n";
  for (std::size_t i = 0; i < e.positions.size(); ++i) {
    out += std::to_string(i) + ',' + csv::format_double(e.positions[i]) + '\n';
  }
  csv::write_atomically(path, out);
}

}  // namespace bornlab::madelung
