#ifndef BORNLAB_MADELUNG_HPP
#define BORNLAB_MADELUNG_HPP

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "bornlab/born_density.hpp"
#include "bornlab/sampler.hpp"

/**
 * One-dimensional Schrodinger evolution and its polar (Madelung) reading.
 *
 * Conventions: the grid is periodic with `points` samples x_j = x_min + j dx,
 * dx = (x_max - x_min) / points. Spatial derivatives of R and S use
 * fourth-order centered differences; time derivatives in the residuals are
 * centered between two snapshots (second order in dt). Residuals therefore
 * converge as O(dt^2) + O(dx^4).
 */
namespace bornlab::madelung {

using RealField = Eigen::ArrayXd;
using ComplexField = Eigen::ArrayXcd;
using Mask = Eigen::Array<bool, Eigen::Dynamic, 1>;

/// R below this fraction of max(R) is treated as a node.
inline constexpr double kNodeThreshold = 1e-6;

struct Grid {
  double x_min = -40.0;
  double x_max = 40.0;
  Eigen::Index points = 1024;
  double dt = 0.01;
  double mass = 1.0;
  double hbar = 1.0;

  void validate() const;
  double length() const { return x_max - x_min; }
  double dx() const { return length() / static_cast<double>(points); }
  RealField coordinates() const;
  /// FFT-ordered angular wavenumbers.
  RealField wavenumbers() const;

  friend bool operator==(const Grid&, const Grid&) = default;
};

struct WaveField {
  Grid grid;
  ComplexField psi;
  double time = 0.0;

  /// Integral of |psi|^2 over the periodic cell.
  double norm() const;
};

struct PolarField {
  Grid grid;
  RealField R;
  RealField S;     // action units; unwrapped per unmasked segment
  Mask node_mask;  // true where R < threshold * max(R)
  double time = 0.0;
};

/**
 * External potential V(x). Kinds:
 *  - free: V = 0
 *  - harmonic: m omega^2 (x - center)^2 / 2
 *  - barrier_double_slit_1d: `height` on |x - center| < thickness / 2,
 *    except two openings of width `slit_width` at center +- separation / 2
 *  - tabulated: one value per grid point
 */
struct Potential {
  enum class Kind { free, harmonic, barrier_double_slit_1d, tabulated };

  Kind kind = Kind::free;
  double omega = 1.0;
  double center = 0.0;
  double height = 0.0;
  double thickness = 0.0;
  double slit_width = 0.0;
  double slit_separation = 0.0;
  RealField table;

  static Potential free_particle() { return {}; }
  static Potential harmonic(double omega, double center = 0.0);
  static Potential double_slit_barrier(double height, double thickness, double slit_width,
                                       double slit_separation, double center = 0.0);
  static Potential tabulated(RealField values);

  RealField sample(const Grid& grid) const;
};

std::string_view to_string(Potential::Kind kind);
Potential::Kind potential_kind_from_string(std::string_view s);

/**
 * Strang-split propagator: half potential kick, exact kinetic step in
 * Fourier space, half potential kick. Each factor is unitary, so the scheme
 * is unconditionally stable; accuracy needs dt max|V| / hbar well below pi
 * and hbar k_max^2 dt / (2m) resolved for the states of interest.
 */
class SplitStepPropagator {
 public:
  SplitStepPropagator(const Grid& grid, const Potential& potential);

  /// Advances `w` by one dt in place; throws UnstableStep when the relative
  /// norm drift of the step exceeds 1e-9 or a value becomes non-finite.
  void step(WaveField& w);

  const Grid& grid() const { return grid_; }

 private:
  Grid grid_;
  ComplexField half_kick_;
  ComplexField kinetic_;
  Eigen::FFT<double> fft_;
  Eigen::VectorXcd work_;
  Eigen::VectorXcd spectrum_;
};

WaveField evolve_step(const WaveField& w, const Potential& v);

PolarField decompose_polar(const WaveField& w, double node_threshold = kNodeThreshold);
ComplexField recompose(const PolarField& p);

/// A field with an "undefined" mask; norms skip masked points.
struct MaskedField {
  RealField values;
  Mask mask;
  double dx = 1.0;

  double max_abs() const;
  /// sqrt(sum v^2 dx) over unmasked points.
  double l2() const;
  /// sqrt(sum w v^2 / sum w) over unmasked points.
  double weighted_l2(const RealField& weights) const;
  Eigen::Index unmasked_count() const;
};

/// Fourth-order periodic Laplacian.
RealField laplacian(const RealField& f, double dx);

/// dS/dx from wrapped neighbour phase differences (gauge and 2 pi safe).
MaskedField action_gradient(const PolarField& p);

/// grad S / m.
MaskedField velocity_field(const PolarField& p);

/// Q = -(hbar^2 / 2m) lap(R) / R, masked within two points of a node.
MaskedField quantum_potential(const PolarField& p);

/// dS/dt + (dS/dx)^2 / 2m + V + Q, centered between the last two snapshots.
MaskedField hj_residual(std::span<const PolarField> history, const Potential& v);
MaskedField hj_residual(const PolarField& prev, const PolarField& next, const Potential& v);

/// dR^2/dt + d/dx (R^2 dS/dx / m), centered between the last two snapshots.
MaskedField continuity_residual(std::span<const PolarField> history);
MaskedField continuity_residual(const PolarField& prev, const PolarField& next);

struct TrajectoryEnsemble {
  std::vector<double> positions;
  std::vector<std::uint8_t> frozen;  // 1 once a trajectory touched the node mask
  double time = 0.0;
  std::size_t node_collisions = 0;
};

/// M equally weighted positions drawn from R^2 of `p` (exact inverse of the
/// piecewise-linear interpolant of R^2).
TrajectoryEnsemble sample_ensemble(const PolarField& p, std::size_t count, RngSeed seed);

/// One dt of explicit midpoint integration in the frozen velocity field of `p`.
TrajectoryEnsemble advect_trajectories(const TrajectoryEnsemble& e, const PolarField& p);

/// Heun step between two consecutive snapshots (second order in time).
TrajectoryEnsemble advect_trajectories(const TrajectoryEnsemble& e, const PolarField& now,
                                       const PolarField& next);

/// Kolmogorov-Smirnov distance between the ensemble and the law R^2 / int R^2.
double ensemble_ks_distance(const TrajectoryEnsemble& e, const PolarField& p);

struct ClassicalityResult {
  bool classical = false;
  double measure = 0.0;  // max |lap R| * length^2 / max R
  RealField diagnostic;  // |lap R| * length^2 / max R, pointwise
};

/// Classical iff the curvature measure of R over the periodic cell is below `tol`.
ClassicalityResult classicality_check(const PolarField& p, double tol);

// Initial states.
WaveField plane_wave(const Grid& grid, int mode, double amplitude = 1.0);
WaveField gaussian_packet(const Grid& grid, double sigma, double x0, double k0);
WaveField harmonic_ground_state(const Grid& grid, double omega, double center = 0.0);
/// sqrt of the double-slit intensity with zero phase; grid coordinates are mm.
WaveField double_slit_screen_state(const Grid& grid, const SlitGeometry& g);

/// Analytic position variance of a free Gaussian packet with initial sigma.
double free_gaussian_variance(double sigma, double t, double mass, double hbar);

// Snapshot CSVs: `x,re_psi,im_psi`, `x,R,S,node_mask`, `index,x`.
void write_wave_csv(const std::filesystem::path& path, const WaveField& w);
void write_polar_csv(const std::filesystem::path& path, const PolarField& p);
void write_trajectories_csv(const std::filesystem::path& path, const TrajectoryEnsemble& e);

}  // namespace bornlab::madelung

#endif  // BORNLAB_MADELUNG_HPP
