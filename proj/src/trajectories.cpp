#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "bornlab/errors.hpp"
#include "bornlab/madelung.hpp"

namespace bornlab::madelung {

namespace {

using Index = Eigen::Index;

// Periodic piecewise-linear interpolant of R^2 with an exact CDF and inverse.
class GridDensity {
 public:
  explicit GridDensity(const PolarField& p)
      : x_min_(p.grid.x_min), dx_(p.grid.dx()), rho_(p.R.square()) {
    const Index n = rho_.size();
    cumulative_.resize(static_cast<std::size_t>(n) + 1, 0.0);
    for (Index j = 0; j < n; ++j) {
      cumulative_[static_cast<std::size_t>(j) + 1] =
          cumulative_[static_cast<std::size_t>(j)] + 0.5 * dx_ * (rho_[j] + next(j));
    }
    mass_ = cumulative_.back();
    if (!(mass_ > 0.0)) throw ZeroMass("R^2 has no mass on the grid");
  }

  double cdf(double x) const {
    const Index n = rho_.size();
    const double s = (x - x_min_) / dx_;
    if (s <= 0.0) return 0.0;
    if (s >= static_cast<double>(n)) return 1.0;
    const Index j = std::min<Index>(static_cast<Index>(s), n - 1);
    const double t = s - static_cast<double>(j);
    const double partial = dx_ * (t * rho_[j] + 0.5 * t * t * (next(j) - rho_[j]));
    return (cumulative_[static_cast<std::size_t>(j)] + partial) / mass_;
  }

  double inverse(double u) const {
    const double target = u * mass_;
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
    const auto cell = std::clamp<std::ptrdiff_t>(std::distance(cumulative_.begin(), it) - 1, 0,
                                                 static_cast<std::ptrdiff_t>(rho_.size()) - 1);
    const Index j = static_cast<Index>(cell);
    const double q = (target - cumulative_[static_cast<std::size_t>(cell)]) / dx_;
    const double a = 0.5 * (next(j) - rho_[j]);
    const double b = rho_[j];
    double t = 0.0;
    const double disc = b * b + 4.0 * a * q;
    if (b + std::sqrt(std::max(disc, 0.0)) > 0.0) {
      t = 2.0 * q / (b + std::sqrt(std::max(disc, 0.0)));
    }
    return x_min_ + dx_ * (static_cast<double>(j) + std::clamp(t, 0.0, 1.0));
  }

 private:
  double next(Index j) const { return rho_[(j + 1) % rho_.size()]; }

  double x_min_;
  double dx_;
  RealField rho_;
  std::vector<double> cumulative_;
  double mass_ = 0.0;
};

double wrap_position(double x, const Grid& grid) {
  const double length = grid.length();
  double y = std::fmod(x - grid.x_min, length);
  if (y < 0.0) y += length;
  return grid.x_min + y;
}

// Catmull-Rom interpolation of a periodic grid field; empty when the stencil
// touches a masked point.
std::optional<double> interpolate(const MaskedField& f, const Grid& grid, double x) {
  const Index n = f.values.size();
  const double s = (wrap_position(x, grid) - grid.x_min) / grid.dx();
  const Index j = std::min<Index>(static_cast<Index>(std::floor(s)), n - 1);
  const double t = s - static_cast<double>(j);
  double p[4];
  for (Index k = 0; k < 4; ++k) {
    const Index idx = ((j - 1 + k) % n + n) % n;
    if (f.mask[idx]) return std::nullopt;
    p[k] = f.values[idx];
  }
  return 0.5 * (2.0 * p[1] + (p[2] - p[0]) * t + (2.0 * p[0] - 5.0 * p[1] + 4.0 * p[2] - p[3]) * t * t +
                (3.0 * (p[1] - p[2]) + p[3] - p[0]) * t * t * t);
}

void freeze(TrajectoryEnsemble& e, std::size_t i) {
  if (!e.frozen[i]) {
    e.frozen[i] = 1;
    ++e.node_collisions;
  }
}

}  // namespace

TrajectoryEnsemble sample_ensemble(const PolarField& p, std::size_t count, RngSeed seed) {
  if (count < 1) throw std::invalid_argument("an ensemble needs at least one trajectory");
  const GridDensity density(p);
  TrajectoryEnsemble e;
  e.time = p.time;
  e.positions.reserve(count);
  UniformStream stream(seed);
  for (std::size_t i = 0; i < count; ++i) e.positions.push_back(density.inverse(stream.next()));
  e.frozen.assign(count, 0);
  return e;
}

TrajectoryEnsemble advect_trajectories(const TrajectoryEnsemble& e, const PolarField& p) {
  const MaskedField v = velocity_field(p);
  const Grid& grid = p.grid;
  TrajectoryEnsemble out = e;
  out.frozen.resize(out.positions.size(), 0);
  for (std::size_t i = 0; i < out.positions.size(); ++i) {
    if (out.frozen[i]) continue;
    const double x = out.positions[i];
    const auto k1 = interpolate(v, grid, x);
    const auto k2 = k1 ? interpolate(v, grid, x + 0.5 * grid.dt * *k1) : std::nullopt;
    if (!k2) {
      freeze(out, i);
      continue;
    }
    out.positions[i] = wrap_position(x + grid.dt * *k2, grid);
  }
  out.time += grid.dt;
  return out;
}

TrajectoryEnsemble advect_trajectories(const TrajectoryEnsemble& e, const PolarField& now,
                                       const PolarField& next) {
  if (!(now.grid == next.grid)) throw std::invalid_argument("snapshots live on different grids");
  const double dt = next.time - now.time;
  if (!(dt > 0.0)) throw std::invalid_argument("snapshots must be in increasing time order");
  const MaskedField v0 = velocity_field(now);
  const MaskedField v1 = velocity_field(next);
  const Grid& grid = now.grid;
  TrajectoryEnsemble out = e;
  out.frozen.resize(out.positions.size(), 0);
  for (std::size_t i = 0; i < out.positions.size(); ++i) {
    if (out.frozen[i]) continue;
    const double x = out.positions[i];
    const auto k1 = interpolate(v0, grid, x);
    const auto k2 = k1 ? interpolate(v1, grid, x + dt * *k1) : std::nullopt;
    if (!k2) {
      freeze(out, i);
      continue;
    }
    out.positions[i] = wrap_position(x + 0.5 * dt * (*k1 + *k2), grid);
  }
  out.time = next.time;
  return out;
}

double ensemble_ks_distance(const TrajectoryEnsemble& e, const PolarField& p) {
  if (e.positions.empty()) throw std::invalid_argument("empty ensemble");
  const GridDensity density(p);
  std::vector<double> sorted = e.positions;
  std::sort(sorted.begin(), sorted.end());
  const double m = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = density.cdf(sorted[i]);
    d = std::max({d, static_cast<double>(i + 1) / m - f, f - static_cast<double>(i) / m});
  }
  return d;
}

}  // namespace bornlab::madelung
