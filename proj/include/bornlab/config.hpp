#ifndef BORNLAB_CONFIG_HPP
#define BORNLAB_CONFIG_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "bornlab/harness.hpp"
#include "bornlab/madelung.hpp"

namespace bornlab {

/// Initial state and potential for the Madelung pipeline.
struct MadelungSetup {
  enum class Preset { plane_wave, free_gaussian, harmonic_ground, double_slit };

  Preset preset = Preset::free_gaussian;
  madelung::Grid grid{-40.0, 40.0, 1024, 0.05, 1.0, 1.0};
  int mode = 4;  // plane wave: k = 2 pi mode / length
  double amplitude = 1.0;
  double sigma = 1.0;  // gaussian packet
  double x0 = 0.0;
  double k0 = 1.0;
  double omega = 1.0;  // harmonic
  double center = 0.0;
  std::optional<madelung::Potential> potential;
  double node_threshold = madelung::kNodeThreshold;

  /// The explicit potential if given, otherwise the preset's natural one.
  madelung::Potential effective_potential() const;
  madelung::WaveField initial_state(const SlitGeometry& geometry) const;
};

std::string_view to_string(MadelungSetup::Preset p);
MadelungSetup::Preset preset_from_string(std::string_view s);

/**
 * A complete lab configuration. JSON layout (every key optional):
 *
 *   geometry        {w_nm, d_nm, L_mm, lambda_pm, mu_mm, I0}
 *   interval        {a_mm, b_mm}
 *   binning         {bin_counts: [int], orientations: both|from_a|from_b}
 *   n_values        [int]
 *   seeds           [uint64]
 *   quadrature      {rel_tol, abs_tol, max_refinement_depth}
 *   moment_interval {a_mm, b_mm}
 *   variants        {kinds: [lower_bound_constant|plus_16_percent],
 *                    lower_constant, upper_factor}
 *   madelung        {preset, grid{x_min,x_max,points,dt,mass,hbar},
 *                    plane_wave{mode,amplitude}, packet{sigma,x0,k0},
 *                    harmonic{omega,center}, potential{kind,...}, node_threshold}
 *
 * Unknown keys are rejected; errors are ConfigError naming the dotted key.
 */
struct LabConfig {
  ExperimentConfig experiment;
  MadelungSetup madelung;
};

LabConfig parse_config(std::string_view json_text);
LabConfig load_config(const std::filesystem::path& path);

}  // namespace bornlab

#endif  // BORNLAB_CONFIG_HPP
