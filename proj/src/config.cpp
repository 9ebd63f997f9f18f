#include "bornlab/config.hpp"

#include <json.hpp>

#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>

#include "bornlab/errors.hpp"

namespace bornlab {

namespace {

using Json = nlohmann::json;

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

void allow_only(const Json& obj, const std::string& prefix,
                std::initializer_list<std::string_view> keys) {
  if (!obj.is_object()) throw ConfigError(prefix.empty() ? "<root>" : prefix, "must be an object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (auto k : keys) known = known || item.key() == k;
    if (!known) throw ConfigError(join(prefix, item.key()), "unknown key");
  }
}

double number(const Json& obj, const std::string& prefix, const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(join(prefix, key), "must be a number");
  return v.get<double>();
}

std::int64_t integer(const Json& obj, const std::string& prefix, const std::string& key,
                     std::int64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(join(prefix, key), "must be an integer");
  return v.get<std::int64_t>();
}

std::string text(const Json& obj, const std::string& prefix, const std::string& key,
                 const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(join(prefix, key), "must be a string");
  return v.get<std::string>();
}

template <typename T>
std::vector<T> integer_list(const Json& obj, const std::string& key) {
  const auto& v = obj.at(key);
  if (!v.is_array()) throw ConfigError(key, "must be an array of integers");
  std::vector<T> out;
  for (const auto& item : v) {
    if (!item.is_number_integer()) throw ConfigError(key, "must be an array of integers");
    if constexpr (std::is_unsigned_v<T>) {
      if (!item.is_number_unsigned()) throw ConfigError(key, "must hold non-negative integers");
    }
    out.push_back(item.get<T>());
  }
  return out;
}

// Runs `fn`, translating library validation failures into a ConfigError on `key`.
template <typename Fn>
void checked(const std::string& key, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(key, e.what());
  }
}

Interval interval_from(const Json& obj, const std::string& key, Interval fallback) {
  allow_only(obj, key, {"a_mm", "b_mm"});
  Interval iv{number(obj, key, "a_mm", fallback.lo), number(obj, key, "b_mm", fallback.hi)};
  checked(key, [&] { iv.validate(); });
  return iv;
}

void read_geometry(const Json& g, SlitGeometry& geo) {
  const std::string p = "geometry";
  allow_only(g, p, {"w_nm", "d_nm", "L_mm", "lambda_pm", "mu_mm", "I0"});
  geo.slit_width_nm = number(g, p, "w_nm", geo.slit_width_nm);
  geo.slit_separation_nm = number(g, p, "d_nm", geo.slit_separation_nm);
  geo.screen_distance_mm = number(g, p, "L_mm", geo.screen_distance_mm);
  geo.wavelength_pm = number(g, p, "lambda_pm", geo.wavelength_pm);
  geo.center_mm = number(g, p, "mu_mm", geo.center_mm);
  geo.peak_height = number(g, p, "I0", geo.peak_height);
  checked(p, [&] { geo.validate(); });
}

madelung::Potential read_potential(const Json& v) {
  const std::string p = "madelung.potential";
  allow_only(v, p,
             {"kind", "omega", "center", "height", "thickness", "slit_width", "slit_separation",
              "values"});
  madelung::Potential out;
  checked(join(p, "kind"), [&] { out.kind = madelung::potential_kind_from_string(text(v, p, "kind", "free")); });
  out.omega = number(v, p, "omega", out.omega);
  out.center = number(v, p, "center", out.center);
  out.height = number(v, p, "height", out.height);
  out.thickness = number(v, p, "thickness", out.thickness);
  out.slit_width = number(v, p, "slit_width", out.slit_width);
  out.slit_separation = number(v, p, "slit_separation", out.slit_separation);
  if (v.contains("values")) {
    const auto& values = v.at("values");
    if (!values.is_array()) throw ConfigError(join(p, "values"), "must be an array of numbers");
    out.table.resize(static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!values[i].is_number()) throw ConfigError(join(p, "values"), "must be an array of numbers");
      out.table[static_cast<Eigen::Index>(i)] = values[i].get<double>();
    }
  }
  if (out.kind == madelung::Potential::Kind::barrier_double_slit_1d) {
    checked(p, [&] {
      out = madelung::Potential::double_slit_barrier(out.height, out.thickness, out.slit_width,
                                                     out.slit_separation, out.center);
    });
  }
  return out;
}

void read_madelung(const Json& m, MadelungSetup& setup) {
  const std::string p = "madelung";
  allow_only(m, p, {"preset", "grid", "plane_wave", "packet", "harmonic", "potential", "node_threshold"});
  checked(join(p, "preset"), [&] {
    setup.preset = preset_from_string(text(m, p, "preset", std::string(to_string(setup.preset))));
  });
  if (m.contains("grid")) {
    const std::string gp = "madelung.grid";
    const auto& g = m.at("grid");
    allow_only(g, gp, {"x_min", "x_max", "points", "dt", "mass", "hbar"});
    setup.grid.x_min = number(g, gp, "x_min", setup.grid.x_min);
    setup.grid.x_max = number(g, gp, "x_max", setup.grid.x_max);
    setup.grid.points = integer(g, gp, "points", setup.grid.points);
    setup.grid.dt = number(g, gp, "dt", setup.grid.dt);
    setup.grid.mass = number(g, gp, "mass", setup.grid.mass);
    setup.grid.hbar = number(g, gp, "hbar", setup.grid.hbar);
  }
  checked("madelung.grid", [&] { setup.grid.validate(); });
  if (m.contains("plane_wave")) {
    const std::string pp = "madelung.plane_wave";
    const auto& w = m.at("plane_wave");
    allow_only(w, pp, {"mode", "amplitude"});
    setup.mode = static_cast<int>(integer(w, pp, "mode", setup.mode));
    setup.amplitude = number(w, pp, "amplitude", setup.amplitude);
  }
  if (m.contains("packet")) {
    const std::string pp = "madelung.packet";
    const auto& w = m.at("packet");
    allow_only(w, pp, {"sigma", "x0", "k0"});
    setup.sigma = number(w, pp, "sigma", setup.sigma);
    setup.x0 = number(w, pp, "x0", setup.x0);
    setup.k0 = number(w, pp, "k0", setup.k0);
    if (!(setup.sigma > 0.0)) throw ConfigError(join(pp, "sigma"), "must be positive");
  }
  if (m.contains("harmonic")) {
    const std::string pp = "madelung.harmonic";
    const auto& w = m.at("harmonic");
    allow_only(w, pp, {"omega", "center"});
    setup.omega = number(w, pp, "omega", setup.omega);
    setup.center = number(w, pp, "center", setup.center);
    if (!(setup.omega > 0.0)) throw ConfigError(join(pp, "omega"), "must be positive");
  }
  if (m.contains("potential")) setup.potential = read_potential(m.at("potential"));
  setup.node_threshold = number(m, p, "node_threshold", setup.node_threshold);
  if (!(setup.node_threshold > 0.0 && setup.node_threshold < 1.0)) {
    throw ConfigError(join(p, "node_threshold"), "must lie in (0, 1)");
  }
}

}  // namespace

std::string_view to_string(MadelungSetup::Preset p) {
  switch (p) {
    case MadelungSetup::Preset::plane_wave:
      return "plane_wave";
    case MadelungSetup::Preset::free_gaussian:
      return "free_gaussian";
    case MadelungSetup::Preset::harmonic_ground:
      return "harmonic_ground";
    case MadelungSetup::Preset::double_slit:
      return "double_slit";
  }
  return "free_gaussian";
}

MadelungSetup::Preset preset_from_string(std::string_view s) {
  if (s == "plane_wave") return MadelungSetup::Preset::plane_wave;
  if (s == "free_gaussian") return MadelungSetup::Preset::free_gaussian;
  if (s == "harmonic_ground") return MadelungSetup::Preset::harmonic_ground;
  if (s == "double_slit") return MadelungSetup::Preset::double_slit;
  throw std::invalid_argument("unknown preset '" + std::string(s) + "'");
}

madelung::Potential MadelungSetup::effective_potential() const {
  if (potential) return *potential;
  if (preset == Preset::harmonic_ground) return madelung::Potential::harmonic(omega, center);
  return madelung::Potential::free_particle();
}

madelung::WaveField MadelungSetup::initial_state(const SlitGeometry& geometry) const {
  switch (preset) {
    case Preset::plane_wave:
      return madelung::plane_wave(grid, mode, amplitude);
    case Preset::free_gaussian:
      return madelung::gaussian_packet(grid, sigma, x0, k0);
    case Preset::harmonic_ground:
      return madelung::harmonic_ground_state(grid, omega, center);
    case Preset::double_slit:
      return madelung::double_slit_screen_state(grid, geometry);
  }
  return madelung::gaussian_packet(grid, sigma, x0, k0);
}

LabConfig parse_config(std::string_view json_text) {
  Json root;
  try {
    root = Json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  allow_only(root, "",
             {"geometry", "interval", "binning", "n_values", "seeds", "quadrature",
              "moment_interval", "variants", "madelung"});

  LabConfig cfg;
  ExperimentConfig& ex = cfg.experiment;
  if (root.contains("geometry")) read_geometry(root.at("geometry"), ex.geometry);
  if (root.contains("interval")) ex.interval = interval_from(root.at("interval"), "interval", ex.interval);
  if (root.contains("moment_interval")) {
    ex.moment_interval = interval_from(root.at("moment_interval"), "moment_interval", ex.interval);
  }
  if (root.contains("binning")) {
    const auto& b = root.at("binning");
    allow_only(b, "binning", {"bin_counts", "orientations"});
    if (b.contains("bin_counts")) {
      ex.bin_counts = integer_list<int>(b, "bin_counts");
      for (int c : ex.bin_counts) {
        if (c < 1) throw ConfigError("binning.bin_counts", "every bin count must be >= 1");
      }
      if (ex.bin_counts.empty()) throw ConfigError("binning.bin_counts", "must not be empty");
    }
    checked("binning.orientations", [&] {
      ex.orientations = orientations_from_string(text(b, "binning", "orientations", "both"));
    });
  }
  if (root.contains("n_values")) {
    ex.n_values = integer_list<std::int64_t>(root, "n_values");
    if (ex.n_values.empty()) throw ConfigError("n_values", "must not be empty");
    for (auto n : ex.n_values) {
      if (n < 1) throw ConfigError("n_values", "every N must be >= 1");
    }
  }
  if (root.contains("seeds")) {
    ex.seeds = integer_list<std::uint64_t>(root, "seeds");
    if (ex.seeds.empty()) throw ConfigError("seeds", "must not be empty");
  }
  if (root.contains("quadrature")) {
    const auto& q = root.at("quadrature");
    allow_only(q, "quadrature", {"rel_tol", "abs_tol", "max_refinement_depth"});
    ex.quadrature.rel_tol = number(q, "quadrature", "rel_tol", ex.quadrature.rel_tol);
    ex.quadrature.abs_tol = number(q, "quadrature", "abs_tol", ex.quadrature.abs_tol);
    ex.quadrature.max_refinement_depth = static_cast<int>(
        integer(q, "quadrature", "max_refinement_depth", ex.quadrature.max_refinement_depth));
    checked("quadrature", [&] { ex.quadrature.validate(); });
  }
  if (root.contains("variants")) {
    const auto& v = root.at("variants");
    allow_only(v, "variants", {"kinds", "lower_constant", "upper_factor"});
    if (v.contains("kinds")) {
      const auto& kinds = v.at("kinds");
      if (!kinds.is_array() || kinds.empty()) {
        throw ConfigError("variants.kinds", "must be a non-empty array of strings");
      }
      ex.variants.clear();
      for (const auto& k : kinds) {
        if (!k.is_string()) throw ConfigError("variants.kinds", "must hold strings");
        checked("variants.kinds", [&] {
          ex.variants.push_back(constant_variant_from_string(k.get<std::string>()));
        });
      }
    }
    ex.constants.lower = number(v, "variants", "lower_constant", ex.constants.lower);
    ex.constants.upper_factor = number(v, "variants", "upper_factor", ex.constants.upper_factor);
    if (!(ex.constants.lower > 0.0)) throw ConfigError("variants.lower_constant", "must be positive");
    if (!(ex.constants.upper_factor > 0.0)) {
      throw ConfigError("variants.upper_factor", "must be positive");
    }
  }
  if (root.contains("madelung")) read_madelung(root.at("madelung"), cfg.madelung);
  return cfg;
}

LabConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace bornlab
