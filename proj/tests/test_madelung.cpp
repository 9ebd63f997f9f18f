#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "bornlab/errors.hpp"
#include "bornlab/madelung.hpp"
#include "support.hpp"

using namespace bornlab;
using namespace bornlab::madelung;
using namespace std::complex_literals;

namespace {

constexpr double kPi = std::numbers::pi;

PolarField polar_from_amplitude(const Grid& grid, const RealField& R) {
  return decompose_polar({grid, R.cast<std::complex<double>>(), 0.0});
}

// Snapshots at steps n - 1 and n of a run.
std::pair<PolarField, PolarField> last_two(const Grid& grid, const Potential& v, WaveField w, int n) {
  SplitStepPropagator prop(grid, v);
  for (int i = 0; i < n - 1; ++i) prop.step(w);
  PolarField a = decompose_polar(w);
  prop.step(w);
  return {std::move(a), decompose_polar(w)};
}

double observed_order(double coarse, double fine) { return std::log2(coarse / fine); }

double position_variance(const WaveField& w) {
  const RealField x = w.grid.coordinates();
  const RealField rho = w.psi.abs2();
  const double mass = rho.sum();
  const double mean = (x * rho).sum() / mass;
  return ((x - mean).square() * rho).sum() / mass;
}

}  // namespace

TEST_CASE("Grid validation") {
  CHECK_NOTHROW(Grid{}.validate());
  CHECK_THROWS(Grid{-1, 1, 100, 0.01, 1, 1}.validate());
  CHECK_THROWS(Grid{-1, 1, 8, 0.01, 1, 1}.validate());
  CHECK_THROWS(Grid{1, -1, 64, 0.01, 1, 1}.validate());
  CHECK_THROWS(Grid{-1, 1, 64, 0.0, 1, 1}.validate());
  CHECK_THROWS(Grid{-1, 1, 64, 0.01, 0.0, 1}.validate());
  CHECK_THROWS(Grid{-1, 1, 64, 0.01, 1, -1}.validate());
  const Grid g{-2, 2, 16, 0.1, 1, 1};
  CHECK(g.dx() == 0.25);
  CHECK(g.coordinates()[0] == -2.0);
  CHECK(g.coordinates()[15] == 1.75);
  CHECK(g.wavenumbers()[1] == doctest::Approx(2 * kPi / 4));
  CHECK(g.wavenumbers()[15] == doctest::Approx(-2 * kPi / 4));
}

TEST_CASE("evolve_step: a plane wave only picks up the kinetic phase") {
  const Grid g{-10, 10, 256, 0.05, 1.3, 0.7};
  const WaveField w0 = plane_wave(g, 3);
  const double k = 2 * kPi * 3 / g.length();
  const WaveField w1 = evolve_step(w0, Potential::free_particle());
  const std::complex<double> phase = std::exp(-1i * g.hbar * k * k * g.dt / (2 * g.mass));
  CHECK((w1.psi - w0.psi * phase).abs().maxCoeff() < 1e-12);
  CHECK((w1.psi.abs() - 1.0).abs().maxCoeff() < 1e-12);
  CHECK(w1.time == doctest::Approx(g.dt));
}

TEST_CASE("evolve_step: free Gaussian spreading") {
  const Grid g{-60, 60, 2048, 0.02, 1, 1};
  const double sigma = 1.2;
  WaveField w = gaussian_packet(g, sigma, -5, 1.5);
  SplitStepPropagator prop(g, Potential::free_particle());
  for (int i = 0; i < 100; ++i) prop.step(w);
  const double t = 100 * g.dt;
  const double spread = g.hbar * t / (2 * g.mass * sigma * sigma);
  const double expected = sigma * sigma * (1 + spread * spread);
  CHECK(position_variance(w) == doctest::Approx(expected).epsilon(1e-3));
  CHECK(free_gaussian_variance(sigma, t, g.mass, g.hbar) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("evolve_step: unitarity") {
  const Grid g{-30, 30, 1024, 0.01, 1, 1};
  WaveField w = gaussian_packet(g, 1.0, 0, 2);
  SplitStepPropagator prop(g, Potential::harmonic(0.3));
  const double n0 = w.norm();
  double worst_step = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double before = w.norm();
    prop.step(w);
    worst_step = std::max(worst_step, std::abs(w.norm() - before) / before);
  }
  CHECK(worst_step < 1e-12);
  CHECK(std::abs(w.norm() - n0) / n0 < 1e-8);
  CHECK(w.time == doctest::Approx(100.0));
}

TEST_CASE("evolve_step: non-finite states are unstable") {
  const Grid g{-10, 10, 64, 0.01, 1, 1};
  WaveField w = gaussian_packet(g, 1.0, 0, 0);
  w.psi[10] = std::complex<double>(NAN, 0);
  SplitStepPropagator prop(g, Potential::free_particle());
  CHECK_THROWS_AS(prop.step(w), UnstableStep);
}

TEST_CASE("Potential kinds") {
  const Grid g{-4, 4, 64, 0.01, 2, 1};
  const RealField x = g.coordinates();
  CHECK(Potential::free_particle().sample(g).abs().maxCoeff() == 0.0);
  const RealField h = Potential::harmonic(1.5, 0.5).sample(g);
  CHECK(h[10] == doctest::Approx(0.5 * 2 * 2.25 * (x[10] - 0.5) * (x[10] - 0.5)));
  const RealField b = Potential::double_slit_barrier(5, 4, 0.5, 2).sample(g);
  CHECK(b[32] == 5.0);  // x = 0, between the openings
  CHECK(b[24] == 0.0);  // x = -1, inside an opening
  CHECK(b[0] == 0.0);
  CHECK(Potential::tabulated(RealField::Constant(64, 0.25)).sample(g)[7] == 0.25);
  CHECK_THROWS(Potential::tabulated(RealField::Constant(10, 0.25)).sample(g));
  CHECK(potential_kind_from_string(to_string(Potential::Kind::barrier_double_slit_1d)) ==
        Potential::Kind::barrier_double_slit_1d);
}

TEST_CASE("decompose_polar: plane wave and real states") {
  const Grid g{-5, 5, 128, 0.01, 1, 0.5};
  const PolarField p = decompose_polar(plane_wave(g, 4));
  const double k = 2 * kPi * 4 / g.length();
  const RealField x = g.coordinates();
  CHECK((p.R - 1.0).abs().maxCoeff() < 1e-14);
  CHECK(!p.node_mask.any());
  CHECK((p.S - p.S[0] - g.hbar * k * (x - x[0])).abs().maxCoeff() < 1e-10);

  const PolarField q = decompose_polar(gaussian_packet(g, 1.0, 0.3, 0.0));
  const double s0 = q.S[64];
  for (Eigen::Index j = 0; j < q.S.size(); ++j) {
    if (!q.node_mask[j]) CHECK(std::abs(q.S[j] - s0) < 1e-14);
  }
}

TEST_CASE("property: polar round trip off the node mask") {
  testing::for_all(30, 51, [](testing::Gen& gen) {
    const Grid g{-20, 20, 512, 0.01, 1, gen.uniform(0.3, 2)};
    const WaveField w = gaussian_packet(g, gen.uniform(0.5, 3), gen.uniform(-5, 5), gen.uniform(-4, 4));
    const PolarField p = decompose_polar(w);
    const ComplexField back = recompose(p);
    double worst = 0.0;
    for (Eigen::Index j = 0; j < back.size(); ++j) {
      if (!p.node_mask[j]) worst = std::max(worst, std::abs(back[j] - w.psi[j]));
    }
    CHECK(worst < 1e-10);
    CHECK((p.R >= 0.0).all());
  });
}

TEST_CASE("decompose_polar: nodes are masked and segments unwrap independently") {
  const Grid g{-kPi, kPi, 256, 0.01, 1, 1};
  const RealField x = g.coordinates();
  // sin(x) exp(3ix): nodes at x = -pi and 0 split the cell into two segments.
  const ComplexField psi = x.sin().cast<std::complex<double>>() * (3i * x.cast<std::complex<double>>()).exp();
  const PolarField p = decompose_polar({g, psi, 0.0});
  CHECK(p.node_mask[0]);
  CHECK(p.node_mask[128]);
  CHECK_FALSE(p.node_mask[64]);
  const MaskedField grad = action_gradient(p);
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if (!grad.mask[j]) CHECK(std::abs(grad.values[j] - 3.0) < 1e-9);
  }
}

TEST_CASE("quantum_potential: constant amplitude gives exactly zero") {
  const Grid g{-10, 10, 256, 0.01, 1, 1};
  for (double c : {0.8, 1.0 / 3.0, 7e-5, 123.456}) {
    const MaskedField q = quantum_potential(polar_from_amplitude(g, RealField::Constant(256, c)));
    CHECK(q.values.abs().maxCoeff() == 0.0);
  }
  const MaskedField q = quantum_potential(polar_from_amplitude(g, RealField::Constant(256, 0.8)));
  CHECK(q.values.abs().maxCoeff() == 0.0);
  CHECK(!q.mask.any());
}

TEST_CASE("quantum_potential: Gaussian oracle at fourth order") {
  const double s = 1.0, hbar = 0.9, mass = 1.7;
  auto max_error = [&](Eigen::Index points) {
    const Grid g{-20, 20, points, 0.01, mass, hbar};
    const RealField x = g.coordinates();
    const MaskedField q = quantum_potential(polar_from_amplitude(g, (-x.square() / (4 * s * s)).exp()));
    const RealField oracle =
        hbar * hbar / (2 * mass) * (1 / (2 * s * s) - x.square() / (4 * s * s * s * s));
    double worst = 0.0;
    for (Eigen::Index j = 0; j < points; ++j) {
      if (std::abs(x[j]) <= 4.0) worst = std::max(worst, std::abs(q.values[j] - oracle[j]));
    }
    return worst;
  };
  const double e1 = max_error(256), e2 = max_error(512), e3 = max_error(1024);
  CHECK(observed_order(e1, e2) == doctest::Approx(4.0).epsilon(0.125));
  CHECK(observed_order(e2, e3) == doctest::Approx(4.0).epsilon(0.125));
  CHECK(e3 < 1e-6);
}

TEST_CASE("residuals: plane wave is an exact solution") {
  const Grid g{-10, 10, 256, 0.05, 1, 1};
  const auto [a, b] = last_two(g, Potential::free_particle(), plane_wave(g, 5), 20);
  CHECK(hj_residual(a, b, Potential::free_particle()).max_abs() < 1e-8);
  CHECK(continuity_residual(a, b).max_abs() < 1e-10);
  const PolarField one[] = {a};
  CHECK_THROWS_AS(hj_residual(std::span<const PolarField>(one), Potential::free_particle()), InsufficientHistory);
  CHECK_THROWS_AS(continuity_residual(std::span<const PolarField>(one)), InsufficientHistory);
  const PolarField two[] = {a, b};
  CHECK(hj_residual(two, Potential::free_particle()).values.isApprox(
      hj_residual(a, b, Potential::free_particle()).values));
}

TEST_CASE("residuals: free Gaussian converges at second order in dt") {
  auto l2 = [](double dt) {
    const Grid g{-40, 40, 8192, dt, 1, 1};
    const auto [a, b] = last_two(g, Potential::free_particle(), gaussian_packet(g, 1, 0, 1),
                                 static_cast<int>(std::lround(1.0 / dt)));
    return std::pair{hj_residual(a, b, Potential::free_particle()).l2(), continuity_residual(a, b).l2()};
  };
  const auto r1 = l2(0.04), r2 = l2(0.02), r3 = l2(0.01);
  CHECK(std::abs(observed_order(r1.first, r2.first) - 2) < 0.5);
  CHECK(std::abs(observed_order(r2.first, r3.first) - 2) < 0.5);
  CHECK(std::abs(observed_order(r1.second, r2.second) - 2) < 0.5);
  CHECK(std::abs(observed_order(r2.second, r3.second) - 2) < 0.5);
}

TEST_CASE("residuals: free Gaussian converges at fourth order in dx") {
  auto l2 = [](Eigen::Index points) {
    const Grid g{-40, 40, points, 2.5e-4, 1, 1};
    const auto [a, b] = last_two(g, Potential::free_particle(), gaussian_packet(g, 1, 0, 1), 4000);
    return std::pair{hj_residual(a, b, Potential::free_particle()).l2(), continuity_residual(a, b).l2()};
  };
  const auto r1 = l2(512), r2 = l2(1024), r3 = l2(2048);
  CHECK(std::abs(observed_order(r1.first, r2.first) - 4) < 0.5);
  CHECK(std::abs(observed_order(r2.first, r3.first) - 4) < 0.5);
  CHECK(std::abs(observed_order(r1.second, r2.second) - 4) < 0.5);
  CHECK(std::abs(observed_order(r2.second, r3.second) - 4) < 0.5);
}

TEST_CASE("continuity residual: normalized free-Gaussian residual at default resolution") {
  const Grid g;
  const auto [a, b] = last_two(g, Potential::free_particle(), gaussian_packet(g, 1, 0, 1), 100);
  const MaskedField r = continuity_residual(a, b);
  const MaskedField density{b.R.square(), r.mask, g.dx()};
  CHECK(r.l2() / density.l2() < 1e-4);
}

TEST_CASE("continuity residual is linear in R^2") {
  const Grid g{-40, 40, 1024, 0.05, 1, 1};
  auto [a, b] = last_two(g, Potential::free_particle(), gaussian_packet(g, 1.5, 2, -1), 30);
  const MaskedField base = continuity_residual(a, b);
  // Size of the individual terms; the residual itself is their cancellation.
  const double terms = (b.R.square() - a.R.square()).abs().maxCoeff() / g.dt;
  // Even powers of two scale R exactly, so the residual scales exactly.
  for (auto [scale, tol] : {std::pair{4.0, 0.0}, {1.0 / 16.0, 0.0}, {7.3, 1e-12}, {1e-6, 1e-12}, {1e6, 1e-12}}) {
    CAPTURE(scale);
    PolarField a2 = a, b2 = b;
    a2.R *= std::sqrt(scale);
    b2.R *= std::sqrt(scale);
    const MaskedField scaled = continuity_residual(a2, b2);
    CHECK((scaled.mask == base.mask).all());
    CHECK((scaled.values - scale * base.values).abs().maxCoeff() <= tol * scale * terms);
  }
}

TEST_CASE("hj residual: harmonic ground state is stationary") {
  const Grid g{-12, 12, 2048, 1e-4, 1, 1};
  const Potential v = Potential::harmonic(1.0);
  const auto [a, b] = last_two(g, v, harmonic_ground_state(g, 1.0), 10);
  const MaskedField r = hj_residual(a, b, v);
  const RealField x = g.coordinates();
  double interior = 0.0;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if (std::abs(x[j]) <= 4.0) interior = std::max(interior, std::abs(r.values[j]));
  }
  CHECK(interior < 1e-6);
  CHECK(r.weighted_l2(a.R.square()) < 1e-6);
  // dS/dt = -E = -hbar omega / 2.
  CHECK(b.S[1024] - a.S[1024] == doctest::Approx(-0.5 * g.dt).epsilon(1e-6));
}

TEST_CASE("trajectories: plane wave moves rigidly") {
  const Grid g{-10, 10, 256, 0.05, 0.8, 1.1};
  const double k = 2 * kPi * 2 / g.length();
  const auto [a, b] = last_two(g, Potential::free_particle(), plane_wave(g, 2), 3);
  TrajectoryEnsemble e = sample_ensemble(a, 200, RngSeed{4});
  const TrajectoryEnsemble frozen_field = advect_trajectories(e, a);
  const TrajectoryEnsemble heun = advect_trajectories(e, a, b);
  for (std::size_t i = 0; i < e.positions.size(); ++i) {
    double expected = e.positions[i] + g.hbar * k / g.mass * g.dt;
    if (expected >= g.x_max) expected -= g.length();
    CHECK(frozen_field.positions[i] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(heun.positions[i] == doctest::Approx(expected).epsilon(1e-12));
  }
  CHECK(heun.time == doctest::Approx(b.time));
  CHECK(heun.node_collisions == 0);
}

TEST_CASE("trajectories: ground state does not move") {
  const Grid g{-10, 10, 512, 0.01, 1, 1};
  const Potential v = Potential::harmonic(1.0);
  const PolarField start = decompose_polar(harmonic_ground_state(g, 1.0));
  const TrajectoryEnsemble e = sample_ensemble(start, 500, RngSeed{9});
  CHECK(advect_trajectories(e, start).positions == e.positions);
  const MaskedField v0 = velocity_field(start);
  CHECK(v0.values.abs().maxCoeff() == 0.0);

  // The sampled Gaussian is not the exact discrete eigenstate, so later
  // snapshots carry a small breathing velocity set by the discretization.
  const auto [a, b] = last_two(g, v, harmonic_ground_state(g, 1.0), 5);
  const TrajectoryEnsemble moved = advect_trajectories(e, a, b);
  for (std::size_t i = 0; i < e.positions.size(); ++i) {
    CHECK(std::abs(moved.positions[i] - e.positions[i]) < 1e-7);
  }
  const MaskedField vel = velocity_field(b);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < vel.values.size(); ++j) {
    if (!vel.mask[j]) worst = std::max(worst, std::abs(vel.values[j]));
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("trajectories: nodes freeze and are counted") {
  const Grid g{-kPi, kPi, 256, 0.01, 1, 1};
  const RealField x = g.coordinates();
  const ComplexField psi = x.sin().cast<std::complex<double>>() * (2i * x.cast<std::complex<double>>()).exp();
  const PolarField p = decompose_polar({g, psi, 0.0});
  TrajectoryEnsemble e;
  e.positions = {0.0, 1.0, 0.01, -2.0};
  e.frozen.assign(4, 0);
  const TrajectoryEnsemble once = advect_trajectories(e, p);
  CHECK(once.node_collisions == 2);
  CHECK(once.frozen == std::vector<std::uint8_t>{1, 0, 1, 0});
  CHECK(once.positions[0] == 0.0);
  CHECK(once.positions[1] == doctest::Approx(1.0 + 2.0 * g.dt).epsilon(1e-9));
  const TrajectoryEnsemble twice = advect_trajectories(once, p);
  CHECK(twice.node_collisions == 2);
}

TEST_CASE("trajectories: ensemble follows R^2") {
  const Grid g{-40, 40, 1024, 0.05, 1, 1};
  WaveField w = gaussian_packet(g, 1.0, 0.0, 1.0);
  SplitStepPropagator prop(g, Potential::free_particle());
  PolarField now = decompose_polar(w);
  const std::size_t M = 10000;
  TrajectoryEnsemble e = sample_ensemble(now, M, RngSeed{21});
  CHECK(ensemble_ks_distance(e, now) < 2 / std::sqrt(double(M)));
  for (int step = 0; step < 50; ++step) {
    prop.step(w);
    PolarField next = decompose_polar(w);
    e = advect_trajectories(e, now, next);
    now = std::move(next);
  }
  CHECK(ensemble_ks_distance(e, now) < 2 / std::sqrt(double(M)));
  CHECK(e.node_collisions == 0);
}

TEST_CASE("classicality_check") {
  const Grid g{-20, 20, 512, 0.01, 1, 1};
  CHECK(classicality_check(decompose_polar(plane_wave(g, 3)), 1e-6).classical);
  const auto gauss = classicality_check(decompose_polar(gaussian_packet(g, 2.0, 0, 0)), 1e-2);
  CHECK_FALSE(gauss.classical);
  CHECK(gauss.measure > 1.0);
  CHECK(gauss.diagnostic.size() == 512);
}

TEST_CASE("classicality_check: threshold in the ripple amplitude") {
  // R = 1 + eps cos(2 pi x / L): max |R''| L^2 / max R = eps (2 pi)^2 / (1 + eps).
  const Grid g{-20, 20, 512, 0.01, 1, 1};
  const RealField x = g.coordinates();
  const double tol = 1e-3;
  const double threshold = tol / ((2 * kPi) * (2 * kPi) - tol);
  double previous = -1.0;
  bool was_classical = true;
  for (double eps = 0.5 * threshold; eps <= 2 * threshold; eps *= 1.01) {
    const auto r = classicality_check(polar_from_amplitude(g, 1.0 + eps * (2 * kPi * x / g.length()).cos()), tol);
    CHECK(r.measure > previous);
    previous = r.measure;
    if (!r.classical) was_classical = false;
    CHECK(r.classical == was_classical);
    if (eps < 0.99 * threshold) CHECK(r.classical);
    if (eps > 1.01 * threshold) CHECK_FALSE(r.classical);
  }
}

TEST_CASE("snapshot CSV files") {
  testing::TempDir dir;
  const Grid g{-2, 2, 16, 0.01, 1, 1};
  const WaveField w = gaussian_packet(g, 0.5, 0, 1);
  write_wave_csv(dir / "w.csv", w);
  write_polar_csv(dir / "p.csv", decompose_polar(w));
  TrajectoryEnsemble e;
  e.positions = {0.5, -0.25};
  e.frozen = {0, 0};
  write_trajectories_csv(dir / "t.csv", e);
  auto lines = [](const std::string& s) { return std::count(s.begin(), s.end(), '\n'); };
  const std::string ws = testing::read_file(dir / "w.csv");
  const std::string ps = testing::read_file(dir / "p.csv");
  const std::string ts = testing::read_file(dir / "t.csv");
  CHECK(ws.rfind("x,re_psi,im_psi\n", 0) == 0);
  CHECK(ps.rfind("x,R,S,node_mask\n", 0) == 0);
  CHECK(ts == "index,x\n0,0.5\n1,-0.25\n");
  CHECK(lines(ws) == 17);
  CHECK(lines(ps) == 17);
}
