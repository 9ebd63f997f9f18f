#ifndef BORNLAB_QUADRATURE_HPP
#define BORNLAB_QUADRATURE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "bornlab/density_model.hpp"
#include "bornlab/errors.hpp"
#include "bornlab/interval.hpp"

namespace bornlab {

struct QuadratureConfig {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  int max_refinement_depth = 60;

  void validate() const {
    if (!(rel_tol > 0.0)) throw std::invalid_argument("quadrature rel_tol must be > 0");
    if (!(abs_tol >= 0.0)) throw std::invalid_argument("quadrature abs_tol must be >= 0");
    if (max_refinement_depth < 1) {
      throw std::invalid_argument("quadrature max_refinement_depth must be >= 1");
    }
  }
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15 tables).
template <typename Scalar>
struct GaussKronrod15 {
  static constexpr std::array<Scalar, 8> nodes{
      Scalar(0.991455371120812639206854697526329L), Scalar(0.949107912342758524526189684047851L),
      Scalar(0.864864423359769072789712788640926L), Scalar(0.741531185599394439863864773280788L),
      Scalar(0.586087235467691130294144845693013L), Scalar(0.405845151377397166906606412076961L),
      Scalar(0.207784955007898467600689403773245L), Scalar(0.0L)};
  static constexpr std::array<Scalar, 8> kronrod_weights{
      Scalar(0.022935322010529224963732008058970L), Scalar(0.063092092629978553290700663189204L),
      Scalar(0.104790010322250183839876322541518L), Scalar(0.140653259715525918745189590510238L),
      Scalar(0.169004726639267902826583426598550L), Scalar(0.190350578064785409913256402421014L),
      Scalar(0.204432940075298892414161999234649L), Scalar(0.209482141084727828012999174891714L)};
  // Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
  static constexpr std::array<Scalar, 4> gauss_weights{
      Scalar(0.129484966168869693270611432679082L), Scalar(0.279705391489276667901467771423780L),
      Scalar(0.381830050505118944950369775488975L), Scalar(0.417959183673469387755102040816327L)};
};

template <typename Scalar>
struct Panel {
  Scalar lo;
  Scalar hi;
  Scalar estimate;
  Scalar error;
  Scalar magnitude;  // integral of |f|, for the round-off floor
  int depth;

  bool operator<(const Panel& other) const { return error < other.error; }
};

template <typename Scalar, typename Func>
Panel<Scalar> gauss_kronrod_panel(Func& f, Scalar lo, Scalar hi, int depth) {
  using Rule = GaussKronrod15<Scalar>;
  const Scalar center = Scalar(0.5) * (lo + hi);
  const Scalar half = Scalar(0.5) * (hi - lo);

  const Scalar fc = static_cast<Scalar>(f(center));
  Scalar kronrod = Rule::kronrod_weights[7] * fc;
  Scalar gauss = Rule::gauss_weights[3] * fc;
  Scalar magnitude = Rule::kronrod_weights[7] * std::abs(fc);
  for (std::size_t i = 0; i < 7; ++i) {
    const Scalar dx = half * Rule::nodes[i];
    const Scalar f1 = static_cast<Scalar>(f(center - dx));
    const Scalar f2 = static_cast<Scalar>(f(center + dx));
    kronrod += Rule::kronrod_weights[i] * (f1 + f2);
    magnitude += Rule::kronrod_weights[i] * (std::abs(f1) + std::abs(f2));
    if (i % 2 == 1) gauss += Rule::gauss_weights[i / 2] * (f1 + f2);
  }
  if (!std::isfinite(kronrod)) {
    throw NonConvergence("integrand is not finite on [" + std::to_string(double(lo)) + ", " +
                         std::to_string(double(hi)) + "]");
  }
  return {lo, hi, kronrod * half, std::abs((kronrod - gauss) * half), magnitude * std::abs(half),
          depth};
}

}  // namespace detail

/**
 * Globally adaptive Gauss-Kronrod (7/15) integration of `f` over `iv`.
 *
 * The interval is first cut at every point of `breakpoints` lying inside it;
 * the panel with the largest error estimate is then bisected until the
 * summed estimate meets max(abs_tol, rel_tol * |I|). Throws NonConvergence
 * when a panel that still needs refinement sits at `max_refinement_depth`.
 */
template <typename Scalar = double, typename Func>
Scalar integrate(Func&& f, const Interval& iv, const QuadratureConfig& cfg = {},
                 std::span<const double> breakpoints = {}) {
  iv.validate();
  cfg.validate();
  using detail::Panel;

  std::vector<Panel<Scalar>> storage;
  storage.reserve(breakpoints.size() + 16);
  Scalar left = iv.lo;
  for (double b : breakpoints) {
    if (b <= left || b >= iv.hi) continue;
    storage.push_back(detail::gauss_kronrod_panel<Scalar>(f, left, Scalar(b), 0));
    left = b;
  }
  storage.push_back(detail::gauss_kronrod_panel<Scalar>(f, left, Scalar(iv.hi), 0));

  std::vector<Panel<Scalar>> heap = std::move(storage);
  std::make_heap(heap.begin(), heap.end());
  constexpr Scalar eps = std::numeric_limits<Scalar>::epsilon();

  auto totals = [&heap]() {
    Scalar sum = 0, err = 0;
    for (const auto& p : heap) {
      sum += p.estimate;
      err += p.error;
    }
    return std::pair{sum, err};
  };

  auto [sum, err] = totals();
  std::size_t splits = 0;
  while (err > std::max<Scalar>(cfg.abs_tol, cfg.rel_tol * std::abs(sum))) {
    std::pop_heap(heap.begin(), heap.end());
    const Panel<Scalar> worst = heap.back();
    // Below the round-off floor further bisection cannot reduce the error.
    if (worst.error <= 50 * eps * worst.magnitude) {
      std::push_heap(heap.begin(), heap.end());
      break;
    }
    if (worst.depth >= cfg.max_refinement_depth) {
      throw NonConvergence("quadrature refinement depth " +
                           std::to_string(cfg.max_refinement_depth) + " exhausted near [" +
                           std::to_string(double(worst.lo)) + ", " +
                           std::to_string(double(worst.hi)) + "]");
    }
    const Scalar mid = Scalar(0.5) * (worst.lo + worst.hi);
    const auto left_half = detail::gauss_kronrod_panel<Scalar>(f, worst.lo, mid, worst.depth + 1);
    const auto right_half = detail::gauss_kronrod_panel<Scalar>(f, mid, worst.hi, worst.depth + 1);
    heap.back() = left_half;
    std::push_heap(heap.begin(), heap.end());
    heap.push_back(right_half);
    std::push_heap(heap.begin(), heap.end());
    sum += left_half.estimate + right_half.estimate - worst.estimate;
    err += left_half.error + right_half.error - worst.error;
    // Running sums drift; refresh them periodically.
    if (++splits % 64 == 0) std::tie(sum, err) = totals();
  }
  return totals().first;
}

/// Integrates a density over `iv`, cutting at its zeros and kinks.
template <typename Scalar = double, typename Func>
Scalar integrate_density(const DensityModel& d, Func&& weight, const Interval& iv,
                         const QuadratureConfig& cfg = {}, std::vector<double> extra = {}) {
  std::vector<double> cuts = d.breakpoints_in(iv);
  for (double x : extra) {
    if (x > iv.lo && x < iv.hi) cuts.push_back(x);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  return integrate<Scalar>([&](double t) { return weight(t) * d(t); }, iv, cfg, cuts);
}

/**
 * Raw central moment: the integral of t^k d(t) (or |t|^k d(t)) over `iv`.
 *
 * `t` is the coordinate of `d` itself; the caller is responsible for having
 * placed the origin at the distribution center (see DensityModel::centered).
 * No normalization by the mass is applied.
 */
inline double central_moment(const DensityModel& d, int k, bool absolute, const Interval& iv,
                             const QuadratureConfig& cfg = {}) {
  if (k != 2 && k != 3) throw std::invalid_argument("central_moment supports k = 2 or 3");
  return integrate_density(
      d,
      [k, absolute](double t) {
        const double base = absolute ? std::abs(t) : t;
        return k == 2 ? base * base : base * base * base;
      },
      iv, cfg, {0.0});
}

}  // namespace bornlab

#endif  // BORNLAB_QUADRATURE_HPP
