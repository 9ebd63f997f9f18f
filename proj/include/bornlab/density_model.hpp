#ifndef BORNLAB_DENSITY_MODEL_HPP
#define BORNLAB_DENSITY_MODEL_HPP

#include <algorithm>
#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "bornlab/interval.hpp"

namespace bornlab {

/**
 * A non-negative, possibly unnormalized 1D intensity on a support interval.
 *
 * Besides the pointwise function a model carries two kinds of breakpoints
 * for the integrator: `analytic_zeros` (exact nulls, used to pre-subdivide
 * oscillatory integrands) and `kinks` (points where the function is only
 * continuous, e.g. knots of a piecewise-linear table). `center` is the
 * coordinate taken as the origin for central moments.
 */
class DensityModel {
 public:
  using Function = std::function<double(double)>;

  DensityModel(Function f, Interval support, std::vector<double> analytic_zeros = {},
               std::vector<double> kinks = {}, double center = 0.0)
      : f_(std::make_shared<const Function>(std::move(f))),
        support_(support),
        zeros_(std::move(analytic_zeros)),
        kinks_(std::move(kinks)),
        center_(center) {
    support_.validate();
    std::sort(zeros_.begin(), zeros_.end());
    std::sort(kinks_.begin(), kinks_.end());
  }

  double operator()(double t) const { return (*f_)(t); }
  double evaluate(double t) const { return (*f_)(t); }

  const Interval& support() const { return support_; }
  std::span<const double> analytic_zeros() const { return zeros_; }
  std::span<const double> kinks() const { return kinks_; }
  double center() const { return center_; }

  /// Zeros and kinks strictly inside `iv`, sorted and de-duplicated.
  std::vector<double> breakpoints_in(const Interval& iv) const {
    std::vector<double> out;
    for (auto list : {std::span<const double>(zeros_), std::span<const double>(kinks_)}) {
      for (double z : list) {
        if (z > iv.lo && z < iv.hi) out.push_back(z);
      }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  /// a·d, a > 0.
  DensityModel scaled(double a) const {
    auto f = f_;
    return DensityModel([f, a](double t) { return a * (*f)(t); }, support_, zeros_, kinks_,
                        center_);
  }

  /// The same intensity expressed in coordinates measured from `center()`.
  DensityModel centered() const {
    if (center_ == 0.0) return *this;
    auto f = f_;
    const double c = center_;
    auto shift = [c](std::vector<double> v) {
      for (double& x : v) x -= c;
      return v;
    };
    return DensityModel([f, c](double t) { return (*f)(t + c); },
                        Interval{support_.lo - c, support_.hi - c}, shift(zeros_), shift(kinks_),
                        0.0);
  }

  DensityModel with_center(double center) const {
    DensityModel copy = *this;
    copy.center_ = center;
    return copy;
  }

 private:
  std::shared_ptr<const Function> f_;
  Interval support_;
  std::vector<double> zeros_;
  std::vector<double> kinks_;
  double center_;
};

}  // namespace bornlab

#endif  // BORNLAB_DENSITY_MODEL_HPP
