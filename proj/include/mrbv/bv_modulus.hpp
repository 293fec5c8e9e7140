#pragma once

#include <memory>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mrbv/types.hpp"

namespace mrbv {

/// Non-decreasing bounded time modulus g on [0,T]: the common interface of
/// the exact jump-plus-density representation and its mollified version.
/// value() serves all three versions of g: Raw is the right-continuous
/// canonical one, Left/Right the one-sided limits with the end-point
/// conventions g+(T) = lim_{t->T-} g(t) and g-(0) = lim_{t->0+} g(t).
class TimeModulus {
 public:
  virtual ~TimeModulus() = default;
  virtual double horizon() const = 0;
  virtual double value(double t, Side side = Side::Raw) const = 0;
  /// Locations of atoms of mu_g; empty for smooth moduli.
  virtual std::vector<double> jump_times() const { return {}; }
  /// g(T) - g(0) of the raw version.
  double total_variation() const {
    return value(horizon(), Side::Raw) - value(0.0, Side::Raw);
  }
};

/// mu_g((a,b]) = g+(b) - g+(a). Requires 0 <= a < b <= T. Note that with the
/// paper-side convention g+(T) = lim_{t->T-} g(t), a jump placed exactly at
/// T carries no mu_g mass.
double stieltjes_measure(const TimeModulus& g, double a, double b);

class BVModulus;

/// factor * g (factor >= 0); scales base, jumps and density alike.
BVModulus scale_modulus(const BVModulus& g, double factor);
/// Pointwise sum of two moduli on the same horizon.
BVModulus add_moduli(const BVModulus& a, const BVModulus& b);

struct Jump {
  double time = 0.0;
  double size = 0.0;
};

/// Exact bounded-variation modulus: base value, finitely many upward jumps
/// in (0,T], and a piecewise-constant nonnegative density (the absolutely
/// continuous part). Cantor-type singular parts are out of scope.
class BVModulus final : public TimeModulus {
 public:
  /// density_breaks must start at 0 and end at horizon; density_values has
  /// one entry per density cell. Pass empty vectors for a purely atomic g.
  BVModulus(double horizon, double base, std::vector<Jump> jumps,
            std::vector<double> density_breaks, std::vector<double> density_values);

  static BVModulus constant(double horizon, double value);
  /// g(t) = base + slope * t.
  static BVModulus linear(double horizon, double base, double slope);

  double horizon() const override { return horizon_; }
  double value(double t, Side side = Side::Raw) const override;
  std::vector<double> jump_times() const override;

  const std::vector<Jump>& jumps() const { return jumps_; }
  const std::vector<double>& density_breaks() const { return density_breaks_; }
  const std::vector<double>& density_values() const { return density_values_; }
  double base() const { return base_; }

  /// All break points of the piecewise description (jumps and density cells).
  std::vector<double> break_points() const;

  nlohmann::json to_json() const;
  static BVModulus from_json(const nlohmann::json& j);

 private:
  double cumulative_density(double t) const;

  double horizon_;
  double base_;
  std::vector<Jump> jumps_;
  std::vector<double> density_breaks_;
  std::vector<double> density_values_;
  std::vector<double> density_cum_;  // integral of the density up to each break
};

/// The standard bump rho(t) = c * exp(-1/(1-t^2)) on (-1,1), scaled to
/// rho_n(t) = n * rho(n t) with support [-1/n, 1/n]; c normalizes the mass
/// to one. Kernel quadrature is composite Simpson with a fixed even number
/// of subintervals of the support.
class Mollifier {
 public:
  explicit Mollifier(int order, int subintervals = 512);

  int order() const { return order_; }
  int subintervals() const { return subintervals_; }
  double support_radius() const { return 1.0 / order_; }

  double base_kernel(double t) const;             // rho
  double kernel(double t) const;                  // rho_n
  /// Quadrature mass of rho_n over its support at the configured resolution.
  double mass() const;

 private:
  int order_;
  int subintervals_;
  double normalizer_;
};

namespace detail {

/// One node of a convolution rule: evaluate the convolved object at t - s
/// taking the one-sided limit `side`, weight already includes the kernel.
struct WeightedSample {
  double s = 0.0;
  double weight = 0.0;
  Side side = Side::Raw;
};

/// Piecewise composite-Simpson rule for integral of rho_n(s) * q(t - s) ds,
/// split so that no piece straddles a discontinuity of q. `splits` are the
/// time locations where q (extended constantly outside [0,T]) may break;
/// 0 and T are always added. Weights are normalized to unit total mass, so
/// a convolution with this rule is an exact convex combination.
std::vector<WeightedSample> convolution_rule(const Mollifier& moll, double t,
                                             const std::vector<double>& splits,
                                             double horizon, int subintervals);

double composite_simpson(const std::vector<double>& fvals, double a, double b);

}  // namespace detail

/// Smooth modulus g_n = rho_n * g with g extended by g(0) below 0 and by
/// g(T) above T. Evaluation is kernel quadrature split at the parent's break
/// points; construction verifies quadrature convergence on a probe set and
/// throws if the node count is too low.
class MollifiedModulus final : public TimeModulus {
 public:
  MollifiedModulus(std::shared_ptr<const BVModulus> parent, Mollifier moll);

  double horizon() const override;
  double value(double t, Side side = Side::Raw) const override;
  /// Evaluation without the [0,T] range check (the convolution is defined on
  /// all of R through the constant extension).
  double value_extended(double t) const;

  const Mollifier& mollifier() const { return moll_; }
  const BVModulus& parent() const { return *parent_; }

 private:
  double eval_with(double t, int subintervals) const;

  std::shared_ptr<const BVModulus> parent_;
  Mollifier moll_;
  std::vector<double> splits_;
};

MollifiedModulus mollify_modulus(const BVModulus& g, const Mollifier& moll);

/// (integral of g_n' over [0,T] by central difference quotients and
/// composite quadrature, total variation of g). The first component never
/// exceeds the second beyond quadrature tolerance.
std::pair<double, double> mollified_variation_bound(const BVModulus& g,
                                                    const Mollifier& moll);

}  // namespace mrbv
