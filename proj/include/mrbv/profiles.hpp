#pragma once

#include <vector>

#include "mrbv/bv_modulus.hpp"
#include "mrbv/types.hpp"

namespace mrbv {

/// Scalar time coefficient, piecewise linear with possible jumps at the cell
/// breaks: on cell [b_i, b_{i+1}) the value is left_value_i + slope_i (t-b_i).
/// Raw evaluation is right-continuous; Left/Right give the one-sided limits
/// with the same end-point conventions as the moduli. Covers every
/// coefficient family used by the built-in forms (constants, steps, affine
/// ramps) with exact integrals and an exact dominating variation modulus.
class PiecewiseLinearProfile {
 public:
  PiecewiseLinearProfile(std::vector<double> breaks,
                         std::vector<double> left_values,
                         std::vector<double> slopes);

  static PiecewiseLinearProfile constant(double horizon, double value);
  static PiecewiseLinearProfile affine(double horizon, double value0,
                                       double slope);
  /// Piecewise constant: switch_times are the interior break points, values
  /// has one entry per cell (switch_times.size() + 1 of them).
  static PiecewiseLinearProfile step(double horizon,
                                     std::vector<double> switch_times,
                                     std::vector<double> values);

  double horizon() const { return breaks_.back(); }
  double value(double t, Side side = Side::Raw) const;
  double min_value() const;
  double max_value() const;
  /// Exact integral over [0, horizon].
  double integral() const;
  double integral(double a, double b) const;
  /// Largest |slope| over the cells.
  double max_slope_abs() const;
  bool has_jumps() const;

  /// A non-decreasing g with |value(t) - value(s)| <= g(t) - g(s): jumps of
  /// size |value jump| at the discontinuities, density |slope|.
  BVModulus variation_modulus() const;

  const std::vector<double>& breaks() const { return breaks_; }
  std::vector<double> jump_times() const;

 private:
  double jump_at(std::size_t i) const;  // value(b_i, raw) - value(b_i, left)

  std::vector<double> breaks_;       // m+1 entries, 0 = b_0 < ... < b_m = T
  std::vector<double> left_values_;  // m entries
  std::vector<double> slopes_;       // m entries
};

}  // namespace mrbv
