#include "mrbv/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mrbv {
namespace {

constexpr double kTiny = 1e-14;

}  // namespace

PiecewiseLinearProfile::PiecewiseLinearProfile(std::vector<double> breaks,
                                               std::vector<double> left_values,
                                               std::vector<double> slopes)
    : breaks_(std::move(breaks)),
      left_values_(std::move(left_values)),
      slopes_(std::move(slopes)) {
  if (breaks_.size() < 2 || left_values_.size() + 1 != breaks_.size() ||
      slopes_.size() != left_values_.size()) {
    throw std::invalid_argument(
        "PiecewiseLinearProfile: m cells need m+1 breaks, m values, m slopes");
  }
  if (std::abs(breaks_.front()) > kTiny) {
    throw std::invalid_argument("PiecewiseLinearProfile: breaks must start at 0");
  }
  breaks_.front() = 0.0;
  for (std::size_t i = 0; i + 1 < breaks_.size(); ++i) {
    if (!(breaks_[i] < breaks_[i + 1])) {
      throw std::invalid_argument(
          "PiecewiseLinearProfile: breaks must be strictly increasing");
    }
  }
}

PiecewiseLinearProfile PiecewiseLinearProfile::constant(double horizon,
                                                        double value) {
  return PiecewiseLinearProfile({0.0, horizon}, {value}, {0.0});
}

PiecewiseLinearProfile PiecewiseLinearProfile::affine(double horizon,
                                                      double value0,
                                                      double slope) {
  return PiecewiseLinearProfile({0.0, horizon}, {value0}, {slope});
}

PiecewiseLinearProfile PiecewiseLinearProfile::step(
    double horizon, std::vector<double> switch_times,
    std::vector<double> values) {
  if (values.size() != switch_times.size() + 1) {
    throw std::invalid_argument(
        "PiecewiseLinearProfile::step: need one value per cell");
  }
  std::vector<double> breaks = {0.0};
  breaks.insert(breaks.end(), switch_times.begin(), switch_times.end());
  breaks.push_back(horizon);
  return PiecewiseLinearProfile(std::move(breaks), std::move(values),
                                std::vector<double>(values.size() + 0, 0.0));
}

double PiecewiseLinearProfile::value(double t, Side side) const {
  const double T = horizon();
  const double slack = 1e-12 * std::max(1.0, T);
  if (t < -slack || t > T + slack) {
    throw std::out_of_range("PiecewiseLinearProfile::value: time out of range");
  }
  t = std::clamp(t, 0.0, T);
  // Snap onto a break hit up to rounding, so grid nodes that were meant to
  // coincide with a coefficient switch are treated as exactly on it.
  auto ge = std::lower_bound(breaks_.begin(), breaks_.end(), t);
  if (ge != breaks_.end() && std::abs(*ge - t) <= slack) t = *ge;
  else if (ge != breaks_.begin() && std::abs(*(ge - 1) - t) <= slack) t = *(ge - 1);

  const std::size_t m = left_values_.size();
  std::size_t cell;
  if (side == Side::Left || t >= T) {
    // Cell whose closure ends at or contains t: last break strictly below t.
    auto it = std::lower_bound(breaks_.begin(), breaks_.end(), t);
    cell = (it == breaks_.begin())
               ? 0
               : std::min(static_cast<std::size_t>(it - breaks_.begin()) - 1,
                          m - 1);
  } else {
    // Right-continuous: last break at or below t.
    auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
    cell = std::min(static_cast<std::size_t>(it - breaks_.begin()) - 1, m - 1);
  }
  return left_values_[cell] + slopes_[cell] * (t - breaks_[cell]);
}

double PiecewiseLinearProfile::jump_at(std::size_t i) const {
  const double end_prev =
      left_values_[i - 1] + slopes_[i - 1] * (breaks_[i] - breaks_[i - 1]);
  return left_values_[i] - end_prev;
}

double PiecewiseLinearProfile::min_value() const {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < left_values_.size(); ++i) {
    const double len = breaks_[i + 1] - breaks_[i];
    m = std::min({m, left_values_[i], left_values_[i] + slopes_[i] * len});
  }
  return m;
}

double PiecewiseLinearProfile::max_value() const {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < left_values_.size(); ++i) {
    const double len = breaks_[i + 1] - breaks_[i];
    m = std::max({m, left_values_[i], left_values_[i] + slopes_[i] * len});
  }
  return m;
}

double PiecewiseLinearProfile::integral() const {
  double acc = 0.0;
  for (std::size_t i = 0; i < left_values_.size(); ++i) {
    const double len = breaks_[i + 1] - breaks_[i];
    acc += left_values_[i] * len + 0.5 * slopes_[i] * len * len;
  }
  return acc;
}

double PiecewiseLinearProfile::integral(double a, double b) const {
  if (!(a <= b)) {
    throw std::invalid_argument("PiecewiseLinearProfile::integral: a > b");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < left_values_.size(); ++i) {
    const double lo = std::max(a, breaks_[i]);
    const double hi = std::min(b, breaks_[i + 1]);
    if (hi <= lo) continue;
    const double mid_offset = 0.5 * (lo + hi) - breaks_[i];
    acc += (left_values_[i] + slopes_[i] * mid_offset) * (hi - lo);
  }
  return acc;
}

double PiecewiseLinearProfile::max_slope_abs() const {
  double m = 0.0;
  for (double s : slopes_) m = std::max(m, std::abs(s));
  return m;
}

bool PiecewiseLinearProfile::has_jumps() const {
  for (std::size_t i = 1; i + 1 < breaks_.size(); ++i) {
    if (std::abs(jump_at(i)) > kTiny) return true;
  }
  return false;
}

BVModulus PiecewiseLinearProfile::variation_modulus() const {
  std::vector<Jump> jumps;
  for (std::size_t i = 1; i + 1 < breaks_.size(); ++i) {
    const double d = std::abs(jump_at(i));
    if (d > kTiny) jumps.push_back({breaks_[i], d});
  }
  std::vector<double> values;
  values.reserve(slopes_.size());
  for (double s : slopes_) values.push_back(std::abs(s));
  return BVModulus(horizon(), 0.0, std::move(jumps), breaks_, std::move(values));
}

std::vector<double> PiecewiseLinearProfile::jump_times() const {
  std::vector<double> out;
  for (std::size_t i = 1; i + 1 < breaks_.size(); ++i) {
    if (std::abs(jump_at(i)) > kTiny) out.push_back(breaks_[i]);
  }
  return out;
}

}  // namespace mrbv
