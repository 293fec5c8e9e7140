#include "mrbv/bv_modulus.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mrbv {
namespace {

constexpr double kRangeSlack = 1e-12;

double clamp_to_range(double t, double horizon, const char* what) {
  const double slack = kRangeSlack * std::max(1.0, horizon);
  if (t < -slack || t > horizon + slack) {
    throw std::out_of_range(std::string(what) + ": time " + std::to_string(t) +
                            " outside [0, " + std::to_string(horizon) + "]");
  }
  return std::clamp(t, 0.0, horizon);
}

}  // namespace

double stieltjes_measure(const TimeModulus& g, double a, double b) {
  if (!(a < b)) {
    throw std::invalid_argument("stieltjes_measure: requires a < b");
  }
  return g.value(b, Side::Right) - g.value(a, Side::Right);
}

BVModulus::BVModulus(double horizon, double base, std::vector<Jump> jumps,
                     std::vector<double> density_breaks,
                     std::vector<double> density_values)
    : horizon_(horizon),
      base_(base),
      jumps_(std::move(jumps)),
      density_breaks_(std::move(density_breaks)),
      density_values_(std::move(density_values)) {
  if (!(horizon_ > 0.0) || !std::isfinite(horizon_)) {
    throw std::invalid_argument("BVModulus: horizon must be positive and finite");
  }
  if (!std::isfinite(base_)) {
    throw std::invalid_argument("BVModulus: base must be finite");
  }
  double prev = 0.0;
  for (const Jump& j : jumps_) {
    if (!(j.time > prev) || j.time > horizon_ * (1.0 + kRangeSlack)) {
      throw std::invalid_argument(
          "BVModulus: jump times must be strictly increasing in (0, horizon]");
    }
    if (!(j.size > 0.0) || !std::isfinite(j.size)) {
      throw std::invalid_argument("BVModulus: jump sizes must be positive");
    }
    prev = j.time;
  }
  if (density_breaks_.empty()) {
    density_breaks_ = {0.0, horizon_};
    if (!density_values_.empty()) {
      throw std::invalid_argument("BVModulus: density values without breaks");
    }
    density_values_ = {0.0};
  }
  if (density_breaks_.size() < 2 ||
      density_values_.size() + 1 != density_breaks_.size()) {
    throw std::invalid_argument(
        "BVModulus: density needs k+1 breaks for k cell values");
  }
  const double snap = kRangeSlack * std::max(1.0, horizon_);
  if (std::abs(density_breaks_.front()) > snap ||
      std::abs(density_breaks_.back() - horizon_) > snap) {
    throw std::invalid_argument(
        "BVModulus: density breaks must span [0, horizon]");
  }
  density_breaks_.front() = 0.0;
  density_breaks_.back() = horizon_;
  for (std::size_t i = 0; i + 1 < density_breaks_.size(); ++i) {
    if (!(density_breaks_[i] < density_breaks_[i + 1])) {
      throw std::invalid_argument(
          "BVModulus: density breaks must be strictly increasing");
    }
  }
  for (double v : density_values_) {
    if (v < 0.0 || !std::isfinite(v)) {
      throw std::invalid_argument("BVModulus: density values must be >= 0");
    }
  }
  density_cum_.resize(density_breaks_.size());
  density_cum_[0] = 0.0;
  for (std::size_t i = 0; i + 1 < density_breaks_.size(); ++i) {
    density_cum_[i + 1] =
        density_cum_[i] +
        density_values_[i] * (density_breaks_[i + 1] - density_breaks_[i]);
  }
}

BVModulus BVModulus::constant(double horizon, double value) {
  return BVModulus(horizon, value, {}, {}, {});
}

BVModulus BVModulus::linear(double horizon, double base, double slope) {
  if (slope < 0.0) {
    throw std::invalid_argument("BVModulus::linear: slope must be >= 0");
  }
  return BVModulus(horizon, base, {}, {0.0, horizon}, {slope});
}

double BVModulus::cumulative_density(double t) const {
  auto it = std::upper_bound(density_breaks_.begin(), density_breaks_.end(), t);
  if (it == density_breaks_.begin()) return 0.0;
  const std::size_t cell = static_cast<std::size_t>(it - density_breaks_.begin()) - 1;
  if (cell + 1 >= density_breaks_.size()) return density_cum_.back();
  return density_cum_[cell] + density_values_[cell] * (t - density_breaks_[cell]);
}

double BVModulus::value(double t, Side side) const {
  t = clamp_to_range(t, horizon_, "BVModulus::value");
  // Snap onto a jump time hit up to rounding so grid nodes meant to coincide
  // with an atom are treated as exactly on it.
  const double slack = kRangeSlack * std::max(1.0, horizon_);
  for (const Jump& j : jumps_) {
    if (std::abs(j.time - t) <= slack) {
      t = j.time;
      break;
    }
    if (j.time > t) break;
  }
  // Atoms strictly below / at-or-below t; the density part is continuous so
  // the side only matters for the jump sum and the end-point conventions.
  double jump_sum_le = 0.0;
  double jump_sum_lt = 0.0;
  for (const Jump& j : jumps_) {
    if (j.time > t) break;
    jump_sum_le += j.size;
    if (j.time < t) jump_sum_lt += j.size;
  }
  const double cont = base_ + cumulative_density(t);
  switch (side) {
    case Side::Raw:
      return cont + jump_sum_le;
    case Side::Right:
      // g+(T) is the limit from the left by convention.
      if (t >= horizon_) return cont + jump_sum_lt;
      return cont + jump_sum_le;
    case Side::Left:
      return cont + jump_sum_lt;
  }
  return cont + jump_sum_le;
}

std::vector<double> BVModulus::jump_times() const {
  std::vector<double> out;
  out.reserve(jumps_.size());
  for (const Jump& j : jumps_) out.push_back(j.time);
  return out;
}

std::vector<double> BVModulus::break_points() const {
  std::vector<double> out = density_breaks_;
  for (const Jump& j : jumps_) out.push_back(j.time);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(),
                        [this](double a, double b) {
                          return std::abs(a - b) <=
                                 kRangeSlack * std::max(1.0, horizon_);
                        }),
            out.end());
  return out;
}

nlohmann::json BVModulus::to_json() const {
  nlohmann::json j;
  j["T"] = horizon_;
  j["base"] = base_;
  j["jumps"] = nlohmann::json::array();
  for (const Jump& jp : jumps_) {
    j["jumps"].push_back({jp.time, jp.size});
  }
  j["density"]["breaks"] = density_breaks_;
  j["density"]["values"] = density_values_;
  return j;
}

BVModulus BVModulus::from_json(const nlohmann::json& j) {
  try {
    const double horizon = j.at("T").get<double>();
    const double base = j.value("base", 0.0);
    std::vector<Jump> jumps;
    if (j.contains("jumps")) {
      for (const auto& e : j.at("jumps")) {
        if (!e.is_array() || e.size() != 2) {
          throw ConfigError("modulus.jumps", "each jump must be a [time, size] pair");
        }
        jumps.push_back({e[0].get<double>(), e[1].get<double>()});
      }
    }
    std::vector<double> breaks, values;
    if (j.contains("density")) {
      breaks = j.at("density").value("breaks", std::vector<double>{});
      values = j.at("density").value("values", std::vector<double>{});
    }
    return BVModulus(horizon, base, std::move(jumps), std::move(breaks),
                     std::move(values));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("modulus", e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError("modulus", e.what());
  }
}

BVModulus scale_modulus(const BVModulus& g, double factor) {
  if (factor < 0.0 || !std::isfinite(factor)) {
    throw std::invalid_argument("scale_modulus: factor must be >= 0");
  }
  std::vector<Jump> jumps;
  for (const Jump& j : g.jumps()) {
    if (j.size * factor > 0.0) jumps.push_back({j.time, j.size * factor});
  }
  std::vector<double> values;
  for (double v : g.density_values()) values.push_back(v * factor);
  return BVModulus(g.horizon(), g.base() * factor, std::move(jumps),
                   g.density_breaks(), std::move(values));
}

BVModulus add_moduli(const BVModulus& a, const BVModulus& b) {
  const double T = a.horizon();
  if (std::abs(b.horizon() - T) > 1e-12 * std::max(1.0, T)) {
    throw std::invalid_argument("add_moduli: horizons differ");
  }
  std::vector<Jump> jumps;
  {
    auto ita = a.jumps().begin();
    auto itb = b.jumps().begin();
    const double slack = 1e-12 * std::max(1.0, T);
    while (ita != a.jumps().end() || itb != b.jumps().end()) {
      if (ita != a.jumps().end() && itb != b.jumps().end() &&
          std::abs(ita->time - itb->time) <= slack) {
        jumps.push_back({ita->time, ita->size + itb->size});
        ++ita;
        ++itb;
      } else if (itb == b.jumps().end() ||
                 (ita != a.jumps().end() && ita->time < itb->time)) {
        jumps.push_back(*ita++);
      } else {
        jumps.push_back(*itb++);
      }
    }
  }
  std::vector<double> breaks = a.density_breaks();
  breaks.insert(breaks.end(), b.density_breaks().begin(), b.density_breaks().end());
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end(),
                           [T](double x, double y) {
                             return y - x <= 1e-12 * std::max(1.0, T);
                           }),
               breaks.end());
  auto density_at = [](const BVModulus& g, double t) {
    const auto& bk = g.density_breaks();
    auto it = std::upper_bound(bk.begin(), bk.end(), t);
    std::size_t i = static_cast<std::size_t>(it - bk.begin());
    i = (i == 0) ? 0 : std::min(i - 1, g.density_values().size() - 1);
    return g.density_values()[i];
  };
  std::vector<double> values;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double mid = 0.5 * (breaks[i] + breaks[i + 1]);
    values.push_back(density_at(a, mid) + density_at(b, mid));
  }
  return BVModulus(T, a.base() + b.base(), std::move(jumps), std::move(breaks),
                   std::move(values));
}

namespace {

double bump_unnormalized(double t) {
  if (std::abs(t) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - t * t));
}

// Mass of the unnormalized bump, computed once by a high-resolution rule so
// the configured node count only affects convolutions, not the kernel shape.
double bump_mass() {
  static const double mass = [] {
    const int m = 4096;
    std::vector<double> f(m + 1);
    for (int i = 0; i <= m; ++i) {
      f[static_cast<std::size_t>(i)] = bump_unnormalized(-1.0 + 2.0 * i / m);
    }
    return detail::composite_simpson(f, -1.0, 1.0);
  }();
  return mass;
}

}  // namespace

namespace detail {

double composite_simpson(const std::vector<double>& fvals, double a, double b) {
  const std::size_t n = fvals.size();
  if (n < 3 || n % 2 == 0) {
    throw std::invalid_argument("composite_simpson: need an odd number >= 3 of nodes");
  }
  const double h = (b - a) / static_cast<double>(n - 1);
  double sum = fvals.front() + fvals.back();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    sum += (i % 2 == 1 ? 4.0 : 2.0) * fvals[i];
  }
  return sum * h / 3.0;
}

std::vector<WeightedSample> convolution_rule(const Mollifier& moll, double t,
                                             const std::vector<double>& splits,
                                             double horizon, int subintervals) {
  const double r = moll.support_radius();
  // Piece boundaries in s-space: s = t - x for each discontinuity x of the
  // extended integrand, clipped to the kernel support.
  std::vector<double> cuts = {-r, r};
  auto add_cut = [&](double x) {
    const double s = t - x;
    if (s > -r + 1e-15 * r && s < r - 1e-15 * r) cuts.push_back(s);
  };
  add_cut(0.0);
  add_cut(horizon);
  for (double x : splits) add_cut(x);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [r](double a, double b) { return b - a <= 1e-14 * r; }),
             cuts.end());

  std::vector<WeightedSample> rule;
  double total = 0.0;
  for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
    const double lo = cuts[p];
    const double hi = cuts[p + 1];
    int m = static_cast<int>(
        std::ceil(subintervals * (hi - lo) / (2.0 * r)));
    m = std::max(2, m + (m % 2));
    const double h = (hi - lo) / m;
    for (int i = 0; i <= m; ++i) {
      const double s = (i == m) ? hi : lo + h * i;
      double w = (i == 0 || i == m) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      w *= h / 3.0 * moll.kernel(s);
      // Integrand limits at piece boundaries: s -> lo+ means x = t-s -> (t-lo)-
      // so the convolved object is taken from the left there, and from the
      // right at s = hi.
      Side side = Side::Raw;
      if (i == 0) side = Side::Left;
      if (i == m) side = Side::Right;
      rule.push_back({s, w, side});
      total += w;
    }
  }
  if (!(total > 0.0)) {
    throw std::runtime_error("convolution_rule: kernel quadrature has no mass");
  }
  for (WeightedSample& ws : rule) ws.weight /= total;
  return rule;
}

}  // namespace detail

Mollifier::Mollifier(int order, int subintervals)
    : order_(order), subintervals_(subintervals) {
  if (order_ < 1) {
    throw std::invalid_argument("Mollifier: order must be >= 1");
  }
  if (subintervals_ < 2 || subintervals_ % 2 != 0) {
    throw std::invalid_argument("Mollifier: subintervals must be even and >= 2");
  }
  normalizer_ = 1.0 / bump_mass();
}

double Mollifier::base_kernel(double t) const {
  return normalizer_ * bump_unnormalized(t);
}

double Mollifier::kernel(double t) const {
  return order_ * base_kernel(order_ * t);
}

double Mollifier::mass() const {
  const double r = support_radius();
  std::vector<double> f(static_cast<std::size_t>(subintervals_) + 1);
  for (int i = 0; i <= subintervals_; ++i) {
    f[static_cast<std::size_t>(i)] = kernel(-r + 2.0 * r * i / subintervals_);
  }
  return detail::composite_simpson(f, -r, r);
}

MollifiedModulus::MollifiedModulus(std::shared_ptr<const BVModulus> parent,
                                   Mollifier moll)
    : parent_(std::move(parent)), moll_(moll) {
  if (!parent_) {
    throw std::invalid_argument("MollifiedModulus: null parent");
  }
  splits_ = parent_->break_points();
  // Convergence probe: doubling the node count must not move the values.
  std::vector<double> probes = {0.0, parent_->horizon(), 0.5 * parent_->horizon()};
  const double r = moll_.support_radius();
  for (double tj : parent_->jump_times()) {
    probes.push_back(tj);
    probes.push_back(tj - 0.5 * r);
    probes.push_back(tj + 0.5 * r);
  }
  for (double t : probes) {
    const double coarse = eval_with(t, moll_.subintervals());
    const double fine = eval_with(t, 2 * moll_.subintervals());
    if (std::abs(coarse - fine) > 1e-8 * std::max(1.0, std::abs(fine))) {
      throw std::runtime_error(
          "MollifiedModulus: kernel quadrature did not converge; "
          "increase the mollifier subinterval count");
    }
  }
}

double MollifiedModulus::horizon() const { return parent_->horizon(); }

double MollifiedModulus::eval_with(double t, int subintervals) const {
  const auto rule = detail::convolution_rule(moll_, t, splits_,
                                             parent_->horizon(), subintervals);
  const double horizon = parent_->horizon();
  double acc = 0.0;
  for (const auto& ws : rule) {
    const double x = t - ws.s;
    double g;
    if (x <= 0.0) {
      g = parent_->value(0.0, Side::Raw);
    } else if (x >= horizon) {
      g = parent_->value(horizon, Side::Raw);
    } else {
      g = parent_->value(x, ws.side);
    }
    acc += ws.weight * g;
  }
  return acc;
}

double MollifiedModulus::value(double t, Side) const {
  t = clamp_to_range(t, parent_->horizon(), "MollifiedModulus::value");
  return eval_with(t, moll_.subintervals());
}

double MollifiedModulus::value_extended(double t) const {
  return eval_with(t, moll_.subintervals());
}

MollifiedModulus mollify_modulus(const BVModulus& g, const Mollifier& moll) {
  return MollifiedModulus(std::make_shared<BVModulus>(g), moll);
}

std::pair<double, double> mollified_variation_bound(const BVModulus& g,
                                                    const Mollifier& moll) {
  const MollifiedModulus gn(std::make_shared<BVModulus>(g), moll);
  const double T = g.horizon();
  const int n = moll.order();
  // Resolve the kernel scale 1/n: many cells per support radius.
  int cells = std::max(512, 24 * static_cast<int>(std::ceil(T * n)));
  cells += cells % 2;
  const double fd = 1e-3 / n;
  std::vector<double> deriv(static_cast<std::size_t>(cells) + 1);
  for (int i = 0; i <= cells; ++i) {
    const double t = T * i / cells;
    deriv[static_cast<std::size_t>(i)] =
        (gn.value_extended(t + fd) - gn.value_extended(t - fd)) / (2.0 * fd);
  }
  const double lhs = detail::composite_simpson(deriv, 0.0, T);
  return {lhs, g.total_variation()};
}

}  // namespace mrbv
