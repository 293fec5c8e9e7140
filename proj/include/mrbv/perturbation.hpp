#pragma once

#include <functional>
#include <optional>

#include "mrbv/profiles.hpp"
#include "mrbv/types.hpp"

namespace mrbv {

/// Data of the perturbed problem u' + B 𝒜 u + C u = f.
///
/// B is a multiplication operator on H realized as a nodal diagonal on
/// H-coordinates, with bounds beta0 <= B <= beta1 pointwise (an empty
/// callable means B == 1). C(t) maps V into H and is stored as the action
/// matrix of the functional v -> (C v | . ): its H-representative is
/// recovered through gram_H (empty means C == 0). h is an integrable
/// majorant with ||C(t)||^2_{V->H} <= h(t), kept as an exact profile so
/// its L^1 norm enters constants without quadrature error.
struct PerturbationSpec {
  std::function<Vector(double)> b_nodal;
  std::function<Matrix(double, Side)> c_action;
  double beta0 = 1.0;
  double beta1 = 1.0;
  std::optional<PiecewiseLinearProfile> h_majorant;

  bool has_b() const { return static_cast<bool>(b_nodal); }
  bool has_c() const { return static_cast<bool>(c_action); }
  double h_l1() const { return h_majorant ? h_majorant->integral() : 0.0; }

  /// B == 1, C == 0: the unperturbed problem.
  static PerturbationSpec identity() { return {}; }
};

}  // namespace mrbv
