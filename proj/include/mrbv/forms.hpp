#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "mrbv/bv_modulus.hpp"
#include "mrbv/gelfand.hpp"
#include "mrbv/perturbation.hpp"
#include "mrbv/profiles.hpp"
#include "mrbv/types.hpp"

namespace mrbv {

/// Declared constants of a form: V-bound M, coercivity alpha, symmetry, and
/// an optional Lipschitz-in-time constant (set only when the form is
/// differentiable-in-time in the operator sense).
struct FormConstants {
  double bound_M = 1.0;
  double alpha = 1.0;
  bool symmetric = true;
  std::optional<double> lipschitz;
};

/// Uniform P1 mesh on [0,1]. Dirichlet keeps the interior nodes as degrees
/// of freedom; Robin keeps all nodes.
struct Mesh1D {
  enum class Boundary { Dirichlet, Robin };

  int elements = 2;
  Boundary boundary = Boundary::Dirichlet;

  double h() const { return 1.0 / elements; }
  Index dofs() const {
    return boundary == Boundary::Dirichlet ? elements - 1 : elements + 1;
  }
  std::vector<double> dof_coords() const;
  void validate() const;
};

/// Time-indexed sesquilinear form a(t, u, v) = v^* S(t) u on a Gelfand
/// space, with declared constants and a dominating time modulus. Immutable;
/// assemble is pure, so forms are safe to evaluate concurrently.
class NonAutonomousForm {
 public:
  using Assembler = std::function<Matrix(double, Side)>;

  NonAutonomousForm(std::shared_ptr<const GelfandSpace> space,
                    Assembler assembler, FormConstants constants,
                    std::shared_ptr<const TimeModulus> modulus,
                    std::vector<double> coefficient_breaks = {},
                    std::shared_ptr<const Mesh1D> mesh = nullptr);

  const GelfandSpace& space() const { return *space_; }
  std::shared_ptr<const GelfandSpace> space_ptr() const { return space_; }
  double horizon() const { return modulus_->horizon(); }

  /// S(t); Side selects the one-sided coefficient limit at discontinuities.
  Matrix assemble(double t, Side side = Side::Raw) const;
  double form_value(double t, const Vector& u, const Vector& v,
                    Side side = Side::Raw) const;
  /// The unique z in H with (z|v)_H = a(t, u, v) for all v.
  Vector operator_apply_H(double t, const Vector& u,
                          Side side = Side::Raw) const;

  double bound_M() const { return constants_.bound_M; }
  double alpha() const { return constants_.alpha; }
  bool symmetric() const { return constants_.symmetric; }
  std::optional<double> lipschitz() const { return constants_.lipschitz; }

  const TimeModulus& modulus() const { return *modulus_; }
  std::shared_ptr<const TimeModulus> modulus_ptr() const { return modulus_; }
  /// The exact jump-plus-density representation, when the modulus has one
  /// (null for mollified wrappers, whose modulus is smooth).
  std::shared_ptr<const BVModulus> exact_modulus() const;

  /// Times where the coefficients may be discontinuous (jump locations).
  const std::vector<double>& coefficient_breaks() const {
    return coefficient_breaks_;
  }
  /// Mesh of FEM-built forms; null for algebraic (scalar/diagonal) ones.
  std::shared_ptr<const Mesh1D> mesh() const { return mesh_; }

 private:
  std::shared_ptr<const GelfandSpace> space_;
  Assembler assembler_;
  FormConstants constants_;
  std::shared_ptr<const TimeModulus> modulus_;
  std::vector<double> coefficient_breaks_;
  std::shared_ptr<const Mesh1D> mesh_;
};

/// (M_hat, alpha_hat): the worst V-geometry operator norm and the worst
/// coercivity constant of S over the sample times. A correct form satisfies
/// alpha_hat >= alpha - tol and M_hat <= M + tol.
std::pair<double, double> probe_constants(const NonAutonomousForm& form,
                                          const std::vector<double>& sample_times);

/// Worst slack of the BV domination over the partition: min over consecutive
/// (s, t) of [g(t) - g(s)] - ||S(t) - S(s)||_V. Nonnegative (up to solver
/// epsilon) for a correctly declared modulus.
double probe_bv(const NonAutonomousForm& form, std::vector<double> partition);

/// Entrywise time-convolution of S against the kernel, with S extended
/// constantly outside [0,T]. Declared M and alpha are inherited exactly
/// (the quadrature weights form a convex combination); the modulus is
/// mollified alongside; a finite Lipschitz constant is derived from the
/// kernel derivative. Requires the parent modulus to be an exact BVModulus.
NonAutonomousForm mollify_form(const NonAutonomousForm& form,
                               const Mollifier& moll);

/// Scalar model problem a(t, u, v) = a(t) u v on the trivial triple
/// (gram_H = gram_V = [1]). The profile must stay strictly positive.
NonAutonomousForm build_scalar_form(const PiecewiseLinearProfile& a,
                                    std::optional<BVModulus> modulus_override = {});

/// Decoupled system S(t) = diag(a_1(t), ..., a_n(t)) on identity grams.
NonAutonomousForm build_diagonal_form(
    const std::vector<PiecewiseLinearProfile>& coefficients);

/// Coefficient piecewise constant in time and space: switch_times are the
/// interior time breaks, values[k] the spatial cell values on time piece k
/// (either one entry, constant in x, or one entry per mesh element).
struct PiecewiseCoefficient {
  std::vector<double> switch_times;
  std::vector<std::vector<double>> values;

  static PiecewiseCoefficient constant(double v) { return {{}, {{v}}}; }
  std::size_t piece_index(double t, double horizon, Side side) const;
  const std::vector<double>& at(double t, double horizon, Side side) const;
  double cell_value(std::size_t piece, int element) const;
  double sup_abs(std::size_t piece) const;
  void validate(int elements, const char* what) const;
};

struct EllipticBuild {
  NonAutonomousForm form;
  /// B == 1 and C v = b v' + (c - 1) v, the lower-order terms the form
  /// itself does not carry (its +(v|w)_H term is compensated by the -1).
  PerturbationSpec perturbation;
};

/// Principal form integral a(t,x) v' w' + integral v w on H^1_0 with full-H^1
/// V-geometry; drift b and potential c are routed into the perturbation
/// operator. Declared constants come from the coefficient bounds; the
/// modulus jumps by sup_x |Delta a| at each switch (V-geometry factor 1).
EllipticBuild build_elliptic_1d(const Mesh1D& mesh, double horizon,
                                const PiecewiseCoefficient& diffusion,
                                std::optional<PiecewiseCoefficient> drift = {},
                                std::optional<PiecewiseCoefficient> potential = {});

struct RobinSpec {
  PiecewiseLinearProfile beta_left;
  PiecewiseLinearProfile beta_right;
  double lambda = 1.0;  // shift making the form coercive
};

/// a(t,v,w) = integral v' w' + beta_l(t) v(0) w(0) + beta_r(t) v(1) w(1)
/// + lambda (v|w)_H on full H^1. Declared constants are exact generalized
/// eigenvalue extrema over the time pieces; throws if the shifted form is
/// not coercive. The modulus scales each endpoint variation by the exact
/// discrete trace constant ||delta_x||^2_{V'}.
NonAutonomousForm build_robin_1d(const Mesh1D& mesh, const RobinSpec& spec);

}  // namespace mrbv
