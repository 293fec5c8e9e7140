#include "mrbv/forms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mrbv {
namespace {

double op_norm_v(const GelfandSpace& space, const Matrix& s) {
  Matrix b = space.v_geometry_sandwich(s);
  Eigen::JacobiSVD<Matrix> svd(b);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

double min_sym_eig_v(const GelfandSpace& space, const Matrix& s) {
  Matrix b = space.v_geometry_sandwich(s);
  Matrix sym = 0.5 * (b + b.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("probe: eigensolve failed");
  }
  return es.eigenvalues().minCoeff();
}

// --- P1 assembly on a uniform mesh of [0,1], full node set ----------------

Matrix mass_full(int n) {
  const double h = 1.0 / n;
  Matrix m = Matrix::Zero(n + 1, n + 1);
  for (int e = 0; e < n; ++e) {
    m(e, e) += h / 3.0;
    m(e + 1, e + 1) += h / 3.0;
    m(e, e + 1) += h / 6.0;
    m(e + 1, e) += h / 6.0;
  }
  return m;
}

Matrix stiffness_full(int n, const std::function<double(int)>& coef) {
  const double h = 1.0 / n;
  Matrix k = Matrix::Zero(n + 1, n + 1);
  for (int e = 0; e < n; ++e) {
    const double a = coef(e) / h;
    k(e, e) += a;
    k(e + 1, e + 1) += a;
    k(e, e + 1) -= a;
    k(e + 1, e) -= a;
  }
  return k;
}

// Action matrix of v -> integral b v' w (test functions in rows).
Matrix drift_full(int n, const std::function<double(int)>& coef) {
  Matrix d = Matrix::Zero(n + 1, n + 1);
  for (int e = 0; e < n; ++e) {
    const double half = 0.5 * coef(e);
    d(e, e) -= half;
    d(e + 1, e) -= half;
    d(e, e + 1) += half;
    d(e + 1, e + 1) += half;
  }
  return d;
}

Matrix weighted_mass_full(int n, const std::function<double(int)>& coef) {
  const double h = 1.0 / n;
  Matrix m = Matrix::Zero(n + 1, n + 1);
  for (int e = 0; e < n; ++e) {
    const double c = coef(e);
    m(e, e) += c * h / 3.0;
    m(e + 1, e + 1) += c * h / 3.0;
    m(e, e + 1) += c * h / 6.0;
    m(e + 1, e) += c * h / 6.0;
  }
  return m;
}

Matrix restrict_to(const Matrix& full, const Mesh1D& mesh) {
  if (mesh.boundary == Mesh1D::Boundary::Robin) return full;
  const Index n = full.rows() - 2;
  return full.block(1, 1, n, n);
}

std::vector<double> merge_times(std::vector<double> a,
                                const std::vector<double>& b, double scale) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end(),
                      [scale](double x, double y) {
                        return y - x <= 1e-12 * std::max(1.0, scale);
                      }),
          a.end());
  return a;
}

Matrix mollified_assemble(const NonAutonomousForm& parent, const Mollifier& moll,
                          const std::vector<double>& splits, double t,
                          int subintervals) {
  const double T = parent.horizon();
  const auto rule =
      detail::convolution_rule(moll, t, splits, T, subintervals);
  Matrix acc = Matrix::Zero(parent.space().dim(), parent.space().dim());
  for (const auto& ws : rule) {
    const double x = t - ws.s;
    if (x <= 0.0) {
      acc.noalias() += ws.weight * parent.assemble(0.0, Side::Raw);
    } else if (x >= T) {
      acc.noalias() += ws.weight * parent.assemble(T, Side::Raw);
    } else {
      acc.noalias() += ws.weight * parent.assemble(x, ws.side);
    }
  }
  return acc;
}

}  // namespace

// --- Mesh1D -----------------------------------------------------------------

std::vector<double> Mesh1D::dof_coords() const {
  validate();
  std::vector<double> x;
  const int first = boundary == Boundary::Dirichlet ? 1 : 0;
  const int last = boundary == Boundary::Dirichlet ? elements - 1 : elements;
  for (int i = first; i <= last; ++i) {
    x.push_back(static_cast<double>(i) / elements);
  }
  return x;
}

void Mesh1D::validate() const {
  if (elements < 2) {
    throw std::invalid_argument("Mesh1D: need at least 2 elements");
  }
}

// --- NonAutonomousForm -------------------------------------------------------

NonAutonomousForm::NonAutonomousForm(std::shared_ptr<const GelfandSpace> space,
                                     Assembler assembler,
                                     FormConstants constants,
                                     std::shared_ptr<const TimeModulus> modulus,
                                     std::vector<double> coefficient_breaks,
                                     std::shared_ptr<const Mesh1D> mesh)
    : space_(std::move(space)),
      assembler_(std::move(assembler)),
      constants_(constants),
      modulus_(std::move(modulus)),
      coefficient_breaks_(std::move(coefficient_breaks)),
      mesh_(std::move(mesh)) {
  if (!space_ || !assembler_ || !modulus_) {
    throw std::invalid_argument("NonAutonomousForm: missing space/assembler/modulus");
  }
  if (!(constants_.alpha > 0.0)) {
    throw std::invalid_argument("NonAutonomousForm: coercivity alpha must be > 0");
  }
  if (constants_.bound_M < constants_.alpha) {
    throw std::invalid_argument("NonAutonomousForm: bound M below alpha");
  }
  std::sort(coefficient_breaks_.begin(), coefficient_breaks_.end());
}

Matrix NonAutonomousForm::assemble(double t, Side side) const {
  const double T = horizon();
  const double slack = 1e-12 * std::max(1.0, T);
  if (t < -slack || t > T + slack) {
    throw std::out_of_range("NonAutonomousForm::assemble: time out of range");
  }
  return assembler_(std::clamp(t, 0.0, T), side);
}

double NonAutonomousForm::form_value(double t, const Vector& u, const Vector& v,
                                     Side side) const {
  return v.dot(assemble(t, side) * u);
}

Vector NonAutonomousForm::operator_apply_H(double t, const Vector& u,
                                           Side side) const {
  return space_->h_representative(assemble(t, side) * u);
}

std::shared_ptr<const BVModulus> NonAutonomousForm::exact_modulus() const {
  return std::dynamic_pointer_cast<const BVModulus>(modulus_);
}

// --- Probes ------------------------------------------------------------------

std::pair<double, double> probe_constants(const NonAutonomousForm& form,
                                          const std::vector<double>& sample_times) {
  if (sample_times.empty()) {
    throw std::invalid_argument("probe_constants: empty sample list");
  }
  double m_hat = 0.0;
  double alpha_hat = std::numeric_limits<double>::infinity();
  for (double t : sample_times) {
    Matrix s = form.assemble(t);
    m_hat = std::max(m_hat, op_norm_v(form.space(), s));
    alpha_hat = std::min(alpha_hat, min_sym_eig_v(form.space(), s));
  }
  return {m_hat, alpha_hat};
}

double probe_bv(const NonAutonomousForm& form, std::vector<double> partition) {
  std::sort(partition.begin(), partition.end());
  double worst = std::numeric_limits<double>::infinity();
  if (partition.size() < 2) return worst;
  Matrix prev = form.assemble(partition.front());
  double gprev = form.modulus().value(partition.front(), Side::Raw);
  for (std::size_t i = 1; i < partition.size(); ++i) {
    Matrix cur = form.assemble(partition[i]);
    const double gcur = form.modulus().value(partition[i], Side::Raw);
    const double slack = (gcur - gprev) - op_norm_v(form.space(), cur - prev);
    worst = std::min(worst, slack);
    prev = std::move(cur);
    gprev = gcur;
  }
  return worst;
}

// --- Mollified wrapper ---------------------------------------------------------

NonAutonomousForm mollify_form(const NonAutonomousForm& form,
                               const Mollifier& moll) {
  auto parent_bv = form.exact_modulus();
  if (!parent_bv) {
    throw std::invalid_argument(
        "mollify_form: parent form must carry an exact BV modulus");
  }
  const double T = form.horizon();
  std::vector<double> splits =
      merge_times(form.coefficient_breaks(), parent_bv->break_points(), T);

  // Convergence probe: doubling the node count must not move the entries.
  {
    std::vector<double> probes = {0.0, 0.5 * T, T};
    for (double tj : form.coefficient_breaks()) probes.push_back(tj);
    for (double t : probes) {
      Matrix coarse = mollified_assemble(form, moll, splits, t, moll.subintervals());
      Matrix fine = mollified_assemble(form, moll, splits, t, 2 * moll.subintervals());
      const double scale = std::max(1.0, fine.cwiseAbs().maxCoeff());
      if ((coarse - fine).cwiseAbs().maxCoeff() > 1e-8 * scale) {
        throw std::runtime_error(
            "mollify_form: kernel quadrature did not converge; "
            "increase the mollifier subinterval count");
      }
    }
  }

  auto modulus = std::make_shared<MollifiedModulus>(parent_bv, moll);
  FormConstants constants;
  constants.bound_M = form.bound_M();
  constants.alpha = form.alpha();
  constants.symmetric = form.symmetric();
  // |S_n(t) - S_n(s)| <= M ||rho_n'||_L1 |t-s| and ||rho_n'||_L1 = 2 rho_n(0)
  // for the unimodal bump.
  constants.lipschitz = 2.0 * moll.kernel(0.0) * form.bound_M();

  NonAutonomousForm parent = form;
  auto assembler = [parent, moll, splits](double t, Side) {
    return mollified_assemble(parent, moll, splits, t, moll.subintervals());
  };
  return NonAutonomousForm(form.space_ptr(), std::move(assembler), constants,
                           std::move(modulus), {}, form.mesh());
}

// --- Scalar / diagonal builders -----------------------------------------------

NonAutonomousForm build_scalar_form(const PiecewiseLinearProfile& a,
                                    std::optional<BVModulus> modulus_override) {
  if (!(a.min_value() > 0.0)) {
    throw std::invalid_argument("build_scalar_form: coefficient must stay positive");
  }
  auto space = std::make_shared<GelfandSpace>(Matrix::Identity(1, 1),
                                              Matrix::Identity(1, 1));
  FormConstants constants;
  constants.alpha = a.min_value();
  constants.bound_M = a.max_value();
  constants.symmetric = true;
  if (!a.has_jumps()) constants.lipschitz = a.max_slope_abs();

  std::shared_ptr<const BVModulus> modulus =
      modulus_override
          ? std::make_shared<BVModulus>(std::move(*modulus_override))
          : std::make_shared<BVModulus>(a.variation_modulus());

  auto assembler = [a](double t, Side side) {
    Matrix s(1, 1);
    s(0, 0) = a.value(t, side);
    return s;
  };
  return NonAutonomousForm(std::move(space), std::move(assembler), constants,
                           std::move(modulus), a.jump_times());
}

NonAutonomousForm build_diagonal_form(
    const std::vector<PiecewiseLinearProfile>& coefficients) {
  if (coefficients.empty()) {
    throw std::invalid_argument("build_diagonal_form: need at least one coefficient");
  }
  const double T = coefficients.front().horizon();
  const Index n = static_cast<Index>(coefficients.size());
  double amin = std::numeric_limits<double>::infinity();
  double amax = 0.0;
  double slope = 0.0;
  bool jumps = false;
  BVModulus modulus = coefficients.front().variation_modulus();
  std::vector<double> breaks;
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    const auto& c = coefficients[i];
    if (std::abs(c.horizon() - T) > 1e-12 * std::max(1.0, T)) {
      throw std::invalid_argument("build_diagonal_form: horizons differ");
    }
    amin = std::min(amin, c.min_value());
    amax = std::max(amax, c.max_value());
    slope = std::max(slope, c.max_slope_abs());
    jumps = jumps || c.has_jumps();
    if (i > 0) modulus = add_moduli(modulus, c.variation_modulus());
    breaks = merge_times(std::move(breaks), c.jump_times(), T);
  }
  if (!(amin > 0.0)) {
    throw std::invalid_argument("build_diagonal_form: coefficients must stay positive");
  }
  auto space = std::make_shared<GelfandSpace>(Matrix::Identity(n, n),
                                              Matrix::Identity(n, n));
  FormConstants constants;
  constants.alpha = amin;
  constants.bound_M = amax;
  constants.symmetric = true;
  if (!jumps) constants.lipschitz = slope;

  auto assembler = [coefficients, n](double t, Side side) {
    Matrix s = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
      s(i, i) = coefficients[static_cast<std::size_t>(i)].value(t, side);
    }
    return s;
  };
  return NonAutonomousForm(std::move(space), std::move(assembler), constants,
                           std::make_shared<BVModulus>(std::move(modulus)),
                           std::move(breaks));
}

// --- Piecewise (t,x) coefficients ----------------------------------------------

void PiecewiseCoefficient::validate(int elements, const char* what) const {
  if (values.size() != switch_times.size() + 1) {
    throw std::invalid_argument(std::string(what) +
                                ": need one value set per time piece");
  }
  for (std::size_t i = 0; i + 1 < switch_times.size(); ++i) {
    if (!(switch_times[i] < switch_times[i + 1])) {
      throw std::invalid_argument(std::string(what) +
                                  ": switch times must be strictly increasing");
    }
  }
  for (const auto& v : values) {
    if (v.size() != 1 && v.size() != static_cast<std::size_t>(elements)) {
      throw std::invalid_argument(
          std::string(what) + ": value sets need 1 or #elements entries");
    }
  }
}

std::size_t PiecewiseCoefficient::piece_index(double t, double horizon,
                                              Side side) const {
  const double slack = 1e-12 * std::max(1.0, horizon);
  if (t < -slack || t > horizon + slack) {
    throw std::out_of_range("PiecewiseCoefficient: time out of range");
  }
  t = std::clamp(t, 0.0, horizon);
  for (double s : switch_times) {
    if (std::abs(s - t) <= slack) {
      t = s;
      break;
    }
    if (s > t) break;
  }
  const bool strict = (side == Side::Left) && t < horizon;
  std::size_t idx = 0;
  for (double s : switch_times) {
    if (strict ? (s < t) : (s <= t)) {
      ++idx;
    } else {
      break;
    }
  }
  return idx;
}

const std::vector<double>& PiecewiseCoefficient::at(double t, double horizon,
                                                    Side side) const {
  return values[piece_index(t, horizon, side)];
}

double PiecewiseCoefficient::cell_value(std::size_t piece, int element) const {
  const auto& v = values[piece];
  return v.size() == 1 ? v[0] : v[static_cast<std::size_t>(element)];
}

double PiecewiseCoefficient::sup_abs(std::size_t piece) const {
  double m = 0.0;
  for (double v : values[piece]) m = std::max(m, std::abs(v));
  return m;
}

// --- Elliptic builder -----------------------------------------------------------

EllipticBuild build_elliptic_1d(const Mesh1D& mesh, double horizon,
                                const PiecewiseCoefficient& diffusion,
                                std::optional<PiecewiseCoefficient> drift,
                                std::optional<PiecewiseCoefficient> potential) {
  mesh.validate();
  if (mesh.boundary != Mesh1D::Boundary::Dirichlet) {
    throw std::invalid_argument("build_elliptic_1d: expects a Dirichlet mesh");
  }
  if (!(horizon > 0.0)) {
    throw std::invalid_argument("build_elliptic_1d: horizon must be positive");
  }
  const int n = mesh.elements;
  diffusion.validate(n, "diffusion");
  for (double s : diffusion.switch_times) {
    if (s <= 0.0 || s >= horizon) {
      throw std::invalid_argument("build_elliptic_1d: switch times must be interior");
    }
  }
  double amin = std::numeric_limits<double>::infinity();
  double amax = 0.0;
  for (const auto& piece : diffusion.values) {
    for (double v : piece) {
      amin = std::min(amin, v);
      amax = std::max(amax, v);
    }
  }
  if (!(amin > 0.0)) {
    throw std::invalid_argument(
        "build_elliptic_1d: diffusion below the coercivity floor");
  }

  const Matrix mass = restrict_to(mass_full(n), mesh);
  const Matrix stiff1 = restrict_to(stiffness_full(n, [](int) { return 1.0; }), mesh);
  auto space = std::make_shared<GelfandSpace>(mass, stiff1 + mass);

  std::vector<Matrix> s_pieces;
  for (std::size_t k = 0; k < diffusion.values.size(); ++k) {
    Matrix sk = restrict_to(
        stiffness_full(n, [&](int e) { return diffusion.cell_value(k, e); }), mesh);
    s_pieces.push_back(sk + mass);
  }

  std::vector<Jump> gjumps;
  for (std::size_t k = 1; k < diffusion.values.size(); ++k) {
    double sup = 0.0;
    for (int e = 0; e < n; ++e) {
      sup = std::max(sup, std::abs(diffusion.cell_value(k, e) -
                                   diffusion.cell_value(k - 1, e)));
    }
    if (sup > 0.0) gjumps.push_back({diffusion.switch_times[k - 1], sup});
  }
  auto modulus = std::make_shared<BVModulus>(horizon, 0.0, std::move(gjumps),
                                             std::vector<double>{},
                                             std::vector<double>{});

  FormConstants constants;
  constants.alpha = std::min(amin, 1.0);
  constants.bound_M = std::max(amax, 1.0);
  constants.symmetric = true;
  if (diffusion.switch_times.empty()) constants.lipschitz = 0.0;

  PiecewiseCoefficient diff_copy = diffusion;
  auto assembler = [s_pieces, diff_copy, horizon](double t, Side side) {
    return s_pieces[diff_copy.piece_index(t, horizon, side)];
  };
  NonAutonomousForm form(space, std::move(assembler), constants, modulus,
                         diffusion.switch_times,
                         std::make_shared<Mesh1D>(mesh));

  // Lower-order terms: C v = b v' + (c - 1) v, V -> H, with exact majorant.
  PiecewiseCoefficient b = drift ? *drift : PiecewiseCoefficient::constant(0.0);
  PiecewiseCoefficient c = potential ? *potential : PiecewiseCoefficient::constant(0.0);
  b.validate(n, "drift");
  c.validate(n, "potential");
  std::vector<double> pert_times = merge_times(b.switch_times, c.switch_times, horizon);

  std::vector<Matrix> c_pieces;
  std::vector<double> h_values;
  std::vector<double> cell_ends = pert_times;
  cell_ends.push_back(horizon);
  double cursor = 0.0;
  for (double end : cell_ends) {
    const double mid = 0.5 * (cursor + end);
    const std::size_t kb = b.piece_index(mid, horizon, Side::Raw);
    const std::size_t kc = c.piece_index(mid, horizon, Side::Raw);
    Matrix cm = restrict_to(drift_full(n, [&](int e) { return b.cell_value(kb, e); }) +
                                weighted_mass_full(
                                    n, [&](int e) { return c.cell_value(kc, e) - 1.0; }),
                            mesh);
    c_pieces.push_back(std::move(cm));
    double supb = 0.0, supc = 0.0;
    for (int e = 0; e < n; ++e) {
      supb = std::max(supb, std::abs(b.cell_value(kb, e)));
      supc = std::max(supc, std::abs(c.cell_value(kc, e) - 1.0));
    }
    const double bound = supb + supc;
    h_values.push_back(bound * bound);
    cursor = end;
  }

  PerturbationSpec pert;
  PiecewiseCoefficient lookup{pert_times, std::vector<std::vector<double>>(
                                              c_pieces.size(), {0.0})};
  pert.c_action = [c_pieces, lookup, horizon](double t, Side side) {
    return c_pieces[lookup.piece_index(t, horizon, side)];
  };
  pert.h_majorant = PiecewiseLinearProfile::step(horizon, pert_times, h_values);
  return EllipticBuild{std::move(form), std::move(pert)};
}

// --- Robin builder ---------------------------------------------------------------

NonAutonomousForm build_robin_1d(const Mesh1D& mesh, const RobinSpec& spec) {
  mesh.validate();
  if (mesh.boundary != Mesh1D::Boundary::Robin) {
    throw std::invalid_argument("build_robin_1d: expects a Robin mesh");
  }
  const double T = spec.beta_left.horizon();
  if (std::abs(spec.beta_right.horizon() - T) > 1e-12 * std::max(1.0, T)) {
    throw std::invalid_argument("build_robin_1d: profile horizons differ");
  }
  if (spec.lambda < 0.0) {
    throw std::invalid_argument("build_robin_1d: shift must be >= 0");
  }
  const int n = mesh.elements;
  const Matrix mass = mass_full(n);
  const Matrix stiff1 = stiffness_full(n, [](int) { return 1.0; });
  auto space = std::make_shared<GelfandSpace>(mass, stiff1 + mass);

  const double lambda = spec.lambda;
  const PiecewiseLinearProfile bl = spec.beta_left;
  const PiecewiseLinearProfile br = spec.beta_right;
  auto assembler = [stiff1, mass, bl, br, lambda, n](double t, Side side) {
    Matrix s = stiff1 + lambda * mass;
    s(0, 0) += bl.value(t, side);
    s(n, n) += br.value(t, side);
    return s;
  };

  // Exact constants: the coefficients are piecewise linear in t, so the
  // extremal eigenvalues over each piece are attained at its ends.
  std::vector<double> breaks = merge_times(bl.breaks(), br.breaks(), T);
  double alpha = std::numeric_limits<double>::infinity();
  double bound = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    for (auto [t, side] :
         {std::pair{breaks[i], Side::Right}, std::pair{breaks[i + 1], Side::Left},
          std::pair{0.5 * (breaks[i] + breaks[i + 1]), Side::Raw}}) {
      Matrix s = assembler(t, side);
      alpha = std::min(alpha, min_sym_eig_v(*space, s));
      bound = std::max(bound, op_norm_v(*space, s));
    }
  }
  if (!(alpha > 1e-12)) {
    throw std::invalid_argument(
        "build_robin_1d: shifted form fails the coercivity probe; "
        "increase lambda");
  }

  // Exact discrete trace constants ||delta_x||^2_{V'} at the endpoints.
  const double tr_left =
      std::pow(space->dual_norm_vprime(Vector::Unit(n + 1, 0)), 2);
  const double tr_right =
      std::pow(space->dual_norm_vprime(Vector::Unit(n + 1, n)), 2);
  BVModulus modulus =
      add_moduli(scale_modulus(bl.variation_modulus(), tr_left),
                 scale_modulus(br.variation_modulus(), tr_right));

  FormConstants constants;
  constants.alpha = alpha;
  constants.bound_M = bound;
  constants.symmetric = true;
  if (!bl.has_jumps() && !br.has_jumps()) {
    constants.lipschitz =
        tr_left * bl.max_slope_abs() + tr_right * br.max_slope_abs();
  }
  std::vector<double> coef_breaks = merge_times(bl.jump_times(), br.jump_times(), T);
  return NonAutonomousForm(std::move(space), std::move(assembler), constants,
                           std::make_shared<BVModulus>(std::move(modulus)),
                           std::move(coef_breaks), std::make_shared<Mesh1D>(mesh));
}

}  // namespace mrbv
