#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <utility>

#include "mrbv/types.hpp"

namespace mrbv {

/// Finite-dimensional Gelfand triple V -> H -> V' realized by two SPD Gram
/// matrices over a common Galerkin basis. A coefficient vector is read as an
/// element of V or H; an "action vector" w (w_i = <functional, basis_i>)
/// represents a functional in V'. The same object serves the real and the
/// complex field: quadratic forms use the conjugate transpose throughout.
template <typename Scalar>
class BasicGelfandSpace {
 public:
  using MatrixType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using VectorType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Real = typename Eigen::NumTraits<Scalar>::Real;

  /// Validates symmetry (1e-12 relative) and positive definiteness via dense
  /// Cholesky, then caches both factorizations and the sharp embedding
  /// constant c_H (largest generalized eigenvalue of gram_h v = lambda gram_v v).
  BasicGelfandSpace(MatrixType gram_h, MatrixType gram_v)
      : gram_h_(std::move(gram_h)), gram_v_(std::move(gram_v)) {
    if (gram_h_.rows() != gram_h_.cols() || gram_v_.rows() != gram_v_.cols())
      throw std::invalid_argument("gelfand: Gram matrices must be square");
    if (gram_h_.rows() != gram_v_.rows())
      throw std::invalid_argument("gelfand: Gram matrices must share one dimension");
    if (gram_h_.rows() == 0)
      throw std::invalid_argument("gelfand: dimension must be positive");
    require_hermitian(gram_h_, "gram_H");
    require_hermitian(gram_v_, "gram_V");
    // Work with the exactly Hermitian parts so Cholesky sees clean input.
    gram_h_ = Scalar(0.5) * (gram_h_ + gram_h_.adjoint()).eval();
    gram_v_ = Scalar(0.5) * (gram_v_ + gram_v_.adjoint()).eval();
    llt_h_.compute(gram_h_);
    if (llt_h_.info() != Eigen::Success)
      throw std::invalid_argument("gelfand: gram_H is not positive definite");
    llt_v_.compute(gram_v_);
    if (llt_v_.info() != Eigen::Success)
      throw std::invalid_argument("gelfand: gram_V is not positive definite");
    Eigen::GeneralizedSelfAdjointEigenSolver<MatrixType> ges(gram_h_, gram_v_);
    if (ges.info() != Eigen::Success)
      throw std::runtime_error("gelfand: generalized eigensolve failed");
    embedding_constant_ = std::sqrt(ges.eigenvalues().maxCoeff());
  }

  Index dim() const { return gram_h_.rows(); }
  const MatrixType& gram_h() const { return gram_h_; }
  const MatrixType& gram_v() const { return gram_v_; }

  Real norm_h(const VectorType& v) const { return quad_norm(gram_h_, v); }
  Real norm_v(const VectorType& v) const { return quad_norm(gram_v_, v); }

  /// Operator norm on V of the functional with action vector w:
  /// sqrt(w^* gram_V^{-1} w).
  Real dual_norm_vprime(const VectorType& w) const {
    check_dim(w);
    VectorType z = llt_v_.solve(w);
    return sqrt_clamped(std::real(w.dot(z)));
  }

  /// Sharp constant of ||v||_H <= c_H ||v||_V.
  Real embedding_constant() const { return embedding_constant_; }

  /// The unique z in H with (z|v)_H = <w, v> for all v, i.e. gram_H z = w.
  VectorType h_representative(const VectorType& w) const {
    check_dim(w);
    return llt_h_.solve(w);
  }

  /// Similarity transform L^{-1} S L^{-*} with gram_V = L L^*; eigen and
  /// singular values of the result are those of S seen in V geometry.
  MatrixType v_geometry_sandwich(const MatrixType& s) const {
    if (s.rows() != dim() || s.cols() != dim())
      throw std::invalid_argument("gelfand: matrix dimension mismatch");
    auto lower = llt_v_.matrixL();
    MatrixType tmp = lower.solve(s);
    return lower.solve(tmp.adjoint()).adjoint();
  }

  VectorType solve_gram_v(const VectorType& w) const {
    check_dim(w);
    return llt_v_.solve(w);
  }

 private:
  static void require_hermitian(const MatrixType& g, const char* name) {
    Real scale = g.cwiseAbs().maxCoeff();
    Real dev = (g - g.adjoint().eval()).cwiseAbs().maxCoeff();
    if (scale == Real(0) || dev > Real(1e-12) * scale)
      throw std::invalid_argument(std::string("gelfand: ") + name +
                                  " is not symmetric to 1e-12 relative");
  }

  void check_dim(const VectorType& v) const {
    if (v.size() != dim())
      throw std::invalid_argument("gelfand: vector dimension mismatch");
  }

  Real quad_norm(const MatrixType& g, const VectorType& v) const {
    check_dim(v);
    return sqrt_clamped(std::real(v.dot(g * v)));
  }

  static Real sqrt_clamped(Real q) { return std::sqrt(q < Real(0) ? Real(0) : q); }

  MatrixType gram_h_, gram_v_;
  Eigen::LLT<MatrixType> llt_h_, llt_v_;
  Real embedding_constant_{};
};

using GelfandSpace = BasicGelfandSpace<double>;

}  // namespace mrbv
