#include <doctest.h>

#include <complex>
#include <random>

#include "mrbv/gelfand.hpp"

using mrbv::GelfandSpace;
using mrbv::Matrix;
using mrbv::Vector;

namespace {

Matrix diag2(double a, double b) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

Matrix random_spd(int n, std::mt19937& rng) {
  std::normal_distribution<double> dist;
  Matrix r(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) r(i, j) = dist(rng);
  Matrix g = r.transpose() * r + 0.1 * static_cast<double>(n) * Matrix::Identity(n, n);
  return 0.5 * (g + g.transpose());
}

}  // namespace

TEST_CASE("H and V norms are the Gram quadratic forms") {
  GelfandSpace euclid(Matrix::Identity(2, 2), Matrix::Identity(2, 2));
  Vector v(2);
  v << 3.0, 4.0;
  CHECK(euclid.norm_h(v) == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(euclid.norm_h(Vector::Zero(2)) == 0.0);
  CHECK(euclid.norm_v(Vector::Unit(2, 0)) == doctest::Approx(1.0));

  GelfandSpace weighted(diag2(4.0, 1.0), diag2(1.0, 4.0));
  CHECK(weighted.norm_h(Vector::Unit(2, 0)) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(weighted.norm_v(Vector::Unit(2, 1)) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("dual norm uses the inverse V Gram matrix") {
  GelfandSpace euclid(Matrix::Identity(2, 2), Matrix::Identity(2, 2));
  CHECK(euclid.dual_norm_vprime(Vector::Unit(2, 0)) == doctest::Approx(1.0));
  CHECK(euclid.dual_norm_vprime(Vector::Zero(2)) == 0.0);

  GelfandSpace weighted(Matrix::Identity(2, 2), diag2(1.0, 4.0));
  CHECK(weighted.dual_norm_vprime(Vector::Unit(2, 1)) ==
        doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("embedding constant is the sharp norm ratio") {
  CHECK(GelfandSpace(Matrix::Identity(2, 2), Matrix::Identity(2, 2))
            .embedding_constant() == doctest::Approx(1.0));
  CHECK(GelfandSpace(Matrix::Identity(2, 2), diag2(1.0, 4.0))
            .embedding_constant() == doctest::Approx(1.0));
  CHECK(GelfandSpace(diag2(4.0, 1.0), Matrix::Identity(2, 2))
            .embedding_constant() == doctest::Approx(2.0));
}

TEST_CASE("h_representative solves against gram_H") {
  GelfandSpace euclid(Matrix::Identity(2, 2), Matrix::Identity(2, 2));
  Vector w(2);
  w << 2.0, 3.0;
  CHECK((euclid.h_representative(w) - w).norm() == doctest::Approx(0.0));

  GelfandSpace weighted(diag2(2.0, 1.0), Matrix::Identity(2, 2));
  Vector z = weighted.h_representative(w);
  CHECK(z(0) == doctest::Approx(1.0));
  CHECK(z(1) == doctest::Approx(3.0));
  CHECK(weighted.h_representative(Vector::Zero(2)).norm() == 0.0);
}

TEST_CASE("norm chain and representative identities on random SPD pairs") {
  std::mt19937 rng(42);
  std::normal_distribution<double> dist;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 19);
    GelfandSpace space(random_spd(n, rng), random_spd(n, rng));
    const double ch = space.embedding_constant();

    double sharpest = 0.0;
    for (int k = 0; k < 50; ++k) {
      Vector v(n);
      for (int i = 0; i < n; ++i) v(i) = dist(rng);
      const double nh = space.norm_h(v);
      const double nv = space.norm_v(v);
      CHECK(nh <= ch * nv * (1.0 + 1e-12));
      sharpest = std::max(sharpest, nh / nv);

      // Dual chain: functionals represented in H obey ||.||_V' <= c_H ||.||_H.
      Vector w = space.gram_h() * v;
      CHECK(space.dual_norm_vprime(w) <= ch * nh * (1.0 + 1e-12));

      // gram_H then h_representative is the identity.
      CHECK((space.h_representative(w) - v).norm() <= 1e-9 * (1.0 + v.norm()));
    }

    // The sharp ratio is attained by the top generalized eigenvector.
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(space.gram_h(),
                                                         space.gram_v());
    Eigen::Index top;
    ges.eigenvalues().maxCoeff(&top);
    Vector vmax = ges.eigenvectors().col(top);
    CHECK(space.norm_h(vmax) / space.norm_v(vmax) ==
          doctest::Approx(ch).epsilon(1e-9));
    CHECK(sharpest <= ch * (1.0 + 1e-12));
  }
}

TEST_CASE("v_geometry_sandwich reproduces generalized spectra") {
  std::mt19937 rng(7);
  const int n = 6;
  Matrix gv = random_spd(n, rng);
  GelfandSpace space(Matrix::Identity(n, n), gv);
  Matrix s = random_spd(n, rng);

  Matrix sandwich = space.v_geometry_sandwich(s);
  CHECK((sandwich - sandwich.transpose()).cwiseAbs().maxCoeff() < 1e-10);

  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(s, gv);
  Eigen::SelfAdjointEigenSolver<Matrix> es(sandwich);
  CHECK(es.eigenvalues().minCoeff() ==
        doctest::Approx(ges.eigenvalues().minCoeff()).epsilon(1e-9));
  CHECK(es.eigenvalues().maxCoeff() ==
        doctest::Approx(ges.eigenvalues().maxCoeff()).epsilon(1e-9));
}

TEST_CASE("construction rejects bad Gram matrices") {
  Matrix asym(2, 2);
  asym << 1.0, 0.5, -0.5, 1.0;
  CHECK_THROWS_AS(GelfandSpace(asym, Matrix::Identity(2, 2)),
                  std::invalid_argument);
  CHECK_THROWS_AS(GelfandSpace(diag2(1.0, -1.0), Matrix::Identity(2, 2)),
                  std::invalid_argument);
  CHECK_THROWS_AS(GelfandSpace(Matrix::Identity(2, 2), Matrix::Identity(3, 3)),
                  std::invalid_argument);
  GelfandSpace ok(Matrix::Identity(2, 2), Matrix::Identity(2, 2));
  CHECK_THROWS_AS(ok.norm_h(Vector::Zero(3)), std::invalid_argument);
}

TEST_CASE("complex scalar field uses conjugate transposes") {
  using CSpace = mrbv::BasicGelfandSpace<std::complex<double>>;
  using CMatrix = CSpace::MatrixType;
  using CVector = CSpace::VectorType;
  CMatrix gh(2, 2);
  gh << std::complex<double>(2.0, 0.0), std::complex<double>(0.0, 1.0),
      std::complex<double>(0.0, -1.0), std::complex<double>(2.0, 0.0);
  CSpace space(gh, CMatrix::Identity(2, 2));
  CVector v(2);
  v << std::complex<double>(1.0, 0.0), std::complex<double>(0.0, 1.0);
  // G v = (1, i), so v* G v = 2 for this Hermitian pair (eigenvalues 1, 3).
  CHECK(space.norm_h(v) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(space.embedding_constant() == doctest::Approx(std::sqrt(3.0)));
}
