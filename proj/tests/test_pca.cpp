#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "psyeval/errors.hpp"
#include "psyeval/pca_projection.hpp"
#include "support.hpp"

using namespace psyeval;
using Catch::Matchers::WithinAbs;

namespace {

Eigen::MatrixXd gaussian(int n, int p, std::mt19937_64& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::MatrixXd x(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) x(i, j) = z(rng);
  }
  return x;
}

}  // namespace

TEST_CASE("basis properties", "[pca]") {
  std::mt19937_64 rng(21);
  Eigen::MatrixXd lambda(5, 2);
  lambda << 0.9, 0.1, 0.8, 0.2, 0.1, 0.7, 0.2, 0.8, 0.5, 0.5;
  Eigen::MatrixXd phi = Eigen::MatrixXd::Identity(2, 2);
  const Eigen::MatrixXd x = testsupport::sample_mvn(testsupport::population_sigma(lambda, phi), 500, rng);
  const auto basis = fit_pca2(x, "domain");
  CHECK(basis.level == "domain");
  const Eigen::MatrixXd gram = basis.components * basis.components.transpose();
  CHECK((gram - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(basis.eigenvalues(0) >= basis.eigenvalues(1));
  for (int k = 0; k < 2; ++k) {
    Eigen::Index arg;
    basis.components.row(k).cwiseAbs().maxCoeff(&arg);
    CHECK(basis.components(k, arg) > 0);
  }

  const auto proj = project(basis, x, "human");
  CHECK(proj.source == "human");
  const Eigen::RowVector2d means = proj.coords.colwise().mean();
  CHECK(means.cwiseAbs().maxCoeff() < 1e-9);
  const Eigen::MatrixXd centered = proj.coords.rowwise() - means;
  const Eigen::Vector2d var = (centered.array().square().colwise().sum() / (x.rows() - 1)).transpose();
  CHECK_THAT(var(0), WithinAbs(basis.eigenvalues(0), 1e-8));
  CHECK_THAT(var(1), WithinAbs(basis.eigenvalues(1), 1e-8));

  const auto centre = project(basis, Eigen::MatrixXd(basis.means.transpose()));
  CHECK(centre.coords.cwiseAbs().maxCoeff() < 1e-12);

  const double delta = 0.7;
  const Eigen::MatrixXd shifted = x.rowwise() + delta * basis.components.row(0);
  const auto moved = project(basis, shifted);
  CHECK(((moved.coords.col(0).array() - proj.coords.col(0).array()) - delta).abs().maxCoeff() < 1e-10);
  CHECK((moved.coords.col(1) - proj.coords.col(1)).cwiseAbs().maxCoeff() < 1e-10);

  CHECK_THROWS_AS(project(basis, Eigen::MatrixXd::Zero(3, 4)), ShapeError);
}

TEST_CASE("isotropic spectrum", "[pca]") {
  std::mt19937_64 rng(5);
  const auto basis = fit_pca2(gaussian(20000, 5, rng));
  CHECK_THAT(basis.eigenvalues(0), WithinAbs(1.0, 0.05));
  CHECK_THAT(basis.eigenvalues(1), WithinAbs(1.0, 0.05));
}

TEST_CASE("near rank-one data", "[pca]") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::MatrixXd x(200, 4);
  for (int i = 0; i < 200; ++i) {
    const double t = z(rng);
    for (int j = 0; j < 4; ++j) x(i, j) = (j + 1) * t + 1e-5 * z(rng);
  }
  const auto basis = fit_pca2(x);
  CHECK(basis.eigenvalues(1) / basis.eigenvalues(0) < 1e-6);

  Eigen::MatrixXd exact(50, 3);
  for (int i = 0; i < 50; ++i) exact.row(i) = Eigen::RowVector3d(1, 2, 3) * i;
  CHECK_THROWS_AS(fit_pca2(exact), RankError);
}

TEST_CASE("pca input guards", "[pca]") {
  CHECK_THROWS_AS(fit_pca2(Eigen::MatrixXd::Random(2, 4)), InsufficientDataError);
  CHECK_THROWS_AS(fit_pca2(Eigen::MatrixXd::Random(10, 1)), InsufficientDataError);
}
