#include "psyeval/pca_projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "psyeval/errors.hpp"

namespace psyeval {

PcaBasis fit_pca2(const Eigen::MatrixXd& human_scores, std::string level) {
  const auto n = human_scores.rows();
  const auto p = human_scores.cols();
  if (n < 3) throw InsufficientDataError("PCA needs at least three subjects");
  if (p < 2) throw InsufficientDataError("PCA needs at least two variables");
  if (!human_scores.allFinite()) throw ArgumentError("PCA input contains missing values");

  PcaBasis basis;
  basis.level = std::move(level);
  basis.means = human_scores.colwise().mean().transpose();
  const Eigen::MatrixXd centered = human_scores.rowwise() - basis.means.transpose();
  Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
  cov = 0.5 * (cov + cov.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  // Eigen sorts ascending.
  const double l1 = eig.eigenvalues()(p - 1);
  const double l2 = eig.eigenvalues()(p - 2);
  const double eps = std::numeric_limits<double>::epsilon();
  if (!(l1 > 0.0) || l2 <= 10.0 * static_cast<double>(p) * eps * l1) {
    throw RankError("human covariance has rank below two");
  }
  basis.eigenvalues = {l1, std::max(l2, 0.0)};
  basis.components.resize(2, p);
  for (Eigen::Index k = 0; k < 2; ++k) {
    Eigen::VectorXd v = eig.eigenvectors().col(p - 1 - k);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    basis.components.row(k) = v.transpose();
  }
  return basis;
}

Projection project(const PcaBasis& basis, const Eigen::MatrixXd& scores, std::string source) {
  if (scores.cols() != basis.means.size()) {
    throw ShapeError("scores have " + std::to_string(scores.cols()) + " columns, basis expects " +
                     std::to_string(basis.means.size()));
  }
  Projection out;
  out.source = std::move(source);
  out.coords = (scores.rowwise() - basis.means.transpose()) * basis.components.transpose();
  return out;
}

}  // namespace psyeval
