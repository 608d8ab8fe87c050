#pragma once

#include <Eigen/Dense>
#include <string>

namespace psyeval {

struct PcaBasis {
  Eigen::VectorXd means;       // human means, p
  Eigen::MatrixXd components;  // 2 x p, orthonormal rows
  Eigen::Vector2d eigenvalues;
  std::string level;
};

struct Projection {
  Eigen::MatrixXd coords;  // n x 2
  std::string source;
};

// Two-component covariance PCA of the human sample. The largest-magnitude
// entry of each component is made positive.
// Throws InsufficientDataError (n < 3 or p < 2) or RankError (rank < 2).
PcaBasis fit_pca2(const Eigen::MatrixXd& human_scores, std::string level = {});

// Throws ShapeError when the column count differs from the basis.
Projection project(const PcaBasis& basis, const Eigen::MatrixXd& scores, std::string source = {});

}  // namespace psyeval
