#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "psyeval/cfa_engine.hpp"

namespace psyeval {

enum class CongruenceBand { Good, Fair, Low };
const char* to_string(CongruenceBand b);

// Tucker's coefficient: uncentered, no sign alignment.
// Throws LengthMismatchError or ZeroVectorError.
double tcc(std::span<const double> a, std::span<const double> b);
double tcc(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Per-factor MAE over the cells that are free in `pattern`. Throws ShapeError.
Eigen::VectorXd loading_mae(const Eigen::MatrixXd& l1, const Eigen::MatrixXd& l2, const BoolMatrix& pattern);

CongruenceBand band_tcc(double phi);

struct FactorCongruence {
  std::string factor;
  double phi = 0.0;
  double loading_mae = 0.0;
  CongruenceBand band = CongruenceBand::Low;
};

struct CongruenceReport {
  std::vector<FactorCongruence> per_factor;
};

// Compares two standardized solutions of the same model column by column.
CongruenceReport compare_solutions(const CfaModelSpec& spec, const Eigen::MatrixXd& reference,
                                   const Eigen::MatrixXd& other);

}  // namespace psyeval
