#include "psyeval/congruence.hpp"

#include <algorithm>
#include <cmath>

#include "psyeval/errors.hpp"

namespace psyeval {

const char* to_string(CongruenceBand b) {
  switch (b) {
    case CongruenceBand::Good: return "Good";
    case CongruenceBand::Fair: return "Fair";
    case CongruenceBand::Low: return "Low";
  }
  return "Low";
}

double tcc(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw LengthMismatchError("loading vectors have lengths " + std::to_string(a.size()) + " and " +
                              std::to_string(b.size()));
  }
  if (a.empty()) throw LengthMismatchError("loading vectors are empty");
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) throw ZeroVectorError("congruence with an all-zero loading vector");
  return std::clamp(ab / std::sqrt(aa * bb), -1.0, 1.0);
}

double tcc(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return tcc(std::span<const double>(a.data(), static_cast<std::size_t>(a.size())),
             std::span<const double>(b.data(), static_cast<std::size_t>(b.size())));
}

Eigen::VectorXd loading_mae(const Eigen::MatrixXd& l1, const Eigen::MatrixXd& l2, const BoolMatrix& pattern) {
  if (l1.rows() != l2.rows() || l1.cols() != l2.cols() || pattern.rows() != l1.rows() ||
      pattern.cols() != l1.cols()) {
    throw ShapeError("loading matrices and pattern must share one shape");
  }
  Eigen::VectorXd out(l1.cols());
  for (Eigen::Index j = 0; j < l1.cols(); ++j) {
    double sum = 0.0;
    Eigen::Index count = 0;
    for (Eigen::Index i = 0; i < l1.rows(); ++i) {
      if (!pattern(i, j)) continue;
      sum += std::abs(l1(i, j) - l2(i, j));
      ++count;
    }
    if (count == 0) throw ShapeError("factor " + std::to_string(j + 1) + " has no free loadings");
    out(j) = sum / static_cast<double>(count);
  }
  return out;
}

CongruenceBand band_tcc(double phi) {
  if (phi >= 0.95) return CongruenceBand::Good;
  if (phi >= 0.85) return CongruenceBand::Fair;
  return CongruenceBand::Low;
}

CongruenceReport compare_solutions(const CfaModelSpec& spec, const Eigen::MatrixXd& reference,
                                   const Eigen::MatrixXd& other) {
  const BoolMatrix pattern = spec.pattern();
  const Eigen::VectorXd maes = loading_mae(reference, other, pattern);
  CongruenceReport report;
  for (std::size_t j = 0; j < spec.m(); ++j) {
    const auto col = static_cast<Eigen::Index>(j);
    const double phi = tcc(Eigen::VectorXd(reference.col(col)), Eigen::VectorXd(other.col(col)));
    report.per_factor.push_back({spec.factor_names()[j], phi, maes(col), band_tcc(phi)});
  }
  return report;
}

}  // namespace psyeval
