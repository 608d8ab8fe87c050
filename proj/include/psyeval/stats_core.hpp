#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <vector>

namespace psyeval {

struct DescriptiveSummary {
  double mu = 0.0;
  double sigma = 0.0;  // n - 1 denominator
  // Biased central-moment estimators; empty when the data have zero variance.
  std::optional<double> skewness;
  std::optional<double> excess_kurtosis;
  std::size_t n = 0;
};

struct AlignmentPair {
  double mae = 0.0;
  double r = 0.0;
  std::size_t n = 0;
};

inline std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}
inline std::span<const double> as_span(const std::vector<double>& v) { return {v.data(), v.size()}; }

// Throws InsufficientDataError for n < 2.
DescriptiveSummary describe(std::span<const double> values);

// Throws LengthMismatchError, InsufficientDataError (n < 2) or
// DegenerateInputError (a constant vector).
double pearson_r(std::span<const double> x, std::span<const double> y);

double mae(std::span<const double> x, std::span<const double> y);

// Heterogeneity alignment: the Pearson correlation of two sigma profiles.
double hai(std::span<const double> sigma_human, std::span<const double> sigma_model);

AlignmentPair align(std::span<const double> x, std::span<const double> y);

// Columns are items; reverse coding must already be applied.
double cronbach_alpha(const Eigen::MatrixXd& item_scores);

// Coefficient of determination of the OLS line of `human` on `simulated`.
// A constant `simulated` vector explains nothing and yields 0.
double r_squared(std::span<const double> simulated, std::span<const double> human);

// Pairwise Pearson correlations of the columns of `scores`.
Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& scores);

// Mean |r| over the upper off-diagonal triangle.
double discriminant_mean_abs(const Eigen::MatrixXd& corr);

}  // namespace psyeval
