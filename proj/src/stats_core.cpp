#include "psyeval/stats_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "psyeval/errors.hpp"

namespace psyeval {

namespace {

double mean_of(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

void require_same_length(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw LengthMismatchError("vectors have lengths " + std::to_string(x.size()) + " and " +
                              std::to_string(y.size()));
  }
}

bool is_constant(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

double sample_variance(const Eigen::VectorXd& v) {
  const double m = v.mean();
  return (v.array() - m).square().sum() / static_cast<double>(v.size() - 1);
}

}  // namespace

DescriptiveSummary describe(std::span<const double> values) {
  if (values.size() < 2) throw InsufficientDataError("describe needs at least two values");
  DescriptiveSummary out;
  out.n = values.size();
  const double n = static_cast<double>(values.size());
  out.mu = mean_of(values);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : values) {
    const double d = x - out.mu;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  out.sigma = std::sqrt(m2 / (n - 1.0));
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (!is_constant(values) && m2 > 0.0) {
    out.skewness = m3 / std::pow(m2, 1.5);
    out.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  }
  return out;
}

double pearson_r(std::span<const double> x, std::span<const double> y) {
  require_same_length(x, y);
  if (x.size() < 2) throw InsufficientDataError("correlation needs at least two pairs");
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (is_constant(x) || is_constant(y) || sxx <= 0.0 || syy <= 0.0) throw DegenerateInputError("correlation of a constant vector");
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

double mae(std::span<const double> x, std::span<const double> y) {
  require_same_length(x, y);
  if (x.empty()) throw InsufficientDataError("MAE of empty vectors");
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sum += std::abs(x[i] - y[i]);
  return sum / static_cast<double>(x.size());
}

double hai(std::span<const double> sigma_human, std::span<const double> sigma_model) {
  return pearson_r(sigma_human, sigma_model);
}

AlignmentPair align(std::span<const double> x, std::span<const double> y) {
  return {mae(x, y), pearson_r(x, y), x.size()};
}

double cronbach_alpha(const Eigen::MatrixXd& item_scores) {
  const auto k = item_scores.cols();
  const auto n = item_scores.rows();
  if (k < 2) throw InsufficientDataError("Cronbach's alpha needs at least two items");
  if (n < 2) throw InsufficientDataError("Cronbach's alpha needs at least two subjects");
  double item_var_sum = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) item_var_sum += sample_variance(item_scores.col(j));
  const Eigen::VectorXd total = item_scores.rowwise().sum();
  const double total_var = sample_variance(total);
  if (total_var <= 0.0) throw DegenerateInputError("total score has zero variance");
  const double kd = static_cast<double>(k);
  return kd / (kd - 1.0) * (1.0 - item_var_sum / total_var);
}

double r_squared(std::span<const double> simulated, std::span<const double> human) {
  require_same_length(simulated, human);
  if (human.size() < 3) throw InsufficientDataError("R^2 needs at least three pairs");
  const double mh = mean_of(human);
  const double ms = mean_of(simulated);
  double sss = 0.0, ssh = 0.0, ssh_s = 0.0;
  for (std::size_t i = 0; i < human.size(); ++i) {
    const double ds = simulated[i] - ms;
    const double dh = human[i] - mh;
    sss += ds * ds;
    ssh += dh * dh;
    ssh_s += ds * dh;
  }
  if (is_constant(human) || ssh <= 0.0) throw DegenerateInputError("reference scores have zero variance");
  if (is_constant(simulated) || sss <= 0.0) return 0.0;
  const double slope = ssh_s / sss;
  const double intercept = mh - slope * ms;
  double sse = 0.0;
  for (std::size_t i = 0; i < human.size(); ++i) {
    const double resid = human[i] - (intercept + slope * simulated[i]);
    sse += resid * resid;
  }
  return 1.0 - sse / ssh;
}

Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& scores) {
  const auto m = scores.cols();
  if (scores.rows() < 3) throw InsufficientDataError("correlation matrix needs at least three rows");
  Eigen::MatrixXd corr = Eigen::MatrixXd::Identity(m, m);
  std::vector<Eigen::VectorXd> columns;
  for (Eigen::Index j = 0; j < m; ++j) {
    columns.emplace_back(scores.col(j));
    const auto& c = columns.back();
    if ((c.array() == c(0)).all()) {
      throw DegenerateInputError("column " + std::to_string(j + 1) + " is constant");
    }
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) {
      const double r = pearson_r(as_span(columns[static_cast<std::size_t>(i)]),
                                 as_span(columns[static_cast<std::size_t>(j)]));
      corr(i, j) = r;
      corr(j, i) = r;
    }
  }
  return corr;
}

double discriminant_mean_abs(const Eigen::MatrixXd& corr) {
  const auto m = corr.rows();
  if (corr.cols() != m || m < 2) throw ShapeError("expected a square matrix of order >= 2");
  constexpr double tol = 1e-9;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (std::abs(corr(i, i) - 1.0) > tol) throw ShapeError("correlation diagonal must be 1");
    for (Eigen::Index j = i + 1; j < m; ++j) {
      if (std::abs(corr(i, j) - corr(j, i)) > tol) throw ShapeError("correlation matrix is not symmetric");
      sum += std::abs(corr(i, j));
    }
  }
  return sum / static_cast<double>(m * (m - 1) / 2);
}

}  // namespace psyeval
