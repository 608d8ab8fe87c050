#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "psyeval/scale_model.hpp"

namespace psyeval {

using BoolMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Simple-structure confirmatory factor model: every indicator loads on
// exactly one factor. Factor variances are fixed to 1.
class CfaModelSpec {
 public:
  // Throws SpecError unless each row of `pattern` has exactly one true cell,
  // each factor has >= 2 indicators (>= 3 for a one-factor model).
  CfaModelSpec(std::vector<std::string> indicator_names, std::vector<std::string> factor_names,
               const BoolMatrix& pattern, bool free_factor_correlations = true);

  const std::vector<std::string>& indicator_names() const { return indicator_names_; }
  const std::vector<std::string>& factor_names() const { return factor_names_; }
  bool free_factor_correlations() const { return free_factor_correlations_; }
  std::size_t p() const { return indicator_names_.size(); }
  std::size_t m() const { return factor_names_.size(); }
  std::size_t factor_of(std::size_t indicator) const { return factor_of_[indicator]; }
  std::vector<std::size_t> indicators_of(std::size_t factor) const;
  BoolMatrix pattern() const;

  // Free loadings + error variances + factor correlations.
  std::size_t free_parameter_count() const;
  // p(p+1)/2 - q; negative for under-identified models.
  long degrees_of_freedom() const;

 private:
  std::vector<std::string> indicator_names_;
  std::vector<std::string> factor_names_;
  std::vector<std::size_t> factor_of_;
  bool free_factor_correlations_;
};

struct CovarianceInput {
  Eigen::MatrixXd S;
  long N = 0;
  std::vector<std::string> variable_names;
};

enum class CfaWarning { NonPositiveDefinitePhi, BoundaryErrorVariance, NotConverged, SmallSample };
const char* to_string(CfaWarning w);

struct CfaOptions {
  int max_iterations = 500;
  double relative_f_tolerance = 1e-9;
  double gradient_tolerance = 1e-6;
  double boundary_error_variance = 1e-4;
};

struct FitIndices {
  std::optional<double> cfi;    // empty when the baseline has no excess misfit
  std::optional<double> tli;    // empty when df == 0
  std::optional<double> rmsea;  // empty when df == 0
  double srmr = 0.0;
};

struct CfaFit {
  std::vector<std::string> indicator_names;
  std::vector<std::string> factor_names;
  Eigen::MatrixXd loadings_std;  // p x m
  Eigen::MatrixXd factor_corr;   // m x m, unit diagonal
  Eigen::VectorXd error_var_std;
  Eigen::MatrixXd loadings_raw;
  Eigen::VectorXd error_var_raw;
  Eigen::MatrixXd implied_cov;
  double f_ml = 0.0;
  double chi2 = 0.0;
  long df = 0;
  double chi2_null = 0.0;
  long df_null = 0;
  FitIndices indices;
  bool converged = false;
  int iterations = 0;
  std::vector<CfaWarning> warnings;

  bool has_warning(CfaWarning w) const;
};

CfaModelSpec build_tfm_spec(const DomainDef& domain, const ScaleSpec& scale);
CfaModelSpec build_ffm_spec(const ScaleSpec& scale);

// Indicator columns of a scored sample in the order of the model spec.
// Indicator names must match item labels or facet labels of the sample.
Eigen::MatrixXd indicator_scores(const ScoredSample& sample, const CfaModelSpec& spec);

// Sample covariance with n - 1 denominator. Throws InsufficientDataError (n < 2).
CovarianceInput sample_covariance(const Eigen::MatrixXd& scores,
                                  std::vector<std::string> variable_names = {});

// ML discrepancy ln|Sigma| + tr(S Sigma^-1) - ln|S| - p over the parameter
// vector [loadings (p) | log error variances (p) | factor correlations
// (upper triangle, row-major, when free)].
class MlObjective {
 public:
  struct Parameters {
    Eigen::MatrixXd loadings;  // p x m
    Eigen::MatrixXd phi;       // m x m
    Eigen::VectorXd error_var;
  };

  // Throws PdError when S is not positive definite, ShapeError on size mismatch.
  MlObjective(const CovarianceInput& cov, const CfaModelSpec& spec);

  Eigen::Index size() const { return n_params_; }
  Eigen::VectorXd start_values() const;
  Parameters unpack(const Eigen::VectorXd& theta) const;
  Eigen::MatrixXd implied(const Eigen::VectorXd& theta) const;

  // +infinity where Sigma(theta) is not positive definite.
  double value(const Eigen::VectorXd& theta) const;
  // Throws NumericalError where Sigma(theta) is not positive definite.
  Eigen::VectorXd gradient(const Eigen::VectorXd& theta) const;
  // Expected information tr(Sigma^-1 dSigma_a Sigma^-1 dSigma_b).
  Eigen::MatrixXd expected_information(const Eigen::VectorXd& theta) const;

 private:
  std::vector<Eigen::MatrixXd> sigma_derivatives(const Eigen::VectorXd& theta) const;

  Eigen::MatrixXd S_;
  double log_det_S_;
  CfaModelSpec spec_;
  Eigen::Index p_, m_, n_params_;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> phi_pairs_;
};

CfaFit fit_ml(const CovarianceInput& cov, const CfaModelSpec& spec, const CfaOptions& options = {});

struct NullModelFit {
  double chi2_null = 0.0;
  long df_null = 0;
};
NullModelFit null_model_fit(const CovarianceInput& cov);

FitIndices fit_indices(double chi2, long df, double chi2_null, long df_null, long N,
                       const Eigen::MatrixXd& S, const Eigen::MatrixXd& sigma_hat);

struct StandardizedSolution {
  Eigen::MatrixXd loadings;
  Eigen::VectorXd error_var;
};
StandardizedSolution standardize_solution(const Eigen::MatrixXd& loadings, const Eigen::MatrixXd& phi,
                                          const Eigen::VectorXd& error_var,
                                          const Eigen::MatrixXd& implied_sigma);

}  // namespace psyeval
