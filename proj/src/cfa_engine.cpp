#include "psyeval/cfa_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "psyeval/errors.hpp"

namespace psyeval {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// log|A| via Cholesky; empty when A is not positive definite.
std::optional<double> log_det_pd(const Eigen::MatrixXd& A, Eigen::LLT<Eigen::MatrixXd>& llt) {
  llt.compute(A);
  if (llt.info() != Eigen::Success) return std::nullopt;
  const auto& L = llt.matrixLLT();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    const double d = L(i, i);
    if (!(d > 0.0) || !std::isfinite(d)) return std::nullopt;
    sum += std::log(d);
  }
  return 2.0 * sum;
}

long half_vech(long p) { return p * (p + 1) / 2; }

}  // namespace

const char* to_string(CfaWarning w) {
  switch (w) {
    case CfaWarning::NonPositiveDefinitePhi: return "NonPositiveDefinitePhi";
    case CfaWarning::BoundaryErrorVariance: return "BoundaryErrorVariance";
    case CfaWarning::NotConverged: return "NotConverged";
    case CfaWarning::SmallSample: return "SmallSample";
  }
  return "Unknown";
}

bool CfaFit::has_warning(CfaWarning w) const {
  return std::find(warnings.begin(), warnings.end(), w) != warnings.end();
}

CfaModelSpec::CfaModelSpec(std::vector<std::string> indicator_names,
                           std::vector<std::string> factor_names, const BoolMatrix& pattern,
                           bool free_factor_correlations)
    : indicator_names_(std::move(indicator_names)),
      factor_names_(std::move(factor_names)),
      free_factor_correlations_(free_factor_correlations) {
  const auto p = static_cast<Eigen::Index>(indicator_names_.size());
  const auto m = static_cast<Eigen::Index>(factor_names_.size());
  if (p == 0 || m == 0) throw SpecError("model needs at least one indicator and one factor");
  if (pattern.rows() != p || pattern.cols() != m) {
    throw SpecError("loading pattern is " + std::to_string(pattern.rows()) + "x" +
                    std::to_string(pattern.cols()) + ", expected " + std::to_string(p) + "x" +
                    std::to_string(m));
  }
  for (Eigen::Index i = 0; i < p; ++i) {
    if (pattern.row(i).count() != 1) {
      throw SpecError("indicator " + indicator_names_[static_cast<std::size_t>(i)] +
                      " must load on exactly one factor");
    }
    Eigen::Index j = 0;
    while (!pattern(i, j)) ++j;
    factor_of_.push_back(static_cast<std::size_t>(j));
  }
  const Eigen::Index min_indicators = (m == 1) ? 3 : 2;
  for (Eigen::Index j = 0; j < m; ++j) {
    if (pattern.col(j).count() < min_indicators) {
      throw SpecError("factor " + factor_names_[static_cast<std::size_t>(j)] + " has fewer than " +
                      std::to_string(min_indicators) + " indicators");
    }
  }
}

std::vector<std::size_t> CfaModelSpec::indicators_of(std::size_t factor) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < factor_of_.size(); ++i) {
    if (factor_of_[i] == factor) out.push_back(i);
  }
  return out;
}

BoolMatrix CfaModelSpec::pattern() const {
  BoolMatrix out = BoolMatrix::Constant(static_cast<Eigen::Index>(p()), static_cast<Eigen::Index>(m()), false);
  for (std::size_t i = 0; i < p(); ++i) {
    out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(factor_of_[i])) = true;
  }
  return out;
}

std::size_t CfaModelSpec::free_parameter_count() const {
  const std::size_t corr = free_factor_correlations_ ? m() * (m() - 1) / 2 : 0;
  return 2 * p() + corr;
}

long CfaModelSpec::degrees_of_freedom() const {
  return half_vech(static_cast<long>(p())) - static_cast<long>(free_parameter_count());
}

CfaModelSpec build_tfm_spec(const DomainDef& domain, const ScaleSpec& scale) {
  if (domain.facet_names.size() < 2) {
    throw SpecError("three-factor model of " + domain.name + " needs at least two facets");
  }
  std::vector<std::string> indicators;
  for (int id : domain.item_ids) indicators.push_back(item_label(id));
  const auto p = static_cast<Eigen::Index>(domain.item_ids.size());
  const auto m = static_cast<Eigen::Index>(domain.facet_names.size());
  BoolMatrix pattern = BoolMatrix::Constant(p, m, false);
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto& facet = scale.facet(domain.facet_names[static_cast<std::size_t>(j)]);
    if (facet.item_ids.size() < 2) {
      throw SpecError("facet " + facet.name + " has fewer than two items");
    }
    for (int id : facet.item_ids) {
      auto pos = std::find(domain.item_ids.begin(), domain.item_ids.end(), id);
      pattern(pos - domain.item_ids.begin(), j) = true;
    }
  }
  return CfaModelSpec(std::move(indicators), domain.facet_names, pattern, true);
}

CfaModelSpec build_ffm_spec(const ScaleSpec& scale) {
  if (scale.domains().size() < 2) throw SpecError("five-factor model needs at least two domains");
  std::vector<std::string> indicators;
  std::vector<std::string> factors;
  for (const auto& facet : scale.facets()) indicators.push_back(facet.name);
  for (const auto& domain : scale.domains()) {
    if (domain.facet_names.size() < 2) {
      throw SpecError("domain " + domain.name + " has fewer than two facets");
    }
    factors.push_back(domain.name);
  }
  BoolMatrix pattern = BoolMatrix::Constant(static_cast<Eigen::Index>(indicators.size()),
                                            static_cast<Eigen::Index>(factors.size()), false);
  for (std::size_t d = 0; d < scale.domains().size(); ++d) {
    for (const auto& facet_name : scale.domains()[d].facet_names) {
      pattern(static_cast<Eigen::Index>(scale.facet_index(facet_name)), static_cast<Eigen::Index>(d)) = true;
    }
  }
  return CfaModelSpec(std::move(indicators), std::move(factors), pattern, true);
}

Eigen::MatrixXd indicator_scores(const ScoredSample& sample, const CfaModelSpec& spec) {
  Eigen::MatrixXd out(sample.item_scores.rows(), static_cast<Eigen::Index>(spec.p()));
  for (std::size_t i = 0; i < spec.p(); ++i) {
    const auto& name = spec.indicator_names()[i];
    const auto col = static_cast<Eigen::Index>(i);
    if (auto it = std::find(sample.item_labels.begin(), sample.item_labels.end(), name);
        it != sample.item_labels.end()) {
      out.col(col) = sample.item_scores.col(it - sample.item_labels.begin());
    } else if (auto ft = std::find(sample.facet_labels.begin(), sample.facet_labels.end(), name);
               ft != sample.facet_labels.end()) {
      out.col(col) = sample.facet_scores.col(ft - sample.facet_labels.begin());
    } else {
      throw ReferenceError("indicator " + name + " is not a scored item or facet");
    }
  }
  return out;
}

CovarianceInput sample_covariance(const Eigen::MatrixXd& scores, std::vector<std::string> variable_names) {
  const auto n = scores.rows();
  if (n < 2) throw InsufficientDataError("covariance needs at least two observations");
  if (variable_names.empty()) {
    for (Eigen::Index j = 0; j < scores.cols(); ++j) variable_names.push_back("V" + std::to_string(j + 1));
  }
  if (static_cast<Eigen::Index>(variable_names.size()) != scores.cols()) {
    throw ShapeError("variable names do not match score columns");
  }
  const Eigen::RowVectorXd means = scores.colwise().mean();
  const Eigen::MatrixXd centered = scores.rowwise() - means;
  Eigen::MatrixXd S = (centered.transpose() * centered) / static_cast<double>(n - 1);
  S = 0.5 * (S + S.transpose());
  return {std::move(S), static_cast<long>(n), std::move(variable_names)};
}

MlObjective::MlObjective(const CovarianceInput& cov, const CfaModelSpec& spec)
    : S_(cov.S),
      spec_(spec),
      p_(static_cast<Eigen::Index>(spec.p())),
      m_(static_cast<Eigen::Index>(spec.m())) {
  if (S_.rows() != p_ || S_.cols() != p_) {
    throw ShapeError("covariance matrix is " + std::to_string(S_.rows()) + "x" +
                     std::to_string(S_.cols()) + " but the model has " + std::to_string(p_) +
                     " indicators");
  }
  Eigen::LLT<Eigen::MatrixXd> llt;
  auto ld = log_det_pd(S_, llt);
  if (!ld) throw PdError("sample covariance matrix is not positive definite");
  log_det_S_ = *ld;
  if (spec.free_factor_correlations()) {
    for (Eigen::Index k = 0; k < m_; ++k) {
      for (Eigen::Index l = k + 1; l < m_; ++l) phi_pairs_.emplace_back(k, l);
    }
  }
  n_params_ = 2 * p_ + static_cast<Eigen::Index>(phi_pairs_.size());
}

// Loadings start from the leading eigenvector of each factor's indicator
// correlations, so indicators that load negatively start on the right side of
// zero. Factor correlations start from signed unit-weight composites.
Eigen::VectorXd MlObjective::start_values() const {
  Eigen::VectorXd theta(n_params_);
  const Eigen::VectorXd sd = S_.diagonal().cwiseSqrt();
  const Eigen::MatrixXd R = sd.cwiseInverse().asDiagonal() * S_ * sd.cwiseInverse().asDiagonal();
  Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(p_, m_);
  for (Eigen::Index f = 0; f < m_; ++f) {
    const auto members = spec_.indicators_of(static_cast<std::size_t>(f));
    const auto k = static_cast<Eigen::Index>(members.size());
    Eigen::MatrixXd sub(k, k);
    for (Eigen::Index a = 0; a < k; ++a) {
      for (Eigen::Index b = 0; b < k; ++b) sub(a, b) = R(members[a], members[b]);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sub);
    Eigen::VectorXd v = eig.eigenvectors().col(k - 1);
    if (v.sum() < 0) v = -v;
    const double scale = std::sqrt(std::max(eig.eigenvalues()(k - 1) - 1.0, 0.0) * k / (k - 1.0));
    for (Eigen::Index a = 0; a < k; ++a) {
      const auto i = static_cast<Eigen::Index>(members[a]);
      double l = std::clamp(v(a) * scale, -0.9, 0.9);
      if (std::abs(l) < 0.2) l = v(a) < 0 ? -0.2 : 0.2;
      theta(i) = l * sd(i);
      theta(p_ + i) = std::log((1.0 - l * l) * S_(i, i));
      weights(i, f) = l < 0 ? -1.0 : 1.0;
    }
  }
  const Eigen::MatrixXd composite = weights.transpose() * R * weights;
  for (std::size_t k = 0; k < phi_pairs_.size(); ++k) {
    const auto [a, b] = phi_pairs_[k];
    const double r = composite(a, b) / std::sqrt(composite(a, a) * composite(b, b));
    theta(2 * p_ + static_cast<Eigen::Index>(k)) = std::clamp(0.8 * r, -0.8, 0.8);
  }
  return theta;
}

MlObjective::Parameters MlObjective::unpack(const Eigen::VectorXd& theta) const {
  Parameters out;
  out.loadings = Eigen::MatrixXd::Zero(p_, m_);
  for (Eigen::Index i = 0; i < p_; ++i) {
    out.loadings(i, static_cast<Eigen::Index>(spec_.factor_of(static_cast<std::size_t>(i)))) = theta(i);
  }
  out.error_var = theta.segment(p_, p_).array().exp();
  out.phi = Eigen::MatrixXd::Identity(m_, m_);
  for (std::size_t k = 0; k < phi_pairs_.size(); ++k) {
    const auto [a, b] = phi_pairs_[k];
    out.phi(a, b) = out.phi(b, a) = theta(2 * p_ + static_cast<Eigen::Index>(k));
  }
  return out;
}

Eigen::MatrixXd MlObjective::implied(const Eigen::VectorXd& theta) const {
  const auto params = unpack(theta);
  Eigen::MatrixXd sigma = params.loadings * params.phi * params.loadings.transpose();
  sigma.diagonal() += params.error_var;
  return sigma;
}

double MlObjective::value(const Eigen::VectorXd& theta) const {
  if (!theta.allFinite()) return kInf;
  const Eigen::MatrixXd sigma = implied(theta);
  Eigen::LLT<Eigen::MatrixXd> llt;
  auto ld = log_det_pd(sigma, llt);
  if (!ld) return kInf;
  const double trace = llt.solve(S_).trace();
  const double f = *ld + trace - log_det_S_ - static_cast<double>(p_);
  return std::isfinite(f) ? f : kInf;
}

std::vector<Eigen::MatrixXd> MlObjective::sigma_derivatives(const Eigen::VectorXd& theta) const {
  const auto params = unpack(theta);
  const Eigen::MatrixXd lambda_phi = params.loadings * params.phi;  // p x m
  std::vector<Eigen::MatrixXd> out;
  out.reserve(static_cast<std::size_t>(n_params_));
  for (Eigen::Index i = 0; i < p_; ++i) {
    const auto k = static_cast<Eigen::Index>(spec_.factor_of(static_cast<std::size_t>(i)));
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(p_, p_);
    d.row(i) += lambda_phi.col(k).transpose();
    d.col(i) += lambda_phi.col(k);
    out.push_back(std::move(d));
  }
  for (Eigen::Index i = 0; i < p_; ++i) {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(p_, p_);
    d(i, i) = params.error_var(i);
    out.push_back(std::move(d));
  }
  for (const auto& [a, b] : phi_pairs_) {
    const Eigen::VectorXd la = params.loadings.col(a);
    const Eigen::VectorXd lb = params.loadings.col(b);
    out.push_back(la * lb.transpose() + lb * la.transpose());
  }
  return out;
}

Eigen::VectorXd MlObjective::gradient(const Eigen::VectorXd& theta) const {
  const Eigen::MatrixXd sigma = implied(theta);
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) throw NumericalError("implied covariance is not positive definite");
  const Eigen::MatrixXd sigma_inv = llt.solve(Eigen::MatrixXd::Identity(p_, p_));
  // dF/dSigma = Sigma^-1 (Sigma - S) Sigma^-1
  const Eigen::MatrixXd G = sigma_inv * (sigma - S_) * sigma_inv;
  const auto params = unpack(theta);
  const Eigen::MatrixXd g_lambda_phi = 2.0 * G * params.loadings * params.phi;  // p x m
  const Eigen::MatrixXd lt_g_l = 2.0 * params.loadings.transpose() * G * params.loadings;

  Eigen::VectorXd grad(n_params_);
  for (Eigen::Index i = 0; i < p_; ++i) {
    grad(i) = g_lambda_phi(i, static_cast<Eigen::Index>(spec_.factor_of(static_cast<std::size_t>(i))));
    grad(p_ + i) = G(i, i) * params.error_var(i);
  }
  for (std::size_t k = 0; k < phi_pairs_.size(); ++k) {
    const auto [a, b] = phi_pairs_[k];
    grad(2 * p_ + static_cast<Eigen::Index>(k)) = lt_g_l(a, b);
  }
  return grad;
}

Eigen::MatrixXd MlObjective::expected_information(const Eigen::VectorXd& theta) const {
  const Eigen::MatrixXd sigma = implied(theta);
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) throw NumericalError("implied covariance is not positive definite");
  const Eigen::MatrixXd sigma_inv = llt.solve(Eigen::MatrixXd::Identity(p_, p_));
  const auto derivs = sigma_derivatives(theta);
  std::vector<Eigen::MatrixXd> scaled;
  scaled.reserve(derivs.size());
  for (const auto& d : derivs) scaled.push_back(sigma_inv * d);
  Eigen::MatrixXd info(n_params_, n_params_);
  for (Eigen::Index a = 0; a < n_params_; ++a) {
    for (Eigen::Index b = a; b < n_params_; ++b) {
      // tr(A B) = sum(A .* B^T)
      const double v = (scaled[static_cast<std::size_t>(a)].array() *
                        scaled[static_cast<std::size_t>(b)].transpose().array()).sum();
      info(a, b) = info(b, a) = v;
    }
  }
  return info;
}

namespace {

// Scoring direction -(I + mu diag(I))^-1 g, with damping raised until the
// system is solvable and the direction descends. Falls back to -g.
Eigen::VectorXd scoring_direction(const Eigen::MatrixXd& info, const Eigen::VectorXd& grad) {
  const Eigen::Index q = grad.size();
  const double scale = std::max(info.diagonal().cwiseAbs().maxCoeff(), 1e-12);
  double mu = 0.0;
  for (int attempt = 0; attempt < 12; ++attempt) {
    Eigen::MatrixXd A = info;
    if (mu > 0.0) A.diagonal().array() += mu * scale;
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() == Eigen::Success) {
      Eigen::VectorXd d = -llt.solve(grad);
      if (d.allFinite() && d.dot(grad) < 0.0) return d;
    }
    mu = (mu == 0.0) ? 1e-10 : mu * 10.0;
  }
  (void)q;
  return -grad;
}

}  // namespace

CfaFit fit_ml(const CovarianceInput& cov, const CfaModelSpec& spec, const CfaOptions& options) {
  if (cov.N < 2) throw ArgumentError("sample size must be at least 2");
  const MlObjective objective(cov, spec);
  const auto p = static_cast<Eigen::Index>(spec.p());

  Eigen::VectorXd theta = objective.start_values();
  double f = objective.value(theta);
  if (!std::isfinite(f)) throw NumericalError("start values give a non-positive-definite covariance");
  Eigen::VectorXd grad = objective.gradient(theta);

  bool converged = grad.lpNorm<Eigen::Infinity>() < options.gradient_tolerance;
  int iterations = 0;
  while (!converged && iterations < options.max_iterations) {
    ++iterations;
    Eigen::VectorXd direction = scoring_direction(objective.expected_information(theta), grad);
    const double slope = direction.dot(grad);

    // Backtracking (Armijo) line search.
    double step = 1.0;
    double f_new = kInf;
    Eigen::VectorXd candidate;
    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving) {
      candidate = theta + step * direction;
      f_new = objective.value(candidate);
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    const double change = std::abs(f - f_new);
    theta = std::move(candidate);
    grad = objective.gradient(theta);
    const double previous = f;
    f = f_new;
    if (grad.lpNorm<Eigen::Infinity>() < options.gradient_tolerance ||
        change <= options.relative_f_tolerance * std::abs(f)) {
      converged = true;
    }
    (void)previous;
  }

  const auto params = objective.unpack(theta);
  CfaFit fit;
  fit.indicator_names = spec.indicator_names();
  fit.factor_names = spec.factor_names();
  fit.loadings_raw = params.loadings;
  fit.error_var_raw = params.error_var;
  fit.factor_corr = params.phi;
  fit.implied_cov = objective.implied(theta);
  fit.f_ml = std::max(f, 0.0);
  fit.chi2 = static_cast<double>(cov.N - 1) * fit.f_ml;
  fit.df = spec.degrees_of_freedom();
  const auto null_fit = null_model_fit(cov);
  fit.chi2_null = null_fit.chi2_null;
  fit.df_null = null_fit.df_null;
  fit.converged = converged;
  fit.iterations = iterations;

  auto standardized = standardize_solution(params.loadings, params.phi, params.error_var, fit.implied_cov);
  fit.loadings_std = std::move(standardized.loadings);
  fit.error_var_std = std::move(standardized.error_var);
  if (fit.df >= 0 && fit.df_null > 0) {
    fit.indices = fit_indices(fit.chi2, fit.df, fit.chi2_null, fit.df_null, cov.N, cov.S, fit.implied_cov);
  }

  bool phi_bad = (params.phi.array().abs() > 1.0).any();
  if (!phi_bad) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(params.phi, Eigen::EigenvaluesOnly);
    phi_bad = eig.eigenvalues().minCoeff() <= 0.0;
  }
  if (phi_bad) fit.warnings.push_back(CfaWarning::NonPositiveDefinitePhi);
  if ((fit.error_var_std.array() < options.boundary_error_variance).any()) {
    fit.warnings.push_back(CfaWarning::BoundaryErrorVariance);
  }
  if (!converged) fit.warnings.push_back(CfaWarning::NotConverged);
  if (cov.N <= p) fit.warnings.push_back(CfaWarning::SmallSample);
  return fit;
}

NullModelFit null_model_fit(const CovarianceInput& cov) {
  const auto p = cov.S.rows();
  Eigen::LLT<Eigen::MatrixXd> llt;
  auto ld = log_det_pd(cov.S, llt);
  if (!ld) throw PdError("sample covariance matrix is not positive definite");
  const double f_null = cov.S.diagonal().array().log().sum() - *ld;
  return {static_cast<double>(cov.N - 1) * std::max(f_null, 0.0), p * (p - 1) / 2};
}

FitIndices fit_indices(double chi2, long df, double chi2_null, long df_null, long N,
                       const Eigen::MatrixXd& S, const Eigen::MatrixXd& sigma_hat) {
  if (df < 0) throw ArgumentError("negative degrees of freedom");
  if (df_null <= 0) throw ArgumentError("baseline degrees of freedom must be positive");
  if (N < 2) throw ArgumentError("sample size must be at least 2");
  if (S.rows() != S.cols() || S.rows() != sigma_hat.rows() || S.cols() != sigma_hat.cols()) {
    throw ArgumentError("observed and implied covariance shapes differ");
  }
  FitIndices out;
  const double df_d = static_cast<double>(df);
  const double dfn_d = static_cast<double>(df_null);

  const double denom = std::max(chi2_null - dfn_d, 0.0);
  if (denom > 0.0) out.cfi = 1.0 - std::max(chi2 - df_d, 0.0) / denom;

  if (df > 0) {
    const double null_ratio = chi2_null / dfn_d;
    if (null_ratio != 1.0) out.tli = (null_ratio - chi2 / df_d) / (null_ratio - 1.0);
    out.rmsea = std::sqrt(std::max((chi2 - df_d) / (df_d * static_cast<double>(N - 1)), 0.0));
  }

  const auto p = S.rows();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double scale = std::sqrt(S(i, i) * S(j, j));
      const double resid = (S(i, j) - sigma_hat(i, j)) / scale;
      sum += resid * resid;
    }
  }
  out.srmr = std::sqrt(sum / static_cast<double>(half_vech(p)));
  return out;
}

StandardizedSolution standardize_solution(const Eigen::MatrixXd& loadings, const Eigen::MatrixXd& phi,
                                          const Eigen::VectorXd& error_var,
                                          const Eigen::MatrixXd& implied_sigma) {
  const auto p = loadings.rows();
  StandardizedSolution out{loadings, error_var};
  for (Eigen::Index i = 0; i < p; ++i) {
    const double var = implied_sigma(i, i);
    if (!(var > 0.0) || !std::isfinite(var)) {
      throw NumericalError("non-positive implied variance for indicator " + std::to_string(i + 1));
    }
    const double sd = std::sqrt(var);
    for (Eigen::Index j = 0; j < loadings.cols(); ++j) {
      out.loadings(i, j) = loadings(i, j) * std::sqrt(phi(j, j)) / sd;
    }
    out.error_var(i) = error_var(i) / var;
  }
  return out;
}

}  // namespace psyeval
