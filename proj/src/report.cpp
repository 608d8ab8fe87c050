#include "psyeval/report.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_map>

#include "psyeval/errors.hpp"

namespace psyeval {

Metric Metric::of(double v) {
  if (!std::isfinite(v)) return missing("non-finite");
  return {v == 0.0 ? 0.0 : v, {}};
}

namespace {

template <typename F>
Metric guarded(F&& f) {
  try {
    return Metric::of(f());
  } catch (const Error& e) {
    return Metric::missing(e.reason());
  }
}

const char* policy_name(MissingPolicy p) {
  return p == MissingPolicy::ListwiseDelete ? "listwise-delete" : "mean-if-at-most-one-missing-per-facet";
}

std::vector<UnitSummary> summarize(const Eigen::MatrixXd& scores, const std::vector<std::string>& labels) {
  std::vector<UnitSummary> out;
  for (Eigen::Index j = 0; j < scores.cols(); ++j) {
    UnitSummary u;
    u.unit = labels[static_cast<std::size_t>(j)];
    try {
      const Eigen::VectorXd col = scores.col(j);
      const auto d = describe(as_span(col));
      u.mu = Metric::of(d.mu);
      u.sigma = Metric::of(d.sigma);
      u.skewness = d.skewness ? Metric::of(*d.skewness) : Metric::missing("zero-variance");
      u.excess_kurtosis = d.excess_kurtosis ? Metric::of(*d.excess_kurtosis) : Metric::missing("zero-variance");
    } catch (const Error& e) {
      u.mu = u.sigma = u.skewness = u.excess_kurtosis = Metric::missing(e.reason());
    }
    out.push_back(std::move(u));
  }
  return out;
}

// Values of one field across units, or the first undefined reason.
std::optional<std::vector<double>> profile(const std::vector<UnitSummary>& units, Metric UnitSummary::*field,
                                           std::string& reason) {
  std::vector<double> out;
  for (const auto& u : units) {
    const Metric& m = u.*field;
    if (!m.defined()) {
      reason = m.undefined;
      return std::nullopt;
    }
    out.push_back(*m.value);
  }
  return out;
}

LevelDescriptives level_descriptives(const std::string& level, const Eigen::MatrixXd& human,
                                     const Eigen::MatrixXd& simulated, const std::vector<std::string>& labels) {
  LevelDescriptives out;
  out.level = level;
  out.human = summarize(human, labels);
  out.simulated = summarize(simulated, labels);
  std::string reason;
  auto mu_h = profile(out.human, &UnitSummary::mu, reason);
  auto mu_s = profile(out.simulated, &UnitSummary::mu, reason);
  out.mu_mae = (mu_h && mu_s) ? guarded([&] { return mae(*mu_h, *mu_s); }) : Metric::missing(reason);
  auto sd_h = profile(out.human, &UnitSummary::sigma, reason);
  auto sd_s = profile(out.simulated, &UnitSummary::sigma, reason);
  if (sd_h && sd_s) {
    out.sigma_mae = guarded([&] { return mae(*sd_h, *sd_s); });
    out.hai = guarded([&] { return hai(*sd_h, *sd_s); });
  } else {
    out.sigma_mae = out.hai = Metric::missing(reason);
  }
  return out;
}

Eigen::MatrixXd columns_of(const Eigen::MatrixXd& m, const std::vector<std::size_t>& cols) {
  Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = m.col(static_cast<Eigen::Index>(cols[j]));
  return out;
}

FitSummary fit_summary(const ScoredSample& sample, const CfaModelSpec& model, const CfaOptions& options,
                       std::vector<std::string>& warnings, const std::string& tag) {
  FitSummary out;
  try {
    const Eigen::MatrixXd x = indicator_scores(sample, model);
    const auto cov = sample_covariance(x, model.indicator_names());
    const CfaFit fit = fit_ml(cov, model, options);
    out.available = true;
    out.converged = fit.converged;
    out.iterations = fit.iterations;
    out.chi2 = fit.chi2;
    out.df = fit.df;
    out.cfi = fit.indices.cfi ? Metric::of(*fit.indices.cfi) : Metric::missing("zero-baseline-misfit");
    out.tli = fit.indices.tli ? Metric::of(*fit.indices.tli) : Metric::missing("zero-df");
    out.rmsea = fit.indices.rmsea ? Metric::of(*fit.indices.rmsea) : Metric::missing("zero-df");
    out.srmr = Metric::of(fit.indices.srmr);
    out.loadings = fit.loadings_std;
    out.factor_corr = fit.factor_corr;
    for (auto w : fit.warnings) {
      out.warnings.emplace_back(to_string(w));
      warnings.push_back(tag + ": " + to_string(w));
    }
  } catch (const Error& e) {
    out.available = false;
    out.undefined = std::string(e.reason());
    warnings.push_back(tag + ": " + std::string(e.name()) + ": " + e.what());
  }
  return out;
}

ModelComparison compare_model(const std::string& name, const CfaModelSpec& model, const ScoredSample& human,
                              const ScoredSample& simulated, const CompareOptions& options,
                              std::vector<std::string>& warnings) {
  ModelComparison out;
  out.model = name;
  out.indicators = model.indicator_names();
  out.factors = model.factor_names();
  out.pattern = model.pattern();
  out.human = fit_summary(human, model, options.cfa, warnings, name + " human");
  out.simulated = fit_summary(simulated, model, options.cfa, warnings, name + " " + options.simulated_label);

  const bool both = out.human.available && out.simulated.available;
  const std::string reason = !out.human.available ? out.human.undefined : out.simulated.undefined;
  for (std::size_t j = 0; j < model.m(); ++j) {
    out.congruence_factors.push_back(model.factor_names()[j]);
    if (!both) {
      out.tcc.push_back(Metric::missing(reason));
      out.loading_mae.push_back(Metric::missing(reason));
      out.bands.emplace_back("undefined");
    }
  }
  if (both) {
    try {
      const auto report = compare_solutions(model, out.human.loadings, out.simulated.loadings);
      for (const auto& f : report.per_factor) {
        out.tcc.push_back(Metric::of(f.phi));
        out.loading_mae.push_back(Metric::of(f.loading_mae));
        out.bands.emplace_back(to_string(f.band));
      }
    } catch (const Error& e) {
      out.tcc.assign(model.m(), Metric::missing(e.reason()));
      out.loading_mae.assign(model.m(), Metric::missing(e.reason()));
      out.bands.assign(model.m(), "undefined");
    }
  }
  for (std::size_t a = 0; a < model.m(); ++a) {
    for (std::size_t b = a + 1; b < model.m(); ++b) {
      FactorCorrelationDelta d;
      d.pair = model.factor_names()[a] + "~" + model.factor_names()[b];
      const auto ia = static_cast<Eigen::Index>(a), ib = static_cast<Eigen::Index>(b);
      d.human = out.human.available ? Metric::of(out.human.factor_corr(ia, ib)) : Metric::missing(out.human.undefined);
      d.simulated = out.simulated.available ? Metric::of(out.simulated.factor_corr(ia, ib))
                                            : Metric::missing(out.simulated.undefined);
      d.delta = (d.human.defined() && d.simulated.defined()) ? Metric::of(*d.simulated.value - *d.human.value)
                                                              : Metric::missing(reason);
      out.phi_deltas.push_back(std::move(d));
    }
  }
  return out;
}

SimilarityBlock similarity_block(const ResponseMatrix& human_raw, const ResponseMatrix& sim_raw,
                                 const ScoredSample& human, const ScoredSample& simulated) {
  SimilarityBlock out;
  const std::set<std::string> h_ids(human_raw.subject_ids().begin(), human_raw.subject_ids().end());
  const std::set<std::string> s_ids(sim_raw.subject_ids().begin(), sim_raw.subject_ids().end());
  out.paired = h_ids == s_ids && h_ids.size() == human_raw.subject_ids().size() &&
               s_ids.size() == sim_raw.subject_ids().size();
  if (!out.paired) return out;

  std::unordered_map<std::string, Eigen::Index> sim_row;
  for (std::size_t i = 0; i < simulated.subject_ids.size(); ++i) {
    sim_row.emplace(simulated.subject_ids[i], static_cast<Eigen::Index>(i));
  }
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  for (std::size_t i = 0; i < human.subject_ids.size(); ++i) {
    if (auto it = sim_row.find(human.subject_ids[i]); it != sim_row.end()) {
      pairs.emplace_back(static_cast<Eigen::Index>(i), it->second);
    }
  }
  out.n_pairs = pairs.size();
  std::vector<double> rs;
  std::string reason;
  for (std::size_t d = 0; d < human.domain_labels.size(); ++d) {
    std::vector<double> h, s;
    for (const auto& [hi, si] : pairs) {
      h.push_back(human.domain_scores(hi, static_cast<Eigen::Index>(d)));
      s.push_back(simulated.domain_scores(si, static_cast<Eigen::Index>(d)));
    }
    SimilarityRow row;
    row.domain = human.domain_labels[d];
    row.mae = guarded([&] { return mae(h, s); });
    row.r = guarded([&] { return pearson_r(h, s); });
    if (row.r.defined()) {
      rs.push_back(*row.r.value);
    } else if (reason.empty()) {
      reason = row.r.undefined;
    }
    out.per_domain.push_back(std::move(row));
  }
  if (!rs.empty() && rs.size() == out.per_domain.size()) {
    out.mean_r = Metric::of(std::accumulate(rs.begin(), rs.end(), 0.0) / static_cast<double>(rs.size()));
  } else {
    out.mean_r = Metric::missing(reason.empty() ? "insufficient-data" : reason);
  }
  return out;
}

DiscriminantBlock discriminant_block(const ScoredSample& human, const ScoredSample& simulated) {
  DiscriminantBlock out;
  out.domains = human.domain_labels;
  try {
    out.human_corr = correlation_matrix(human.domain_scores);
    out.human_mean_abs = guarded([&] { return discriminant_mean_abs(*out.human_corr); });
  } catch (const Error& e) {
    out.human_mean_abs = Metric::missing(e.reason());
  }
  try {
    out.simulated_corr = correlation_matrix(simulated.domain_scores);
    out.simulated_mean_abs = guarded([&] { return discriminant_mean_abs(*out.simulated_corr); });
  } catch (const Error& e) {
    out.simulated_mean_abs = Metric::missing(e.reason());
  }
  return out;
}

// Domain scores and criterion totals restricted to subjects present in both.
std::vector<Metric> criterion_side(const ScoredSample& sample, const ResponseMatrix& criterion,
                                   const CriterionSpec& spec, std::vector<std::string>& labels) {
  const Eigen::VectorXd totals = score_criterion(criterion, spec);
  std::unordered_map<std::string, Eigen::Index> row_of;
  for (std::size_t i = 0; i < criterion.subject_ids().size(); ++i) {
    row_of.emplace(criterion.subject_ids()[i], static_cast<Eigen::Index>(i));
  }
  std::vector<Eigen::Index> rows, crit_rows;
  for (std::size_t i = 0; i < sample.subject_ids.size(); ++i) {
    if (auto it = row_of.find(sample.subject_ids[i]); it != row_of.end()) {
      rows.push_back(static_cast<Eigen::Index>(i));
      crit_rows.push_back(it->second);
    }
  }
  Eigen::MatrixXd domains(static_cast<Eigen::Index>(rows.size()), sample.domain_scores.cols());
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    domains.row(static_cast<Eigen::Index>(k)) = sample.domain_scores.row(rows[k]);
    y(static_cast<Eigen::Index>(k)) = totals(crit_rows[k]);
  }
  std::vector<Metric> out;
  labels.clear();
  for (const auto& c : criterion_correlations(domains, sample.domain_labels, y, spec.name)) {
    labels.push_back(c.label);
    out.push_back(Metric::of(c.r));
  }
  return out;
}

CriterionBlock criterion_block(const CriterionInput& input, const ScoredSample& human,
                               const ScoredSample& simulated) {
  CriterionBlock out;
  out.criterion = input.spec.name;
  std::vector<std::string> labels;
  try {
    out.human = criterion_side(human, input.human, input.spec, labels);
    out.labels = labels;
  } catch (const Error& e) {
    out.undefined = std::string(e.reason());
  }
  try {
    out.simulated = criterion_side(simulated, input.simulated, input.spec, labels);
    if (out.labels.empty()) out.labels = labels;
  } catch (const Error& e) {
    if (out.undefined.empty()) out.undefined = std::string(e.reason());
  }
  return out;
}

PcaBlock pca_block(const std::string& level, const Eigen::MatrixXd& human, const Eigen::MatrixXd& simulated,
                   const std::string& simulated_label) {
  PcaBlock out;
  out.level = level;
  try {
    out.basis = fit_pca2(human, level);
    out.projections.push_back(project(*out.basis, human, "human"));
    out.projections.push_back(project(*out.basis, simulated, simulated_label));
  } catch (const Error& e) {
    out.undefined = std::string(e.reason());
    out.basis.reset();
    out.projections.clear();
  }
  return out;
}

}  // namespace

ComparisonReport cmd_compare(const ResponseMatrix& human, const ResponseMatrix& simulated, const ScaleSpec& spec,
                             const CompareOptions& options) {
  const ResponseMatrix human_coded = human.coding() == Coding::Raw ? apply_reverse_coding(human, spec) : human;
  const ResponseMatrix sim_coded =
      simulated.coding() == Coding::Raw ? apply_reverse_coding(simulated, spec) : simulated;
  const ScoredSample h = score(human_coded, spec, options.missing_policy);
  const ScoredSample s = score(sim_coded, spec, options.missing_policy);

  ComparisonReport report;
  auto& meta = report.metadata;
  meta.scale_name = spec.name();
  meta.scale_version = spec.version();
  meta.simulated_label = options.simulated_label;
  meta.human_n = h.subject_ids.size();
  meta.simulated_n = s.subject_ids.size();
  meta.human_dropped = h.dropped_subject_ids;
  meta.simulated_dropped = s.dropped_subject_ids;
  meta.seeds = options.seeds;
  meta.decisions = {
      {"sigma_denominator", "n-1"},
      {"moments", "skewness and excess kurtosis from biased central moments"},
      {"missing_policy", policy_name(options.missing_policy)},
      {"cfa_estimator", "maximum likelihood; factor variances fixed to 1; Fisher scoring with line search"},
      {"rmsea", "sqrt(max((chi2 - df) / (df (N - 1)), 0))"},
      {"srmr", "correlation-metric residuals over the lower triangle including the diagonal"},
      {"tcc", "uncentered, no sign alignment"},
      {"loading_mae", "free (pattern-active) loadings only"},
      {"pca", "covariance PCA centered on human means, no scaling; largest entry of each component positive"},
      {"similarity_pairing", "paired by subject id when both samples carry the same id set"},
  };
  if (!h.dropped_subject_ids.empty()) {
    meta.warnings.push_back("human: " + std::to_string(h.dropped_subject_ids.size()) + " subjects dropped for missing data");
  }
  if (!s.dropped_subject_ids.empty()) {
    meta.warnings.push_back(options.simulated_label + ": " + std::to_string(s.dropped_subject_ids.size()) +
                            " subjects dropped for missing data");
  }

  report.descriptives.push_back(level_descriptives("item", h.item_scores, s.item_scores, h.item_labels));
  report.descriptives.push_back(level_descriptives("facet", h.facet_scores, s.facet_scores, h.facet_labels));
  report.descriptives.push_back(level_descriptives("domain", h.domain_scores, s.domain_scores, h.domain_labels));

  auto alpha_of = [](const Eigen::MatrixXd& items) { return guarded([&] { return cronbach_alpha(items); }); };
  for (const auto& facet : spec.facets()) {
    std::vector<std::size_t> cols;
    for (int id : facet.item_ids) cols.push_back(spec.item_index(id));
    report.reliability.push_back(
        {"facet", facet.name, alpha_of(columns_of(h.item_scores, cols)), alpha_of(columns_of(s.item_scores, cols))});
  }
  for (const auto& domain : spec.domains()) {
    std::vector<std::size_t> cols;
    for (int id : domain.item_ids) cols.push_back(spec.item_index(id));
    report.reliability.push_back({"domain", domain.name, alpha_of(columns_of(h.item_scores, cols)),
                                  alpha_of(columns_of(s.item_scores, cols))});
  }

  if (options.structural) {
    for (const auto& domain : spec.domains()) {
      const std::string name = "TFM:" + domain.name;
      try {
        report.structural.push_back(
            compare_model(name, build_tfm_spec(domain, spec), h, s, options, meta.warnings));
      } catch (const Error& e) {
        meta.warnings.push_back(name + ": " + std::string(e.name()) + ": " + e.what());
      }
    }
    try {
      report.structural.push_back(compare_model("FFM", build_ffm_spec(spec), h, s, options, meta.warnings));
    } catch (const Error& e) {
      meta.warnings.push_back(std::string("FFM: ") + std::string(e.name()) + ": " + e.what());
    }
  }

  report.discriminant = discriminant_block(h, s);
  report.similarity = similarity_block(human, simulated, h, s);
  for (const auto& c : options.criteria) report.criteria.push_back(criterion_block(c, h, s));
  report.ablation = options.ablation;

  if (options.pca) {
    report.pca.push_back(pca_block("item", h.item_scores, s.item_scores, options.simulated_label));
    report.pca.push_back(pca_block("facet", h.facet_scores, s.facet_scores, options.simulated_label));
    report.pca.push_back(pca_block("domain", h.domain_scores, s.domain_scores, options.simulated_label));
  }
  return report;
}

}  // namespace psyeval
