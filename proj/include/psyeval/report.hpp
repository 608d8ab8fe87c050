#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "psyeval/cfa_engine.hpp"
#include "psyeval/congruence.hpp"
#include "psyeval/criterion_eval.hpp"
#include "psyeval/pca_projection.hpp"
#include "psyeval/scale_model.hpp"
#include "psyeval/stats_core.hpp"

namespace psyeval {

inline constexpr const char* kVersion = "0.1.0";

// A report cell: a finite number, or the reason it is undefined.
struct Metric {
  std::optional<double> value;
  std::string undefined;

  static Metric of(double v);  // non-finite values become undefined
  static Metric missing(std::string_view reason) { return {std::nullopt, std::string(reason)}; }
  bool defined() const { return value.has_value(); }
};

struct UnitSummary {
  std::string unit;
  Metric mu, sigma, skewness, excess_kurtosis;
};

struct LevelDescriptives {
  std::string level;  // item | facet | domain
  std::vector<UnitSummary> human;
  std::vector<UnitSummary> simulated;
  Metric mu_mae, sigma_mae, hai;
};

struct ReliabilityRow {
  std::string level;
  std::string unit;
  Metric human, simulated;
};

struct FitSummary {
  bool available = false;
  std::string undefined;  // reason when not available
  bool converged = false;
  int iterations = 0;
  double chi2 = 0.0;
  long df = 0;
  Metric cfi, tli, rmsea, srmr;
  std::vector<std::string> warnings;
  Eigen::MatrixXd loadings;  // standardized, p x m
  Eigen::MatrixXd factor_corr;
};

struct FactorCorrelationDelta {
  std::string pair;  // "A~B"
  Metric human, simulated, delta;
};

struct ModelComparison {
  std::string model;  // e.g. TFM:Extraversion, FFM
  std::vector<std::string> indicators;
  std::vector<std::string> factors;
  BoolMatrix pattern;
  FitSummary human, simulated;
  std::vector<std::string> congruence_factors;
  std::vector<Metric> tcc, loading_mae;
  std::vector<std::string> bands;
  std::vector<FactorCorrelationDelta> phi_deltas;
};

struct DiscriminantBlock {
  std::vector<std::string> domains;
  std::optional<Eigen::MatrixXd> human_corr, simulated_corr;
  Metric human_mean_abs, simulated_mean_abs;
};

struct SimilarityRow {
  std::string domain;
  Metric mae, r;
};

struct SimilarityBlock {
  bool paired = false;
  std::size_t n_pairs = 0;
  std::vector<SimilarityRow> per_domain;
  Metric mean_r;
};

struct CriterionBlock {
  std::string criterion;
  std::vector<std::string> labels;
  std::vector<Metric> human, simulated;
  std::string undefined;
};

struct PcaBlock {
  std::string level;
  std::string undefined;
  std::optional<PcaBasis> basis;
  std::vector<Projection> projections;
};

struct ReportMetadata {
  std::string tool_version = kVersion;
  std::string scale_name;
  std::string scale_version;
  std::string simulated_label;
  std::size_t human_n = 0, simulated_n = 0;
  std::vector<std::string> human_dropped, simulated_dropped;
  std::map<std::string, std::string> decisions;
  std::map<std::string, std::string> seeds;
  std::vector<std::string> warnings;
};

struct ComparisonReport {
  ReportMetadata metadata;
  std::vector<LevelDescriptives> descriptives;  // item, facet, domain
  std::vector<ReliabilityRow> reliability;
  std::vector<ModelComparison> structural;      // one TFM per domain, then FFM
  DiscriminantBlock discriminant;
  SimilarityBlock similarity;
  std::vector<CriterionBlock> criteria;
  std::vector<AblationResult> ablation;
  std::vector<PcaBlock> pca;
};

struct CriterionInput {
  CriterionSpec spec;
  ResponseMatrix human;
  ResponseMatrix simulated;
};

struct CompareOptions {
  MissingPolicy missing_policy = MissingPolicy::ListwiseDelete;
  std::string simulated_label = "simulated";
  CfaOptions cfa;
  bool structural = true;
  bool pca = true;
  std::map<std::string, std::string> seeds;
  std::vector<CriterionInput> criteria;
  std::vector<AblationResult> ablation;
};

// Raw matrices are reverse coded before scoring. Scoring failures propagate;
// everything downstream that fails locally becomes an undefined cell.
ComparisonReport cmd_compare(const ResponseMatrix& human, const ResponseMatrix& simulated, const ScaleSpec& spec,
                             const CompareOptions& options = {});

}  // namespace psyeval
