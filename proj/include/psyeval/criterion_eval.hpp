#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "psyeval/csv.hpp"
#include "psyeval/scale_model.hpp"
#include "psyeval/simulate.hpp"

namespace psyeval {

// Behavioral criterion scale; no reverse-keyed items. CSV columns are
// <name><id>, e.g. OCB1..OCB10.
struct CriterionSpec {
  std::string name;
  std::vector<int> item_ids;
  LikertScale likert{1, 5};

  void validate() const;  // throws SchemaError
  std::string column(int item_id) const { return name + std::to_string(item_id); }
};

CriterionSpec ocb_spec();
CriterionSpec cwb_spec();

// Throws HeaderError or RangeError(row, column).
ResponseMatrix load_criterion(const csv::Table& table, const CriterionSpec& spec);

// Per-subject mean over the criterion items; NaN when a cell is missing.
// Throws MissingItemError or RangeError.
Eigen::VectorXd score_criterion(const ResponseMatrix& matrix, const CriterionSpec& spec);

struct CriterionCorrelation {
  std::string domain;
  std::string label;  // e.g. EXT~OCB
  double r = 0.0;
};

// Short domain tag: EXT, AGR, CON, NEU, OPE for the BFI-2 domains, otherwise
// the first three letters upper-cased.
std::string domain_tag(const std::string& domain);

// Pearson r of each domain with the criterion, ordered E, A, N, C, O when
// those domains are present (other domains follow in input order). Rows with
// a missing criterion total are dropped. Throws DegenerateInputError,
// LengthMismatchError or InsufficientDataError.
std::vector<CriterionCorrelation> criterion_correlations(const Eigen::MatrixXd& domain_scores,
                                                         const std::vector<std::string>& domain_labels,
                                                         const Eigen::VectorXd& criterion_totals,
                                                         const std::string& criterion_name);

struct AblationResult {
  int removed_question = 0;  // 0 = all questions kept
  std::vector<std::string> domains;
  std::vector<std::optional<double>> r_squared;  // empty entries are undefined
  bool failed = false;
  std::string error;
};

struct AblationOptions {
  std::uint64_t seed = 0;  // part of the cache key only
  std::vector<int> questions;  // defaults to 1..32
};

// Simulated response matrices keyed by (method, question mask, seed).
using SimulationCache = std::map<std::string, ResponseMatrix>;

// Baseline plus one run per removed question. Human domain scores are matched
// to transcripts by subject id. A failing run is reported, not thrown.
std::vector<AblationResult> run_ablation(const std::vector<InterviewTranscript>& transcripts, const ScaleSpec& spec,
                                         const SimulationConfig& cfg, Responder& responder,
                                         const ScoredSample& human, const AblationOptions& options = {},
                                         SimulationCache* cache = nullptr);

}  // namespace psyeval
