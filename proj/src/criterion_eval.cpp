#include "psyeval/criterion_eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "psyeval/errors.hpp"
#include "psyeval/stats_core.hpp"

namespace psyeval {

namespace {

std::vector<int> one_to(int n) {
  std::vector<int> out;
  for (int i = 1; i <= n; ++i) out.push_back(i);
  return out;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

void CriterionSpec::validate() const {
  likert.validate();
  if (name.empty()) throw SchemaError("criterion needs a name");
  if (item_ids.size() < 2) throw SchemaError("criterion " + name + " needs at least two items");
  std::vector<int> sorted = item_ids;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw DuplicateIdError("criterion " + name + " repeats an item id");
  }
}

CriterionSpec ocb_spec() { return {"OCB", one_to(10), {1, 5}}; }
CriterionSpec cwb_spec() { return {"CWB", one_to(10), {1, 5}}; }

ResponseMatrix load_criterion(const csv::Table& table, const CriterionSpec& spec) {
  spec.validate();
  std::vector<std::size_t> cols;
  for (int id : spec.item_ids) {
    auto c = table.column(spec.column(id));
    if (!c) throw HeaderError("criterion file lacks column " + spec.column(id));
    cols.push_back(*c);
  }
  std::optional<std::size_t> id_col;
  for (const char* name : {"id", "ID", "Id", "subject_id", "SubjectID"}) {
    if ((id_col = table.column(name))) break;
  }
  std::vector<std::string> ids;
  Eigen::MatrixXd values(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const long row_no = static_cast<long>(r + 1);
    ids.push_back(id_col ? trim(table.rows[r][*id_col]) : std::to_string(r + 1));
    for (std::size_t j = 0; j < cols.size(); ++j) {
      const std::string cell = trim(table.rows[r][cols[j]]);
      const std::string column = spec.column(spec.item_ids[j]);
      double v = std::numeric_limits<double>::quiet_NaN();
      if (!cell.empty() && cell != "NA") {
        std::size_t used = 0;
        try {
          v = std::stod(cell, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != cell.size() || !spec.likert.contains(v)) {
          throw RangeError("value '" + cell + "' at row " + std::to_string(row_no) + ", " + column +
                               " outside the criterion scale",
                           row_no, column);
        }
      }
      values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = v;
    }
  }
  return ResponseMatrix(std::move(ids), spec.item_ids, std::move(values), Coding::ReverseApplied, spec.likert);
}

Eigen::VectorXd score_criterion(const ResponseMatrix& matrix, const CriterionSpec& spec) {
  spec.validate();
  std::vector<Eigen::Index> cols;
  for (int id : spec.item_ids) {
    auto c = matrix.column_of(id);
    if (!c) throw MissingItemError("criterion item " + spec.column(id) + " is not in the response matrix");
    cols.push_back(*c);
  }
  Eigen::VectorXd totals(matrix.n_subjects());
  for (Eigen::Index r = 0; r < matrix.n_subjects(); ++r) {
    double sum = 0.0;
    bool missing = false;
    for (std::size_t j = 0; j < cols.size(); ++j) {
      const double v = matrix.values()(r, cols[j]);
      if (std::isnan(v)) {
        missing = true;
        continue;
      }
      if (!spec.likert.contains(v)) {
        throw RangeError("criterion value out of range at row " + std::to_string(r + 1), static_cast<long>(r + 1),
                         spec.column(spec.item_ids[j]));
      }
      sum += v;
    }
    totals(r) = missing ? std::numeric_limits<double>::quiet_NaN() : sum / static_cast<double>(cols.size());
  }
  return totals;
}

std::string domain_tag(const std::string& domain) {
  static const std::unordered_map<std::string, std::string> known = {
      {"Extraversion", "EXT"}, {"Agreeableness", "AGR"}, {"Conscientiousness", "CON"},
      {"Neuroticism", "NEU"},  {"Negative Emotionality", "NEU"}, {"Openness", "OPE"},
      {"Open-Mindedness", "OPE"}};
  if (auto it = known.find(domain); it != known.end()) return it->second;
  std::string tag = domain.substr(0, 3);
  std::transform(tag.begin(), tag.end(), tag.begin(), [](unsigned char c) { return std::toupper(c); });
  return tag;
}

std::vector<CriterionCorrelation> criterion_correlations(const Eigen::MatrixXd& domain_scores,
                                                         const std::vector<std::string>& domain_labels,
                                                         const Eigen::VectorXd& criterion_totals,
                                                         const std::string& criterion_name) {
  if (static_cast<Eigen::Index>(domain_labels.size()) != domain_scores.cols()) {
    throw ShapeError("domain labels do not match domain score columns");
  }
  if (domain_scores.rows() != criterion_totals.size()) {
    throw LengthMismatchError("domain scores have " + std::to_string(domain_scores.rows()) + " rows, criterion " +
                              std::to_string(criterion_totals.size()));
  }
  std::vector<Eigen::Index> keep;
  for (Eigen::Index r = 0; r < criterion_totals.size(); ++r) {
    if (!std::isnan(criterion_totals(r)) && domain_scores.row(r).allFinite()) keep.push_back(r);
  }
  if (keep.size() < 3) throw InsufficientDataError("criterion correlations need at least three subjects");

  static const std::vector<std::string> order = {"EXT", "AGR", "NEU", "CON", "OPE"};
  std::vector<std::size_t> columns(domain_labels.size());
  for (std::size_t j = 0; j < columns.size(); ++j) columns[j] = j;
  auto rank = [&](std::size_t j) {
    auto it = std::find(order.begin(), order.end(), domain_tag(domain_labels[j]));
    return static_cast<std::size_t>(it - order.begin());
  };
  std::stable_sort(columns.begin(), columns.end(), [&](std::size_t a, std::size_t b) { return rank(a) < rank(b); });

  std::vector<double> y;
  for (auto r : keep) y.push_back(criterion_totals(r));
  std::vector<CriterionCorrelation> out;
  for (std::size_t j : columns) {
    std::vector<double> x;
    for (auto r : keep) x.push_back(domain_scores(r, static_cast<Eigen::Index>(j)));
    const std::string tag = domain_tag(domain_labels[j]);
    out.push_back({domain_labels[j], tag + "~" + criterion_name, pearson_r(x, y)});
  }
  return out;
}

namespace {

std::string cache_key(Method method, const std::vector<int>& omitted, std::uint64_t seed) {
  std::string key = std::string(to_string(method)) + "|";
  for (std::size_t k = 1; k <= kPsiQuestionCount; ++k) {
    key += std::find(omitted.begin(), omitted.end(), static_cast<int>(k)) == omitted.end() ? '1' : '0';
  }
  return key + "|" + std::to_string(seed);
}

AblationResult evaluate_run(int removed, const std::vector<InterviewTranscript>& transcripts, const ScaleSpec& spec,
                            const SimulationConfig& cfg, Responder& responder, const ScoredSample& human,
                            const AblationOptions& options, SimulationCache* cache) {
  AblationResult result;
  result.removed_question = removed;
  for (const auto& d : spec.domains()) result.domains.push_back(d.name);
  result.r_squared.assign(spec.domains().size(), std::nullopt);
  try {
    std::vector<SubjectProfile> profiles;
    for (const auto& t : transcripts) profiles.emplace_back(removed == 0 ? t : t.without_question(removed));
    const std::vector<int> omitted = removed == 0 ? std::vector<int>{} : std::vector<int>{removed};
    const std::string key = cache_key(Method::Psi, omitted, options.seed);

    std::optional<ResponseMatrix> raw;
    if (cache) {
      if (auto it = cache->find(key); it != cache->end()) raw = it->second;
    }
    if (!raw) {
      SimulationConfig run_cfg = cfg;
      run_cfg.method = Method::Psi;
      raw = run_simulation(profiles, spec, run_cfg, responder).matrix;
      if (cache) cache->emplace(key, *raw);
    }
    const ScoredSample simulated = score(apply_reverse_coding(*raw, spec), spec, MissingPolicy::MeanIfAtMostOneMissing);

    std::unordered_map<std::string, Eigen::Index> human_row;
    for (std::size_t i = 0; i < human.subject_ids.size(); ++i) {
      human_row.emplace(human.subject_ids[i], static_cast<Eigen::Index>(i));
    }
    std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
    for (std::size_t i = 0; i < simulated.subject_ids.size(); ++i) {
      if (auto it = human_row.find(simulated.subject_ids[i]); it != human_row.end()) {
        pairs.emplace_back(static_cast<Eigen::Index>(i), it->second);
      }
    }
    if (pairs.size() < 3) throw InsufficientDataError("fewer than three subjects pair with the human sample");
    for (std::size_t d = 0; d < spec.domains().size(); ++d) {
      std::vector<double> sim, hum;
      for (const auto& [s, h] : pairs) {
        sim.push_back(simulated.domain_scores(s, static_cast<Eigen::Index>(d)));
        hum.push_back(human.domain_scores(h, static_cast<Eigen::Index>(d)));
      }
      try {
        result.r_squared[d] = r_squared(sim, hum);
      } catch (const DegenerateInputError&) {
        result.r_squared[d] = std::nullopt;
      }
    }
  } catch (const Error& e) {
    result.failed = true;
    result.error = std::string(e.name()) + ": " + e.what();
  }
  return result;
}

}  // namespace

std::vector<AblationResult> run_ablation(const std::vector<InterviewTranscript>& transcripts, const ScaleSpec& spec,
                                         const SimulationConfig& cfg, Responder& responder,
                                         const ScoredSample& human, const AblationOptions& options,
                                         SimulationCache* cache) {
  if (transcripts.empty()) throw ConfigError("ablation needs at least one transcript");
  if (human.domain_scores.cols() != static_cast<Eigen::Index>(spec.domains().size())) {
    throw ShapeError("human domain scores do not match the scale");
  }
  const std::vector<int> questions = options.questions.empty() ? one_to(kPsiQuestionCount) : options.questions;
  for (int k : questions) {
    if (k < 1 || k > static_cast<int>(kPsiQuestionCount)) {
      throw ConfigError("question index " + std::to_string(k) + " outside 1..32");
    }
  }
  std::vector<AblationResult> out;
  out.push_back(evaluate_run(0, transcripts, spec, cfg, responder, human, options, cache));
  for (int k : questions) out.push_back(evaluate_run(k, transcripts, spec, cfg, responder, human, options, cache));
  return out;
}

}  // namespace psyeval
