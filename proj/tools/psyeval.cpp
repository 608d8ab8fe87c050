#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>

#include "CLI11.hpp"
#include "psyeval/cfa_engine.hpp"
#include "psyeval/criterion_eval.hpp"
#include "psyeval/errors.hpp"
#include "psyeval/http_responder.hpp"
#include "psyeval/io.hpp"
#include "psyeval/pca_projection.hpp"
#include "psyeval/report.hpp"
#include "psyeval/report_writer.hpp"
#include "psyeval/simulate.hpp"

namespace fs = std::filesystem;
using namespace psyeval;

namespace {

struct Args {
  std::string scale;
  std::string human;
  std::string sim;
  std::string coding = "reversed";
  std::string sim_coding = "raw";
  std::string method = "psi";
  std::string responder = "mock";
  std::string endpoint;
  std::string model;
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "json,csv";
  std::string profiles;
  std::string transcripts;
  std::string level = "all";
  std::string cfa_model = "all";
  std::string human_criteria;
  std::string sim_criteria;
  std::string label;
  bool listwise = true;
  int max_parallel = 4;
  double temperature = 0.0;
  std::vector<int> questions;
};

Coding parse_coding(const std::string& text) {
  if (text == "raw") return Coding::Raw;
  if (text == "reversed") return Coding::ReverseApplied;
  throw UsageError("coding must be raw or reversed, got '" + text + "'");
}

ScaleSpec load_scale(const Args& a) { return a.scale.empty() ? bfi2_scale() : load_scale_spec(a.scale); }

MissingPolicy policy(const Args& a) {
  return a.listwise ? MissingPolicy::ListwiseDelete : MissingPolicy::MeanIfAtMostOneMissing;
}

void require(const std::string& value, const std::string& flag, const std::string& command) {
  if (value.empty()) throw UsageError(command + " requires " + flag);
}

std::string scale_tag(const ScaleSpec& spec) {
  return spec.version().empty() ? spec.name() : spec.name() + " v" + spec.version();
}

nlohmann::json base_config(const Args& a, const ScaleSpec& spec) {
  return {{"scale", scale_tag(spec)}, {"coding", a.coding}, {"missing_policy", a.listwise ? "listwise" : "facet-mean"}};
}

void finish(const Args& a, RunManifest manifest, const ScaleSpec& spec) {
  if (a.out.empty()) return;
  manifest.scale = scale_tag(spec);
  write_manifest(manifest, a.out);
}

std::string scores_csv(const std::vector<std::string>& ids, const std::vector<std::string>& labels,
                       const Eigen::MatrixXd& scores) {
  std::vector<std::string> header{"id"};
  header.insert(header.end(), labels.begin(), labels.end());
  std::string text = csv::join_row(header) + "\n";
  for (Eigen::Index r = 0; r < scores.rows(); ++r) {
    std::vector<std::string> row{ids[static_cast<std::size_t>(r)]};
    for (Eigen::Index c = 0; c < scores.cols(); ++c) row.push_back(format_number(scores(r, c)));
    text += csv::join_row(row) + "\n";
  }
  return text;
}

void emit(const Args& a, const std::string& name, const std::string& content, std::vector<std::string>& files) {
  if (a.out.empty()) {
    std::cout << content;
    return;
  }
  fs::create_directories(a.out);
  write_text_file((fs::path(a.out) / name).string(), content);
  files.push_back(name);
}

int cmd_score(const Args& a) {
  require(a.human, "--human", "score");
  const ScaleSpec spec = load_scale(a);
  ResponseMatrix m = load_responses_file(a.human, spec, parse_coding(a.coding));
  if (m.coding() == Coding::Raw) m = apply_reverse_coding(m, spec);
  const ScoredSample s = score(m, spec, policy(a));
  RunManifest manifest{"score", {}, base_config(a, spec), {}, {}, {}};
  if (a.out.empty()) {
    std::cout << scores_csv(s.subject_ids, s.domain_labels, s.domain_scores);
  } else {
    emit(a, "scores_item.csv", scores_csv(s.subject_ids, s.item_labels, s.item_scores), manifest.files);
    emit(a, "scores_facet.csv", scores_csv(s.subject_ids, s.facet_labels, s.facet_scores), manifest.files);
    emit(a, "scores_domain.csv", scores_csv(s.subject_ids, s.domain_labels, s.domain_scores), manifest.files);
  }
  for (const auto& id : s.dropped_subject_ids) manifest.warnings.push_back("dropped subject " + id);
  finish(a, std::move(manifest), spec);
  return 0;
}

int cmd_describe(const Args& a) {
  require(a.human, "--human", "describe");
  const ScaleSpec spec = load_scale(a);
  ResponseMatrix m = load_responses_file(a.human, spec, parse_coding(a.coding));
  if (m.coding() == Coding::Raw) m = apply_reverse_coding(m, spec);
  const ScoredSample s = score(m, spec, policy(a));
  std::string text = csv::join_row({"level", "unit", "n", "mu", "sigma", "skewness", "excess_kurtosis"}) + "\n";
  auto add_level = [&](const std::string& level, const std::vector<std::string>& labels, const Eigen::MatrixXd& x) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const Eigen::VectorXd col = x.col(j);
      const auto d = describe(as_span(col));
      text += csv::join_row({level, labels[static_cast<std::size_t>(j)], std::to_string(d.n), format_number(d.mu),
                             format_number(d.sigma), d.skewness ? format_number(*d.skewness) : "undefined:zero-variance",
                             d.excess_kurtosis ? format_number(*d.excess_kurtosis) : "undefined:zero-variance"}) +
              "\n";
    }
  };
  add_level("item", s.item_labels, s.item_scores);
  add_level("facet", s.facet_labels, s.facet_scores);
  add_level("domain", s.domain_labels, s.domain_scores);
  RunManifest manifest{"describe", {}, base_config(a, spec), {}, {}, {}};
  emit(a, "descriptives.csv", text, manifest.files);
  finish(a, std::move(manifest), spec);
  return 0;
}

std::vector<CriterionInput> load_criteria(const Args& a) {
  std::vector<CriterionInput> out;
  if (a.human_criteria.empty() && a.sim_criteria.empty()) return out;
  if (a.human_criteria.empty() || a.sim_criteria.empty()) {
    throw UsageError("--human-criteria and --sim-criteria must be given together");
  }
  const auto h = csv::read_file(a.human_criteria);
  const auto s = csv::read_file(a.sim_criteria);
  for (const auto& spec : {ocb_spec(), cwb_spec()}) {
    if (!h.column(spec.column(spec.item_ids.front())) || !s.column(spec.column(spec.item_ids.front()))) continue;
    out.push_back({spec, load_criterion(h, spec), load_criterion(s, spec)});
  }
  if (out.empty()) throw HeaderError("criterion files contain neither OCB nor CWB columns");
  return out;
}

int cmd_compare_cli(const Args& a) {
  require(a.human, "--human", "compare");
  require(a.sim, "--sim", "compare");
  require(a.out, "--out", "compare");
  const ReportFormats formats = parse_formats(a.format);
  const ScaleSpec spec = load_scale(a);
  const ResponseMatrix human = load_responses_file(a.human, spec, parse_coding(a.coding));
  const ResponseMatrix sim = load_responses_file(a.sim, spec, parse_coding(a.sim_coding));
  CompareOptions options;
  options.missing_policy = policy(a);
  options.simulated_label = a.label.empty() ? "simulated" : a.label;
  options.criteria = load_criteria(a);
  const ComparisonReport report = cmd_compare(human, sim, spec, options);

  RunManifest manifest{"compare", {}, base_config(a, spec), {}, report.metadata.warnings, {}};
  manifest.config["sim_coding"] = a.sim_coding;
  manifest.config["label"] = options.simulated_label;
  manifest.config["formats"] = a.format;
  manifest.files = emit_report(report, formats, a.out);
  finish(a, std::move(manifest), spec);
  return 0;
}

int cmd_cfa(const Args& a) {
  require(a.human, "--human", "cfa");
  const ScaleSpec spec = load_scale(a);
  ResponseMatrix m = load_responses_file(a.human, spec, parse_coding(a.coding));
  if (m.coding() == Coding::Raw) m = apply_reverse_coding(m, spec);
  const ScoredSample s = score(m, spec, policy(a));

  std::vector<std::pair<std::string, CfaModelSpec>> models;
  for (const auto& d : spec.domains()) {
    if (a.cfa_model == "all" || a.cfa_model == "tfm" || a.cfa_model == "tfm:" + d.name) {
      models.emplace_back("TFM:" + d.name, build_tfm_spec(d, spec));
    }
  }
  if (a.cfa_model == "all" || a.cfa_model == "ffm") models.emplace_back("FFM", build_ffm_spec(spec));
  if (models.empty()) throw UsageError("unknown model '" + a.cfa_model + "' (all, tfm, tfm:<domain>, ffm)");

  RunManifest manifest{"cfa", {}, base_config(a, spec), {}, {}, {}};
  manifest.config["model"] = a.cfa_model;
  std::string text = csv::join_row({"model", "converged", "iterations", "chi2", "df", "cfi", "tli", "rmsea", "srmr", "warnings"}) + "\n";
  std::string loadings = csv::join_row({"model", "indicator", "factor", "loading", "error_variance"}) + "\n";
  for (const auto& [name, model] : models) {
    const auto cov = sample_covariance(indicator_scores(s, model), model.indicator_names());
    const CfaFit fit = fit_ml(cov, model);
    auto opt = [](const std::optional<double>& v, const char* why) {
      return v ? format_number(*v) : std::string("undefined:") + why;
    };
    std::string warnings;
    for (auto w : fit.warnings) {
      warnings += (warnings.empty() ? "" : ";") + std::string(to_string(w));
      manifest.warnings.push_back(name + ": " + to_string(w));
    }
    text += csv::join_row({name, fit.converged ? "true" : "false", std::to_string(fit.iterations), format_number(fit.chi2),
                           std::to_string(fit.df), opt(fit.indices.cfi, "zero-baseline-misfit"),
                           opt(fit.indices.tli, "zero-df"), opt(fit.indices.rmsea, "zero-df"),
                           format_number(fit.indices.srmr), warnings}) +
            "\n";
    for (std::size_t i = 0; i < model.p(); ++i) {
      const auto f = model.factor_of(i);
      loadings += csv::join_row({name, model.indicator_names()[i], model.factor_names()[f],
                                 format_number(fit.loadings_std(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f))),
                                 format_number(fit.error_var_std(static_cast<Eigen::Index>(i)))}) +
                  "\n";
    }
  }
  emit(a, "cfa_fit.csv", text, manifest.files);
  if (!a.out.empty()) emit(a, "cfa_loadings.csv", loadings, manifest.files);
  finish(a, std::move(manifest), spec);
  return 0;
}

int cmd_pca(const Args& a) {
  require(a.human, "--human", "pca");
  const ScaleSpec spec = load_scale(a);
  ResponseMatrix h = load_responses_file(a.human, spec, parse_coding(a.coding));
  if (h.coding() == Coding::Raw) h = apply_reverse_coding(h, spec);
  const ScoredSample hs = score(h, spec, policy(a));
  std::optional<ScoredSample> ss;
  if (!a.sim.empty()) {
    ResponseMatrix s = load_responses_file(a.sim, spec, parse_coding(a.sim_coding));
    if (s.coding() == Coding::Raw) s = apply_reverse_coding(s, spec);
    ss = score(s, spec, policy(a));
  }
  RunManifest manifest{"pca", {}, base_config(a, spec), {}, {}, {}};
  manifest.config["level"] = a.level;
  const std::string label = a.label.empty() ? "simulated" : a.label;
  bool any = false;
  auto run = [&](const std::string& level, const Eigen::MatrixXd& human, const Eigen::MatrixXd* sim) {
    if (a.level != "all" && a.level != level) return;
    any = true;
    const PcaBasis basis = fit_pca2(human, level);
    std::string text = csv::join_row({"source", "dim1", "dim2"}) + "\n";
    for (const auto& proj : {project(basis, human, "human")}) {
      for (Eigen::Index r = 0; r < proj.coords.rows(); ++r) {
        text += csv::join_row({proj.source, format_number(proj.coords(r, 0)), format_number(proj.coords(r, 1))}) + "\n";
      }
    }
    if (sim) {
      const auto proj = project(basis, *sim, label);
      for (Eigen::Index r = 0; r < proj.coords.rows(); ++r) {
        text += csv::join_row({proj.source, format_number(proj.coords(r, 0)), format_number(proj.coords(r, 1))}) + "\n";
      }
    }
    emit(a, "pca_" + level + ".csv", text, manifest.files);
  };
  run("item", hs.item_scores, ss ? &ss->item_scores : nullptr);
  run("facet", hs.facet_scores, ss ? &ss->facet_scores : nullptr);
  run("domain", hs.domain_scores, ss ? &ss->domain_scores : nullptr);
  if (!any) throw UsageError("--level must be item, facet, domain or all");
  finish(a, std::move(manifest), spec);
  return 0;
}

std::unique_ptr<Responder> make_responder(const Args& a, const ScaleSpec& spec) {
  if (a.responder == "mock") return std::make_unique<MockResponder>(a.seed, spec.likert());
  if (a.responder == "http") {
    if (a.endpoint.empty() || a.model.empty()) throw UsageError("the http responder needs --endpoint and --model");
    return std::make_unique<HttpResponder>(HttpResponder::from_environment(a.endpoint, a.model));
  }
  throw UsageError("--responder must be mock or http");
}

SimulationConfig sim_config(const Args& a) {
  SimulationConfig cfg;
  cfg.method = parse_method(a.method);
  cfg.temperature = a.temperature;
  cfg.max_parallel = a.max_parallel;
  return cfg;
}

nlohmann::json responder_config(const Args& a) {
  nlohmann::json j = {{"responder", a.responder}, {"method", a.method}, {"temperature", a.temperature}};
  if (a.responder == "http") {
    j["endpoint"] = a.endpoint;
    j["model"] = a.model;
  }
  return j;
}

int cmd_simulate(const Args& a) {
  require(a.profiles, "--profiles", "simulate");
  const ScaleSpec spec = load_scale(a);
  const SimulationConfig cfg = sim_config(a);
  const auto profiles = load_profiles_file(a.profiles, cfg.method);
  auto responder = make_responder(a, spec);
  const SimulationResult result = run_simulation(profiles, spec, cfg, *responder);

  RunManifest manifest{"simulate", {}, responder_config(a), {{"responder", std::to_string(a.seed)}}, {}, {}};
  manifest.config["scale"] = scale_tag(spec);
  emit(a, "responses.csv", responses_to_csv(result.matrix), manifest.files);
  std::string errors = csv::join_row({"subject", "item", "reason", "attempts", "message"}) + "\n";
  for (const auto& e : result.errors) {
    errors += csv::join_row({e.subject_id, item_label(e.item_id), e.reason, std::to_string(e.attempts), e.message}) + "\n";
    manifest.warnings.push_back(e.subject_id + " " + item_label(e.item_id) + ": " + e.reason);
  }
  if (!a.out.empty()) emit(a, "errors.csv", errors, manifest.files);
  finish(a, std::move(manifest), spec);
  return 0;
}

int cmd_ablate(const Args& a) {
  require(a.transcripts, "--transcripts", "ablate");
  require(a.human, "--human", "ablate");
  const ScaleSpec spec = load_scale(a);
  SimulationConfig cfg = sim_config(a);
  cfg.method = Method::Psi;
  std::vector<InterviewTranscript> transcripts;
  for (auto& p : load_profiles_file(a.transcripts, Method::Psi)) transcripts.push_back(std::get<InterviewTranscript>(p));
  ResponseMatrix h = load_responses_file(a.human, spec, parse_coding(a.coding));
  if (h.coding() == Coding::Raw) h = apply_reverse_coding(h, spec);
  const ScoredSample human = score(h, spec, policy(a));
  auto responder = make_responder(a, spec);
  AblationOptions options{a.seed, a.questions};
  SimulationCache cache;
  const auto results = run_ablation(transcripts, spec, cfg, *responder, human, options, &cache);

  RunManifest manifest{"ablate", {}, responder_config(a), {{"responder", std::to_string(a.seed)}}, {}, {}};
  manifest.config["scale"] = scale_tag(spec);
  std::vector<std::string> header{"removed_question", "failed"};
  for (const auto& d : spec.domains()) header.push_back(d.name);
  std::string text = csv::join_row(header) + "\n";
  for (const auto& r : results) {
    std::vector<std::string> row{std::to_string(r.removed_question), r.failed ? "true" : "false"};
    for (const auto& v : r.r_squared) row.push_back(v ? format_number(*v) : "undefined");
    text += csv::join_row(row) + "\n";
    if (r.failed) manifest.warnings.push_back("question " + std::to_string(r.removed_question) + ": " + r.error);
  }
  emit(a, "ablation.csv", text, manifest.files);
  finish(a, std::move(manifest), spec);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Psychometric comparison of human and simulated questionnaire data"};
  app.require_subcommand(1);
  Args a;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--scale", a.scale, "Scale spec JSON (default: bundled BFI-2)");
    sub->add_option("--coding", a.coding, "Coding of --human: raw or reversed")->capture_default_str();
    sub->add_flag("!--impute", a.listwise, "Fill a single missing item per facet instead of listwise deletion");
    sub->add_option("--out", a.out, "Output directory");
  };
  auto responder_opts = [&](CLI::App* sub) {
    sub->add_option("--responder", a.responder, "mock or http")->capture_default_str();
    sub->add_option("--endpoint", a.endpoint, "Base URL of an OpenAI-compatible API");
    sub->add_option("--model", a.model, "Model name for the http responder");
    sub->add_option("--seed", a.seed, "Seed of the mock responder")->capture_default_str();
    sub->add_option("--max-parallel", a.max_parallel, "Concurrent requests")->capture_default_str();
    sub->add_option("--temperature", a.temperature, "Sampling temperature")->capture_default_str();
  };

  auto* score_cmd = app.add_subcommand("score", "Score items, facets and domains");
  common(score_cmd);
  score_cmd->add_option("--human", a.human, "Response CSV")->required();

  auto* describe_cmd = app.add_subcommand("describe", "Descriptive statistics at every level");
  common(describe_cmd);
  describe_cmd->add_option("--human", a.human, "Response CSV")->required();

  auto* compare_cmd = app.add_subcommand("compare", "Full comparison report");
  common(compare_cmd);
  compare_cmd->add_option("--human", a.human, "Human response CSV")->required();
  compare_cmd->add_option("--sim", a.sim, "Simulated response CSV")->required();
  compare_cmd->add_option("--sim-coding", a.sim_coding, "Coding of --sim: raw or reversed")->capture_default_str();
  compare_cmd->add_option("--method", a.label, "Label of the simulated sample in the report");
  compare_cmd->add_option("--format", a.format, "json, csv or json,csv")->capture_default_str();
  compare_cmd->add_option("--human-criteria", a.human_criteria, "Human OCB/CWB CSV");
  compare_cmd->add_option("--sim-criteria", a.sim_criteria, "Simulated OCB/CWB CSV");

  auto* cfa_cmd = app.add_subcommand("cfa", "Fit the confirmatory factor models");
  common(cfa_cmd);
  cfa_cmd->add_option("--human", a.human, "Response CSV")->required();
  cfa_cmd->add_option("--model", a.cfa_model, "all, tfm, tfm:<domain> or ffm")->capture_default_str();

  auto* pca_cmd = app.add_subcommand("pca", "Two-component PCA projection");
  common(pca_cmd);
  pca_cmd->add_option("--human", a.human, "Human response CSV (fits the basis)")->required();
  pca_cmd->add_option("--sim", a.sim, "Simulated response CSV to project");
  pca_cmd->add_option("--sim-coding", a.sim_coding, "Coding of --sim")->capture_default_str();
  pca_cmd->add_option("--level", a.level, "item, facet, domain or all")->capture_default_str();
  pca_cmd->add_option("--method", a.label, "Label of the simulated sample");

  auto* sim_cmd = app.add_subcommand("simulate", "Simulate questionnaire responses");
  sim_cmd->add_option("--scale", a.scale, "Scale spec JSON (default: bundled BFI-2)");
  sim_cmd->add_option("--method", a.method, "psi, persona or shape")->capture_default_str();
  sim_cmd->add_option("--profiles", a.profiles, "Profile CSV");
  sim_cmd->add_option("--out", a.out, "Output directory (default: responses to stdout)");
  responder_opts(sim_cmd);

  auto* ablate_cmd = app.add_subcommand("ablate", "Leave-one-question-out ablation");
  common(ablate_cmd);
  ablate_cmd->add_option("--transcripts", a.transcripts, "Interview transcript CSV (Q1..Q32)");
  ablate_cmd->add_option("--human", a.human, "Human response CSV");
  ablate_cmd->add_option("--questions", a.questions, "Subset of questions to remove (default 1..32)")
      ->delimiter(',');
  responder_opts(ablate_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*score_cmd) return cmd_score(a);
    if (*describe_cmd) return cmd_describe(a);
    if (*compare_cmd) return cmd_compare_cli(a);
    if (*cfa_cmd) return cmd_cfa(a);
    if (*pca_cmd) return cmd_pca(a);
    if (*sim_cmd) return cmd_simulate(a);
    if (*ablate_cmd) return cmd_ablate(a);
  } catch (const UsageError& e) {
    std::cerr << "UsageError: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << e.name() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "IoError: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
