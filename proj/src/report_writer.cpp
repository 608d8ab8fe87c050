#include "psyeval/report_writer.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "psyeval/csv.hpp"
#include "psyeval/errors.hpp"
#include "psyeval/io.hpp"
#include "psyeval/simulate.hpp"

namespace psyeval {

namespace {

void write_indent(std::string& out, int depth) { out.append(static_cast<std::size_t>(depth) * 2, ' '); }

void dump(const nlohmann::json& v, std::string& out, int depth) {
  switch (v.type()) {
    case nlohmann::json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        write_indent(out, depth + 1);
        out += nlohmann::json(it.key()).dump();
        out += ": ";
        dump(it.value(), out, depth + 1);
      }
      out += '\n';
      write_indent(out, depth);
      out += '}';
      return;
    }
    case nlohmann::json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::none_of(v.begin(), v.end(), [](const auto& e) { return e.is_structured(); });
      if (flat) {
        out += '[';
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (i > 0) out += ", ";
          dump(v[i], out, depth);
        }
        out += ']';
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i > 0) out += ",\n";
        write_indent(out, depth + 1);
        dump(v[i], out, depth + 1);
      }
      out += '\n';
      write_indent(out, depth);
      out += ']';
      return;
    }
    case nlohmann::json::value_t::number_float: {
      const double d = v.get<double>();
      if (!std::isfinite(d)) {
        out += "{\"undefined\": \"non-finite\"}";
      } else {
        out += format_number(d);
      }
      return;
    }
    default:
      out += v.dump();
  }
}

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(to_json(Metric::of(m(i, j))));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json summaries_json(const std::vector<UnitSummary>& units) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& u : units) {
    out.push_back({{"unit", u.unit},
                   {"mu", to_json(u.mu)},
                   {"sigma", to_json(u.sigma)},
                   {"skewness", to_json(u.skewness)},
                   {"excess_kurtosis", to_json(u.excess_kurtosis)}});
  }
  return out;
}

nlohmann::json fit_json(const FitSummary& f, const ModelComparison& model) {
  if (!f.available) return {{"undefined", f.undefined}};
  nlohmann::json loadings = nlohmann::json::array();
  for (std::size_t i = 0; i < model.indicators.size(); ++i) {
    for (std::size_t j = 0; j < model.factors.size(); ++j) {
      const auto r = static_cast<Eigen::Index>(i), c = static_cast<Eigen::Index>(j);
      if (!model.pattern(r, c)) continue;
      loadings.push_back(
          {{"indicator", model.indicators[i]}, {"factor", model.factors[j]}, {"loading", to_json(Metric::of(f.loadings(r, c)))}});
    }
  }
  return {{"converged", f.converged},
          {"iterations", f.iterations},
          {"chi2", to_json(Metric::of(f.chi2))},
          {"df", f.df},
          {"cfi", to_json(f.cfi)},
          {"tli", to_json(f.tli)},
          {"rmsea", to_json(f.rmsea)},
          {"srmr", to_json(f.srmr)},
          {"warnings", f.warnings},
          {"loadings", std::move(loadings)},
          {"factor_correlations", matrix_json(f.factor_corr)}};
}

std::string cell(const Metric& m) {
  return m.defined() ? format_number(*m.value) : "undefined:" + m.undefined;
}

class CsvBuilder {
 public:
  explicit CsvBuilder(std::vector<std::string> header) { add(header); }
  void add(const std::vector<std::string>& row) { text_ += csv::join_row(row) + "\n"; }
  const std::string& str() const { return text_; }

 private:
  std::string text_;
};

}  // namespace

std::string format_number(double v) {
  if (v == 0.0) v = 0.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  std::string s(buf);
  if (s == "-0") s = "0";
  return s;
}

std::string canonical_json(const nlohmann::json& value) {
  std::string out;
  dump(value, out, 0);
  out += '\n';
  return out;
}

nlohmann::json to_json(const Metric& m) {
  if (m.defined()) return *m.value;
  return {{"undefined", m.undefined.empty() ? std::string("unknown") : m.undefined}};
}

nlohmann::json report_to_json(const ComparisonReport& report) {
  const auto& meta = report.metadata;
  nlohmann::json j;
  j["metadata"] = {{"tool_version", meta.tool_version},
                   {"scale", {{"name", meta.scale_name}, {"version", meta.scale_version}}},
                   {"simulated_label", meta.simulated_label},
                   {"human_n", meta.human_n},
                   {"simulated_n", meta.simulated_n},
                   {"human_dropped", meta.human_dropped},
                   {"simulated_dropped", meta.simulated_dropped},
                   {"decisions", meta.decisions},
                   {"seeds", meta.seeds},
                   {"warnings", meta.warnings}};

  nlohmann::json desc = nlohmann::json::object();
  for (const auto& level : report.descriptives) {
    desc[level.level] = {{"human", summaries_json(level.human)},
                         {"simulated", summaries_json(level.simulated)},
                         {"mu_mae", to_json(level.mu_mae)},
                         {"sigma_mae", to_json(level.sigma_mae)},
                         {"hai", to_json(level.hai)}};
  }
  j["descriptives"] = std::move(desc);

  nlohmann::json rel = nlohmann::json::array();
  for (const auto& r : report.reliability) {
    rel.push_back({{"level", r.level}, {"unit", r.unit}, {"human", to_json(r.human)}, {"simulated", to_json(r.simulated)}});
  }
  j["reliability"] = std::move(rel);

  nlohmann::json structural = nlohmann::json::array();
  for (const auto& m : report.structural) {
    nlohmann::json congruence = nlohmann::json::array();
    for (std::size_t f = 0; f < m.congruence_factors.size(); ++f) {
      congruence.push_back({{"factor", m.congruence_factors[f]},
                            {"tcc", to_json(m.tcc[f])},
                            {"loading_mae", to_json(m.loading_mae[f])},
                            {"band", m.bands[f]}});
    }
    nlohmann::json deltas = nlohmann::json::array();
    for (const auto& d : m.phi_deltas) {
      deltas.push_back({{"pair", d.pair}, {"human", to_json(d.human)}, {"simulated", to_json(d.simulated)}, {"delta", to_json(d.delta)}});
    }
    structural.push_back({{"model", m.model},
                          {"indicators", m.indicators},
                          {"factors", m.factors},
                          {"human", fit_json(m.human, m)},
                          {"simulated", fit_json(m.simulated, m)},
                          {"congruence", std::move(congruence)},
                          {"factor_correlation_deltas", std::move(deltas)}});
  }
  j["structural"] = std::move(structural);

  const auto& disc = report.discriminant;
  j["discriminant"] = {
      {"domains", disc.domains},
      {"human", {{"correlations", disc.human_corr ? matrix_json(*disc.human_corr) : nlohmann::json(nullptr)},
                 {"mean_abs", to_json(disc.human_mean_abs)}}},
      {"simulated", {{"correlations", disc.simulated_corr ? matrix_json(*disc.simulated_corr) : nlohmann::json(nullptr)},
                     {"mean_abs", to_json(disc.simulated_mean_abs)}}}};

  const auto& sim = report.similarity;
  if (sim.paired) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : sim.per_domain) rows.push_back({{"domain", r.domain}, {"mae", to_json(r.mae)}, {"r", to_json(r.r)}});
    j["similarity"] = {{"status", "paired"}, {"n_pairs", sim.n_pairs}, {"per_domain", std::move(rows)}, {"mean_r", to_json(sim.mean_r)}};
  } else {
    j["similarity"] = {{"status", "unpaired"}};
  }

  if (!report.criteria.empty()) {
    nlohmann::json crit = nlohmann::json::array();
    for (const auto& c : report.criteria) {
      nlohmann::json rows = nlohmann::json::array();
      for (std::size_t k = 0; k < c.labels.size(); ++k) {
        rows.push_back({{"label", c.labels[k]},
                        {"human", k < c.human.size() ? to_json(c.human[k]) : to_json(Metric::missing(c.undefined))},
                        {"simulated", k < c.simulated.size() ? to_json(c.simulated[k]) : to_json(Metric::missing(c.undefined))}});
      }
      nlohmann::json block = {{"criterion", c.criterion}, {"correlations", std::move(rows)}};
      if (!c.undefined.empty()) block["undefined"] = c.undefined;
      crit.push_back(std::move(block));
    }
    j["criterion"] = std::move(crit);
  }

  if (!report.ablation.empty()) {
    nlohmann::json abl = nlohmann::json::array();
    for (const auto& a : report.ablation) {
      nlohmann::json r2 = nlohmann::json::object();
      for (std::size_t d = 0; d < a.domains.size(); ++d) {
        r2[a.domains[d]] = a.r_squared[d] ? to_json(Metric::of(*a.r_squared[d]))
                                          : to_json(Metric::missing(a.failed ? "failed-run" : "zero-variance"));
      }
      nlohmann::json row = {{"removed_question", a.removed_question}, {"r_squared", std::move(r2)}, {"failed", a.failed}};
      if (a.failed) row["error"] = a.error;
      abl.push_back(std::move(row));
    }
    j["ablation"] = std::move(abl);
  }

  nlohmann::json pca = nlohmann::json::object();
  for (const auto& p : report.pca) {
    if (!p.basis) {
      pca[p.level] = {{"undefined", p.undefined}};
      continue;
    }
    nlohmann::json projections = nlohmann::json::object();
    for (const auto& proj : p.projections) projections[proj.source] = matrix_json(proj.coords);
    pca[p.level] = {{"eigenvalues", {to_json(Metric::of(p.basis->eigenvalues(0))), to_json(Metric::of(p.basis->eigenvalues(1)))}},
                    {"components", matrix_json(p.basis->components)},
                    {"means", matrix_json(p.basis->means.transpose())},
                    {"projections", std::move(projections)}};
  }
  j["pca"] = std::move(pca);
  return j;
}

ReportFormats parse_formats(const std::string& text) {
  ReportFormats f{false, false};
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (part == "json") {
      f.json = true;
    } else if (part == "csv") {
      f.csv = true;
    } else if (!part.empty()) {
      throw UsageError("unknown format '" + part + "' (expected json, csv)");
    }
  }
  if (!f.json && !f.csv) throw UsageError("no output format selected");
  return f;
}

std::vector<std::string> emit_report(const ComparisonReport& report, const ReportFormats& formats,
                                     const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir + ": " + ec.message());
  std::vector<std::string> files;
  auto put = [&](const std::string& name, const std::string& content) {
    write_text_file((std::filesystem::path(out_dir) / name).string(), content);
    files.push_back(name);
  };

  if (formats.json) put("report.json", canonical_json(report_to_json(report)));
  if (!formats.csv) return files;

  const std::string sim_label = report.metadata.simulated_label;
  CsvBuilder radar({"level", "series", "hai", "mu_mae", "sigma_mae"});
  for (const auto& level : report.descriptives) {
    CsvBuilder t({"unit", "human_mu", "human_sigma", "simulated_mu", "simulated_sigma"});
    for (std::size_t k = 0; k < level.human.size(); ++k) {
      t.add({level.human[k].unit, cell(level.human[k].mu), cell(level.human[k].sigma), cell(level.simulated[k].mu),
             cell(level.simulated[k].sigma)});
    }
    put("descriptives_" + level.level + ".csv", t.str());
    radar.add({level.level, sim_label, cell(level.hai), cell(level.mu_mae), cell(level.sigma_mae)});
  }
  put("hai_radar.csv", radar.str());

  CsvBuilder rel({"level", "unit", "human_alpha", "simulated_alpha"});
  for (const auto& r : report.reliability) rel.add({r.level, r.unit, cell(r.human), cell(r.simulated)});
  put("reliability.csv", rel.str());

  if (!report.structural.empty()) {
    CsvBuilder fit({"model", "sample", "converged", "chi2", "df", "cfi", "tli", "rmsea", "srmr", "warnings"});
    CsvBuilder cong({"model", "factor", "tcc", "loading_mae", "band"});
    for (const auto& m : report.structural) {
      for (const auto* side : {&m.human, &m.simulated}) {
        const std::string sample = side == &m.human ? "human" : sim_label;
        if (!side->available) {
          fit.add({m.model, sample, "undefined:" + side->undefined, "", "", "", "", "", "", ""});
          continue;
        }
        std::string warnings;
        for (const auto& w : side->warnings) warnings += (warnings.empty() ? "" : ";") + w;
        fit.add({m.model, sample, side->converged ? "true" : "false", format_number(side->chi2),
                 std::to_string(side->df), cell(side->cfi), cell(side->tli), cell(side->rmsea), cell(side->srmr), warnings});
      }
      for (std::size_t f = 0; f < m.congruence_factors.size(); ++f) {
        cong.add({m.model, m.congruence_factors[f], cell(m.tcc[f]), cell(m.loading_mae[f]), m.bands[f]});
      }
    }
    put("structural_fit.csv", fit.str());
    put("congruence.csv", cong.str());
  }

  CsvBuilder disc({"sample", "row", "column", "r"});
  const auto& d = report.discriminant;
  for (const auto& [sample, corr] : {std::pair{std::string("human"), &d.human_corr}, std::pair{sim_label, &d.simulated_corr}}) {
    if (!*corr) continue;
    for (std::size_t a = 0; a < d.domains.size(); ++a) {
      for (std::size_t b = 0; b < d.domains.size(); ++b) {
        disc.add({sample, d.domains[a], d.domains[b],
                  format_number((**corr)(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)))});
      }
    }
  }
  disc.add({"human", "mean_abs", "", cell(d.human_mean_abs)});
  disc.add({sim_label, "mean_abs", "", cell(d.simulated_mean_abs)});
  put("discriminant.csv", disc.str());

  CsvBuilder sim({"domain", "mae", "r"});
  if (report.similarity.paired) {
    for (const auto& r : report.similarity.per_domain) sim.add({r.domain, cell(r.mae), cell(r.r)});
    sim.add({"mean", "", cell(report.similarity.mean_r)});
  } else {
    sim.add({"unpaired", "", ""});
  }
  put("similarity.csv", sim.str());

  if (!report.criteria.empty()) {
    CsvBuilder crit({"criterion", "label", "human_r", "simulated_r"});
    for (const auto& c : report.criteria) {
      for (std::size_t k = 0; k < c.labels.size(); ++k) {
        crit.add({c.criterion, c.labels[k], k < c.human.size() ? cell(c.human[k]) : "undefined:" + c.undefined,
                  k < c.simulated.size() ? cell(c.simulated[k]) : "undefined:" + c.undefined});
      }
    }
    put("criterion.csv", crit.str());
  }

  if (!report.ablation.empty()) {
    std::vector<std::string> header{"removed_question", "failed"};
    for (const auto& name : report.ablation.front().domains) header.push_back(name);
    CsvBuilder abl(header);
    for (const auto& a : report.ablation) {
      std::vector<std::string> row{std::to_string(a.removed_question), a.failed ? "true" : "false"};
      for (const auto& r2 : a.r_squared) row.push_back(r2 ? format_number(*r2) : "undefined");
      abl.add(row);
    }
    put("ablation.csv", abl.str());
  }

  for (const auto& p : report.pca) {
    CsvBuilder t({"source", "dim1", "dim2"});
    for (const auto& proj : p.projections) {
      for (Eigen::Index r = 0; r < proj.coords.rows(); ++r) {
        t.add({proj.source, format_number(proj.coords(r, 0)), format_number(proj.coords(r, 1))});
      }
    }
    put("pca_" + p.level + ".csv", t.str());
  }
  return files;
}

std::string config_hash(const nlohmann::json& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical_json(config))));
  return buf;
}

void write_manifest(const RunManifest& manifest, const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir + ": " + ec.message());
  nlohmann::json j = {{"command", manifest.command},
                      {"config", manifest.config},
                      {"config_hash", config_hash(manifest.config)},
                      {"seeds", manifest.seeds},
                      {"warnings", manifest.warnings},
                      {"files", manifest.files},
                      {"versions",
                       {{"psyeval", kVersion},
                        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                      std::to_string(EIGEN_MINOR_VERSION)},
                        {"scale", manifest.scale}}}};
  write_text_file((std::filesystem::path(out_dir) / "manifest.json").string(), canonical_json(j));
}

}  // namespace psyeval
