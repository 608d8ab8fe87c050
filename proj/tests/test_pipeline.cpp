#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "psyeval/errors.hpp"
#include "psyeval/io.hpp"
#include "psyeval/report.hpp"
#include "psyeval/report_writer.hpp"
#include "support.hpp"

using namespace psyeval;
namespace fs = std::filesystem;

namespace {

ScaleSpec two_items() {
  return ScaleSpec("pair", {1, 5}, {{1, "a", false}, {2, "b", true}}, {{"F", {1, 2}}}, {{"D", {"F"}, {}}});
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("psyeval_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const ResponseMatrix& human_sample() {
  static const ResponseMatrix m = [] {
    std::mt19937_64 rng(77);
    return testsupport::bfi2_matrix(testsupport::structured_bfi2(300, rng), Coding::ReverseApplied, "h");
  }();
  return m;
}

CompareOptions fast_options() {
  CompareOptions o;
  o.structural = true;
  o.pca = true;
  return o;
}

}  // namespace

TEST_CASE("response ingest", "[pipeline]") {
  const auto m = load_responses(csv::parse("Item1,Item2\n1,5\n3,2\n"), two_items(), Coding::Raw);
  CHECK(m.n_subjects() == 2);
  CHECK(m.n_items() == 2);
  CHECK(m.subject_ids() == std::vector<std::string>{"1", "2"});
  CHECK(m.values()(0, 1) == 5.0);

  try {
    load_responses(csv::parse("Item1,Item2\n1,7\n"), two_items(), Coding::Raw);
    FAIL("expected RangeError");
  } catch (const RangeError& e) {
    CHECK(e.row() == 1);
    CHECK(e.column() == "Item2");
  }
  CHECK_THROWS_AS(load_responses(csv::parse("Item1,Item2\n1,2.5\n"), two_items(), Coding::Raw), RangeError);
  CHECK_THROWS_AS(load_responses(csv::parse("Item1,Item2\n1,x\n"), two_items(), Coding::Raw), RangeError);
  CHECK_THROWS_AS(load_responses(csv::parse("Item1\n1\n"), two_items(), Coding::Raw), HeaderError);

  const auto with_ids = load_responses(csv::parse("subject_id,Item2,Note,Item1\nP9,NA,\"x, y\",4\nP3,,z,N/A\n"),
                                       two_items(), Coding::ReverseApplied);
  CHECK(with_ids.subject_ids() == std::vector<std::string>{"P9", "P3"});
  CHECK(with_ids.values()(0, 0) == 4.0);
  CHECK(with_ids.is_missing(0, 1));
  CHECK(with_ids.is_missing(1, 0));
  CHECK(with_ids.coding() == Coding::ReverseApplied);

  const std::string round = responses_to_csv(with_ids);
  CHECK(round == "id,Item1,Item2\nP9,4,NA\nP3,NA,NA\n");
  CHECK_THROWS_AS(load_responses_file("/nonexistent/file.csv", two_items(), Coding::Raw), IoError);
}

TEST_CASE("profile ingest", "[pipeline]") {
  std::string psi = "id";
  for (int k = 1; k <= 32; ++k) psi += ",Q" + std::to_string(k);
  psi += "\nA";
  for (int k = 1; k <= 32; ++k) psi += k == 3 ? "," : ",answer " + std::to_string(k);
  psi += "\n";
  const auto profiles = load_profiles(csv::parse(psi), Method::Psi);
  REQUIRE(profiles.size() == 1);
  const auto& t = std::get<InterviewTranscript>(profiles[0]);
  CHECK(t.subject_id == "A");
  CHECK(t.qa[2].answer == "NA");
  CHECK(t.qa[0].question == psi_questions()[0]);

  const auto shape = load_profiles(
      csv::parse("id,Marker1,Marker2,Marker3,Marker4,Marker5,Level\nx,quiet|talkative,a|b,c|d,e|f,g|h,5\n"),
      Method::Shape);
  CHECK(render_description(shape[0]).rfind("You are neither quiet nor talkative, ", 0) == 0);
  CHECK_THROWS_AS(load_profiles(csv::parse("id,S1,S2\nx,a,b\n"), Method::Persona), HeaderError);
  CHECK_THROWS_AS(
      load_profiles(csv::parse("id,Marker1,Marker2,Marker3,Marker4,Marker5,Level\nx,a|b,a|b,a|b,a|b,a|b,12\n"),
                    Method::Shape),
      ProfileError);
}

TEST_CASE("self comparison is a fixed point", "[pipeline]") {
  const auto& h = human_sample();
  const auto report = cmd_compare(h, h, bfi2_scale(), fast_options());
  REQUIRE(report.descriptives.size() == 3);
  for (const auto& level : report.descriptives) {
    CHECK(*level.mu_mae.value == 0.0);
    CHECK(*level.sigma_mae.value == 0.0);
    CHECK(*level.hai.value == Catch::Approx(1.0).margin(1e-12));
  }
  REQUIRE(report.structural.size() == 6);
  CHECK(report.structural.back().model == "FFM");
  for (const auto& model : report.structural) {
    CHECK(model.human.available);
    for (const auto& t : model.tcc) CHECK(*t.value == Catch::Approx(1.0).margin(1e-12));
    for (const auto& m : model.loading_mae) CHECK(*m.value == 0.0);
  }
  CHECK(report.similarity.paired);
  CHECK(report.similarity.n_pairs == 300);
  CHECK(*report.similarity.mean_r.value == Catch::Approx(1.0).margin(1e-12));
  CHECK(report.pca.size() == 3);
  CHECK(report.metadata.decisions.count("rmsea") == 1);
}

TEST_CASE("shuffling one domain destroys the pairing only there", "[pipeline]") {
  const auto& h = human_sample();
  const auto& scale = bfi2_scale();
  Eigen::MatrixXd v = h.values();
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(v.rows()));
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(9);
  std::shuffle(perm.begin(), perm.end(), rng);
  const auto& ext = scale.domain("Extraversion");
  for (int id : ext.item_ids) {
    const auto c = static_cast<Eigen::Index>(scale.item_index(id));
    const Eigen::VectorXd col = h.values().col(c);
    for (Eigen::Index r = 0; r < v.rows(); ++r) v(r, c) = col(perm[static_cast<std::size_t>(r)]);
  }
  const ResponseMatrix shuffled(h.subject_ids(), h.item_ids(), v, Coding::ReverseApplied, h.likert());
  CompareOptions o;
  o.structural = false;
  o.pca = false;
  const auto report = cmd_compare(h, shuffled, scale, o);
  for (const auto& row : report.similarity.per_domain) {
    if (row.domain == "Extraversion") {
      CHECK(std::abs(*row.r.value) < 0.2);
    } else {
      CHECK(*row.r.value == Catch::Approx(1.0).margin(1e-12));
    }
  }
  CHECK(*report.descriptives[2].mu_mae.value < 1e-12);
}

TEST_CASE("reports are deterministic and tag undefined cells", "[pipeline]") {
  const auto& h = human_sample();
  const Eigen::MatrixXd flat = Eigen::MatrixXd::Constant(40, 60, 3.0);
  const auto sim = testsupport::bfi2_matrix(flat, Coding::Raw, "m");
  CompareOptions o;
  o.simulated_label = "constant";
  o.seeds["simulation"] = "5";
  const auto a = canonical_json(report_to_json(cmd_compare(h, sim, bfi2_scale(), o)));
  const auto b = canonical_json(report_to_json(cmd_compare(h, sim, bfi2_scale(), o)));
  CHECK(a == b);
  CHECK(a.find("\"skewness\": {\n") != std::string::npos);
  CHECK(a.find("\"undefined\": \"zero-variance\"") != std::string::npos);
  CHECK(a.find("\"status\": \"unpaired\"") != std::string::npos);

  const auto report = cmd_compare(h, sim, bfi2_scale(), o);
  CHECK_FALSE(report.descriptives[0].hai.defined());
  CHECK(report.descriptives[0].hai.undefined == "zero-variance");
  CHECK(report.descriptives[0].mu_mae.defined());
  CHECK_FALSE(report.structural[0].simulated.available);
  CHECK(to_json(report.descriptives[0].hai) == nlohmann::json{{"undefined", "zero-variance"}});
}

TEST_CASE("canonical json", "[pipeline]") {
  nlohmann::json j = {{"b", 1.0 / 3.0}, {"a", {1, 2, 3}}, {"c", -0.0}, {"d", std::nan("")}, {"e", {{"z", true}}}};
  CHECK(canonical_json(j) ==
        "{\n  \"a\": [1, 2, 3],\n  \"b\": 0.333333,\n  \"c\": 0,\n  \"d\": {\"undefined\": \"non-finite\"},\n"
        "  \"e\": {\n    \"z\": true\n  }\n}\n");
  CHECK(format_number(1234567.0) == "1.23457e+06");
  CHECK(to_json(Metric::of(-0.0)) == nlohmann::json(0.0));
  CHECK(to_json(Metric::of(std::nan(""))) == nlohmann::json{{"undefined", "non-finite"}});
  CHECK(parse_formats("csv").json == false);
  CHECK(parse_formats("json,csv").csv);
  CHECK_THROWS_AS(parse_formats("xml"), UsageError);
  CHECK(config_hash({{"a", 1}}).size() == 16);
  CHECK(config_hash({{"a", 1}}) == config_hash({{"a", 1}}));
  CHECK(config_hash({{"a", 1}}) != config_hash({{"a", 2}}));
}

TEST_CASE("emitted files", "[pipeline]") {
  std::mt19937_64 rng(8);
  const auto& h = human_sample();
  const auto sim = testsupport::bfi2_matrix(testsupport::structured_bfi2(120, rng), Coding::ReverseApplied, "m");
  CompareOptions o;
  o.structural = false;
  const auto report = cmd_compare(h, sim, bfi2_scale(), o);
  const fs::path out = scratch("emit");
  const auto files = emit_report(report, {true, true}, out.string());
  CHECK(std::find(files.begin(), files.end(), "report.json") != files.end());
  for (const char* level : {"item", "facet", "domain"}) {
    const std::string pca = slurp(out / ("pca_" + std::string(level) + ".csv"));
    CHECK(pca.rfind("source,dim1,dim2\n", 0) == 0);
    CHECK(pca.find("\nhuman,") != std::string::npos);
    CHECK(pca.find("\nsimulated,") != std::string::npos);
  }
  CHECK(slurp(out / "similarity.csv").find("unpaired") != std::string::npos);
  CHECK(fs::exists(out / "hai_radar.csv"));

  RunManifest manifest{"compare", "BFI-2 1", {{"method", "psi"}}, {{"seed", "1"}}, {"w"}, files};
  write_manifest(manifest, out.string());
  const auto m = nlohmann::json::parse(slurp(out / "manifest.json"));
  CHECK(m["command"] == "compare");
  CHECK(m["config_hash"] == config_hash(manifest.config));
  CHECK(m["versions"]["psyeval"] == kVersion);
  fs::remove_all(out);

  CHECK_THROWS_AS(emit_report(report, {true, false}, "/proc/psyeval-cannot-write"), IoError);
}
