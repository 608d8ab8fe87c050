#include "psyeval/errors.hpp"
#include "psyeval/io.hpp"

namespace psyeval {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::size_t> require_columns(const csv::Table& table, const std::string& prefix, int count) {
  std::vector<std::size_t> out;
  for (int k = 1; k <= count; ++k) {
    const std::string name = prefix + std::to_string(k);
    auto c = table.column(name);
    if (!c) throw HeaderError("profile file lacks column " + name);
    out.push_back(*c);
  }
  return out;
}

std::string subject_of(const csv::Table& table, std::size_t row) {
  for (const auto& name : kIdColumns) {
    if (auto c = table.column(name)) return trim(table.rows[row][*c]);
  }
  return std::to_string(row + 1);
}

}  // namespace

std::vector<SubjectProfile> load_profiles(const csv::Table& table, Method method) {
  std::vector<SubjectProfile> out;
  switch (method) {
    case Method::Psi: {
      const auto cols = require_columns(table, "Q", static_cast<int>(kPsiQuestionCount));
      for (std::size_t r = 0; r < table.rows.size(); ++r) {
        InterviewTranscript t;
        t.subject_id = subject_of(table, r);
        for (std::size_t k = 0; k < kPsiQuestionCount; ++k) {
          std::string answer = trim(table.rows[r][cols[k]]);
          if (answer.empty()) answer = "NA";
          t.qa.push_back({std::string(psi_questions()[k]), std::move(answer)});
        }
        out.emplace_back(std::move(t));
      }
      break;
    }
    case Method::Persona: {
      const auto cols = require_columns(table, "S", 5);
      for (std::size_t r = 0; r < table.rows.size(); ++r) {
        PersonaProfile p;
        p.subject_id = subject_of(table, r);
        for (auto c : cols) p.sentences.push_back(trim(table.rows[r][c]));
        out.emplace_back(std::move(p));
      }
      break;
    }
    case Method::Shape: {
      const auto cols = require_columns(table, "Marker", 5);
      const auto level_col = table.column("Level");
      if (!level_col) throw HeaderError("profile file lacks column Level");
      for (std::size_t r = 0; r < table.rows.size(); ++r) {
        ShapeProfile s;
        s.subject_id = subject_of(table, r);
        for (auto c : cols) {
          const std::string cell = trim(table.rows[r][c]);
          const auto bar = cell.find('|');
          if (bar == std::string::npos) {
            throw ProfileError("row " + std::to_string(r + 1) + ": marker '" + cell + "' is not low|high");
          }
          s.markers.push_back({trim(cell.substr(0, bar)), trim(cell.substr(bar + 1))});
        }
        const std::string level = trim(table.rows[r][*level_col]);
        try {
          std::size_t used = 0;
          s.level = std::stoi(level, &used);
          if (used != level.size()) throw ProfileError("");
        } catch (const std::exception&) {
          throw ProfileError("row " + std::to_string(r + 1) + ": level '" + level + "' is not an integer");
        }
        out.emplace_back(std::move(s));
      }
      break;
    }
  }
  for (const auto& p : out) validate_profile(p);
  return out;
}

std::vector<SubjectProfile> load_profiles_file(const std::string& path, Method method) {
  return load_profiles(csv::read_file(path), method);
}

}  // namespace psyeval
