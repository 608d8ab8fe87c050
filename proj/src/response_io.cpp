#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

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

std::optional<std::size_t> id_column(const csv::Table& table) {
  for (const auto& name : kIdColumns) {
    if (auto c = table.column(name)) return c;
  }
  return std::nullopt;
}

}  // namespace

ResponseMatrix load_responses(const csv::Table& table, const ScaleSpec& spec, Coding coding) {
  std::vector<std::size_t> columns;
  std::vector<int> item_ids;
  for (const auto& item : spec.items()) {
    const std::string label = item_label(item.id);
    auto c = table.column(label);
    if (!c) throw HeaderError("response file lacks column " + label);
    columns.push_back(*c);
    item_ids.push_back(item.id);
  }
  const auto id_col = id_column(table);
  const auto& likert = spec.likert();

  std::vector<std::string> subject_ids;
  Eigen::MatrixXd values(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const long row_no = static_cast<long>(r + 1);
    subject_ids.push_back(id_col ? trim(row[*id_col]) : std::to_string(r + 1));
    for (std::size_t j = 0; j < columns.size(); ++j) {
      const std::string cell = trim(row[columns[j]]);
      const std::string label = item_label(item_ids[j]);
      double v = std::numeric_limits<double>::quiet_NaN();
      if (!cell.empty() && cell != "NA" && cell != "na" && cell != "N/A") {
        std::size_t used = 0;
        try {
          v = std::stod(cell, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != cell.size() || !std::isfinite(v)) {
          throw RangeError("non-numeric value '" + cell + "' at row " + std::to_string(row_no) + ", " + label,
                           row_no, label);
        }
        if (!likert.contains(v) || v != std::floor(v)) {
          throw RangeError("value " + cell + " at row " + std::to_string(row_no) + ", " + label + " outside " +
                               std::to_string(likert.min) + ".." + std::to_string(likert.max),
                           row_no, label);
        }
      }
      values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = v;
    }
  }
  return ResponseMatrix(std::move(subject_ids), std::move(item_ids), std::move(values), coding, likert);
}

ResponseMatrix load_responses_file(const std::string& path, const ScaleSpec& spec, Coding coding) {
  return load_responses(csv::read_file(path), spec, coding);
}

std::string responses_to_csv(const ResponseMatrix& matrix) {
  std::ostringstream out;
  std::vector<std::string> header{"id"};
  for (int id : matrix.item_ids()) header.push_back(item_label(id));
  out << csv::join_row(header) << '\n';
  for (Eigen::Index r = 0; r < matrix.n_subjects(); ++r) {
    std::vector<std::string> fields{matrix.subject_ids()[static_cast<std::size_t>(r)]};
    for (Eigen::Index c = 0; c < matrix.n_items(); ++c) {
      const double v = matrix.values()(r, c);
      fields.push_back(std::isnan(v) ? "NA" : std::to_string(static_cast<long>(v)));
    }
    out << csv::join_row(fields) << '\n';
  }
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << content;
  if (!f) throw IoError("failed writing " + path);
}

}  // namespace psyeval
