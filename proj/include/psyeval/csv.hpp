#pragma once

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace psyeval::csv {

// RFC 4180 table: quoted fields may contain commas, quotes ("") and newlines.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> column(std::string_view name) const;
};

// Throws CsvError on unterminated quotes or ragged rows.
Table parse(std::string_view text);
Table read_file(const std::string& path);

// Quotes a field only when needed.
std::string escape(std::string_view field);
std::string join_row(const std::vector<std::string>& fields);

}  // namespace psyeval::csv
