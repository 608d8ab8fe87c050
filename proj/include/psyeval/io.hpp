#pragma once

#include <string>
#include <vector>

#include "psyeval/csv.hpp"
#include "psyeval/scale_model.hpp"
#include "psyeval/simulate.hpp"

namespace psyeval {

// Optional subject-id column names, checked in this order.
inline const std::vector<std::string> kIdColumns = {"id", "ID", "Id", "subject_id", "SubjectID"};

// Reads Item1..ItemN for every item of `spec`. Other columns are ignored.
// Empty cells and NA are missing. Throws HeaderError, RangeError(row, column)
// or CsvError.
ResponseMatrix load_responses(const csv::Table& table, const ScaleSpec& spec, Coding coding);
ResponseMatrix load_responses_file(const std::string& path, const ScaleSpec& spec, Coding coding);

// id,Item1..ItemN with NA for missing cells.
std::string responses_to_csv(const ResponseMatrix& matrix);

// PSI: Q1..Q32 answer columns. Persona: S1..S5. Shape: Marker1..Marker5 as
// "low|high" plus Level. Throws HeaderError or ProfileError.
std::vector<SubjectProfile> load_profiles(const csv::Table& table, Method method);
std::vector<SubjectProfile> load_profiles_file(const std::string& path, Method method);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace psyeval
