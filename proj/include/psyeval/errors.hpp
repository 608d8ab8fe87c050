#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace psyeval {

// Base of every domain error raised by the library. `name()` is the typed
// error name printed by the CLI; `reason()` is the short tag used when a
// report cell is marked undefined.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual std::string_view name() const noexcept { return "Error"; }
  virtual std::string_view reason() const noexcept { return "error"; }
};

#define PSYEVAL_DEFINE_ERROR(Type, Reason)                                     \
  class Type : public Error {                                                  \
   public:                                                                     \
    using Error::Error;                                                        \
    std::string_view name() const noexcept override { return #Type; }          \
    std::string_view reason() const noexcept override { return Reason; }       \
  }

// scale_model
PSYEVAL_DEFINE_ERROR(SchemaError, "schema");
PSYEVAL_DEFINE_ERROR(ReferenceError, "dangling-reference");
PSYEVAL_DEFINE_ERROR(DuplicateIdError, "duplicate-id");
PSYEVAL_DEFINE_ERROR(AlreadyCodedError, "already-coded");
PSYEVAL_DEFINE_ERROR(CodingError, "raw-coding");
PSYEVAL_DEFINE_ERROR(EmptyAfterDeletionError, "empty-after-deletion");

// stats_core and friends
PSYEVAL_DEFINE_ERROR(InsufficientDataError, "insufficient-data");
PSYEVAL_DEFINE_ERROR(LengthMismatchError, "length-mismatch");
PSYEVAL_DEFINE_ERROR(DegenerateInputError, "zero-variance");
PSYEVAL_DEFINE_ERROR(ShapeError, "shape");
PSYEVAL_DEFINE_ERROR(ArgumentError, "argument");

// cfa_engine
PSYEVAL_DEFINE_ERROR(SpecError, "unidentified-model");
PSYEVAL_DEFINE_ERROR(PdError, "not-positive-definite");
PSYEVAL_DEFINE_ERROR(NumericalError, "numerical");

// congruence / pca
PSYEVAL_DEFINE_ERROR(ZeroVectorError, "zero-vector");
PSYEVAL_DEFINE_ERROR(RankError, "rank-deficient");

// simulate
PSYEVAL_DEFINE_ERROR(ProfileError, "profile");
PSYEVAL_DEFINE_ERROR(UnparseableResponseError, "unparseable");
PSYEVAL_DEFINE_ERROR(ResponderError, "responder");
PSYEVAL_DEFINE_ERROR(TransportError, "transport");
PSYEVAL_DEFINE_ERROR(ConfigError, "config");

// criterion_eval
PSYEVAL_DEFINE_ERROR(MissingItemError, "missing-item");

// pipeline
PSYEVAL_DEFINE_ERROR(CsvError, "csv");
PSYEVAL_DEFINE_ERROR(HeaderError, "header");
PSYEVAL_DEFINE_ERROR(IoError, "io");
PSYEVAL_DEFINE_ERROR(UsageError, "usage");

#undef PSYEVAL_DEFINE_ERROR

// Out-of-range value. Row/column are populated when the value came from a
// tabular source (1-based data row, column header).
class RangeError : public Error {
 public:
  explicit RangeError(const std::string& what, long row = 0, std::string column = {})
      : Error(what), row_(row), column_(std::move(column)) {}
  std::string_view name() const noexcept override { return "RangeError"; }
  std::string_view reason() const noexcept override { return "out-of-range"; }
  long row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  long row_;
  std::string column_;
};

}  // namespace psyeval
