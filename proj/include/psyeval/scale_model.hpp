#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace psyeval {

// Integer response anchors, e.g. 1..5 for the BFI-2.
struct LikertScale {
  int min = 1;
  int max = 5;

  bool contains(double value) const { return value >= min && value <= max; }
  int points() const { return max - min + 1; }
  void validate() const;  // throws SchemaError
  bool operator==(const LikertScale&) const = default;
};

struct ItemDef {
  int id = 0;
  std::string text;
  bool reverse = false;
};

struct FacetDef {
  std::string name;
  std::vector<int> item_ids;
};

struct DomainDef {
  std::string name;
  std::vector<std::string> facet_names;
  std::vector<int> item_ids;  // ascending union of the facets' items
};

// A validated item -> facet -> domain hierarchy. Every item belongs to exactly
// one facet and every facet to exactly one domain.
class ScaleSpec {
 public:
  // Domain item lists are derived from the facets; any supplied value is
  // replaced. Throws SchemaError, ReferenceError or DuplicateIdError.
  ScaleSpec(std::string name, LikertScale likert, std::vector<ItemDef> items,
            std::vector<FacetDef> facets, std::vector<DomainDef> domains,
            std::string version = {});

  const std::string& name() const { return name_; }
  const std::string& version() const { return version_; }
  const LikertScale& likert() const { return likert_; }
  const std::vector<ItemDef>& items() const { return items_; }
  const std::vector<FacetDef>& facets() const { return facets_; }
  const std::vector<DomainDef>& domains() const { return domains_; }

  // Position of an item/facet/domain in the corresponding list.
  std::size_t item_index(int item_id) const;
  std::size_t facet_index(std::string_view facet) const;
  std::size_t domain_index(std::string_view domain) const;

  const ItemDef& item(int item_id) const { return items_[item_index(item_id)]; }
  const FacetDef& facet(std::string_view name) const { return facets_[facet_index(name)]; }
  const DomainDef& domain(std::string_view name) const { return domains_[domain_index(name)]; }

  std::vector<int> reverse_item_ids() const;

 private:
  std::string name_;
  std::string version_;
  LikertScale likert_;
  std::vector<ItemDef> items_;
  std::vector<FacetDef> facets_;
  std::vector<DomainDef> domains_;
  std::unordered_map<int, std::size_t> item_pos_;
  std::unordered_map<std::string, std::size_t> facet_pos_;
  std::unordered_map<std::string, std::size_t> domain_pos_;
};

ScaleSpec parse_scale_spec(std::string_view json_document);
ScaleSpec load_scale_spec(const std::string& path);

// The bundled BFI-2 spec (60 items, 15 facets, 5 domains).
std::string_view bfi2_spec_document();
const ScaleSpec& bfi2_scale();

// min + max - value. Throws RangeError when value is outside the scale.
int reverse_code(int value, const LikertScale& likert);
double reverse_code(double value, const LikertScale& likert);

enum class Coding { Raw, ReverseApplied };

// Subjects x items grid. Missing cells are NaN.
class ResponseMatrix {
 public:
  // Throws ShapeError on inconsistent dimensions, DuplicateIdError on repeated
  // item ids, RangeError(row, "Item<id>") on out-of-range cells.
  ResponseMatrix(std::vector<std::string> subject_ids, std::vector<int> item_ids,
                 Eigen::MatrixXd values, Coding coding, LikertScale likert);

  Eigen::Index n_subjects() const { return values_.rows(); }
  Eigen::Index n_items() const { return values_.cols(); }
  const std::vector<std::string>& subject_ids() const { return subject_ids_; }
  const std::vector<int>& item_ids() const { return item_ids_; }
  const Eigen::MatrixXd& values() const { return values_; }
  Coding coding() const { return coding_; }
  const LikertScale& likert() const { return likert_; }

  bool is_missing(Eigen::Index row, Eigen::Index col) const;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> missing_mask() const;
  std::optional<Eigen::Index> column_of(int item_id) const;

  // Rows reordered/selected by index.
  ResponseMatrix select_rows(const std::vector<Eigen::Index>& rows) const;

 private:
  std::vector<std::string> subject_ids_;
  std::vector<int> item_ids_;
  Eigen::MatrixXd values_;
  Coding coding_;
  LikertScale likert_;
};

// Throws AlreadyCodedError when the matrix is already reverse-applied.
ResponseMatrix apply_reverse_coding(const ResponseMatrix& matrix, const ScaleSpec& spec);

enum class MissingPolicy {
  ListwiseDelete,
  // A facet with one missing item is scored from its remaining items; the gap
  // is filled with that mean so item, facet and domain levels stay coherent.
  MeanIfAtMostOneMissing,
};

struct ScoredSample {
  std::vector<std::string> subject_ids;
  std::vector<std::string> dropped_subject_ids;
  std::vector<std::string> item_labels;
  std::vector<std::string> facet_labels;
  std::vector<std::string> domain_labels;
  Eigen::MatrixXd item_scores;    // subjects x items, spec item order
  Eigen::MatrixXd facet_scores;   // subjects x facets
  Eigen::MatrixXd domain_scores;  // subjects x domains
};

ScoredSample score(const ResponseMatrix& matrix, const ScaleSpec& spec,
                   MissingPolicy policy = MissingPolicy::ListwiseDelete);

std::string item_label(int item_id);

}  // namespace psyeval
