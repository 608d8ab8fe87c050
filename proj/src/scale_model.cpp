#include "psyeval/scale_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include "json.hpp"
#include <set>
#include <sstream>

#include "psyeval/errors.hpp"

namespace psyeval {

using nlohmann::json;

void LikertScale::validate() const {
  if (min < 1 || max < 1) throw SchemaError("likert anchors must be positive integers");
  if (min >= max) throw SchemaError("likert.min must be less than likert.max");
}

std::string item_label(int item_id) { return "Item" + std::to_string(item_id); }

ScaleSpec::ScaleSpec(std::string name, LikertScale likert, std::vector<ItemDef> items,
                     std::vector<FacetDef> facets, std::vector<DomainDef> domains,
                     std::string version)
    : name_(std::move(name)),
      version_(std::move(version)),
      likert_(likert),
      items_(std::move(items)),
      facets_(std::move(facets)),
      domains_(std::move(domains)) {
  likert_.validate();
  if (items_.empty()) throw SchemaError("scale has no items");
  if (facets_.empty()) throw SchemaError("scale has no facets");
  if (domains_.empty()) throw SchemaError("scale has no domains");

  for (std::size_t i = 0; i < items_.size(); ++i) {
    const auto& item = items_[i];
    if (item.id < 1) throw SchemaError("item id must be a positive integer");
    if (item.text.empty()) throw SchemaError("item " + std::to_string(item.id) + " has empty text");
    if (!item_pos_.emplace(item.id, i).second) {
      throw DuplicateIdError("duplicate item id " + std::to_string(item.id));
    }
  }

  std::unordered_map<int, std::string> owner_facet;
  for (std::size_t f = 0; f < facets_.size(); ++f) {
    const auto& facet = facets_[f];
    if (facet.name.empty()) throw SchemaError("facet with empty name");
    if (facet.item_ids.empty()) throw SchemaError("facet " + facet.name + " has no items");
    if (!facet_pos_.emplace(facet.name, f).second) {
      throw DuplicateIdError("duplicate facet name " + facet.name);
    }
    for (int id : facet.item_ids) {
      if (!item_pos_.contains(id)) {
        throw ReferenceError("facet " + facet.name + " cites unknown item " + std::to_string(id));
      }
      auto [it, inserted] = owner_facet.emplace(id, facet.name);
      if (!inserted) {
        throw DuplicateIdError("item " + std::to_string(id) + " belongs to facets " + it->second +
                               " and " + facet.name);
      }
    }
  }
  for (const auto& item : items_) {
    if (!owner_facet.contains(item.id)) {
      throw ReferenceError("item " + std::to_string(item.id) + " belongs to no facet");
    }
  }

  std::unordered_map<std::string, std::string> owner_domain;
  for (std::size_t d = 0; d < domains_.size(); ++d) {
    auto& domain = domains_[d];
    if (domain.name.empty()) throw SchemaError("domain with empty name");
    if (domain.facet_names.empty()) throw SchemaError("domain " + domain.name + " has no facets");
    if (!domain_pos_.emplace(domain.name, d).second) {
      throw DuplicateIdError("duplicate domain name " + domain.name);
    }
    domain.item_ids.clear();
    for (const auto& facet_name : domain.facet_names) {
      auto pos = facet_pos_.find(facet_name);
      if (pos == facet_pos_.end()) {
        throw ReferenceError("domain " + domain.name + " cites unknown facet " + facet_name);
      }
      auto [it, inserted] = owner_domain.emplace(facet_name, domain.name);
      if (!inserted) {
        throw DuplicateIdError("facet " + facet_name + " belongs to domains " + it->second +
                               " and " + domain.name);
      }
      const auto& ids = facets_[pos->second].item_ids;
      domain.item_ids.insert(domain.item_ids.end(), ids.begin(), ids.end());
    }
    std::sort(domain.item_ids.begin(), domain.item_ids.end());
  }
  for (const auto& facet : facets_) {
    if (!owner_domain.contains(facet.name)) {
      throw ReferenceError("facet " + facet.name + " belongs to no domain");
    }
  }
}

std::size_t ScaleSpec::item_index(int item_id) const {
  auto it = item_pos_.find(item_id);
  if (it == item_pos_.end()) throw ReferenceError("unknown item " + std::to_string(item_id));
  return it->second;
}

std::size_t ScaleSpec::facet_index(std::string_view facet) const {
  auto it = facet_pos_.find(std::string(facet));
  if (it == facet_pos_.end()) throw ReferenceError("unknown facet " + std::string(facet));
  return it->second;
}

std::size_t ScaleSpec::domain_index(std::string_view domain) const {
  auto it = domain_pos_.find(std::string(domain));
  if (it == domain_pos_.end()) throw ReferenceError("unknown domain " + std::string(domain));
  return it->second;
}

std::vector<int> ScaleSpec::reverse_item_ids() const {
  std::vector<int> out;
  for (const auto& item : items_) {
    if (item.reverse) out.push_back(item.id);
  }
  return out;
}

namespace {

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw SchemaError(where + " must be an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(where + " is missing \"" + key + "\"");
  return *it;
}

int require_int(const json& obj, const char* key, const std::string& where) {
  const auto& v = require(obj, key, where);
  if (!v.is_number_integer()) throw SchemaError(where + "." + key + " must be an integer");
  return v.get<int>();
}

std::string require_string(const json& obj, const char* key, const std::string& where) {
  const auto& v = require(obj, key, where);
  if (!v.is_string()) throw SchemaError(where + "." + key + " must be a string");
  return v.get<std::string>();
}

const json& require_array(const json& obj, const char* key, const std::string& where) {
  const auto& v = require(obj, key, where);
  if (!v.is_array()) throw SchemaError(where + "." + key + " must be an array");
  return v;
}

}  // namespace

ScaleSpec parse_scale_spec(std::string_view json_document) {
  json doc;
  try {
    doc = json::parse(json_document);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("scale spec is not valid JSON: ") + e.what());
  }
  const std::string root = "scale";
  std::string name = require_string(doc, "name", root);
  std::string version;
  if (doc.contains("version")) {
    if (!doc["version"].is_string()) throw SchemaError("scale.version must be a string");
    version = doc["version"].get<std::string>();
  }

  const auto& likert_obj = require(doc, "likert", root);
  LikertScale likert{require_int(likert_obj, "min", "likert"),
                     require_int(likert_obj, "max", "likert")};

  std::vector<ItemDef> items;
  for (const auto& it : require_array(doc, "items", root)) {
    ItemDef item;
    item.id = require_int(it, "id", "items[]");
    item.text = require_string(it, "text", "items[" + std::to_string(item.id) + "]");
    const auto& rev = require(it, "reverse", "items[" + std::to_string(item.id) + "]");
    if (!rev.is_boolean()) throw SchemaError("items[].reverse must be a boolean");
    item.reverse = rev.get<bool>();
    items.push_back(std::move(item));
  }

  std::vector<FacetDef> facets;
  for (const auto& f : require_array(doc, "facets", root)) {
    FacetDef facet;
    facet.name = require_string(f, "name", "facets[]");
    for (const auto& id : require_array(f, "items", "facets[" + facet.name + "]")) {
      if (!id.is_number_integer()) throw SchemaError("facet item ids must be integers");
      facet.item_ids.push_back(id.get<int>());
    }
    facets.push_back(std::move(facet));
  }

  std::vector<DomainDef> domains;
  for (const auto& d : require_array(doc, "domains", root)) {
    DomainDef domain;
    domain.name = require_string(d, "name", "domains[]");
    for (const auto& f : require_array(d, "facets", "domains[" + domain.name + "]")) {
      if (!f.is_string()) throw SchemaError("domain facet references must be strings");
      domain.facet_names.push_back(f.get<std::string>());
    }
    domains.push_back(std::move(domain));
  }

  return ScaleSpec(std::move(name), likert, std::move(items), std::move(facets),
                   std::move(domains), std::move(version));
}

ScaleSpec load_scale_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open scale spec " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scale_spec(buffer.str());
}

const ScaleSpec& bfi2_scale() {
  static const ScaleSpec spec = parse_scale_spec(bfi2_spec_document());
  return spec;
}

int reverse_code(int value, const LikertScale& likert) {
  if (!likert.contains(value)) {
    throw RangeError("response " + std::to_string(value) + " outside " +
                     std::to_string(likert.min) + ".." + std::to_string(likert.max));
  }
  return likert.min + likert.max - value;
}

double reverse_code(double value, const LikertScale& likert) {
  if (!likert.contains(value)) {
    throw RangeError("response outside " + std::to_string(likert.min) + ".." +
                     std::to_string(likert.max));
  }
  return likert.min + likert.max - value;
}

ResponseMatrix::ResponseMatrix(std::vector<std::string> subject_ids, std::vector<int> item_ids,
                               Eigen::MatrixXd values, Coding coding, LikertScale likert)
    : subject_ids_(std::move(subject_ids)),
      item_ids_(std::move(item_ids)),
      values_(std::move(values)),
      coding_(coding),
      likert_(likert) {
  likert_.validate();
  if (static_cast<Eigen::Index>(subject_ids_.size()) != values_.rows() ||
      static_cast<Eigen::Index>(item_ids_.size()) != values_.cols()) {
    throw ShapeError("response matrix dimensions do not match its labels");
  }
  std::set<int> seen;
  for (int id : item_ids_) {
    if (!seen.insert(id).second) throw DuplicateIdError("duplicate item column " + std::to_string(id));
  }
  for (Eigen::Index r = 0; r < values_.rows(); ++r) {
    for (Eigen::Index c = 0; c < values_.cols(); ++c) {
      const double v = values_(r, c);
      if (std::isnan(v)) continue;
      if (!likert_.contains(v)) {
        std::ostringstream msg;
        msg << "value " << v << " at row " << (r + 1) << ", " << item_label(item_ids_[c])
            << " outside " << likert_.min << ".." << likert_.max;
        throw RangeError(msg.str(), static_cast<long>(r + 1), item_label(item_ids_[c]));
      }
    }
  }
}

bool ResponseMatrix::is_missing(Eigen::Index row, Eigen::Index col) const {
  return std::isnan(values_(row, col));
}

Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> ResponseMatrix::missing_mask() const {
  return values_.array().isNaN();
}

std::optional<Eigen::Index> ResponseMatrix::column_of(int item_id) const {
  auto it = std::find(item_ids_.begin(), item_ids_.end(), item_id);
  if (it == item_ids_.end()) return std::nullopt;
  return static_cast<Eigen::Index>(it - item_ids_.begin());
}

ResponseMatrix ResponseMatrix::select_rows(const std::vector<Eigen::Index>& rows) const {
  std::vector<std::string> ids;
  Eigen::MatrixXd values(static_cast<Eigen::Index>(rows.size()), values_.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ids.push_back(subject_ids_.at(static_cast<std::size_t>(rows[i])));
    values.row(static_cast<Eigen::Index>(i)) = values_.row(rows[i]);
  }
  return ResponseMatrix(std::move(ids), item_ids_, std::move(values), coding_, likert_);
}

ResponseMatrix apply_reverse_coding(const ResponseMatrix& matrix, const ScaleSpec& spec) {
  if (matrix.coding() == Coding::ReverseApplied) {
    throw AlreadyCodedError("response matrix is already reverse coded");
  }
  Eigen::MatrixXd values = matrix.values();
  const auto& likert = matrix.likert();
  for (std::size_t c = 0; c < matrix.item_ids().size(); ++c) {
    const int id = matrix.item_ids()[c];
    const auto col = static_cast<Eigen::Index>(c);
    // Columns outside the spec are carried through untouched.
    if (spec.items().end() == std::find_if(spec.items().begin(), spec.items().end(),
                                           [id](const ItemDef& d) { return d.id == id; })) {
      continue;
    }
    if (!spec.item(id).reverse) continue;
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
      if (!std::isnan(values(r, col))) values(r, col) = reverse_code(values(r, col), likert);
    }
  }
  return ResponseMatrix(matrix.subject_ids(), matrix.item_ids(), std::move(values),
                        Coding::ReverseApplied, likert);
}

ScoredSample score(const ResponseMatrix& matrix, const ScaleSpec& spec, MissingPolicy policy) {
  if (matrix.coding() != Coding::ReverseApplied) {
    throw CodingError("scoring requires reverse-applied responses");
  }
  const auto n_items = static_cast<Eigen::Index>(spec.items().size());
  const auto n_facets = static_cast<Eigen::Index>(spec.facets().size());
  const auto n_domains = static_cast<Eigen::Index>(spec.domains().size());

  std::vector<Eigen::Index> source_col(spec.items().size());
  for (std::size_t i = 0; i < spec.items().size(); ++i) {
    auto col = matrix.column_of(spec.items()[i].id);
    if (!col) throw MissingItemError("response matrix lacks " + item_label(spec.items()[i].id));
    source_col[i] = *col;
  }
  // Facet membership in spec item positions.
  std::vector<std::vector<Eigen::Index>> facet_items(spec.facets().size());
  for (std::size_t f = 0; f < spec.facets().size(); ++f) {
    for (int id : spec.facets()[f].item_ids) {
      facet_items[f].push_back(static_cast<Eigen::Index>(spec.item_index(id)));
    }
  }
  std::vector<std::vector<Eigen::Index>> domain_items(spec.domains().size());
  for (std::size_t d = 0; d < spec.domains().size(); ++d) {
    for (int id : spec.domains()[d].item_ids) {
      domain_items[d].push_back(static_cast<Eigen::Index>(spec.item_index(id)));
    }
  }

  ScoredSample out;
  for (const auto& item : spec.items()) out.item_labels.push_back(item_label(item.id));
  for (const auto& facet : spec.facets()) out.facet_labels.push_back(facet.name);
  for (const auto& domain : spec.domains()) out.domain_labels.push_back(domain.name);

  std::vector<Eigen::VectorXd> kept_rows;
  Eigen::VectorXd row(n_items);
  for (Eigen::Index r = 0; r < matrix.n_subjects(); ++r) {
    for (Eigen::Index i = 0; i < n_items; ++i) row(i) = matrix.values()(r, source_col[i]);
    bool keep = true;
    for (const auto& members : facet_items) {
      Eigen::Index missing = 0;
      double sum = 0.0;
      for (auto i : members) {
        if (std::isnan(row(i))) {
          ++missing;
        } else {
          sum += row(i);
        }
      }
      if (missing == 0) continue;
      const auto present = static_cast<Eigen::Index>(members.size()) - missing;
      if (policy == MissingPolicy::ListwiseDelete || missing > 1 || present == 0) {
        keep = false;
        break;
      }
      const double fill = sum / static_cast<double>(present);
      for (auto i : members) {
        if (std::isnan(row(i))) row(i) = fill;
      }
    }
    if (keep) {
      out.subject_ids.push_back(matrix.subject_ids()[static_cast<std::size_t>(r)]);
      kept_rows.push_back(row);
    } else {
      out.dropped_subject_ids.push_back(matrix.subject_ids()[static_cast<std::size_t>(r)]);
    }
  }
  if (kept_rows.empty()) throw EmptyAfterDeletionError("no subject left after missing-data handling");

  const auto n = static_cast<Eigen::Index>(kept_rows.size());
  out.item_scores.resize(n, n_items);
  out.facet_scores.resize(n, n_facets);
  out.domain_scores.resize(n, n_domains);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& v = kept_rows[static_cast<std::size_t>(r)];
    out.item_scores.row(r) = v.transpose();
    for (Eigen::Index f = 0; f < n_facets; ++f) {
      double sum = 0.0;
      for (auto i : facet_items[static_cast<std::size_t>(f)]) sum += v(i);
      out.facet_scores(r, f) = sum / static_cast<double>(facet_items[static_cast<std::size_t>(f)].size());
    }
    for (Eigen::Index d = 0; d < n_domains; ++d) {
      double sum = 0.0;
      for (auto i : domain_items[static_cast<std::size_t>(d)]) sum += v(i);
      out.domain_scores(r, d) = sum / static_cast<double>(domain_items[static_cast<std::size_t>(d)].size());
    }
  }
  return out;
}

}  // namespace psyeval
