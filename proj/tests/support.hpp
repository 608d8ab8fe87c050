#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "psyeval/scale_model.hpp"

namespace testsupport {

// Draws n rows from N(0, sigma).
inline Eigen::MatrixXd sample_mvn(const Eigen::MatrixXd& sigma, int n, std::mt19937_64& rng) {
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  const Eigen::MatrixXd L = llt.matrixL();
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::MatrixXd out(n, sigma.rows());
  Eigen::VectorXd e(sigma.rows());
  for (int i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < e.size(); ++j) e(j) = z(rng);
    out.row(i) = (L * e).transpose();
  }
  return out;
}

// Population covariance of a simple-structure model with unit indicator variances.
inline Eigen::MatrixXd population_sigma(const Eigen::MatrixXd& loadings, const Eigen::MatrixXd& phi) {
  Eigen::MatrixXd sigma = loadings * phi * loadings.transpose();
  for (Eigen::Index i = 0; i < sigma.rows(); ++i) sigma(i, i) = 1.0;
  return sigma;
}

// Random Likert grid; `missing_rate` of cells become NaN.
inline Eigen::MatrixXd random_likert(int n, int p, std::mt19937_64& rng, int lo = 1, int hi = 5,
                                     double missing_rate = 0.0) {
  std::uniform_int_distribution<int> d(lo, hi);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd out(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) {
      out(i, j) = (missing_rate > 0.0 && u(rng) < missing_rate) ? std::nan("") : d(rng);
    }
  }
  return out;
}

inline std::vector<std::string> ids(int n, const std::string& prefix = "s") {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i + 1));
  return out;
}

// Scale with `domains` domains of `facets` facets of `items` items each; every
// second item is reverse keyed.
inline psyeval::ScaleSpec toy_scale(int domains, int facets, int items) {
  std::vector<psyeval::ItemDef> item_defs;
  std::vector<psyeval::FacetDef> facet_defs;
  std::vector<psyeval::DomainDef> domain_defs;
  int next = 1;
  for (int d = 0; d < domains; ++d) {
    psyeval::DomainDef dom{"D" + std::to_string(d + 1), {}, {}};
    for (int f = 0; f < facets; ++f) {
      psyeval::FacetDef fac{dom.name + "F" + std::to_string(f + 1), {}};
      for (int i = 0; i < items; ++i) {
        item_defs.push_back({next, "statement " + std::to_string(next), next % 2 == 0});
        fac.item_ids.push_back(next++);
      }
      dom.facet_names.push_back(fac.name);
      facet_defs.push_back(fac);
    }
    domain_defs.push_back(dom);
  }
  return psyeval::ScaleSpec("toy", {1, 5}, item_defs, facet_defs, domain_defs, "1");
}

inline psyeval::ResponseMatrix bfi2_matrix(const Eigen::MatrixXd& values, psyeval::Coding coding,
                                           const std::string& prefix = "s") {
  const auto& spec = psyeval::bfi2_scale();
  std::vector<int> item_ids;
  for (const auto& it : spec.items()) item_ids.push_back(it.id);
  return psyeval::ResponseMatrix(ids(static_cast<int>(values.rows()), prefix), item_ids, values, coding,
                                 spec.likert());
}

// Correlated 60-item BFI-2 sample (reverse-applied coding) with five latent
// domains, so every CFA and PCA in the pipeline has structure to find.
inline Eigen::MatrixXd structured_bfi2(int n, std::mt19937_64& rng) {
  const auto& spec = psyeval::bfi2_scale();
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::MatrixXd out(n, 60);
  for (int s = 0; s < n; ++s) {
    double domain_level[5];
    for (double& v : domain_level) v = z(rng);
    std::vector<double> facet_level(spec.facets().size());
    for (std::size_t f = 0; f < spec.facets().size(); ++f) {
      facet_level[f] = 0.8 * domain_level[f / 3] + 0.6 * z(rng);
    }
    for (std::size_t f = 0; f < spec.facets().size(); ++f) {
      for (int id : spec.facets()[f].item_ids) {
        const double latent = 3.0 + 0.9 * facet_level[f] + 0.7 * z(rng);
        out(s, static_cast<Eigen::Index>(spec.item_index(id))) = std::clamp(std::round(latent), 1.0, 5.0);
      }
    }
  }
  return out;
}

}  // namespace testsupport
