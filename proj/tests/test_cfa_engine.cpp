#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "psyeval/cfa_engine.hpp"
#include "psyeval/errors.hpp"
#include "support.hpp"

using namespace psyeval;
using Catch::Matchers::WithinAbs;

namespace {

CfaModelSpec one_factor(int p) {
  BoolMatrix pattern = BoolMatrix::Constant(p, 1, true);
  std::vector<std::string> names;
  for (int i = 0; i < p; ++i) names.push_back("x" + std::to_string(i + 1));
  return CfaModelSpec(names, {"F"}, pattern);
}

CfaModelSpec blocks(int factors, int per_factor) {
  const int p = factors * per_factor;
  BoolMatrix pattern = BoolMatrix::Constant(p, factors, false);
  std::vector<std::string> ind, fac;
  for (int i = 0; i < p; ++i) {
    pattern(i, i / per_factor) = true;
    ind.push_back("x" + std::to_string(i + 1));
  }
  for (int f = 0; f < factors; ++f) fac.push_back("F" + std::to_string(f + 1));
  return CfaModelSpec(ind, fac, pattern);
}

Eigen::VectorXd central_difference(const MlObjective& obj, const Eigen::VectorXd& theta, double h) {
  Eigen::VectorXd g(theta.size());
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    Eigen::VectorXd up = theta, down = theta;
    up(k) += h;
    down(k) -= h;
    g(k) = (obj.value(up) - obj.value(down)) / (2 * h);
  }
  return g;
}

}  // namespace

TEST_CASE("TFM and FFM specs from the BFI-2", "[cfa]") {
  const auto& scale = bfi2_scale();
  const auto tfm = build_tfm_spec(scale.domain("Extraversion"), scale);
  CHECK(tfm.p() == 12);
  CHECK(tfm.m() == 3);
  CHECK(tfm.degrees_of_freedom() == 51);
  const auto pattern = tfm.pattern();
  const auto soc = static_cast<Eigen::Index>(
      std::find(tfm.factor_names().begin(), tfm.factor_names().end(), "Sociability") - tfm.factor_names().begin());
  std::vector<std::string> soc_items;
  for (Eigen::Index i = 0; i < pattern.rows(); ++i) {
    if (pattern(i, soc)) soc_items.push_back(tfm.indicator_names()[static_cast<std::size_t>(i)]);
  }
  CHECK(soc_items == std::vector<std::string>{"Item1", "Item16", "Item31", "Item46"});

  const auto neu = build_tfm_spec(scale.domain("Neuroticism"), scale);
  CHECK(neu.factor_names() == std::vector<std::string>{"Anxiety", "Depression", "Emotional Volatility"});

  const auto ffm = build_ffm_spec(scale);
  CHECK(ffm.p() == 15);
  CHECK(ffm.m() == 5);
  for (Eigen::Index f = 0; f < 5; ++f) CHECK(ffm.pattern().col(f).count() == 3);

  const auto two = testsupport::toy_scale(2, 3, 2);
  CHECK(build_ffm_spec(two).pattern().rows() == 6);
  CHECK(build_ffm_spec(two).pattern().cols() == 2);

  const auto single_facet = testsupport::toy_scale(1, 1, 4);
  CHECK_THROWS_AS(build_tfm_spec(single_facet.domains()[0], single_facet), SpecError);
  const auto thin = testsupport::toy_scale(2, 1, 3);
  CHECK_THROWS_AS(build_ffm_spec(thin), SpecError);
}

TEST_CASE("model spec validation", "[cfa]") {
  BoolMatrix two_cells = BoolMatrix::Constant(3, 2, false);
  two_cells(0, 0) = two_cells(0, 1) = two_cells(1, 0) = two_cells(2, 1) = true;
  CHECK_THROWS_AS(CfaModelSpec({"a", "b", "c"}, {"F", "G"}, two_cells), SpecError);
  CHECK_THROWS_AS(one_factor(2), SpecError);
  CHECK(one_factor(3).degrees_of_freedom() == 0);
}

TEST_CASE("sample covariance", "[cfa]") {
  Eigen::MatrixXd x(5, 3);
  x << 1, 2, 0, 2, 4, 1, 3, 1, 5, 4, 7, 2, 5, 3, 3;
  const auto cov = sample_covariance(x);
  CHECK(cov.N == 5);
  CHECK(cov.variable_names == std::vector<std::string>{"V1", "V2", "V3"});
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      const double ma = x.col(a).mean(), mb = x.col(b).mean();
      double s = 0;
      for (int i = 0; i < 5; ++i) s += (x(i, a) - ma) * (x(i, b) - mb);
      CHECK_THAT(cov.S(a, b), WithinAbs(s / 4.0, 1e-12));
    }
  }
  Eigen::MatrixXd twin(4, 2);
  twin << 1, 1, 2, 2, 4, 4, 7, 7;
  const auto t = sample_covariance(twin);
  CHECK_THAT(t.S(0, 1), WithinAbs(t.S(0, 0), 1e-12));
  CHECK_THROWS_AS(sample_covariance(Eigen::MatrixXd::Ones(1, 3)), InsufficientDataError);
}

TEST_CASE("null model", "[cfa]") {
  CovarianceInput diag{Eigen::Vector3d(1.0, 2.0, 0.5).asDiagonal(), 100, {}};
  CHECK_THAT(null_model_fit(diag).chi2_null, WithinAbs(0.0, 1e-10));
  CHECK(null_model_fit(diag).df_null == 3);

  const double rho = 0.6;
  Eigen::Matrix2d s;
  s << 2.0, rho * std::sqrt(2.0) * 3.0, rho * std::sqrt(2.0) * 3.0, 9.0;
  const auto nm = null_model_fit({s, 101, {}});
  CHECK_THAT(nm.chi2_null / 100.0, WithinAbs(-std::log(1 - rho * rho), 1e-12));

  CovarianceInput twelve{Eigen::MatrixXd::Identity(12, 12), 50, {}};
  CHECK(null_model_fit(twelve).df_null == 66);

  Eigen::Matrix2d singular;
  singular << 1, 1, 1, 1;
  CHECK_THROWS_AS(null_model_fit({singular, 10, {}}), PdError);
}

TEST_CASE("fit index arithmetic", "[cfa]") {
  const Eigen::MatrixXd s = Eigen::MatrixXd::Identity(3, 3);
  const auto ix = fit_indices(100, 51, 2000, 66, 357, s, s);
  CHECK_THAT(*ix.rmsea, WithinAbs(std::sqrt(49.0 / (51.0 * 356.0)), 1e-12));
  CHECK_THAT(*ix.cfi, WithinAbs(1.0 - 49.0 / 1934.0, 1e-12));
  CHECK_THAT(*ix.tli, WithinAbs((2000.0 / 66 - 100.0 / 51) / (2000.0 / 66 - 1), 1e-12));
  CHECK(ix.srmr == 0.0);

  const auto exact = fit_indices(51, 51, 2000, 66, 357, s, s);
  CHECK(*exact.rmsea == 0.0);
  CHECK(*exact.cfi == 1.0);

  const auto saturated = fit_indices(0, 0, 2000, 66, 357, s, s);
  CHECK_FALSE(saturated.rmsea.has_value());
  CHECK_FALSE(saturated.tli.has_value());

  // Baseline without excess misfit leaves CFI undefined.
  CHECK_FALSE(fit_indices(10, 5, 50, 66, 357, s, s).cfi.has_value());

  Eigen::Matrix2d S, H;
  S << 4, 1, 1, 1;
  H << 4, 0, 0, 1;
  // One off-diagonal residual 1/sqrt(4*1) = 0.5 over 3 cells.
  CHECK_THAT(fit_indices(1, 1, 10, 1, 100, S, H).srmr, WithinAbs(std::sqrt(0.25 / 3.0), 1e-12));
}

TEST_CASE("analytic gradient agrees with central differences", "[cfa]") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  const auto& scale = bfi2_scale();
  for (const auto& spec : {build_tfm_spec(scale.domain("Openness"), scale), build_ffm_spec(scale)}) {
    const Eigen::MatrixXd x = testsupport::sample_mvn(
        testsupport::population_sigma(Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(spec.p()), 1, 0.6),
                                      Eigen::MatrixXd::Ones(1, 1)),
        400, rng);
    const MlObjective obj(sample_covariance(x), spec);
    for (int trial = 0; trial < 3; ++trial) {
      Eigen::VectorXd theta = obj.start_values();
      for (Eigen::Index k = 0; k < theta.size(); ++k) theta(k) += u(rng);
      const Eigen::VectorXd g = obj.gradient(theta);
      const Eigen::VectorXd n = central_difference(obj, theta, 1e-5);
      CHECK((g - n).norm() / std::max(1.0, n.norm()) < 1e-4);
    }
  }
}

TEST_CASE("saturated one-factor model reproduces S", "[cfa]") {
  Eigen::Matrix3d s;
  s << 1.0, 0.48, 0.40, 0.48, 1.0, 0.30, 0.40, 0.30, 1.0;
  const auto fit = fit_ml({s, 200, {"a", "b", "c"}}, one_factor(3));
  CHECK(fit.converged);
  CHECK(fit.df == 0);
  CHECK(fit.f_ml < 1e-8);
  CHECK(fit.indices.srmr < 1e-4);
  // Triad identity: lambda_1^2 = s12 s13 / s23.
  CHECK_THAT(std::abs(fit.loadings_raw(0, 0)), WithinAbs(std::sqrt(0.48 * 0.40 / 0.30), 1e-4));
}

TEST_CASE("recovers a known three-factor structure", "[cfa]") {
  std::mt19937_64 rng(99);
  Eigen::MatrixXd lambda = Eigen::MatrixXd::Zero(12, 3);
  const double pattern[] = {0.8, 0.7, 0.6, 0.5};
  for (int i = 0; i < 12; ++i) lambda(i, i / 4) = pattern[i % 4];
  Eigen::MatrixXd phi = Eigen::MatrixXd::Constant(3, 3, 0.5);
  phi.diagonal().setOnes();
  const Eigen::MatrixXd x = testsupport::sample_mvn(testsupport::population_sigma(lambda, phi), 5000, rng);
  const auto fit = fit_ml(sample_covariance(x), blocks(3, 4));
  CHECK(fit.converged);
  CHECK((fit.loadings_std - lambda).cwiseAbs().maxCoeff() < 0.05);
  CHECK((fit.factor_corr - phi).cwiseAbs().maxCoeff() < 0.05);
  CHECK(fit.df == 51);
  CHECK(fit.df_null == 66);
  CHECK(fit.indices.rmsea.has_value());
  CHECK(*fit.indices.cfi > 0.99);

  // Standardized communality plus error variance is 1.
  for (Eigen::Index i = 0; i < 12; ++i) {
    const double communality = fit.loadings_std.row(i) * fit.factor_corr * fit.loadings_std.row(i).transpose();
    CHECK_THAT(communality + fit.error_var_std(i), WithinAbs(1.0, 1e-8));
  }

  // Rescaling the indicators leaves chi2 and the standardized solution unchanged.
  Eigen::VectorXd scale(12);
  for (int i = 0; i < 12; ++i) scale(i) = 0.5 + 0.25 * i;
  const auto scaled = fit_ml(sample_covariance(x * scale.asDiagonal()), blocks(3, 4));
  CHECK_THAT(scaled.chi2, WithinAbs(fit.chi2, 1e-4 * std::max(1.0, fit.chi2)));
  CHECK((scaled.loadings_std - fit.loadings_std).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("standardization", "[cfa]") {
  Eigen::MatrixXd l(3, 1);
  l << 0.8, 0.6, 0.5;
  const Eigen::Vector3d err(0.36, 0.64, 0.75);
  const Eigen::MatrixXd phi = Eigen::MatrixXd::Ones(1, 1);
  const Eigen::MatrixXd sigma = l * l.transpose() + Eigen::MatrixXd(err.asDiagonal());
  const auto st = standardize_solution(l, phi, err, sigma);
  CHECK((st.loadings - l).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((st.error_var - err).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("fit rejects unusable input", "[cfa]") {
  Eigen::Matrix3d singular = Eigen::Matrix3d::Ones();
  CHECK_THROWS_AS(fit_ml({singular, 100, {}}, one_factor(3)), PdError);
  CHECK_THROWS_AS(fit_ml({Eigen::Matrix3d::Identity(), 1, {}}, one_factor(3)), ArgumentError);
  CHECK_THROWS_AS(MlObjective({Eigen::Matrix2d::Identity(), 10, {}}, one_factor(3)), ShapeError);
}

TEST_CASE("small samples are flagged", "[cfa]") {
  std::mt19937_64 rng(4);
  Eigen::MatrixXd lambda = Eigen::MatrixXd::Constant(4, 1, 0.7);
  const Eigen::MatrixXd x =
      testsupport::sample_mvn(testsupport::population_sigma(lambda, Eigen::MatrixXd::Ones(1, 1)), 4 + 1, rng);
  CovarianceInput cov = sample_covariance(x);
  cov.S += 0.05 * Eigen::MatrixXd::Identity(4, 4);
  cov.N = 4;
  const auto fit = fit_ml(cov, one_factor(4));
  CHECK(fit.has_warning(CfaWarning::SmallSample));
}
