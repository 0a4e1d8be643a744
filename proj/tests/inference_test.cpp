#include <doctest.h>

#include <cmath>
#include <numeric>

#include "pottsfit/exact.hpp"
#include "pottsfit/inference.hpp"
#include "pottsfit/rng.hpp"
#include "test_util.hpp"

using namespace pottsfit;

namespace {

// exact bond curve on an enumerable lattice, dense enough that interpolation
// error is negligible
BondCurve exact_curve(const Lattice& lat, int m, double max_beta, double step) {
  BondCurve curve;
  for (double b = 0.0; b <= max_beta + 1e-12; b += step) {
    auto d = exact_enumerate(lat, m, b);
    curve.betas.push_back(b);
    curve.means.push_back(d.e_t4);
    curve.vars.push_back(d.var_t4);
    curve.se.push_back(0.0);
  }
  curve.monotone_means = curve.means;
  return curve;
}

FitResult toy_fit(const ModelParams& p, bool beta_identified = true) {
  FitResult fit;
  fit.params = p;
  fit.converged = true;
  fit.beta_identified = beta_identified;
  return fit;
}

}  // namespace

TEST_SUITE_BEGIN("inference");

TEST_CASE("standard_errors basics and scaling") {
  ObservedInformation info;
  info.dim = 2;
  info.mat = {4.0, 0.0, 0.0, 25.0};
  info.positive_definite = true;
  info.min_eigenvalue = 4.0;
  auto se = standard_errors(info);
  CHECK(se[0] == doctest::Approx(0.5));
  CHECK(se[1] == doctest::Approx(0.2));

  ObservedInformation scaled = info;
  for (double& x : scaled.mat) x *= 4.0;
  auto se4 = standard_errors(scaled);
  CHECK(se4[0] == doctest::Approx(0.25));
  CHECK(se4[1] == doctest::Approx(0.1));

  ObservedInformation bad;
  bad.dim = 2;
  bad.mat = {1.0, 2.0, 2.0, 1.0};  // eigenvalues 3 and -1
  bad.positive_definite = false;
  bad.min_eigenvalue = -1.0;
  CHECK_THROWS_AS(standard_errors(bad), std::runtime_error);
}

TEST_CASE("louis_information with one component is the Gaussian information") {
  auto lat = build_lattice(8, 8);
  auto img = make_image(8, 8);
  Rng rng(2);
  for (auto& y : img.v) y = rng.normal(1.0, 1.5);
  double n = img.num_pixels();
  double mean = std::accumulate(img.v.begin(), img.v.end(), 0.0) / n;
  double var = 0.0;
  for (double y : img.v) var += (y - mean) * (y - mean);
  var /= n;

  auto fitres = toy_fit(ModelParams{{mean}, {var}, 0.0}, false);
  auto curve = exact_curve(build_lattice(2, 2), 1, 1.0, 0.5);  // unused block
  auto info = louis_information(img, fitres, lat, curve, 200, 9);
  REQUIRE(info.dim == 2);
  CHECK(info.positive_definite);
  CHECK(info.at(0, 0) == doctest::Approx(n / var).epsilon(1e-9));
  CHECK(info.at(1, 1) == doctest::Approx(n / (2 * var * var)).epsilon(1e-9));
  CHECK(info.at(0, 1) == doctest::Approx(0.0).scale(n));
}

TEST_CASE("louis_information matches finite differences of exact loglik") {
  auto lat = build_lattice(2, 2);
  auto img = make_image(2, 2);
  img.v = {-1.2, -0.8, 0.9, 1.1};
  ModelParams p{{-1.0, 1.0}, {0.8, 0.9}, 0.5};
  auto curve = exact_curve(lat, 2, 1.5, 0.01);
  auto fitres = toy_fit(p);
  auto info = louis_information(img, fitres, lat, curve, 100000, 123);
  REQUIRE(info.dim == 5);

  auto neg_lobs = [&](const std::vector<double>& x) {
    ModelParams q{{x[0], x[1]}, {x[2], x[3]}, x[4]};
    return -testutil::exact_observed_loglik(lat, img, q);
  };
  auto hess = testutil::fd_hessian(neg_lobs, {-1.0, 1.0, 0.8, 0.9, 0.5}, 1e-3);

  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 5; ++c) {
      double scale = std::sqrt(std::fabs(hess[r][r] * hess[c][c])) + 1e-9;
      CHECK(std::fabs(info.at(r, c) - hess[r][c]) / scale < 0.02);
    }
}

TEST_CASE("observed_loglik is exact for M=1") {
  auto lat = build_lattice(6, 6);
  auto img = make_image(6, 6);
  Rng rng(5);
  for (auto& y : img.v) y = rng.normal(0.2, 1.1);
  ModelParams p{{0.25}, {1.3}, 0.0};
  auto fitres = toy_fit(p, false);
  auto curve = exact_curve(build_lattice(2, 2), 1, 1.0, 0.5);
  double se = -1.0;
  double ll = observed_loglik(img, fitres, lat, curve, 5, 3, &se);
  double direct = 0.0;
  for (double y : img.v) direct += log_normal_pdf(y, 0.25, 1.3);
  CHECK(ll == doctest::Approx(direct).epsilon(1e-12));
  CHECK(se == 0.0);
}

TEST_CASE("observed_loglik tracks the exact value on a sharp toy") {
  // components separated by 12 sds: the posterior is essentially a point
  // mass, so the imputation average sits on the exact observed loglik
  auto lat = build_lattice(2, 2);
  auto img = make_image(2, 2);
  // data spread matches sigma so the loglik curvature is positive definite
  img.v = {-3.5, -2.5, 3.4, 2.6};
  ModelParams p{{-3.0, 3.0}, {0.25, 0.25}, 0.4};
  auto curve = exact_curve(lat, 2, 1.5, 0.01);
  auto fitres = toy_fit(p);
  fitres.info = louis_information(img, fitres, lat, curve, 20000, 7);
  REQUIRE(fitres.info.positive_definite);

  double exact_ll = testutil::exact_observed_loglik(lat, img, p);
  double se = 0.0;
  double ll = observed_loglik(img, fitres, lat, curve, 40, 11, &se);
  CHECK(std::fabs(ll - exact_ll) < 3.0 * se + 0.05);
}

TEST_CASE("observed_loglik standard error shrinks with more imputations") {
  auto lat = build_lattice(3, 3);
  auto img = make_image(3, 3);
  // deterministic data whose per-component spread matches sigma2 = 1
  img.v = {-3, -1, -3, 1, 3, 1, 3, 2, -1};
  ModelParams p{{-2.0, 2.0}, {1.0, 1.0}, 0.3};
  auto curve = exact_curve(lat, 2, 1.0, 0.02);
  auto fitres = toy_fit(p);
  fitres.info = louis_information(img, fitres, lat, curve, 20000, 13);
  REQUIRE(fitres.info.positive_definite);
  double se_small = 0.0, se_big = 0.0;
  observed_loglik(img, fitres, lat, curve, 40, 17, &se_small);
  observed_loglik(img, fitres, lat, curve, 640, 17, &se_big);
  CHECK(se_big < se_small);
  CHECK(se_big == doctest::Approx(se_small / 4.0).epsilon(0.8));
}

TEST_CASE("posterior_summary constants for M=1 and marginal consistency") {
  auto lat = build_lattice(4, 4);
  auto img = make_image(4, 4);
  Rng rng(31);
  for (auto& y : img.v) y = rng.normal(0.7, 1.0);
  auto fit1 = toy_fit(ModelParams{{0.7}, {1.0}, 0.0}, false);
  auto s1 = posterior_summary(img, fit1, lat, 25, 3);
  for (int i = 0; i < 16; ++i) {
    CHECK(s1.mean_map.v[i] == doctest::Approx(0.7));
    CHECK(s1.sd_map.v[i] == doctest::Approx(0.0));
  }

  // 2x2 toy: mean_map approximates sum_k mu_k Pr(Z_i = k | y)
  auto lat2 = build_lattice(2, 2);
  auto img2 = make_image(2, 2);
  img2.v = {-1.0, -0.5, 0.5, 1.0};
  ModelParams p{{-1.0, 1.0}, {1.0, 1.0}, 0.5};
  auto exact = exact_enumerate(lat2, img2, p);
  auto fit2 = toy_fit(p);
  auto s2 = posterior_summary(img2, fit2, lat2, 60000, 5);
  for (int i = 0; i < 4; ++i) {
    double expect = -1.0 * exact.marginals[2 * i] + 1.0 * exact.marginals[2 * i + 1];
    CHECK(s2.mean_map.v[i] == doctest::Approx(expect).epsilon(0.05));
    CHECK(s2.mean_map.v[i] >= -1.0);
    CHECK(s2.mean_map.v[i] <= 1.0);
    CHECK(s2.sd_map.v[i] >= 0.0);
    CHECK(s2.sd_map.v[i] <= 1.0);
  }

  // permuting components leaves the summary law unchanged
  ModelParams q{{1.0, -1.0}, {1.0, 1.0}, 0.5};
  auto s3 = posterior_summary(img2, toy_fit(q), lat2, 60000, 6);
  for (int i = 0; i < 4; ++i)
    CHECK(s3.mean_map.v[i] == doctest::Approx(s2.mean_map.v[i]).epsilon(0.1));
}

TEST_CASE("threshold_map fractions and region breakdown") {
  auto img = make_image(4, 2);
  img.v = {0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0};

  auto all = threshold_map(img, -1.0);
  CHECK(all.fraction == 1.0);

  auto half = threshold_map(img, 3.0);
  CHECK(half.fraction == doctest::Approx(0.5));
  for (int i = 0; i < 8; ++i) CHECK(half.exceed.v[i] == (img.v[i] > 3.0));

  auto regions = make_labels(4, 2, 2);
  regions.v = {0, 0, 0, 0, 1, 1, 1, 1};
  auto r = threshold_map(img, 3.0, &regions);
  CHECK(r.region_fractions[0] == doctest::Approx(0.0));
  CHECK(r.region_fractions[1] == doctest::Approx(1.0));

  CHECK_THROWS_AS(threshold_map(img, std::nan("")), std::invalid_argument);
  auto wrong = make_labels(2, 2, 2);
  CHECK_THROWS_AS(threshold_map(img, 1.0, &wrong), std::invalid_argument);
}

TEST_CASE("select_model picks two components for a two-delta image") {
  const int w = 24, h = 24;
  auto img = make_image(w, h);
  Rng rng(44);
  for (int i = 0; i < w * h; ++i)
    img.v[i] = (i % 2 ? 10.0 : -10.0) + rng.normal(0.0, 0.3);

  SelectConfig cfg;
  cfg.seed = 19;
  cfg.mcem.max_iters = 15;
  cfg.mcem.sample_base = 30;
  cfg.mcem.sample_cap = 80;
  cfg.mcem.beta_grid = default_beta_grid(1.5, 0.1);
  cfg.mcem.curve_samples = 60;
  cfg.imputations = 10;
  cfg.louis_samples = 200;
  auto sel = select_model(img, {1, 2, 3}, cfg);
  CHECK(sel.best_aic_m == 2);
  CHECK(sel.best_bic_m == 2);
  REQUIRE(sel.rows.size() == 3);
  CHECK(sel.rows[1].loglik_obs > sel.rows[0].loglik_obs);

  // FitResult criterion identities
  for (const auto& row : sel.rows) {
    if (!row.ok) continue;
    double n = w * h;
    CHECK(row.aic == doctest::Approx(-2 * row.loglik_obs + 2 * (2 * row.m + 1)));
    CHECK(row.bic ==
          doctest::Approx(-2 * row.loglik_obs + std::log(n) * (2 * row.m + 1)));
  }
}

TEST_SUITE_END();
