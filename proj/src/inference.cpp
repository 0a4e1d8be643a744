#include "pottsfit/inference.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "pottsfit/rng.hpp"
#include "pottsfit/sampler.hpp"

namespace pottsfit {

namespace {

Eigen::MatrixXd to_eigen(const ObservedInformation& info) {
  Eigen::MatrixXd a(info.dim, info.dim);
  for (int r = 0; r < info.dim; ++r)
    for (int c = 0; c < info.dim; ++c) a(r, c) = info.at(r, c);
  return a;
}

// complete-data score of (mu, sigma2[, beta]) given one sample's statistics
void score_from_stats(const SufficientStats& s, const ModelParams& p,
                      double e_t4, bool with_beta, std::vector<double>& out) {
  const int m = p.num_components();
  out.assign(with_beta ? 2 * m + 1 : 2 * m, 0.0);
  for (int k = 0; k < m; ++k) {
    double s2 = p.sigma2[k];
    double centered = s.t2[k] - p.mu[k] * s.t1[k];
    double sse = s.t3[k] - 2.0 * p.mu[k] * s.t2[k] + p.mu[k] * p.mu[k] * s.t1[k];
    out[k] = centered / s2;
    out[m + k] = -0.5 * s.t1[k] / s2 + 0.5 * sse / (s2 * s2);
  }
  if (with_beta) out[2 * m] = s.t4 - e_t4;
}

}  // namespace

ObservedInformation louis_information(const IntensityImage& img,
                                      const FitResult& fit, const Lattice& lat,
                                      const BondCurve& curve, int S,
                                      uint64_t seed) {
  if (S < 2) throw std::invalid_argument("louis_information needs S >= 2");
  check_compatible(img, lat);
  const ModelParams& p = fit.params;
  const int m = p.num_components();
  const bool with_beta = fit.beta_identified;
  const int dim = with_beta ? 2 * m + 1 : 2 * m;

  const double e_t4 = with_beta ? curve_mean_at(curve, p.beta) : 0.0;
  const double var_t4 = with_beta ? curve_var_at(curve, p.beta) : 0.0;

  Eigen::MatrixXd avg_negh = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::MatrixXd avg_ssT = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd avg_s = Eigen::VectorXd::Zero(dim);
  std::vector<double> s_vec;

  auto model = build_posterior_model(img, p);
  SwWorkspace ws;
  ChainConfig chain{.sweeps = 50 + S, .burn_in = 50, .thin = 1, .seed = seed};
  run_chain(
      ml_labels(img, p),
      [&](LabelField& lf, Rng& rng) {
        sw_posterior_sweep_inplace(lf, lat, model, ws, rng);
      },
      chain,
      [&](const LabelField& lf) {
        auto stats = sufficient_stats(img, lf, lat);
        score_from_stats(stats, p, e_t4, with_beta, s_vec);
        Eigen::Map<Eigen::VectorXd> s(s_vec.data(), dim);
        avg_s += s;
        avg_ssT += s * s.transpose();
        for (int k = 0; k < m; ++k) {
          double s2 = p.sigma2[k];
          double centered = stats.t2[k] - p.mu[k] * stats.t1[k];
          double sse = stats.t3[k] - 2.0 * p.mu[k] * stats.t2[k] +
                       p.mu[k] * p.mu[k] * stats.t1[k];
          avg_negh(k, k) += stats.t1[k] / s2;
          avg_negh(k, m + k) += centered / (s2 * s2);
          avg_negh(m + k, k) += centered / (s2 * s2);
          avg_negh(m + k, m + k) +=
              -0.5 * stats.t1[k] / (s2 * s2) + sse / (s2 * s2 * s2);
        }
        if (with_beta) avg_negh(2 * m, 2 * m) += var_t4;
      });

  avg_negh /= S;
  avg_ssT /= S;
  avg_s /= S;
  Eigen::MatrixXd iobs =
      avg_negh - avg_ssT + avg_s * avg_s.transpose();
  iobs = 0.5 * (iobs + iobs.transpose()).eval();

  ObservedInformation info;
  info.dim = dim;
  info.mat.resize(static_cast<size_t>(dim) * dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) info.at(r, c) = iobs(r, c);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(iobs);
  info.min_eigenvalue = es.eigenvalues().minCoeff();
  info.positive_definite = info.min_eigenvalue > 0.0;
  return info;
}

std::vector<double> standard_errors(const ObservedInformation& info) {
  if (!info.present()) throw std::invalid_argument("missing information matrix");
  if (!info.positive_definite)
    throw std::runtime_error(
        "information matrix not positive definite (min eigenvalue " +
        std::to_string(info.min_eigenvalue) + ")");
  Eigen::MatrixXd a = to_eigen(info);
  Eigen::MatrixXd inv = a.llt().solve(Eigen::MatrixXd::Identity(info.dim, info.dim));
  std::vector<double> se(info.dim);
  for (int j = 0; j < info.dim; ++j) se[j] = std::sqrt(inv(j, j));
  return se;
}

double observed_loglik(const IntensityImage& img, const FitResult& fit,
                       const Lattice& lat, const BondCurve& curve, int D,
                       uint64_t seed, double* se_out) {
  if (D < 1) throw std::invalid_argument("D must be >= 1");
  check_compatible(img, lat);
  const ModelParams& p = fit.params;
  const int m = p.num_components();

  if (m == 1) {
    // labels carry no information: l_obs is the plain Gaussian log-likelihood
    double ll = 0.0;
    for (double y : img.v) ll += log_normal_pdf(y, p.mu[0], p.sigma2[0]);
    if (se_out) *se_out = 0.0;
    return ll;
  }

  if (!fit.info.present())
    throw std::invalid_argument("observed_loglik requires fit.info");

  const int dim = fit.info.dim;
  Eigen::MatrixXd iobs = to_eigen(fit.info);
  // Covariance factor for the asymptotic normal draws. Away from the MLE
  // (restart comparisons) or with starved components the curvature can be
  // indefinite; the draws then degenerate to the point estimate and the
  // average carries label uncertainty only.
  Eigen::MatrixXd cov_chol;
  bool draw_params = fit.info.positive_definite;
  if (draw_params) {
    Eigen::LLT<Eigen::MatrixXd> llt(iobs);
    if (llt.info() != Eigen::Success) {
      draw_params = false;
    } else {
      cov_chol = llt.solve(Eigen::MatrixXd::Identity(dim, dim)).llt().matrixL();
    }
  }

  auto [lo_it, hi_it] = std::minmax_element(img.v.begin(), img.v.end());
  double range = *hi_it - *lo_it;
  double var_floor = std::max(1e-6 * range * range, 1e-12);

  const double log_g = log_partition(p.beta, curve, lat, m);
  const bool with_beta = fit.beta_identified && dim == 2 * m + 1;

  Rng rng(derive_seed(seed, "imputation-draws"));
  double sum = 0.0, sum2 = 0.0;
  SwWorkspace ws;
  for (int d = 0; d < D; ++d) {
    ModelParams theta_d = p;
    bool valid = !draw_params;
    for (int attempt = 0; attempt < 100 && !valid; ++attempt) {
      Eigen::VectorXd z(dim);
      for (int j = 0; j < dim; ++j) z(j) = rng.normal();
      Eigen::VectorXd delta = cov_chol * z;
      for (int k = 0; k < m; ++k) {
        theta_d.mu[k] = p.mu[k] + delta(k);
        theta_d.sigma2[k] = p.sigma2[k] + delta(m + k);
      }
      theta_d.beta = with_beta ? p.beta + delta(2 * m) : p.beta;
      valid = theta_d.beta >= 0.0;
      for (int k = 0; k < m; ++k) valid &= theta_d.sigma2[k] > var_floor;
    }
    if (!valid) {  // clamp after exhausting redraws
      for (int k = 0; k < m; ++k)
        theta_d.sigma2[k] = std::max(theta_d.sigma2[k], var_floor);
      theta_d.beta = std::max(theta_d.beta, 0.0);
    }

    auto model = build_posterior_model(img, theta_d);
    LabelField lf = ml_labels(img, theta_d);
    Rng chain_rng(derive_seed(seed, "imputation-chain", d));
    for (int s = 0; s < 51; ++s)
      sw_posterior_sweep_inplace(lf, lat, model, ws, chain_rng);
    double lc = complete_loglik(img, lf, lat, p, log_g);
    sum += lc;
    sum2 += lc * lc;
  }
  double mean = sum / D;
  if (se_out) {
    double var = D > 1 ? std::max(0.0, (sum2 - D * mean * mean) / (D - 1)) : 0.0;
    *se_out = std::sqrt(var / D);
  }
  return mean;
}

SelectionResult select_model(const IntensityImage& img,
                             const std::vector<int>& m_values,
                             const SelectConfig& cfg) {
  if (m_values.empty()) throw std::invalid_argument("empty model range");
  auto lat = build_lattice(img.width, img.height);
  const double log_n = std::log(static_cast<double>(img.num_pixels()));

  SelectionResult result;
  double best_aic = 0.0, best_bic = 0.0;
  for (int m : m_values) {
    SelectionRow row;
    row.m = m;
    auto t0 = std::chrono::steady_clock::now();
    try {
      McemConfig mc = cfg.mcem;
      mc.seed = derive_seed(cfg.seed, "select", static_cast<uint64_t>(m));
      FitResult fit_m = fit(img, m, mc);
      if (m > 1)
        fit_m.info = louis_information(img, fit_m, lat, fit_m.curve,
                                       cfg.louis_samples,
                                       derive_seed(mc.seed, "louis"));
      double se = 0.0;
      double ll = observed_loglik(img, fit_m, lat, fit_m.curve,
                                  cfg.imputations, derive_seed(mc.seed, "obsll"),
                                  &se);
      row.ok = true;
      row.converged = fit_m.converged;
      row.loglik_obs = ll;
      row.loglik_se = se;
      row.aic = -2.0 * ll + 2.0 * (2.0 * m + 1.0);
      row.bic = -2.0 * ll + log_n * (2.0 * m + 1.0);
      row.params = fit_m.params;
    } catch (const std::exception& ex) {
      row.error = ex.what();
    }
    row.seconds = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    result.rows.push_back(std::move(row));
  }

  for (const auto& row : result.rows) {
    if (!row.ok) continue;
    if (result.best_aic_m == 0 || row.aic < best_aic) {
      best_aic = row.aic;
      result.best_aic_m = row.m;
    }
    if (result.best_bic_m == 0 || row.bic < best_bic) {
      best_bic = row.bic;
      result.best_bic_m = row.m;
    }
  }
  if (result.best_aic_m == 0)
    throw std::runtime_error("every model fit failed during selection");
  return result;
}

PosteriorSummary posterior_summary(const IntensityImage& img,
                                   const FitResult& fit, const Lattice& lat,
                                   int S, uint64_t seed) {
  if (S < 1) throw std::invalid_argument("S must be >= 1");
  check_compatible(img, lat);
  const ModelParams& p = fit.params;
  const int n = img.num_pixels();

  PosteriorSummary out;
  out.sample_count = S;
  out.mean_map = make_image(img.width, img.height);
  out.sd_map = make_image(img.width, img.height);
  std::vector<double> sum(n, 0.0), sum2(n, 0.0);

  auto model = build_posterior_model(img, p);
  SwWorkspace ws;
  ChainConfig chain{.sweeps = 50 + S, .burn_in = 50, .thin = 1, .seed = seed};
  run_chain(
      ml_labels(img, p),
      [&](LabelField& lf, Rng& rng) {
        sw_posterior_sweep_inplace(lf, lat, model, ws, rng);
      },
      chain,
      [&](const LabelField& lf) {
        for (int i = 0; i < n; ++i) {
          double mu = p.mu[lf.v[i]];
          sum[i] += mu;
          sum2[i] += mu * mu;
        }
      });

  for (int i = 0; i < n; ++i) {
    double mean = sum[i] / S;
    out.mean_map.v[i] = mean;
    out.sd_map.v[i] = std::sqrt(std::max(0.0, sum2[i] / S - mean * mean));
  }
  return out;
}

ThresholdResult threshold_map(const IntensityImage& values, double tau,
                              const LabelField* regions) {
  if (!std::isfinite(tau)) throw std::invalid_argument("tau must be finite");
  const int n = values.num_pixels();
  ThresholdResult out;
  out.exceed = make_labels(values.width, values.height, 2);
  int64_t above = 0;
  for (int i = 0; i < n; ++i) {
    bool hit = values.v[i] > tau;
    out.exceed.v[i] = hit;
    above += hit;
  }
  out.fraction = static_cast<double>(above) / n;
  if (regions) {
    if (regions->width != values.width || regions->height != values.height)
      throw std::invalid_argument("region mask dimensions mismatch");
    std::vector<int64_t> hits(regions->num_labels, 0), counts(regions->num_labels, 0);
    for (int i = 0; i < n; ++i) {
      ++counts[regions->v[i]];
      hits[regions->v[i]] += out.exceed.v[i];
    }
    out.region_fractions.resize(regions->num_labels);
    for (int k = 0; k < regions->num_labels; ++k)
      out.region_fractions[k] =
          counts[k] ? static_cast<double>(hits[k]) / counts[k] : 0.0;
  }
  return out;
}

}  // namespace pottsfit
