#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pottsfit/bond_curve.hpp"
#include "pottsfit/fit_result.hpp"
#include "pottsfit/image.hpp"
#include "pottsfit/lattice.hpp"
#include "pottsfit/mcem.hpp"

namespace pottsfit {

// Louis identity: I_obs = avg(-Hessian of l_comp) - avg(s s^T) + avg(s) avg(s)^T
// over S posterior samples at fit.params. The beta block uses the bond curve:
// E[T4] from the monotone interpolant, Var[T4] from the local quadratic.
// Parameter order (mu_1..mu_M, sigma2_1..sigma2_M, beta); when
// fit.beta_identified is false the beta row/column is dropped (dim = 2M).
ObservedInformation louis_information(const IntensityImage& img,
                                      const FitResult& fit, const Lattice& lat,
                                      const BondCurve& curve, int S,
                                      uint64_t seed);

// sqrt of the diagonal of info^{-1}; throws std::runtime_error carrying the
// offending eigenvalue when info is not positive definite
std::vector<double> standard_errors(const ObservedInformation& info);

// Proper-multiple-imputation estimate of l_obs(theta_hat): for d = 1..D draw
// theta_d from N(theta_hat, info^{-1}) (redrawn up to 100 times when a
// variance falls below the floor or beta goes negative, then clamped), draw
// z_d from Pr(Z | theta_d, y), and average l_comp(theta_hat | y, z_d) with
// log g(beta_hat) from the curve. M = 1 is exact and needs no info matrix.
// When fit.info is not positive definite (possible away from the MLE or
// with starved components) the draws collapse to theta_hat itself and the
// estimate carries label uncertainty only.
double observed_loglik(const IntensityImage& img, const FitResult& fit,
                       const Lattice& lat, const BondCurve& curve, int D,
                       uint64_t seed, double* se_out = nullptr);

struct SelectionRow {
  int m = 0;
  bool ok = false;
  bool converged = false;
  double loglik_obs = 0.0;
  double loglik_se = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  double seconds = 0.0;
  ModelParams params;
  std::string error;
};

struct SelectionResult {
  int best_aic_m = 0;
  int best_bic_m = 0;
  std::vector<SelectionRow> rows;
};

struct SelectConfig {
  McemConfig mcem;
  int louis_samples = 500;
  int imputations = 20;
  uint64_t seed = 0;
};

// Fits every M independently (fresh init, substream ("select", M)), scores
// AIC = -2 l + 2(2M+1) and BIC = -2 l + log(N)(2M+1), and picks the argmin
// per criterion with ties broken toward smaller M. Failed fits stay in the
// table but are excluded from the argmin.
SelectionResult select_model(const IntensityImage& img,
                             const std::vector<int>& m_values,
                             const SelectConfig& cfg);

struct PosteriorSummary {
  IntensityImage mean_map;
  IntensityImage sd_map;
  int sample_count = 0;
};

// Per-pixel mean and sd of mu_hat[z_i] over S fresh posterior draws at
// fit.params
PosteriorSummary posterior_summary(const IntensityImage& img,
                                   const FitResult& fit, const Lattice& lat,
                                   int S, uint64_t seed);

struct ThresholdResult {
  LabelField exceed;  // 1 where value > tau
  double fraction = 0.0;
  std::vector<double> region_fractions;  // indexed by region label
};

// Marks values > tau; when a region label map is supplied, also reports the
// exceedance fraction within each region.
ThresholdResult threshold_map(const IntensityImage& values, double tau,
                              const LabelField* regions = nullptr);

}  // namespace pottsfit
