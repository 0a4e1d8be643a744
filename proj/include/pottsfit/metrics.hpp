#pragma once

#include "pottsfit/image.hpp"
#include "pottsfit/model.hpp"

#include <vector>

namespace pottsfit {

struct MetricsReport {
  double ss_est_true = 0.0;  // sum (est_map - true mean map)^2
  double ss_obs_true = 0.0;  // sum (y - true mean map)^2
  double mcr = 0.0;          // hard-label mismatch after canonical alignment
  double fpr = 0.0;          // exceedance errors at the threshold
  double fnr = 0.0;
  // estimated minus true, in mean-sorted order, over the shared components
  std::vector<double> mu_err;
  std::vector<double> sd_err;
};

// Rank of each component when sorted by mean (stable for ties); the shared
// canonical order that resolves label switching between truth and estimate.
std::vector<int> mean_rank(const ModelParams& params);

// Per-pixel most frequent label across retained posterior samples; ties go
// to the smallest label.
LabelField mode_labels(const std::vector<LabelField>& samples);

// Positive means true mean map > tau; predicted positive means est_map >
// tau. Rates with an empty denominator are reported as 0.
MetricsReport metrics(const LabelField& z_true, const IntensityImage& mu_true,
                      const IntensityImage& est_map, const LabelField& hard_est,
                      const IntensityImage& y, double tau, const ModelParams& true_params,
                      const ModelParams& est_params);

}  // namespace pottsfit
