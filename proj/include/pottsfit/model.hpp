#pragma once

#include <vector>

#include "pottsfit/image.hpp"
#include "pottsfit/lattice.hpp"

namespace pottsfit {

// Gaussian emission parameters per component plus the spatial coupling beta.
struct ModelParams {
  std::vector<double> mu;
  std::vector<double> sigma2;
  double beta = 0.0;

  int num_components() const { return static_cast<int>(mu.size()); }
};

void check_valid(const ModelParams& params);

// Complete-data sufficient statistics: per-component pixel counts, intensity
// sums, squared-intensity sums, and the like-labeled-edge count t4. Stored as
// reals because Monte Carlo averages of these are non-integer.
struct SufficientStats {
  std::vector<double> t1;
  std::vector<double> t2;
  std::vector<double> t3;
  double t4 = 0.0;

  int num_components() const { return static_cast<int>(t1.size()); }
};

// number of edges whose endpoints share a label; the beta-free bond count
double potts_energy(const LabelField& labels, const Lattice& lat);

SufficientStats sufficient_stats(const IntensityImage& img,
                                 const LabelField& labels, const Lattice& lat);

double log_normal_pdf(double y, double mu, double sigma2);

// Complete-data log-likelihood given an externally supplied log g(beta):
//   -N/2 log(2pi) - sum_k [ t1_k log sigma_k + (t3_k - 2 mu_k t2_k
//     + mu_k^2 t1_k) / (2 sigma2_k) ] + beta * t4 - log_g
double complete_loglik(const SufficientStats& stats, const ModelParams& params,
                       double log_g);

double complete_loglik(const IntensityImage& img, const LabelField& labels,
                       const Lattice& lat, const ModelParams& params,
                       double log_g);

}  // namespace pottsfit
