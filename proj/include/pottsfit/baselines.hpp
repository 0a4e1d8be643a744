#pragma once

#include "pottsfit/image.hpp"
#include "pottsfit/lattice.hpp"
#include "pottsfit/model.hpp"
#include "pottsfit/rng.hpp"

#include <vector>

namespace pottsfit {

// Classical EM for an equal-weight (fixed 1/M) Gaussian mixture with no
// spatial term; beta is reported as 0. Stops when every parameter moves by
// less than tol or after max_iters updates. If trace is given it records
// the initial parameters and each iterate.
ModelParams gmm_em_baseline(const IntensityImage& img, int M, const ModelParams& init,
                            double tol, int max_iters,
                            std::vector<ModelParams>* trace = nullptr);

// Equal-weight mixture log-likelihood, the objective gmm_em_baseline
// ascends.
double gmm_loglik(const IntensityImage& img, const ModelParams& params);

struct IcmConfig {
  int max_iters = 100;
  double tol = 1e-6;
  double beta = 0.0;  // held fixed throughout

  void check_valid() const;
};

struct IcmResult {
  ModelParams params;
  LabelField labels;
  int iterations = 0;
  bool converged = false;
};

// Comparison algorithm that replaces the joint posterior with per-pixel
// weights w_ik proportional to phi(y_i; mu_k, sigma2_k) exp(beta n_ik),
// where n_ik counts current hard-labeled neighbors with label k. Each
// iteration recomputes the weights, moves every hard label to its argmax
// (rng breaks exact ties), then applies weighted Gaussian updates. With
// beta = 0 the parameter sequence coincides with gmm_em_baseline.
IcmResult icm_em_baseline(const IntensityImage& img, const Lattice& lat, int M,
                          const ModelParams& init, const IcmConfig& cfg, Rng& rng);

}  // namespace pottsfit
