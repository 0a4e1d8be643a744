#pragma once

#include <cstdint>
#include <vector>

#include "pottsfit/bond_curve.hpp"
#include "pottsfit/fit_result.hpp"
#include "pottsfit/image.hpp"
#include "pottsfit/lattice.hpp"
#include "pottsfit/model.hpp"

namespace pottsfit {

struct McemConfig {
  int max_iters = 160;

  // S_t = min(sample_base + sample_incr * t, sample_cap), nondecreasing
  int sample_base = 50;
  int sample_incr = 10;
  int sample_cap = 500;

  std::vector<double> beta_grid = default_beta_grid();
  int curve_samples = 160;

  int burn_in = 50;
  int thin = 1;

  // Converged when the scaled change of every parameter stays below tol for
  // `window` consecutive iterations. The default sits about twice the Monte
  // Carlo noise floor of the capped sample schedule (the per-iteration
  // variance jitter is ~7e-3 relative at S=500 on a 128x128 image), so the
  // streak can actually occur once the drift stops; see docs/formats.md.
  double convergence_tol = 1.5e-2;
  int convergence_window = 3;

  double beta_init = 0.5;

  // Continuation schedule for beta. From the spread init the M2 target
  // overshoots immediately (coherent regions make T4 large at any parameter
  // values), and spatial pooling before the means have organized locks in
  // wrong component-to-region matchings that later iterations cannot undo;
  // under spatially correlated noise even moderate pooling does this. Beta
  // is therefore held at beta_warm_cap (default 0: plain mixture E-steps)
  // for the first warm_iters iterations, then released toward the M2 target
  // at no more than beta_rate per iteration. Neither limit binds at a fixed
  // point, so the stationary points are unchanged; decreases are never
  // limited. Convergence is only declared after the warm phase, so small
  // test fits should shrink warm_iters along with max_iters.
  int warm_iters = 80;
  double beta_warm_cap = 0.0;
  double beta_rate = 0.1;

  uint64_t seed = 0;

  int sample_count(int t) const;
};

void check_valid(const McemConfig& cfg);

// Evenly spaced means over the data range, sd = range/(2M) for every
// component, beta = beta_init. Rejects constant images.
ModelParams init_params(const IntensityImage& img, int M,
                        double beta_init = 0.5);

struct EStepResult {
  SufficientStats stats;
  std::vector<LabelField> samples;
};

// Averages sufficient statistics over S_t retained posterior Swendsen-Wang
// samples. The chain starts from the per-pixel maximum-likelihood labels and
// discards burn_in sweeps.
EStepResult e_step_full(const IntensityImage& img, const ModelParams& params,
                        const Lattice& lat, int s_t, int burn_in, int thin,
                        uint64_t seed);

SufficientStats e_step(const IntensityImage& img, const ModelParams& params,
                       const Lattice& lat, int s_t, uint64_t seed);

struct GaussianUpdate {
  std::vector<double> mu;
  std::vector<double> sigma2;
};

// mu_k = t2_k/t1_k, sigma2_k = t3_k/t1_k - mu_k^2, clamped at var_floor.
// Throws when any t1_k is zero; empty-component recovery is fit's job.
GaussianUpdate m1_step(const SufficientStats& stats, double var_floor);

// Full Monte Carlo EM fit. The bond curve is estimated once per fit (or
// reused from `shared_curve` when the caller already has one for this
// lattice/M/grid) and held fixed across iterations. Components are sorted by
// mean on output and the retained samples are relabeled to match.
FitResult fit(const IntensityImage& img, int M, const McemConfig& cfg,
              const BondCurve* shared_curve = nullptr,
              const ModelParams* init_override = nullptr);

}  // namespace pottsfit
