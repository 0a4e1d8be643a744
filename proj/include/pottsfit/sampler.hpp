#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "pottsfit/image.hpp"
#include "pottsfit/lattice.hpp"
#include "pottsfit/model.hpp"
#include "pottsfit/rng.hpp"

namespace pottsfit {

struct ChainConfig {
  int sweeps = 0;
  int burn_in = 50;
  int thin = 1;
  uint64_t seed = 0;
};

void check_valid(const ChainConfig& cfg);

// Scratch buffers reused across sweeps so the kernels allocate nothing in
// steady state. Each concurrent chain owns its workspace.
struct SwWorkspace {
  std::vector<int32_t> parent;
  std::vector<int32_t> csize;
  std::vector<int32_t> root_of;
  std::vector<double> acc;
  std::vector<uint8_t> root_label;
  std::vector<int32_t> epoch;
  int32_t cur_epoch = 0;

  void prepare(int num_pixels, int num_labels);
};

// Per-pixel Gaussian log-likelihood table, computed once per parameter value
// and shared by every posterior sweep at those parameters.
struct PosteriorModel {
  ModelParams params;
  std::vector<double> logtab;  // num_pixels x M, row-major by pixel
  int num_labels = 0;
};

PosteriorModel build_posterior_model(const IntensityImage& img,
                                     const ModelParams& params);

// One Swendsen-Wang sweep under the prior Potts field: freeze each like-label
// edge with probability 1 - exp(-beta), then relabel every cluster uniformly.
void sw_prior_sweep_inplace(LabelField& labels, const Lattice& lat, double beta,
                            SwWorkspace& ws, Rng& rng);

// Posterior sweep: same bond step, but each cluster C takes label k with
// probability proportional to prod_{i in C} phi(y_i; mu_k, sigma2_k),
// normalized in log space.
void sw_posterior_sweep_inplace(LabelField& labels, const Lattice& lat,
                                const PosteriorModel& model, SwWorkspace& ws,
                                Rng& rng);

// Functional wrappers matching the one-sweep transition contract.
LabelField sw_prior_sweep(const LabelField& labels, const Lattice& lat,
                          double beta, Rng& rng);
LabelField sw_posterior_sweep(const LabelField& labels,
                              const IntensityImage& img, const Lattice& lat,
                              const ModelParams& params, Rng& rng);

// per-pixel maximum-likelihood labels; the default posterior chain start
LabelField ml_labels(const IntensityImage& img, const ModelParams& params);

// Applies `kernel(labels, rng)` for cfg.sweeps sweeps, discards the first
// cfg.burn_in, and passes every thin-th retained state to `sink`. Retained
// count is (sweeps - burn_in) / thin.
template <typename Kernel, typename Sink>
void run_chain(LabelField labels, Kernel&& kernel, const ChainConfig& cfg,
               Sink&& sink) {
  check_valid(cfg);
  Rng rng(cfg.seed);
  for (int s = 1; s <= cfg.sweeps; ++s) {
    kernel(labels, rng);
    if (s > cfg.burn_in && (s - cfg.burn_in) % cfg.thin == 0) sink(labels);
  }
}

template <typename Kernel>
std::vector<LabelField> run_chain_collect(LabelField init, Kernel&& kernel,
                                          const ChainConfig& cfg) {
  std::vector<LabelField> out;
  out.reserve((cfg.sweeps - cfg.burn_in) / cfg.thin);
  run_chain(std::move(init), kernel, cfg,
            [&](const LabelField& state) { out.push_back(state); });
  return out;
}

}  // namespace pottsfit
