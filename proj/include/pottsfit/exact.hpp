#pragma once

#include <vector>

#include "pottsfit/image.hpp"
#include "pottsfit/lattice.hpp"
#include "pottsfit/model.hpp"

namespace pottsfit {

// Brute-force summary of a Potts distribution on a tiny lattice (the guard
// rejects state spaces above 1e7 configurations).
//
// Prior mode: log_g is the log partition function of Pr(z) over M^N
// configurations; e_t4/var_t4 are the prior moments of the bond count.
//
// Posterior mode: weights are exp(beta U(z)) * prod_i phi(y_i; mu, sigma2),
// so log_g is log[g(beta) p(y | theta)], the moments are posterior moments,
// and marginals holds the N x M per-pixel posterior label probabilities.
struct ExactDistribution {
  double log_g = 0.0;
  double e_t4 = 0.0;
  double var_t4 = 0.0;
  std::vector<double> marginals;  // empty in prior mode
};

ExactDistribution exact_enumerate(const Lattice& lat, int M, double beta);

ExactDistribution exact_enumerate(const Lattice& lat, const IntensityImage& img,
                                  const ModelParams& params);

}  // namespace pottsfit
