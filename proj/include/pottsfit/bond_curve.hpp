#pragma once

#include <cstdint>
#include <vector>

#include "pottsfit/lattice.hpp"

namespace pottsfit {

// Monte Carlo estimate of the prior bond-count expectation E_beta[T4] (and
// its variance) over a beta grid. The beta = 0 entry is analytic: under
// independent uniform labels each edge matches with probability 1/M and the
// edge indicators are pairwise uncorrelated, so mean = E/M and
// var = E (1/M)(1 - 1/M). monotone_means is the isotonic adjustment used for
// root solving and integration; se holds batch-means standard errors.
struct BondCurve {
  std::vector<double> betas;
  std::vector<double> means;
  std::vector<double> vars;
  std::vector<double> monotone_means;
  std::vector<double> se;

  int size() const { return static_cast<int>(betas.size()); }
  double max_beta() const { return betas.back(); }
};

std::vector<double> default_beta_grid(double max_beta = 3.0,
                                      double step = 0.05);

// One prior Swendsen-Wang chain per grid point; chains start from a constant
// field above the Potts transition log(1 + sqrt(M)) and from independent
// uniform labels below it. Point i uses the substream ("curve-point", i).
BondCurve estimate_bond_curve(const Lattice& lat, int M,
                              const std::vector<double>& beta_grid,
                              int curve_samples, uint64_t seed);

// piecewise-linear interpolation of the monotone means
double curve_mean_at(const BondCurve& curve, double beta);

// Var_beta[T4] via a quadratic through the three grid points nearest beta,
// clamped at 0
double curve_var_at(const BondCurve& curve, double beta);

// Solves E_beta[T4] = t4 by bisection on the monotone interpolant; clamps to
// [0, max grid beta] when t4 falls outside the curve range and then reports
// boundary = true.
double m2_step(double t4, const BondCurve& curve, bool* boundary = nullptr);

// log g(beta) = N log M + integral_0^beta of the monotone curve (trapezoid,
// exact for the piecewise-linear interpolant)
double log_partition(double beta, const BondCurve& curve, const Lattice& lat,
                     int M);

}  // namespace pottsfit
