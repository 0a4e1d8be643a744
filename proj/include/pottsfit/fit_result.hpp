#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "pottsfit/bond_curve.hpp"
#include "pottsfit/image.hpp"
#include "pottsfit/model.hpp"

namespace pottsfit {

// Symmetric (2M+1) x (2M+1) matrix in parameter order (mu_1..mu_M,
// sigma2_1..sigma2_M, beta), stored row-major.
struct ObservedInformation {
  int dim = 0;
  std::vector<double> mat;
  bool positive_definite = false;
  double min_eigenvalue = 0.0;

  bool present() const { return dim > 0; }
  double at(int r, int c) const { return mat[static_cast<size_t>(r) * dim + c]; }
  double& at(int r, int c) { return mat[static_cast<size_t>(r) * dim + c]; }
};

struct IterationRecord {
  int iter = 0;
  ModelParams params;
  double t4 = 0.0;
  int samples = 0;
};

struct FitResult {
  ModelParams params;
  bool converged = false;
  int iterations = 0;
  bool beta_boundary = false;
  bool beta_identified = true;  // false for M = 1, where beta drops out
  uint64_t seed = 0;

  BondCurve curve;
  std::vector<LabelField> samples;  // final E-step retained samples
  std::vector<IterationRecord> trace;

  // filled by the inference stage
  ObservedInformation info;
  double loglik_obs = std::numeric_limits<double>::quiet_NaN();
  double loglik_obs_se = std::numeric_limits<double>::quiet_NaN();
  double aic = std::numeric_limits<double>::quiet_NaN();
  double bic = std::numeric_limits<double>::quiet_NaN();

  int num_components() const { return params.num_components(); }
};

}  // namespace pottsfit
