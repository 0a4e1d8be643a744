#include "pottsfit/bond_curve.hpp"

#include <cmath>
#include <stdexcept>

#include "pottsfit/isotonic.hpp"
#include "pottsfit/model.hpp"
#include "pottsfit/rng.hpp"
#include "pottsfit/sampler.hpp"

namespace pottsfit {

namespace {

void check_grid(const std::vector<double>& grid) {
  if (grid.empty() || grid[0] != 0.0)
    throw std::invalid_argument("beta grid must start at 0");
  for (size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw std::invalid_argument("beta grid must be strictly increasing");
}

// index of the segment [betas[j], betas[j+1]] containing beta
int segment_of(const BondCurve& curve, double beta) {
  int lo = 0, hi = curve.size() - 2;
  while (lo < hi) {
    int mid = (lo + hi + 1) / 2;
    if (curve.betas[mid] <= beta)
      lo = mid;
    else
      hi = mid - 1;
  }
  return lo;
}

}  // namespace

std::vector<double> default_beta_grid(double max_beta, double step) {
  if (!(max_beta > 0.0) || !(step > 0.0))
    throw std::invalid_argument("bad beta grid parameters");
  std::vector<double> grid;
  for (int i = 0;; ++i) {
    double b = i * step;
    if (b > max_beta + 1e-12) break;
    grid.push_back(b);
  }
  return grid;
}

BondCurve estimate_bond_curve(const Lattice& lat, int M,
                              const std::vector<double>& beta_grid,
                              int curve_samples, uint64_t seed) {
  check_grid(beta_grid);
  if (M < 1) throw std::invalid_argument("M must be >= 1");
  if (curve_samples < 20)
    throw std::invalid_argument("curve_samples must be >= 20");

  const double e = lat.num_edges();
  BondCurve curve;
  curve.betas = beta_grid;
  const int p = curve.size();
  curve.means.assign(p, 0.0);
  curve.vars.assign(p, 0.0);
  curve.se.assign(p, 0.0);

  curve.means[0] = e / M;
  curve.vars[0] = e * (1.0 / M) * (1.0 - 1.0 / M);

  const double beta_crit = std::log(1.0 + std::sqrt(static_cast<double>(M)));
  const int burn = 40;
  const int n = lat.num_pixels();
  SwWorkspace ws;

  for (int j = 1; j < p; ++j) {
    double beta = curve.betas[j];
    Rng rng(derive_seed(seed, "curve-point", j));
    auto lf = make_labels(lat.width, lat.height, M, 0);
    if (beta <= beta_crit && M > 1)
      for (auto& z : lf.v) z = static_cast<uint8_t>(rng.uniform_below(M));
    for (int s = 0; s < burn; ++s) sw_prior_sweep_inplace(lf, lat, beta, ws, rng);

    double sum = 0.0, sum2 = 0.0;
    const int batches = 10;
    int per_batch = curve_samples / batches;
    int total = per_batch * batches;
    std::vector<double> batch_mean(batches, 0.0);
    for (int b = 0; b < batches; ++b) {
      for (int s = 0; s < per_batch; ++s) {
        sw_prior_sweep_inplace(lf, lat, beta, ws, rng);
        double u = potts_energy(lf, lat);
        sum += u;
        sum2 += u * u;
        batch_mean[b] += u;
      }
      batch_mean[b] /= per_batch;
    }
    curve.means[j] = sum / total;
    curve.vars[j] = std::max(0.0, sum2 / total - curve.means[j] * curve.means[j]);
    double bvar = 0.0;
    for (double bm : batch_mean) {
      double d = bm - curve.means[j];
      bvar += d * d;
    }
    curve.se[j] = std::sqrt(bvar / (batches - 1) / batches);
  }
  (void)n;

  // isotonic adjustment weighted by precision; the analytic anchor and any
  // saturated points carry near-infinite weight
  std::vector<double> w(p);
  for (int j = 0; j < p; ++j)
    w[j] = 1.0 / (curve.se[j] * curve.se[j] + 1e-12);
  curve.monotone_means = isotonic_fit(curve.means, w);
  for (double& mval : curve.monotone_means)
    mval = std::min(std::max(mval, 0.0), e);
  return curve;
}

double curve_mean_at(const BondCurve& curve, double beta) {
  if (curve.size() == 0) throw std::invalid_argument("empty curve");
  if (beta < 0.0 || beta > curve.max_beta() + 1e-12)
    throw std::invalid_argument("beta outside curve grid");
  if (curve.size() == 1) return curve.monotone_means[0];
  beta = std::min(beta, curve.max_beta());
  int j = segment_of(curve, beta);
  double b0 = curve.betas[j], b1 = curve.betas[j + 1];
  double f = (beta - b0) / (b1 - b0);
  return (1.0 - f) * curve.monotone_means[j] + f * curve.monotone_means[j + 1];
}

double curve_var_at(const BondCurve& curve, double beta) {
  if (curve.size() == 0) throw std::invalid_argument("empty curve");
  if (beta < 0.0 || beta > curve.max_beta() + 1e-12)
    throw std::invalid_argument("beta outside curve grid");
  if (curve.size() == 1) return curve.vars[0];
  if (curve.size() == 2) {
    double f = (beta - curve.betas[0]) / (curve.betas[1] - curve.betas[0]);
    return std::max(0.0, (1.0 - f) * curve.vars[0] + f * curve.vars[1]);
  }
  int j = segment_of(curve, std::min(beta, curve.max_beta()));
  int c = std::min(std::max(j, 1), curve.size() - 2);  // center of the triple
  double x0 = curve.betas[c - 1], x1 = curve.betas[c], x2 = curve.betas[c + 1];
  double y0 = curve.vars[c - 1], y1 = curve.vars[c], y2 = curve.vars[c + 1];
  double l0 = (beta - x1) * (beta - x2) / ((x0 - x1) * (x0 - x2));
  double l1 = (beta - x0) * (beta - x2) / ((x1 - x0) * (x1 - x2));
  double l2 = (beta - x0) * (beta - x1) / ((x2 - x0) * (x2 - x1));
  return std::max(0.0, y0 * l0 + y1 * l1 + y2 * l2);
}

double m2_step(double t4, const BondCurve& curve, bool* boundary) {
  if (curve.size() == 0) throw std::invalid_argument("empty curve");
  if (boundary) *boundary = false;
  double lo = 0.0, hi = curve.max_beta();
  if (t4 <= curve.monotone_means.front()) {
    if (boundary) *boundary = t4 < curve.monotone_means.front();
    return 0.0;
  }
  if (t4 >= curve.monotone_means.back()) {
    if (boundary) *boundary = t4 > curve.monotone_means.back();
    return hi;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    double mid = 0.5 * (lo + hi);
    if (curve_mean_at(curve, mid) < t4)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double log_partition(double beta, const BondCurve& curve, const Lattice& lat,
                     int M) {
  if (M < 1) throw std::invalid_argument("M must be >= 1");
  if (beta < 0.0 || beta > curve.max_beta() + 1e-12)
    throw std::invalid_argument("beta outside curve grid");
  double total = lat.num_pixels() * std::log(static_cast<double>(M));
  if (beta <= 0.0 || curve.size() < 2) return total;
  beta = std::min(beta, curve.max_beta());
  for (int j = 0; j + 1 < curve.size(); ++j) {
    double b0 = curve.betas[j], b1 = curve.betas[j + 1];
    if (beta <= b0) break;
    double upper = std::min(beta, b1);
    double m0 = curve.monotone_means[j];
    double m1 = curve_mean_at(curve, upper);
    total += 0.5 * (m0 + m1) * (upper - b0);
  }
  return total;
}

}  // namespace pottsfit
