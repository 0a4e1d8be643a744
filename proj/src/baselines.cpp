#include "pottsfit/baselines.hpp"

#include "pottsfit/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace pottsfit {

namespace {

double variance_floor(const IntensityImage& img) {
  auto [lo, hi] = std::minmax_element(img.v.begin(), img.v.end());
  double range = *hi - *lo;
  return std::max(1e-6 * range * range, 1e-12);
}

void check_mixture_args(const IntensityImage& img, int M, const ModelParams& init,
                        double tol, int max_iters) {
  check_finite(img);
  if (M < 1) throw std::invalid_argument("need at least one component");
  if (int(init.mu.size()) != M) throw std::invalid_argument("init does not match M");
  check_valid(init);
  if (!(tol >= 0.0)) throw std::invalid_argument("tol must be nonnegative");
  if (max_iters < 1) throw std::invalid_argument("max_iters must be positive");
}

double max_param_change(const ModelParams& a, const ModelParams& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.mu.size(); ++k) {
    d = std::max(d, std::fabs(a.mu[k] - b.mu[k]));
    d = std::max(d, std::fabs(a.sigma2[k] - b.sigma2[k]));
  }
  return d;
}

}  // namespace

ModelParams gmm_em_baseline(const IntensityImage& img, int M, const ModelParams& init,
                            double tol, int max_iters, std::vector<ModelParams>* trace) {
  check_mixture_args(img, M, init, tol, max_iters);
  double floor = variance_floor(img);
  ModelParams cur = init;
  cur.beta = 0.0;
  if (trace) {
    trace->clear();
    trace->push_back(cur);
  }
  std::vector<double> lw(M), n(M), s1(M), s2(M);
  for (int iter = 0; iter < max_iters; ++iter) {
    std::fill(n.begin(), n.end(), 0.0);
    std::fill(s1.begin(), s1.end(), 0.0);
    std::fill(s2.begin(), s2.end(), 0.0);
    for (double y : img.v) {
      double top = -std::numeric_limits<double>::infinity();
      for (int k = 0; k < M; ++k) {
        double d = y - cur.mu[k];
        lw[k] = -0.5 * std::log(cur.sigma2[k]) - d * d / (2.0 * cur.sigma2[k]);
        top = std::max(top, lw[k]);
      }
      double denom = 0.0;
      for (int k = 0; k < M; ++k) denom += std::exp(lw[k] - top);
      for (int k = 0; k < M; ++k) {
        double r = std::exp(lw[k] - top) / denom;
        n[k] += r;
        s1[k] += r * y;
        s2[k] += r * y * y;
      }
    }
    ModelParams next = cur;
    for (int k = 0; k < M; ++k) {
      if (n[k] < 1e-12) continue;  // component starved by underflow, keep it
      next.mu[k] = s1[k] / n[k];
      next.sigma2[k] = std::max(s2[k] / n[k] - next.mu[k] * next.mu[k], floor);
    }
    double delta = max_param_change(next, cur);
    cur = next;
    if (trace) trace->push_back(cur);
    if (delta < tol) break;
  }
  return cur;
}

double gmm_loglik(const IntensityImage& img, const ModelParams& params) {
  check_finite(img);
  check_valid(params);
  int M = params.num_components();
  double total = 0.0;
  std::vector<double> lw(M);
  for (double y : img.v) {
    double top = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < M; ++k) {
      lw[k] = log_normal_pdf(y, params.mu[k], params.sigma2[k]);
      top = std::max(top, lw[k]);
    }
    double acc = 0.0;
    for (int k = 0; k < M; ++k) acc += std::exp(lw[k] - top);
    total += top + std::log(acc / M);
  }
  return total;
}

void IcmConfig::check_valid() const {
  if (max_iters < 1) throw std::invalid_argument("max_iters must be positive");
  if (!(tol >= 0.0)) throw std::invalid_argument("tol must be nonnegative");
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be nonnegative");
}

IcmResult icm_em_baseline(const IntensityImage& img, const Lattice& lat, int M,
                          const ModelParams& init, const IcmConfig& cfg, Rng& rng) {
  check_mixture_args(img, M, init, cfg.tol, cfg.max_iters);
  cfg.check_valid();
  check_compatible(img, lat);
  if (M > 255) throw std::invalid_argument("too many components for a label field");
  double floor = variance_floor(img);
  std::size_t n_px = img.v.size();

  IcmResult out;
  out.params = init;
  out.params.beta = cfg.beta;
  out.labels = ml_labels(img, init);

  std::vector<double> lw(M), wsum(M), s1(M), s2(M);
  std::vector<int> argmax;
  std::vector<std::uint8_t> next_labels(n_px);
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    std::fill(wsum.begin(), wsum.end(), 0.0);
    std::fill(s1.begin(), s1.end(), 0.0);
    std::fill(s2.begin(), s2.end(), 0.0);
    // weights against the current hard field for all pixels at once
    for (std::size_t i = 0; i < n_px; ++i) {
      double y = img.v[i];
      double top = -std::numeric_limits<double>::infinity();
      for (int k = 0; k < M; ++k) {
        double d = y - out.params.mu[k];
        lw[k] = -0.5 * std::log(out.params.sigma2[k]) - d * d / (2.0 * out.params.sigma2[k]);
      }
      for (auto e = lat.nbr_start[i]; e < lat.nbr_start[i + 1]; ++e)
        lw[out.labels.v[lat.nbr[e]]] += cfg.beta;
      for (int k = 0; k < M; ++k) top = std::max(top, lw[k]);
      argmax.clear();
      double denom = 0.0;
      for (int k = 0; k < M; ++k) {
        denom += std::exp(lw[k] - top);
        if (lw[k] == top) argmax.push_back(k);
      }
      int pick = argmax.size() == 1
                     ? argmax[0]
                     : argmax[rng.uniform_below(std::uint32_t(argmax.size()))];
      next_labels[i] = std::uint8_t(pick);
      for (int k = 0; k < M; ++k) {
        double r = std::exp(lw[k] - top) / denom;
        wsum[k] += r;
        s1[k] += r * y;
        s2[k] += r * y * y;
      }
    }
    bool labels_stable = std::equal(next_labels.begin(), next_labels.end(), out.labels.v.begin());
    std::copy(next_labels.begin(), next_labels.end(), out.labels.v.begin());
    ModelParams next = out.params;
    for (int k = 0; k < M; ++k) {
      if (wsum[k] < 1e-12) continue;
      next.mu[k] = s1[k] / wsum[k];
      next.sigma2[k] = std::max(s2[k] / wsum[k] - next.mu[k] * next.mu[k], floor);
    }
    double delta = max_param_change(next, out.params);
    out.params = next;
    out.iterations = iter + 1;
    if (labels_stable && delta < cfg.tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace pottsfit
