#include "pottsfit/model.hpp"

#include <cmath>
#include <stdexcept>

namespace pottsfit {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112;
}

void check_valid(const ModelParams& params) {
  if (params.mu.empty() || params.mu.size() != params.sigma2.size())
    throw std::invalid_argument("params must have matching mu/sigma2");
  for (double s2 : params.sigma2)
    if (!(s2 > 0.0)) throw std::invalid_argument("nonpositive variance");
  if (!(params.beta >= 0.0)) throw std::invalid_argument("beta must be >= 0");
}

double potts_energy(const LabelField& labels, const Lattice& lat) {
  check_compatible(labels, lat);
  int64_t count = 0;
  for (const auto& e : lat.edges) count += labels.v[e.a] == labels.v[e.b];
  return static_cast<double>(count);
}

SufficientStats sufficient_stats(const IntensityImage& img,
                                 const LabelField& labels, const Lattice& lat) {
  check_compatible(img, lat);
  check_compatible(labels, lat);
  const int m = labels.num_labels;
  SufficientStats s;
  s.t1.assign(m, 0.0);
  s.t2.assign(m, 0.0);
  s.t3.assign(m, 0.0);
  const int n = img.num_pixels();
  for (int i = 0; i < n; ++i) {
    int k = labels.v[i];
    double y = img.v[i];
    s.t1[k] += 1.0;
    s.t2[k] += y;
    s.t3[k] += y * y;
  }
  s.t4 = potts_energy(labels, lat);
  return s;
}

double log_normal_pdf(double y, double mu, double sigma2) {
  double d = y - mu;
  return -0.5 * (kLog2Pi + std::log(sigma2) + d * d / sigma2);
}

double complete_loglik(const SufficientStats& stats, const ModelParams& params,
                       double log_g) {
  check_valid(params);
  if (stats.num_components() != params.num_components())
    throw std::invalid_argument("stats/params component count mismatch");
  double n = 0.0;
  double gauss = 0.0;
  for (int k = 0; k < stats.num_components(); ++k) {
    n += stats.t1[k];
    double s2 = params.sigma2[k];
    double sse =
        stats.t3[k] - 2.0 * params.mu[k] * stats.t2[k] +
        params.mu[k] * params.mu[k] * stats.t1[k];
    gauss -= 0.5 * stats.t1[k] * std::log(s2) + 0.5 * sse / s2;
  }
  gauss -= 0.5 * n * kLog2Pi;
  return gauss + params.beta * stats.t4 - log_g;
}

double complete_loglik(const IntensityImage& img, const LabelField& labels,
                       const Lattice& lat, const ModelParams& params,
                       double log_g) {
  return complete_loglik(sufficient_stats(img, labels, lat), params, log_g);
}

}  // namespace pottsfit
