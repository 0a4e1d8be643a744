#include "pottsfit/exact.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace pottsfit {

namespace {

uint64_t checked_state_count(int n, int m) {
  double count = std::pow(static_cast<double>(m), n);
  if (count > 1e7) throw std::invalid_argument("state space above 1e7 guard");
  uint64_t c = 1;
  for (int i = 0; i < n; ++i) c *= static_cast<uint64_t>(m);
  return c;
}

// walks all M^N label vectors, calling visit(z, U(z))
template <typename Visit>
void enumerate(const Lattice& lat, int n, int m, Visit&& visit) {
  std::vector<uint8_t> z(n, 0);
  uint64_t count = checked_state_count(n, m);
  for (uint64_t c = 0;; ++c) {
    int64_t u = 0;
    for (const auto& e : lat.edges) u += z[e.a] == z[e.b];
    visit(z, static_cast<double>(u));
    if (c + 1 == count) break;
    for (int i = 0; i < n; ++i) {
      if (++z[i] < m) break;
      z[i] = 0;
    }
  }
}

// two-pass exponential sums: first find the max exponent, then accumulate
template <typename LogWeight>
ExactDistribution summarize(const Lattice& lat, int n, int m,
                            LogWeight&& log_weight, bool want_marginals) {
  double max_a = -std::numeric_limits<double>::infinity();
  enumerate(lat, n, m, [&](const std::vector<uint8_t>& z, double u) {
    max_a = std::max(max_a, log_weight(z, u));
  });

  ExactDistribution d;
  double total = 0.0, sum_u = 0.0, sum_u2 = 0.0;
  if (want_marginals) d.marginals.assign(static_cast<size_t>(n) * m, 0.0);
  enumerate(lat, n, m, [&](const std::vector<uint8_t>& z, double u) {
    double w = std::exp(log_weight(z, u) - max_a);
    total += w;
    sum_u += w * u;
    sum_u2 += w * u * u;
    if (want_marginals)
      for (int i = 0; i < n; ++i)
        d.marginals[static_cast<size_t>(i) * m + z[i]] += w;
  });

  d.log_g = max_a + std::log(total);
  d.e_t4 = sum_u / total;
  d.var_t4 = std::max(0.0, sum_u2 / total - d.e_t4 * d.e_t4);
  for (double& p : d.marginals) p /= total;
  return d;
}

}  // namespace

ExactDistribution exact_enumerate(const Lattice& lat, int M, double beta) {
  if (M < 1) throw std::invalid_argument("M must be >= 1");
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be >= 0");
  return summarize(
      lat, lat.num_pixels(), M,
      [beta](const std::vector<uint8_t>&, double u) { return beta * u; },
      false);
}

ExactDistribution exact_enumerate(const Lattice& lat, const IntensityImage& img,
                                  const ModelParams& params) {
  check_valid(params);
  check_compatible(img, lat);
  const int n = lat.num_pixels();
  const int m = params.num_components();
  std::vector<double> logtab(static_cast<size_t>(n) * m);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < m; ++k)
      logtab[static_cast<size_t>(i) * m + k] =
          log_normal_pdf(img.v[i], params.mu[k], params.sigma2[k]);
  double beta = params.beta;
  return summarize(
      lat, n, m,
      [&](const std::vector<uint8_t>& z, double u) {
        double a = beta * u;
        for (int i = 0; i < n; ++i)
          a += logtab[static_cast<size_t>(i) * m + z[i]];
        return a;
      },
      true);
}

}  // namespace pottsfit
