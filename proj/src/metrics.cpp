#include "pottsfit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace pottsfit {

std::vector<int> mean_rank(const ModelParams& params) {
  int M = params.num_components();
  std::vector<int> order(M);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&params](int a, int b) { return params.mu[a] < params.mu[b]; });
  std::vector<int> rank(M);
  for (int r = 0; r < M; ++r) rank[order[r]] = r;
  return rank;
}

LabelField mode_labels(const std::vector<LabelField>& samples) {
  if (samples.empty()) throw std::invalid_argument("mode_labels needs at least one sample");
  const auto& first = samples.front();
  std::size_t n = first.v.size();
  for (const auto& s : samples)
    if (s.v.size() != n || s.num_labels != first.num_labels)
      throw std::invalid_argument("mode_labels samples do not match");
  LabelField out = first;
  std::vector<int> count(first.num_labels);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(count.begin(), count.end(), 0);
    for (const auto& s : samples) ++count[s.v[i]];
    out.v[i] = std::uint8_t(std::max_element(count.begin(), count.end()) - count.begin());
  }
  return out;
}

MetricsReport metrics(const LabelField& z_true, const IntensityImage& mu_true,
                      const IntensityImage& est_map, const LabelField& hard_est,
                      const IntensityImage& y, double tau, const ModelParams& true_params,
                      const ModelParams& est_params) {
  std::size_t n = z_true.v.size();
  if (mu_true.v.size() != n || est_map.v.size() != n || hard_est.v.size() != n ||
      y.v.size() != n || z_true.width != mu_true.width || z_true.width != est_map.width ||
      z_true.width != hard_est.width || z_true.width != y.width)
    throw std::invalid_argument("metrics inputs have mismatched dimensions");
  if (!std::isfinite(tau)) throw std::invalid_argument("threshold must be finite");
  check_valid(true_params);
  check_valid(est_params);
  if (z_true.num_labels > true_params.num_components() ||
      hard_est.num_labels > est_params.num_components())
    throw std::invalid_argument("label fields exceed their parameter sets");

  auto rank_true = mean_rank(true_params);
  auto rank_est = mean_rank(est_params);

  MetricsReport rep;
  std::size_t wrong = 0, false_pos = 0, false_neg = 0, pos = 0, neg = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double de = est_map.v[i] - mu_true.v[i];
    double dy = y.v[i] - mu_true.v[i];
    rep.ss_est_true += de * de;
    rep.ss_obs_true += dy * dy;
    if (rank_true[z_true.v[i]] != rank_est[hard_est.v[i]]) ++wrong;
    bool truth_pos = mu_true.v[i] > tau;
    bool pred_pos = est_map.v[i] > tau;
    if (truth_pos) {
      ++pos;
      if (!pred_pos) ++false_neg;
    } else {
      ++neg;
      if (pred_pos) ++false_pos;
    }
  }
  rep.mcr = double(wrong) / double(n);
  rep.fpr = neg ? double(false_pos) / double(neg) : 0.0;
  rep.fnr = pos ? double(false_neg) / double(pos) : 0.0;

  auto sorted_of = [](const ModelParams& p) {
    auto rank = mean_rank(p);
    std::vector<double> mu(p.mu.size()), sd(p.mu.size());
    for (std::size_t k = 0; k < p.mu.size(); ++k) {
      mu[std::size_t(rank[k])] = p.mu[k];
      sd[std::size_t(rank[k])] = std::sqrt(p.sigma2[k]);
    }
    return std::pair{mu, sd};
  };
  auto [mu_t, sd_t] = sorted_of(true_params);
  auto [mu_e, sd_e] = sorted_of(est_params);
  std::size_t shared = std::min(mu_t.size(), mu_e.size());
  for (std::size_t k = 0; k < shared; ++k) {
    rep.mu_err.push_back(mu_e[k] - mu_t[k]);
    rep.sd_err.push_back(sd_e[k] - sd_t[k]);
  }
  return rep;
}

}  // namespace pottsfit
