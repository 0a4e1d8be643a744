#include "pottsfit/sampler.hpp"

#include <cmath>

namespace pottsfit {

void check_valid(const ChainConfig& cfg) {
  if (cfg.sweeps <= 0) throw std::invalid_argument("sweeps must be positive");
  if (cfg.burn_in < 0 || cfg.burn_in >= cfg.sweeps)
    throw std::invalid_argument("burn_in must be in [0, sweeps)");
  if (cfg.thin < 1) throw std::invalid_argument("thin must be >= 1");
}

void SwWorkspace::prepare(int num_pixels, int num_labels) {
  parent.resize(num_pixels);
  csize.resize(num_pixels);
  root_of.resize(num_pixels);
  acc.resize(static_cast<size_t>(num_pixels) * num_labels);
  root_label.resize(num_pixels);
  if (static_cast<int>(epoch.size()) != num_pixels) {
    epoch.assign(num_pixels, 0);
    cur_epoch = 0;
  }
}

namespace {

int32_t uf_find(std::vector<int32_t>& parent, int32_t i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];  // path halving
    i = parent[i];
  }
  return i;
}

void uf_union(std::vector<int32_t>& parent, std::vector<int32_t>& csize,
              int32_t a, int32_t b) {
  a = uf_find(parent, a);
  b = uf_find(parent, b);
  if (a == b) return;
  if (csize[a] < csize[b]) std::swap(a, b);
  parent[b] = a;
  csize[a] += csize[b];
}

// bond step shared by both kernels; fills ws.root_of
void sw_bond_step(const LabelField& labels, const Lattice& lat, double beta,
                  SwWorkspace& ws, Rng& rng) {
  const int n = labels.num_pixels();
  for (int i = 0; i < n; ++i) {
    ws.parent[i] = i;
    ws.csize[i] = 1;
  }
  const double pfreeze = -std::expm1(-beta);  // 1 - exp(-beta)
  for (const auto& e : lat.edges) {
    if (labels.v[e.a] == labels.v[e.b] && rng.uniform() < pfreeze)
      uf_union(ws.parent, ws.csize, e.a, e.b);
  }
  for (int i = 0; i < n; ++i) ws.root_of[i] = uf_find(ws.parent, i);
}

}  // namespace

void sw_prior_sweep_inplace(LabelField& labels, const Lattice& lat, double beta,
                            SwWorkspace& ws, Rng& rng) {
  if (labels.width != lat.width || labels.height != lat.height)
    throw std::invalid_argument("label field dimensions do not match lattice");
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be >= 0");
  const int n = labels.num_pixels();
  const int m = labels.num_labels;
  ws.prepare(n, m);
  sw_bond_step(labels, lat, beta, ws, rng);
  ++ws.cur_epoch;
  // relabel each cluster uniformly, drawing at its first pixel in scan order
  for (int i = 0; i < n; ++i) {
    int32_t r = ws.root_of[i];
    if (ws.epoch[r] != ws.cur_epoch) {
      ws.epoch[r] = ws.cur_epoch;
      ws.root_label[r] = static_cast<uint8_t>(rng.uniform_below(m));
    }
    labels.v[i] = ws.root_label[r];
  }
}

PosteriorModel build_posterior_model(const IntensityImage& img,
                                     const ModelParams& params) {
  check_valid(params);
  const int n = img.num_pixels();
  const int m = params.num_components();
  PosteriorModel model;
  model.params = params;
  model.num_labels = m;
  model.logtab.resize(static_cast<size_t>(n) * m);
  std::vector<double> neg_half_inv(m), base(m);
  for (int k = 0; k < m; ++k) {
    neg_half_inv[k] = -0.5 / params.sigma2[k];
    base[k] = -0.5 * std::log(params.sigma2[k]);  // -log(2pi)/2 cancels in draws
  }
  for (int i = 0; i < n; ++i) {
    double y = img.v[i];
    double* row = &model.logtab[static_cast<size_t>(i) * m];
    for (int k = 0; k < m; ++k) {
      double d = y - params.mu[k];
      row[k] = base[k] + neg_half_inv[k] * d * d;
    }
  }
  return model;
}

void sw_posterior_sweep_inplace(LabelField& labels, const Lattice& lat,
                                const PosteriorModel& model, SwWorkspace& ws,
                                Rng& rng) {
  if (labels.width != lat.width || labels.height != lat.height)
    throw std::invalid_argument("label field dimensions do not match lattice");
  if (labels.num_labels != model.num_labels)
    throw std::invalid_argument("label count does not match model");
  const int n = labels.num_pixels();
  const int m = model.num_labels;
  ws.prepare(n, m);
  sw_bond_step(labels, lat, model.params.beta, ws, rng);

  // accumulate per-cluster log-likelihood totals, zeroing rows lazily
  ++ws.cur_epoch;
  for (int i = 0; i < n; ++i) {
    int32_t r = ws.root_of[i];
    double* arow = &ws.acc[static_cast<size_t>(r) * m];
    if (ws.epoch[r] != ws.cur_epoch) {
      ws.epoch[r] = ws.cur_epoch;
      for (int k = 0; k < m; ++k) arow[k] = 0.0;
    }
    const double* lrow = &model.logtab[static_cast<size_t>(i) * m];
    for (int k = 0; k < m; ++k) arow[k] += lrow[k];
  }

  // draw each cluster's label by log-sum-exp at its first pixel in scan order
  ++ws.cur_epoch;
  for (int i = 0; i < n; ++i) {
    int32_t r = ws.root_of[i];
    if (ws.epoch[r] != ws.cur_epoch) {
      ws.epoch[r] = ws.cur_epoch;
      const double* arow = &ws.acc[static_cast<size_t>(r) * m];
      double mx = arow[0];
      for (int k = 1; k < m; ++k) mx = std::max(mx, arow[k]);
      double total = 0.0;
      for (int k = 0; k < m; ++k) total += std::exp(arow[k] - mx);
      double u = rng.uniform() * total;
      int pick = m - 1;
      for (int k = 0; k < m; ++k) {
        u -= std::exp(arow[k] - mx);
        if (u < 0.0) {
          pick = k;
          break;
        }
      }
      ws.root_label[r] = static_cast<uint8_t>(pick);
    }
    labels.v[i] = ws.root_label[r];
  }
}

LabelField sw_prior_sweep(const LabelField& labels, const Lattice& lat,
                          double beta, Rng& rng) {
  check_compatible(labels, lat);
  LabelField out = labels;
  SwWorkspace ws;
  sw_prior_sweep_inplace(out, lat, beta, ws, rng);
  return out;
}

LabelField sw_posterior_sweep(const LabelField& labels,
                              const IntensityImage& img, const Lattice& lat,
                              const ModelParams& params, Rng& rng) {
  check_compatible(labels, lat);
  check_compatible(img, lat);
  PosteriorModel model = build_posterior_model(img, params);
  LabelField out = labels;
  SwWorkspace ws;
  sw_posterior_sweep_inplace(out, lat, model, ws, rng);
  return out;
}

LabelField ml_labels(const IntensityImage& img, const ModelParams& params) {
  check_valid(params);
  const int m = params.num_components();
  LabelField lf = make_labels(img.width, img.height, m);
  const int n = img.num_pixels();
  for (int i = 0; i < n; ++i) {
    double y = img.v[i];
    int best = 0;
    double best_ll = log_normal_pdf(y, params.mu[0], params.sigma2[0]);
    for (int k = 1; k < m; ++k) {
      double ll = log_normal_pdf(y, params.mu[k], params.sigma2[k]);
      if (ll > best_ll) {
        best_ll = ll;
        best = k;
      }
    }
    lf.v[i] = static_cast<uint8_t>(best);
  }
  return lf;
}

}  // namespace pottsfit
