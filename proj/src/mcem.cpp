#include "pottsfit/mcem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "pottsfit/rng.hpp"
#include "pottsfit/sampler.hpp"

namespace pottsfit {

int McemConfig::sample_count(int t) const {
  return std::min(sample_base + sample_incr * t, sample_cap);
}

void check_valid(const McemConfig& cfg) {
  if (cfg.max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  if (cfg.sample_base < 1 || cfg.sample_incr < 0 ||
      cfg.sample_cap < cfg.sample_base)
    throw std::invalid_argument("bad sample schedule");
  if (cfg.beta_grid.empty() || cfg.beta_grid[0] != 0.0)
    throw std::invalid_argument("beta grid must start at 0");
  if (cfg.burn_in < 0 || cfg.thin < 1)
    throw std::invalid_argument("bad burn_in/thin");
  if (!(cfg.convergence_tol > 0.0) || cfg.convergence_window < 1)
    throw std::invalid_argument("bad convergence settings");
  if (!(cfg.beta_init >= 0.0))
    throw std::invalid_argument("beta_init must be >= 0");
  if (cfg.warm_iters < 0 || !(cfg.beta_warm_cap >= 0.0) ||
      !(cfg.beta_rate > 0.0))
    throw std::invalid_argument("bad beta continuation settings");
}

ModelParams init_params(const IntensityImage& img, int M, double beta_init) {
  if (M < 1 || M > 255) throw std::invalid_argument("M must be in 1..255");
  check_finite(img);
  auto [lo_it, hi_it] = std::minmax_element(img.v.begin(), img.v.end());
  double lo = *lo_it, hi = *hi_it;
  double range = hi - lo;
  // a constant image still admits the single-component model
  if (!(range > 0.0) && M > 1)
    throw std::invalid_argument("constant image: cannot initialize components");
  ModelParams p;
  p.beta = beta_init;
  double sd = range > 0.0 ? range / (2.0 * M) : 1.0;
  for (int k = 0; k < M; ++k) {
    double mu = M == 1 ? 0.5 * (lo + hi) : lo + range * k / (M - 1);
    p.mu.push_back(mu);
    p.sigma2.push_back(sd * sd);
  }
  return p;
}

EStepResult e_step_full(const IntensityImage& img, const ModelParams& params,
                        const Lattice& lat, int s_t, int burn_in, int thin,
                        uint64_t seed) {
  if (s_t < 1) throw std::invalid_argument("sample count must be >= 1");
  check_compatible(img, lat);
  auto model = build_posterior_model(img, params);
  const int m = params.num_components();

  EStepResult out;
  out.stats.t1.assign(m, 0.0);
  out.stats.t2.assign(m, 0.0);
  out.stats.t3.assign(m, 0.0);
  out.samples.reserve(s_t);

  SwWorkspace ws;
  ChainConfig chain{.sweeps = burn_in + s_t * thin,
                    .burn_in = burn_in,
                    .thin = thin,
                    .seed = seed};
  run_chain(
      ml_labels(img, params),
      [&](LabelField& lf, Rng& rng) {
        sw_posterior_sweep_inplace(lf, lat, model, ws, rng);
      },
      chain,
      [&](const LabelField& lf) {
        auto s = sufficient_stats(img, lf, lat);
        for (int k = 0; k < m; ++k) {
          out.stats.t1[k] += s.t1[k];
          out.stats.t2[k] += s.t2[k];
          out.stats.t3[k] += s.t3[k];
        }
        out.stats.t4 += s.t4;
        out.samples.push_back(lf);
      });

  for (int k = 0; k < m; ++k) {
    out.stats.t1[k] /= s_t;
    out.stats.t2[k] /= s_t;
    out.stats.t3[k] /= s_t;
  }
  out.stats.t4 /= s_t;
  return out;
}

SufficientStats e_step(const IntensityImage& img, const ModelParams& params,
                       const Lattice& lat, int s_t, uint64_t seed) {
  return e_step_full(img, params, lat, s_t, 50, 1, seed).stats;
}

GaussianUpdate m1_step(const SufficientStats& stats, double var_floor) {
  const int m = stats.num_components();
  GaussianUpdate u;
  u.mu.resize(m);
  u.sigma2.resize(m);
  for (int k = 0; k < m; ++k) {
    if (!(stats.t1[k] > 0.0))
      throw std::invalid_argument("empty component in m1_step");
    u.mu[k] = stats.t2[k] / stats.t1[k];
    u.sigma2[k] =
        std::max(stats.t3[k] / stats.t1[k] - u.mu[k] * u.mu[k], var_floor);
  }
  return u;
}

namespace {

// index of the data point least explained by the current equal-weight mixture
int lowest_density_pixel(const IntensityImage& img, const ModelParams& p) {
  int worst = 0;
  double worst_ll = std::numeric_limits<double>::infinity();
  const int m = p.num_components();
  for (int i = 0; i < img.num_pixels(); ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < m; ++k)
      mx = std::max(mx, log_normal_pdf(img.v[i], p.mu[k], p.sigma2[k]));
    double total = 0.0;
    for (int k = 0; k < m; ++k)
      total += std::exp(log_normal_pdf(img.v[i], p.mu[k], p.sigma2[k]) - mx);
    double ll = mx + std::log(total / m);
    if (ll < worst_ll) {
      worst_ll = ll;
      worst = i;
    }
  }
  return worst;
}

// scaled parameter change used by the convergence test
double param_change(const ModelParams& prev, const ModelParams& next,
                    double range) {
  double worst = 0.0;
  for (int k = 0; k < prev.num_components(); ++k) {
    worst = std::max(worst, std::fabs(next.mu[k] - prev.mu[k]) /
                                (std::fabs(prev.mu[k]) + 0.01 * range));
    worst = std::max(worst, std::fabs(next.sigma2[k] - prev.sigma2[k]) /
                                std::fabs(prev.sigma2[k]));
  }
  worst = std::max(worst, std::fabs(next.beta - prev.beta) /
                              (std::fabs(prev.beta) + 0.05));
  return worst;
}

}  // namespace

FitResult fit(const IntensityImage& img, int M, const McemConfig& cfg,
              const BondCurve* shared_curve, const ModelParams* init_override) {
  check_valid(cfg);
  check_finite(img);
  auto lat = build_lattice(img.width, img.height);

  FitResult res;
  res.seed = cfg.seed;
  auto [lo_it, hi_it] = std::minmax_element(img.v.begin(), img.v.end());
  double range = *hi_it - *lo_it;
  double var_floor = std::max(1e-6 * range * range, 1e-12);

  ModelParams params = init_override
                           ? *init_override
                           : init_params(img, M, cfg.beta_init);
  if (params.num_components() != M)
    throw std::invalid_argument("init_override has wrong component count");
  check_valid(params);
  double init_var = params.sigma2[0];

  if (shared_curve) {
    res.curve = *shared_curve;
  } else {
    res.curve = estimate_bond_curve(lat, M, cfg.beta_grid, cfg.curve_samples,
                                    derive_seed(cfg.seed, "curve"));
  }

  res.beta_identified = M > 1;
  int streak = 0;
  for (int t = 1; t <= cfg.max_iters; ++t) {
    int s_t = cfg.sample_count(t);
    auto est = e_step_full(img, params, lat, s_t, cfg.burn_in, cfg.thin,
                           derive_seed(cfg.seed, "estep", t));

    ModelParams next = params;
    // recover empty components: re-seed at the least explained data point
    SufficientStats stats = est.stats;
    std::vector<int> reseeded;
    for (int k = 0; k < M; ++k) {
      if (stats.t1[k] > 0.0) continue;
      int i = lowest_density_pixel(img, params);
      reseeded.push_back(k);
      stats.t1[k] = 1.0;
      stats.t2[k] = img.v[i];
      stats.t3[k] = img.v[i] * img.v[i];
    }
    auto upd = m1_step(stats, var_floor);
    next.mu = upd.mu;
    next.sigma2 = upd.sigma2;
    for (int k : reseeded) next.sigma2[k] = init_var;
    bool warm = M > 1 && t <= cfg.warm_iters;
    bool boundary = false;
    if (M > 1) {
      double target = m2_step(stats.t4, res.curve, &boundary);
      double cap = warm ? cfg.beta_warm_cap : params.beta + cfg.beta_rate;
      next.beta = std::min(target, cap);
    } else {
      next.beta = 0.0;
    }
    res.beta_boundary = boundary;

    res.trace.push_back({t, next, stats.t4, s_t});
    res.iterations = t;
    res.samples = std::move(est.samples);

    double change = param_change(params, next, range);
    params = next;
    streak = !warm && change < cfg.convergence_tol ? streak + 1 : 0;
    if (streak >= cfg.convergence_window) {
      res.converged = true;
      break;
    }
  }

  // canonical ordering: components sorted by mean, stable in the original
  // index on ties; retained samples are relabeled to match
  std::vector<int> order(M);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return params.mu[a] < params.mu[b];
  });
  std::vector<int> rank(M);
  for (int r = 0; r < M; ++r) rank[order[r]] = r;
  ModelParams sorted = params;
  for (int r = 0; r < M; ++r) {
    sorted.mu[r] = params.mu[order[r]];
    sorted.sigma2[r] = params.sigma2[order[r]];
  }
  res.params = sorted;
  for (auto& lf : res.samples)
    for (auto& z : lf.v) z = static_cast<uint8_t>(rank[z]);
  return res;
}

}  // namespace pottsfit
