// Command-line front end: simulate / fit / select / summarize / metrics /
// experiment. Exit codes: 0 success, 1 usage error, 2 data error,
// 3 numerical failure. All randomness derives from --seed; see docs/formats.md
// for the substream tags and every file format written here.
#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pottsfit/baselines.hpp"
#include "pottsfit/experiment.hpp"
#include "pottsfit/image_io.hpp"
#include "pottsfit/inference.hpp"
#include "pottsfit/manifest.hpp"
#include "pottsfit/mcem.hpp"
#include "pottsfit/metrics.hpp"
#include "pottsfit/scene.hpp"
#include "pottsfit/smooth.hpp"
#include "pottsfit/version.hpp"

using namespace pottsfit;

namespace {

// flag-level problems the parser cannot catch itself -> exit 1
struct usage_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// non-convergence, non-positive-definite information, all-fits-failed -> exit 3
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// --out wins; otherwise fall back to the environment's output root
std::string resolve_out_dir(const std::string& cli_out) {
  if (!cli_out.empty()) return cli_out;
  if (const char* root = std::getenv("POTTSFIT_OUTPUT_ROOT"); root && *root)
    return root;
  throw usage_error("no output directory: pass --out or set POTTSFIT_OUTPUT_ROOT");
}

// Writes the manifest in the running state up front and finalizes it exactly
// once, even when the command throws on the way out.
struct ManifestScope {
  std::string path;
  RunManifest m;
  bool finalized = false;

  ManifestScope(const std::string& command, const std::string& config_path,
                std::uint64_t seed, const std::string& out_dir, int threads) {
    std::filesystem::create_directories(out_dir);
    path = out_dir + "/manifest.json";
    m.command = command;
    m.config_path = config_path;
    m.seed = seed;
    m.tool_version = kVersion;
    m.out_dir = out_dir;
    m.started_at = iso8601_utc_now();
    if (threads != 1)
      m.notes.push_back("threads requested: " + std::to_string(threads) +
                        "; computation is single-threaded and results do not "
                        "depend on it");
    write_manifest(path, m);
  }
  void track(const std::string& name) { m.outputs.push_back(name); }
  void note(const std::string& text) { m.notes.push_back(text); }
  void finish(const std::string& status) {
    m.finished_at = iso8601_utc_now();
    m.status = status;
    m.outputs.push_back("manifest.json");
    write_manifest(path, m);
    finalized = true;
  }
  ~ManifestScope() {
    if (!finalized) {
      try {
        finish("failed: aborted");
      } catch (...) {
      }
    }
  }
};

void write_params_csv(const std::string& path, const ModelParams& p,
                      const std::vector<double>* se) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path);
  out << "component,mu,sd,se_mu,se_sd\n";
  int m = p.num_components();
  for (int k = 0; k < m; ++k) {
    double sd = std::sqrt(p.sigma2[k]);
    out << k + 1 << ',' << fmt(p.mu[k]) << ',' << fmt(sd) << ',';
    if (se) {
      // the information matrix works on the variance scale; delta method
      out << fmt((*se)[k]) << ',' << fmt((*se)[m + k] / (2.0 * sd));
    } else {
      out << ',';
    }
    out << '\n';
  }
}

void write_beta_csv(const std::string& path, const FitResult& fit,
                    const std::vector<double>* se) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path);
  out << "beta,se_beta,identified,boundary\n";
  out << fmt(fit.params.beta) << ',';
  if (se && fit.beta_identified) out << fmt(se->at(se->size() - 1));
  out << ',' << (fit.beta_identified ? 1 : 0) << ','
      << (fit.beta_boundary ? 1 : 0) << '\n';
}

void write_trace_csv(const std::string& path, const FitResult& fit) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path);
  int m = fit.num_components();
  out << "iter,samples,t4,beta";
  for (int k = 1; k <= m; ++k) out << ",mu_" << k;
  for (int k = 1; k <= m; ++k) out << ",sd_" << k;
  out << '\n';
  for (const auto& it : fit.trace) {
    out << it.iter << ',' << it.samples << ',' << fmt(it.t4) << ','
        << fmt(it.params.beta);
    auto rank = mean_rank(it.params);
    std::vector<double> mu(m), sd(m);
    for (int k = 0; k < m; ++k) {
      mu[rank[k]] = it.params.mu[k];
      sd[rank[k]] = std::sqrt(it.params.sigma2[k]);
    }
    for (int k = 0; k < m; ++k) out << ',' << fmt(mu[k]);
    for (int k = 0; k < m; ++k) out << ',' << fmt(sd[k]);
    out << '\n';
  }
}

// accepts any csv whose header starts component,mu,sd; extra columns ignored
ModelParams read_params_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read: " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("component,mu,sd", 0) != 0)
    throw std::runtime_error("not a params csv (header must start "
                             "component,mu,sd): " + path);
  ModelParams p;
  p.beta = 0.0;
  int expect = 1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string comp, mu, sd;
    if (!std::getline(ls, comp, ',') || !std::getline(ls, mu, ',') ||
        !std::getline(ls, sd, ','))
      throw std::runtime_error("malformed params row: " + path);
    try {
      if (std::stoi(comp) != expect)
        throw std::runtime_error("components must be 1..M in order: " + path);
      p.mu.push_back(std::stod(mu));
      double s = std::stod(sd);
      p.sigma2.push_back(s * s);
    } catch (const std::invalid_argument&) {
      throw std::runtime_error("malformed params row: " + path);
    }
    ++expect;
  }
  if (p.mu.empty()) throw std::runtime_error("empty params csv: " + path);
  return p;
}

double read_beta_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read: " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("beta,", 0) != 0)
    throw std::runtime_error("not a beta csv: " + path);
  if (!std::getline(in, line)) throw std::runtime_error("empty beta csv: " + path);
  try {
    return std::stod(line.substr(0, line.find(',')));
  } catch (const std::exception&) {
    throw std::runtime_error("malformed beta csv: " + path);
  }
}

// mcem knobs shared by fit and select
struct McemFlags {
  McemConfig cfg;
  double beta_max = 3.0;
  double beta_step = 0.05;

  void attach(CLI::App* cmd) {
    cmd->add_option("--max-iters", cfg.max_iters, "EM iteration cap");
    cmd->add_option("--sample-base", cfg.sample_base, "E-step samples at iteration 1");
    cmd->add_option("--sample-incr", cfg.sample_incr, "E-step sample growth per iteration");
    cmd->add_option("--sample-cap", cfg.sample_cap, "E-step sample ceiling");
    cmd->add_option("--curve-samples", cfg.curve_samples,
                    "prior sweeps per grid point for the bond curve");
    cmd->add_option("--burn-in", cfg.burn_in, "discarded sweeps per chain");
    cmd->add_option("--tol", cfg.convergence_tol, "scaled parameter-change tolerance");
    cmd->add_option("--window", cfg.convergence_window,
                    "consecutive small-change iterations required");
    cmd->add_option("--beta-init", cfg.beta_init, "initial beta");
    cmd->add_option("--warm-iters", cfg.warm_iters,
                    "iterations with beta held at the warm cap");
    cmd->add_option("--beta-warm-cap", cfg.beta_warm_cap,
                    "beta ceiling during the warm phase");
    cmd->add_option("--beta-rate", cfg.beta_rate,
                    "largest beta increase per iteration after the warm phase");
    cmd->add_option("--beta-max", beta_max, "bond-curve grid upper end");
    cmd->add_option("--beta-step", beta_step, "bond-curve grid spacing");
  }
  McemConfig resolve(std::uint64_t seed) {
    cfg.beta_grid = default_beta_grid(beta_max, beta_step);
    cfg.seed = seed;
    return cfg;
  }
};

int cmd_simulate(const std::string& preset, const std::string& scene_config,
                 const std::vector<double>& fwhm, std::uint64_t seed,
                 const std::string& out_dir, int threads) {
  SceneSpec spec;
  if (preset.empty() && scene_config.empty())
    throw usage_error("simulate needs --preset or --scene-config");
  if (!preset.empty()) {
    ConfigFile cfg;
    cfg.entries.push_back({"scene", "preset", preset, 0});
    spec = parse_scene(cfg);
  } else {
    auto cfg = load_config(scene_config);
    for (const auto& e : cfg.entries)
      if (e.section != "scene")
        throw std::invalid_argument("simulate config allows only a [scene] "
                                    "section, got [" + e.section + "]");
    spec = parse_scene(cfg);
  }

  ManifestScope ms("simulate", scene_config, seed, out_dir, threads);
  auto path_of = [&](const std::string& n) { return out_dir + "/" + n; };

  Rng rng(derive_seed(seed, "scene"));
  auto scene = generate_scene(spec, rng);
  write_label_pgm(path_of("truth_labels.pgm"), scene.labels);
  write_csv_image(path_of("truth_mean.csv"), scene.mean_map);
  ms.track("truth_labels.pgm");
  ms.track("truth_mean.csv");
  {
    std::ofstream out(path_of("truth_params.csv"));
    out << "component,mu,sd\n";
    auto p = spec.label_params();
    std::vector<double> sd(p.mu.size());
    for (const auto& comp : spec.components) sd[comp.label] = comp.sd;
    for (std::size_t k = 0; k < p.mu.size(); ++k)
      out << k + 1 << ',' << fmt(p.mu[k]) << ',' << fmt(sd[k]) << '\n';
    ms.track("truth_params.csv");
  }

  for (double f : fwhm) {
    if (!(f >= 0.0)) throw usage_error("--fwhm must be nonnegative");
    auto y = gaussian_smooth(scene.noisy, f);
    std::string name = "y_f" + fmt_short(f) + ".csv";
    write_csv_image(path_of(name), y);
    ms.track(name);
    if (f > 0.0)
      ms.note("fwhm " + fmt_short(f) + " -> kernel sigma " +
              fmt_short(fwhm_to_sigma(f)));
  }
  ms.finish("ok");
  return 0;
}

int cmd_fit(const std::string& image_path, int M, McemFlags& flags,
            int se_samples, int summary_samples, int imputations,
            bool allow_nonconverged, std::uint64_t seed,
            const std::string& out_dir, int threads) {
  if (M < 1) throw usage_error("--M must be >= 1");
  auto img = read_csv_image(image_path);

  ManifestScope ms("fit", "", seed, out_dir, threads);
  auto path_of = [&](const std::string& n) { return out_dir + "/" + n; };

  auto mc = flags.resolve(derive_seed(seed, "fit"));
  auto fr = fit(img, M, mc);
  auto lat = build_lattice(img.width, img.height);

  std::vector<double> se;
  bool info_bad = false;
  if (se_samples > 0) {
    fr.info = louis_information(img, fr, lat, fr.curve, se_samples,
                                derive_seed(mc.seed, "louis"));
    if (fr.info.positive_definite)
      se = standard_errors(fr.info);
    else
      info_bad = true;
  }

  write_params_csv(path_of("params.csv"), fr.params, se.empty() ? nullptr : &se);
  write_beta_csv(path_of("beta.csv"), fr, se.empty() ? nullptr : &se);
  write_trace_csv(path_of("trace.csv"), fr);
  ms.track("params.csv");
  ms.track("beta.csv");
  ms.track("trace.csv");

  write_label_pgm(path_of("mode_labels.pgm"), mode_labels(fr.samples));
  ms.track("mode_labels.pgm");

  if (summary_samples > 0) {
    auto summ = posterior_summary(img, fr, lat, summary_samples,
                                  derive_seed(mc.seed, "summary"));
    write_csv_image(path_of("mean_map.csv"), summ.mean_map);
    write_render_pgm(path_of("mean_map.pgm"), summ.mean_map);
    write_csv_image(path_of("sd_map.csv"), summ.sd_map);
    ms.track("mean_map.csv");
    ms.track("mean_map.pgm");
    ms.track("mean_map.pgm.json");
    ms.track("sd_map.csv");
  }
  if (imputations > 0) {
    double ll_se = 0.0;
    double ll = observed_loglik(img, fr, lat, fr.curve, imputations,
                                derive_seed(mc.seed, "obsll"), &ll_se);
    std::ofstream out(path_of("loglik.csv"));
    out << "loglik,se\n" << fmt(ll) << ',' << fmt(ll_se) << '\n';
    ms.track("loglik.csv");
  }

  ms.note(fr.converged
              ? "converged after " + std::to_string(fr.iterations) + " iterations"
              : "did not converge within " + std::to_string(fr.iterations) +
                    " iterations");
  if (fr.beta_boundary) ms.note("beta update hit the grid boundary");
  if (info_bad)
    ms.note("observed information not positive definite; no standard errors");

  if (info_bad) {
    ms.finish("failed: information not positive definite");
    throw numerical_error("observed information not positive definite");
  }
  if (!fr.converged && !allow_nonconverged) {
    ms.finish("failed: did not converge");
    throw numerical_error("MCEM did not converge within " +
                          std::to_string(fr.iterations) +
                          " iterations (pass --allow-nonconverged to accept)");
  }
  ms.finish("ok");
  return 0;
}

int cmd_select(const std::string& image_path, const std::string& range,
               McemFlags& flags, int se_samples, int imputations,
               std::uint64_t seed, const std::string& out_dir, int threads) {
  int lo = 0, hi = 0;
  {
    auto dots = range.find("..");
    try {
      if (dots == std::string::npos) {
        lo = hi = std::stoi(range);
      } else {
        lo = std::stoi(range.substr(0, dots));
        hi = std::stoi(range.substr(dots + 2));
      }
    } catch (const std::exception&) {
      throw usage_error("--range must be a..b or a single integer");
    }
    if (lo < 1 || hi < lo) throw usage_error("--range must satisfy 1 <= a <= b");
  }
  auto img = read_csv_image(image_path);

  ManifestScope ms("select", "", seed, out_dir, threads);

  SelectConfig sc;
  sc.mcem = flags.resolve(0);
  sc.louis_samples = se_samples;
  sc.imputations = imputations;
  sc.seed = derive_seed(seed, "selection");
  std::vector<int> ms_values;
  for (int m = lo; m <= hi; ++m) ms_values.push_back(m);

  SelectionResult sel;
  try {
    sel = select_model(img, ms_values, sc);
  } catch (const std::runtime_error& ex) {
    ms.finish("failed: " + std::string(ex.what()));
    throw numerical_error(ex.what());
  }

  {
    std::ofstream out(out_dir + "/selection.csv");
    if (!out) throw std::runtime_error("cannot write: " + out_dir + "/selection.csv");
    out << "M,status,converged,loglik,loglik_se,aic,bic,chosen_aic,chosen_bic\n";
    for (const auto& row : sel.rows) {
      if (row.ok) {
        out << row.m << ",ok," << (row.converged ? 1 : 0) << ','
            << fmt(row.loglik_obs) << ',' << fmt(row.loglik_se) << ','
            << fmt(row.aic) << ',' << fmt(row.bic) << ','
            << (row.m == sel.best_aic_m ? 1 : 0) << ','
            << (row.m == sel.best_bic_m ? 1 : 0) << '\n';
      } else {
        std::string why = row.error;
        for (auto& c : why)
          if (c == ',' || c == '\n' || c == '\r') c = ';';
        out << row.m << ",failed: " << why << ",0,nan,nan,nan,nan,0,0\n";
      }
    }
  }
  ms.track("selection.csv");
  ms.note("aic chose M = " + std::to_string(sel.best_aic_m));
  ms.note("bic chose M = " + std::to_string(sel.best_bic_m));
  ms.finish("ok");
  return 0;
}

int cmd_summarize(const std::string& image_path, const std::string& params_path,
                  const std::string& beta_file, double beta_flag, int samples,
                  std::uint64_t seed, const std::string& out_dir, int threads) {
  if (samples < 1) throw usage_error("--samples must be >= 1");
  auto img = read_csv_image(image_path);
  auto params = read_params_csv(params_path);
  params.beta = beta_file.empty() ? beta_flag : read_beta_csv(beta_file);
  if (!(params.beta >= 0.0)) throw usage_error("beta must be >= 0");
  check_valid(params);

  ManifestScope ms("summarize", "", seed, out_dir, threads);
  auto path_of = [&](const std::string& n) { return out_dir + "/" + n; };

  auto lat = build_lattice(img.width, img.height);
  // one chain serves the maps and the mode labels alike
  auto est = e_step_full(img, params, lat, samples, 50, 1,
                         derive_seed(seed, "summary"));
  auto mean_map = make_image(img.width, img.height);
  auto sd_map = make_image(img.width, img.height);
  for (int i = 0; i < img.num_pixels(); ++i) {
    double s = 0.0, s2 = 0.0;
    for (const auto& lf : est.samples) {
      double mu = params.mu[lf.v[i]];
      s += mu;
      s2 += mu * mu;
    }
    double m = s / samples;
    mean_map.v[i] = m;
    sd_map.v[i] = std::sqrt(std::max(0.0, s2 / samples - m * m));
  }
  write_csv_image(path_of("mean_map.csv"), mean_map);
  write_render_pgm(path_of("mean_map.pgm"), mean_map);
  write_csv_image(path_of("sd_map.csv"), sd_map);
  write_label_pgm(path_of("mode_labels.pgm"), mode_labels(est.samples));
  ms.track("mean_map.csv");
  ms.track("mean_map.pgm");
  ms.track("mean_map.pgm.json");
  ms.track("sd_map.csv");
  ms.track("mode_labels.pgm");
  ms.finish("ok");
  return 0;
}

int cmd_metrics(const std::string& truth_labels, const std::string& truth_mean,
                const std::string& observed, const std::string& est_map,
                const std::string& est_labels, const std::string& true_params,
                const std::string& est_params, double tau,
                const std::string& out_dir, int threads) {
  if (!std::isfinite(tau)) throw usage_error("--tau must be finite");
  auto z_true = read_label_pgm(truth_labels);
  auto mu_true = read_csv_image(truth_mean);
  auto y = read_csv_image(observed);
  auto est = read_csv_image(est_map);
  auto hard = read_label_pgm(est_labels);
  auto tp = read_params_csv(true_params);
  auto ep = read_params_csv(est_params);

  ManifestScope ms("metrics", "", 0, out_dir, threads);
  auto rep = metrics(z_true, mu_true, est, hard, y, tau, tp, ep);

  std::ofstream out(out_dir + "/metrics.csv");
  if (!out) throw std::runtime_error("cannot write: " + out_dir + "/metrics.csv");
  out << "metric,value\n";
  out << "mcr," << fmt(rep.mcr) << '\n';
  out << "fpr," << fmt(rep.fpr) << '\n';
  out << "fnr," << fmt(rep.fnr) << '\n';
  out << "ss_est_true," << fmt(rep.ss_est_true) << '\n';
  out << "ss_obs_true," << fmt(rep.ss_obs_true) << '\n';
  for (std::size_t k = 0; k < rep.mu_err.size(); ++k)
    out << "mu_err_" << k + 1 << ',' << fmt(rep.mu_err[k]) << '\n';
  for (std::size_t k = 0; k < rep.sd_err.size(); ++k)
    out << "sd_err_" << k + 1 << ',' << fmt(rep.sd_err[k]) << '\n';
  ms.track("metrics.csv");
  ms.finish("ok");
  return 0;
}

int cmd_experiment(const std::string& config_path, const std::string& out_dir) {
  auto plan = parse_experiment_plan(load_config(config_path));
  int failures = run_experiment(plan, out_dir);
  if (failures > 0)
    throw numerical_error(std::to_string(failures) +
                          " experiment legs failed; see metrics.csv");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Potts-mixture image model: simulation, MCEM fitting, model "
               "selection, and evaluation"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  int threads = 1;
  app.add_option("--threads", threads, "worker cap (results never depend on it)")
      ->check(CLI::PositiveNumber);

  std::string out_dir;
  std::uint64_t seed = 0;
  McemFlags mcem_flags;

  auto* sim = app.add_subcommand("simulate", "generate a scene and observed images");
  std::string preset, scene_config;
  std::vector<double> fwhm{0.0};
  auto* preset_opt = sim->add_option("--preset", preset,
                                     "ten-component or pure-noise");
  sim->add_option("--scene-config", scene_config, "config file with a [scene] section")
      ->excludes(preset_opt);
  sim->add_option("--fwhm", fwhm, "smoothing kernel FWHM(s), 0 = none");
  sim->add_option("--seed", seed, "master seed")->required();
  sim->add_option("--out", out_dir, "output directory");

  auto* fit_cmd = app.add_subcommand("fit", "MCEM fit of an M-component model");
  std::string image_path;
  int M = 2, se_samples = 0, summary_samples = 0, imputations = 0;
  bool allow_nonconverged = false;
  fit_cmd->add_option("--image", image_path, "observed image csv")->required();
  fit_cmd->add_option("--M", M, "number of components")->required();
  mcem_flags.attach(fit_cmd);
  fit_cmd->add_option("--se", se_samples,
                      "posterior samples for Louis standard errors (0 = skip)");
  fit_cmd->add_option("--summary", summary_samples,
                      "posterior samples for mean/sd maps (0 = skip)");
  fit_cmd->add_option("--imputations", imputations,
                      "imputation draws for the observed log-likelihood (0 = skip)");
  fit_cmd->add_flag("--allow-nonconverged", allow_nonconverged,
                    "exit 0 even when the EM iteration cap is hit");
  fit_cmd->add_option("--seed", seed, "master seed")->required();
  fit_cmd->add_option("--out", out_dir, "output directory");

  auto* sel = app.add_subcommand("select", "fit a range of M and score AIC/BIC");
  std::string range;
  int sel_se = 500, sel_imp = 20;
  sel->add_option("--image", image_path, "observed image csv")->required();
  sel->add_option("--range", range, "component range a..b (or a single value)")
      ->required();
  mcem_flags.attach(sel);
  sel->add_option("--se", sel_se, "posterior samples for the information matrix");
  sel->add_option("--imputations", sel_imp, "imputation draws per candidate");
  sel->add_option("--seed", seed, "master seed")->required();
  sel->add_option("--out", out_dir, "output directory");

  auto* summ = app.add_subcommand("summarize",
                                  "posterior maps from a fitted parameter set");
  std::string params_path, beta_file;
  double beta_flag = 0.0;
  int samples = 500;
  summ->add_option("--image", image_path, "observed image csv")->required();
  summ->add_option("--params", params_path, "params csv (component,mu,sd,...)")
      ->required();
  auto* beta_file_opt = summ->add_option("--beta-file", beta_file,
                                         "beta csv from a fit");
  summ->add_option("--beta", beta_flag, "regularization parameter")
      ->excludes(beta_file_opt);
  summ->add_option("--samples", samples, "posterior draws");
  summ->add_option("--seed", seed, "master seed")->required();
  summ->add_option("--out", out_dir, "output directory");

  auto* met = app.add_subcommand("metrics", "score an estimate against the truth");
  std::string truth_labels, truth_mean, observed, est_map, est_labels;
  std::string true_params, est_params;
  double tau = 5.0;
  met->add_option("--truth-labels", truth_labels, "truth label pgm")->required();
  met->add_option("--truth-mean", truth_mean, "truth mean csv")->required();
  met->add_option("--observed", observed, "observed image csv")->required();
  met->add_option("--est-map", est_map, "estimated intensity csv")->required();
  met->add_option("--est-labels", est_labels, "estimated label pgm")->required();
  met->add_option("--true-params", true_params, "truth params csv")->required();
  met->add_option("--est-params", est_params, "estimated params csv")->required();
  met->add_option("--tau", tau, "exceedance threshold");
  met->add_option("--out", out_dir, "output directory");

  auto* exp = app.add_subcommand("experiment", "run a full simulation study");
  std::string exp_config;
  exp->add_option("--config", exp_config, "experiment config file")->required();
  exp->add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    std::string out = resolve_out_dir(out_dir);
    if (*sim)
      return cmd_simulate(preset, scene_config, fwhm, seed, out, threads);
    if (*fit_cmd)
      return cmd_fit(image_path, M, mcem_flags, se_samples, summary_samples,
                     imputations, allow_nonconverged, seed, out, threads);
    if (*sel)
      return cmd_select(image_path, range, mcem_flags, sel_se, sel_imp, seed,
                        out, threads);
    if (*summ)
      return cmd_summarize(image_path, params_path, beta_file, beta_flag,
                           samples, seed, out, threads);
    if (*met)
      return cmd_metrics(truth_labels, truth_mean, observed, est_map,
                         est_labels, true_params, est_params, tau, out,
                         threads);
    if (*exp) return cmd_experiment(exp_config, out);
    return 1;
  } catch (const usage_error& ex) {
    std::cerr << "usage error: " << ex.what() << '\n';
    return 1;
  } catch (const numerical_error& ex) {
    std::cerr << "numerical failure: " << ex.what() << '\n';
    return 3;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 2;
  }
}
