#include "pottsfit/experiment.hpp"

#include "pottsfit/baselines.hpp"
#include "pottsfit/image_io.hpp"
#include "pottsfit/inference.hpp"
#include "pottsfit/manifest.hpp"
#include "pottsfit/metrics.hpp"
#include "pottsfit/sampler.hpp"
#include "pottsfit/smooth.hpp"
#include "pottsfit/version.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

namespace pottsfit {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> split_tokens(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

[[noreturn]] void bad_entry(const ConfigEntry& e, const std::string& what) {
  throw std::invalid_argument("[" + e.section + "] " + e.key + " (line " +
                              std::to_string(e.line) + "): " + what);
}

double parse_double(const ConfigEntry& e, const std::string& tok) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    bad_entry(e, "expected a number, got '" + tok + "'");
  }
  if (used != tok.size() || !std::isfinite(v)) bad_entry(e, "expected a number, got '" + tok + "'");
  return v;
}

long parse_long(const ConfigEntry& e, const std::string& tok) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(tok, &used);
  } catch (const std::exception&) {
    bad_entry(e, "expected an integer, got '" + tok + "'");
  }
  if (used != tok.size()) bad_entry(e, "expected an integer, got '" + tok + "'");
  return v;
}

Region parse_region(const ConfigEntry& e, const std::vector<std::string>& toks,
                    std::size_t at) {
  if (at >= toks.size()) bad_entry(e, "missing shape");
  const std::string& shape = toks[at];
  auto need = [&](std::size_t n) {
    if (toks.size() - at - 1 != n)
      bad_entry(e, "shape " + shape + " takes " + std::to_string(n) + " arguments");
  };
  if (shape == "full") {
    need(0);
    return full_region();
  }
  if (shape == "rect") {
    need(4);
    return rect_region(int(parse_long(e, toks[at + 1])), int(parse_long(e, toks[at + 2])),
                       int(parse_long(e, toks[at + 3])), int(parse_long(e, toks[at + 4])));
  }
  if (shape == "ellipse") {
    need(4);
    return ellipse_region(parse_double(e, toks[at + 1]), parse_double(e, toks[at + 2]),
                          parse_double(e, toks[at + 3]), parse_double(e, toks[at + 4]));
  }
  if (shape == "band") {
    need(3);
    const std::string& orient = toks[at + 3];
    if (orient != "diag" && orient != "anti") bad_entry(e, "band orientation must be diag or anti");
    return band_region(parse_double(e, toks[at + 1]), parse_double(e, toks[at + 2]),
                       orient == "anti");
  }
  if (shape == "map") {
    need(1);
    // deferred: caller resolves the file against this component's label
    Region r;
    r.kind = Region::Kind::mask;
    return r;
  }
  bad_entry(e, "unknown shape '" + shape + "'");
}

}  // namespace

SceneSpec parse_scene(const ConfigFile& cfg) {
  SceneSpec scene;
  std::string preset;
  int width = 0, height = 0;
  std::vector<const ConfigEntry*> comps;
  for (const auto& e : cfg.entries) {
    if (e.section != "scene") continue;
    if (e.key == "preset") {
      preset = e.value;
    } else if (e.key == "width") {
      width = int(parse_long(e, e.value));
    } else if (e.key == "height") {
      height = int(parse_long(e, e.value));
    } else if (e.key == "component") {
      comps.push_back(&e);
    } else {
      bad_entry(e, "unknown key");
    }
  }
  if (!preset.empty()) {
    if (width || height || !comps.empty())
      throw std::invalid_argument("[scene] preset excludes explicit width/height/component");
    if (preset == "ten-component") return ten_component_scene();
    if (preset == "pure-noise") return pure_noise_scene();
    throw std::invalid_argument("unknown scene preset '" + preset + "'");
  }
  if (width < 1 || height < 1 || comps.empty())
    throw std::invalid_argument("[scene] needs a preset or width, height and components");
  scene.width = width;
  scene.height = height;
  for (const ConfigEntry* e : comps) {
    auto toks = split_tokens(e->value);
    if (toks.size() < 4) bad_entry(*e, "expected: label mean sd shape ...");
    SceneComponent comp;
    long label = parse_long(*e, toks[0]);  // 1-based in files
    if (label < 1) bad_entry(*e, "labels are 1-based");
    comp.label = int(label - 1);
    comp.mean = parse_double(*e, toks[1]);
    comp.sd = parse_double(*e, toks[2]);
    comp.region = parse_region(*e, toks, 3);
    if (toks[3] == "map") {
      auto lf = read_label_pgm(toks[4]);
      if (lf.width != width || lf.height != height)
        bad_entry(*e, "label map does not match the scene dimensions");
      comp.region.mask.assign(lf.v.size(), 0);
      for (std::size_t i = 0; i < lf.v.size(); ++i)
        comp.region.mask[i] = lf.v[i] == comp.label;
    }
    scene.components.push_back(std::move(comp));
  }
  return scene;
}

void ExperimentPlan::check_valid() const {
  scene.check_valid();
  if (seeds.empty()) throw std::invalid_argument("experiment needs at least one seed");
  if (fwhm.empty()) throw std::invalid_argument("experiment needs at least one fwhm");
  for (double f : fwhm)
    if (!(f >= 0.0)) throw std::invalid_argument("fwhm must be nonnegative");
  if (methods.empty()) throw std::invalid_argument("experiment needs at least one method");
  bool has_proposed = false;
  for (const auto& m : methods) {
    if (m != "proposed" && m != "gmm" && m != "icm" && m != "raw")
      throw std::invalid_argument("unknown method '" + m + "'");
    has_proposed |= m == "proposed";
  }
  if (num_components < 1 || num_components > 255)
    throw std::invalid_argument("components must be in 1..255");
  if (run_selection && (select_lo < 1 || select_hi < select_lo))
    throw std::invalid_argument("bad selection range");
  if (!std::isfinite(tau)) throw std::invalid_argument("tau must be finite");
  if (summary_samples < 1) throw std::invalid_argument("summary_samples must be positive");
  if (icm_beta < 0.0 && !has_proposed &&
      std::find(methods.begin(), methods.end(), "icm") != methods.end())
    throw std::invalid_argument("icm without a numeric icm_beta requires the proposed method");
  pottsfit::check_valid(mcem);
  if (louis_samples < 2 || imputations < 1)
    throw std::invalid_argument("bad inference sample counts");
}

ExperimentPlan parse_experiment_plan(const ConfigFile& cfg) {
  ExperimentPlan plan;
  plan.scene = parse_scene(cfg);
  bool saw_methods = false;
  for (const auto& e : cfg.entries) {
    if (e.section == "scene") continue;
    auto toks = split_tokens(e.value);
    if (e.section == "experiment") {
      if (e.key == "seeds") {
        plan.seeds.clear();
        for (const auto& t : toks) plan.seeds.push_back(std::uint64_t(parse_long(e, t)));
      } else if (e.key == "fwhm") {
        plan.fwhm.clear();
        for (const auto& t : toks) plan.fwhm.push_back(parse_double(e, t));
      } else if (e.key == "methods") {
        plan.methods = toks;
        saw_methods = true;
      } else if (e.key == "components") {
        plan.num_components = int(parse_long(e, e.value));
      } else if (e.key == "select") {
        if (toks.size() != 2) bad_entry(e, "expected: select = lo hi");
        plan.run_selection = true;
        plan.select_lo = int(parse_long(e, toks[0]));
        plan.select_hi = int(parse_long(e, toks[1]));
      } else if (e.key == "tau") {
        plan.tau = parse_double(e, e.value);
      } else if (e.key == "summary_samples") {
        plan.summary_samples = int(parse_long(e, e.value));
      } else if (e.key == "icm_beta") {
        plan.icm_beta = e.value == "fitted" ? -1.0 : parse_double(e, e.value);
      } else {
        bad_entry(e, "unknown key");
      }
    } else if (e.section == "mcem") {
      if (e.key == "max_iters") {
        plan.mcem.max_iters = int(parse_long(e, e.value));
      } else if (e.key == "sample_base") {
        plan.mcem.sample_base = int(parse_long(e, e.value));
      } else if (e.key == "sample_incr") {
        plan.mcem.sample_incr = int(parse_long(e, e.value));
      } else if (e.key == "sample_cap") {
        plan.mcem.sample_cap = int(parse_long(e, e.value));
      } else if (e.key == "curve_samples") {
        plan.mcem.curve_samples = int(parse_long(e, e.value));
      } else if (e.key == "burn_in") {
        plan.mcem.burn_in = int(parse_long(e, e.value));
      } else if (e.key == "tol") {
        plan.mcem.convergence_tol = parse_double(e, e.value);
      } else if (e.key == "window") {
        plan.mcem.convergence_window = int(parse_long(e, e.value));
      } else if (e.key == "beta_init") {
        plan.mcem.beta_init = parse_double(e, e.value);
      } else if (e.key == "warm_iters") {
        plan.mcem.warm_iters = int(parse_long(e, e.value));
      } else if (e.key == "beta_warm_cap") {
        plan.mcem.beta_warm_cap = parse_double(e, e.value);
      } else if (e.key == "beta_rate") {
        plan.mcem.beta_rate = parse_double(e, e.value);
      } else if (e.key == "beta_max" || e.key == "beta_step") {
        // grid rebuilt after the loop so the two keys compose
      } else {
        bad_entry(e, "unknown key");
      }
    } else if (e.section == "inference") {
      if (e.key == "louis_samples") {
        plan.louis_samples = int(parse_long(e, e.value));
      } else if (e.key == "imputations") {
        plan.imputations = int(parse_long(e, e.value));
      } else {
        bad_entry(e, "unknown key");
      }
    } else {
      bad_entry(e, "unknown section");
    }
  }
  double beta_max = 3.0, beta_step = 0.05;
  for (const auto& e : cfg.entries) {
    if (e.section != "mcem") continue;
    if (e.key == "beta_max") beta_max = parse_double(e, e.value);
    if (e.key == "beta_step") beta_step = parse_double(e, e.value);
  }
  plan.mcem.beta_grid = default_beta_grid(beta_max, beta_step);
  if (!saw_methods) plan.methods = {"proposed"};
  plan.check_valid();
  return plan;
}

namespace {

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

struct CsvWriter {
  std::ofstream out;
  CsvWriter(const std::string& path, const std::string& header) : out(path) {
    if (!out) throw std::runtime_error("cannot write " + path);
    out << header << '\n';
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << cells[i];
    }
    out << '\n';
    out.flush();
  }
};

// error text goes into a csv cell, keep the delimiters out of it
std::string csv_safe(std::string s) {
  for (auto& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

// canonical mean-sorted view of a parameter set
ModelParams sorted_params(const ModelParams& p) {
  auto rank = mean_rank(p);
  ModelParams out = p;
  for (std::size_t k = 0; k < p.mu.size(); ++k) {
    out.mu[std::size_t(rank[k])] = p.mu[k];
    out.sigma2[std::size_t(rank[k])] = p.sigma2[k];
  }
  return out;
}

struct LegEstimate {
  ModelParams params;
  IntensityImage est_map;
  LabelField hard;
  std::vector<double> se;  // 2M+1 Louis SEs, proposed only
  double loglik = kNan;
  double loglik_se = kNan;
  double beta = kNan;
};

}  // namespace

int run_experiment(const ExperimentPlan& plan, const std::string& out_dir) {
  plan.check_valid();
  std::filesystem::create_directories(out_dir);
  auto path_of = [&out_dir](const std::string& name) { return out_dir + "/" + name; };

  RunManifest manifest;
  manifest.command = "experiment";
  manifest.seed = plan.seeds.front();
  manifest.tool_version = kVersion;
  manifest.out_dir = out_dir;
  manifest.started_at = iso8601_utc_now();
  if (plan.icm_beta < 0.0 &&
      std::find(plan.methods.begin(), plan.methods.end(), "icm") != plan.methods.end())
    manifest.notes.push_back(
        "icm comparison holds beta fixed at the proposed fit's estimate");
  write_manifest(path_of("manifest.json"), manifest);
  auto track = [&manifest](const std::string& name) { manifest.outputs.push_back(name); };

  int M = plan.num_components;
  std::string mu_cols, sd_cols;
  for (int k = 1; k <= M; ++k) mu_cols += ",mu_" + std::to_string(k);
  for (int k = 1; k <= M; ++k) sd_cols += ",sd_" + std::to_string(k);

  CsvWriter params_csv(path_of("params.csv"),
                       "seed,fwhm,method,component,mu,sd,se_mu,se_sd,mu_err,sd_err");
  CsvWriter metrics_csv(path_of("metrics.csv"),
                        "seed,fwhm,method,status,beta,mcr,fpr,fnr,ss_est_true,ss_obs_true,"
                        "loglik,loglik_se");
  CsvWriter trace_csv(path_of("trace.csv"),
                      "seed,fwhm,iter,samples,t4,beta" + mu_cols + sd_cols);
  track("params.csv");
  track("metrics.csv");
  track("trace.csv");
  std::optional<CsvWriter> selection_csv;
  if (plan.run_selection) {
    selection_csv.emplace(
        path_of("selection.csv"),
        "seed,fwhm,M,status,converged,loglik,loglik_se,aic,bic,chosen_aic,chosen_bic");
    track("selection.csv");
  }

  int failures = 0;
  auto truth_params = plan.scene.label_params();

  for (std::size_t si = 0; si < plan.seeds.size(); ++si) {
    std::uint64_t seed = plan.seeds[si];
    std::string stag = "s" + std::to_string(seed);
    Rng scene_rng(derive_seed(seed, "scene"));
    auto scene = generate_scene(plan.scene, scene_rng);
    write_label_pgm(path_of("truth_labels_" + stag + ".pgm"), scene.labels);
    write_csv_image(path_of("truth_mean_" + stag + ".csv"), scene.mean_map);
    track("truth_labels_" + stag + ".pgm");
    track("truth_mean_" + stag + ".csv");

    for (std::size_t fi = 0; fi < plan.fwhm.size(); ++fi) {
      double fwhm = plan.fwhm[fi];
      std::string ftag = stag + "_f" + fmt_short(fwhm);
      auto y = gaussian_smooth(scene.noisy, fwhm);
      write_csv_image(path_of("y_" + ftag + ".csv"), y);
      track("y_" + ftag + ".csv");
      auto lat = build_lattice(y.width, y.height);

      const FitResult* proposed_fit = nullptr;
      FitResult proposed_storage;

      for (const auto& method : plan.methods) {
        std::string ltag = ftag + "_" + method;
        std::uint64_t leg_seed = derive_seed(seed, "fit-" + method, fi);
        LegEstimate est;
        std::string status = "ok";
        try {
          if (method == "proposed") {
            McemConfig mc = plan.mcem;
            mc.seed = leg_seed;
            proposed_storage = fit(y, M, mc);
            proposed_fit = &proposed_storage;
            auto& fr = proposed_storage;
            fr.info = louis_information(y, fr, lat, fr.curve, plan.louis_samples,
                                        derive_seed(leg_seed, "louis"));
            if (fr.info.positive_definite) est.se = standard_errors(fr.info);
            double se = 0.0;
            est.loglik = observed_loglik(y, fr, lat, fr.curve, plan.imputations,
                                         derive_seed(leg_seed, "obsll"), &se);
            est.loglik_se = se;
            auto summ = posterior_summary(y, fr, lat, plan.summary_samples,
                                          derive_seed(leg_seed, "summary"));
            est.params = fr.params;
            est.est_map = summ.mean_map;
            est.hard = mode_labels(fr.samples);
            est.beta = fr.params.beta;
            write_csv_image(path_of("sd_map_" + ltag + ".csv"), summ.sd_map);
            track("sd_map_" + ltag + ".csv");
            for (const auto& it : fr.trace) {
              std::vector<std::string> cells = {std::to_string(seed), fmt_short(fwhm),
                                                std::to_string(it.iter),
                                                std::to_string(it.samples), fmt(it.t4),
                                                fmt(it.params.beta)};
              auto sp = sorted_params(it.params);
              for (int k = 0; k < M; ++k) cells.push_back(fmt(sp.mu[k]));
              for (int k = 0; k < M; ++k) cells.push_back(fmt(std::sqrt(sp.sigma2[k])));
              trace_csv.row(cells);
            }
          } else if (method == "gmm") {
            auto init = init_params(y, M);
            est.params = gmm_em_baseline(y, M, init, 1e-8, 500);
            est.hard = ml_labels(y, est.params);
            est.est_map = make_image(y.width, y.height);
            for (std::size_t i = 0; i < y.v.size(); ++i)
              est.est_map.v[i] = est.params.mu[est.hard.v[i]];
            est.beta = 0.0;
            est.loglik = gmm_loglik(y, est.params);
            est.loglik_se = 0.0;
          } else if (method == "icm") {
            double beta = plan.icm_beta;
            if (beta < 0.0) {
              if (!proposed_fit)
                throw std::runtime_error("icm needs the proposed fit's beta but it failed");
              beta = proposed_fit->params.beta;
            }
            IcmConfig ic;
            ic.beta = beta;
            Rng icm_rng(leg_seed);
            auto res = icm_em_baseline(y, lat, M, init_params(y, M), ic, icm_rng);
            est.params = res.params;
            est.hard = res.labels;
            est.est_map = make_image(y.width, y.height);
            for (std::size_t i = 0; i < y.v.size(); ++i)
              est.est_map.v[i] = est.params.mu[est.hard.v[i]];
            est.beta = beta;
          } else {  // raw: threshold the observed image directly
            est.params = truth_params;
            est.est_map = y;
            est.hard = ml_labels(y, truth_params);
            est.beta = 0.0;
          }

          auto rep = metrics(scene.labels, scene.mean_map, est.est_map, est.hard, y,
                             plan.tau, truth_params, est.params);
          metrics_csv.row({std::to_string(seed), fmt_short(fwhm), method, status,
                           fmt(est.beta), fmt(rep.mcr), fmt(rep.fpr), fmt(rep.fnr),
                           fmt(rep.ss_est_true), fmt(rep.ss_obs_true), fmt(est.loglik),
                           fmt(est.loglik_se)});
          auto sp = sorted_params(est.params);
          for (int k = 0; k < sp.num_components(); ++k) {
            double se_mu = kNan, se_sd = kNan;
            if (!est.se.empty()) {
              se_mu = est.se[std::size_t(k)];
              // delta method from var to sd scale
              se_sd = est.se[std::size_t(sp.num_components() + k)] /
                      (2.0 * std::sqrt(sp.sigma2[std::size_t(k)]));
            }
            params_csv.row({std::to_string(seed), fmt_short(fwhm), method,
                            std::to_string(k + 1), fmt(sp.mu[std::size_t(k)]),
                            fmt(std::sqrt(sp.sigma2[std::size_t(k)])), fmt(se_mu),
                            fmt(se_sd),
                            k < int(rep.mu_err.size()) ? fmt(rep.mu_err[std::size_t(k)]) : "",
                            k < int(rep.sd_err.size()) ? fmt(rep.sd_err[std::size_t(k)])
                                                       : ""});
          }
          write_csv_image(path_of("est_map_" + ltag + ".csv"), est.est_map);
          write_render_pgm(path_of("est_map_" + ltag + ".pgm"), est.est_map);
          track("est_map_" + ltag + ".csv");
          track("est_map_" + ltag + ".pgm");
          track("est_map_" + ltag + ".pgm.json");
        } catch (const std::exception& ex) {
          ++failures;
          metrics_csv.row({std::to_string(seed), fmt_short(fwhm), method,
                           csv_safe("failed: " + std::string(ex.what())), fmt(kNan),
                           fmt(kNan), fmt(kNan), fmt(kNan), fmt(kNan), fmt(kNan),
                           fmt(kNan), fmt(kNan)});
        }
      }

      if (plan.run_selection && fi == 0) {
        try {
          SelectConfig sc;
          sc.mcem = plan.mcem;
          sc.louis_samples = plan.louis_samples;
          sc.imputations = plan.imputations;
          sc.seed = derive_seed(seed, "selection");
          std::vector<int> ms;
          for (int m = plan.select_lo; m <= plan.select_hi; ++m) ms.push_back(m);
          auto sel = select_model(y, ms, sc);
          for (const auto& row : sel.rows) {
            selection_csv->row({std::to_string(seed), fmt_short(fwhm),
                                std::to_string(row.m), row.ok ? "ok" : "failed",
                                row.converged ? "1" : "0", fmt(row.loglik_obs),
                                fmt(row.loglik_se), fmt(row.aic), fmt(row.bic),
                                row.m == sel.best_aic_m ? "1" : "0",
                                row.m == sel.best_bic_m ? "1" : "0"});
          }
        } catch (const std::exception& ex) {
          ++failures;
          selection_csv->row({std::to_string(seed), fmt_short(plan.fwhm[0]), "0",
                              csv_safe("failed: " + std::string(ex.what())), "0",
                              fmt(kNan), fmt(kNan), fmt(kNan), fmt(kNan), "0", "0"});
        }
      }
    }
  }

  manifest.finished_at = iso8601_utc_now();
  manifest.status = failures == 0 ? "ok" : "failed: " + std::to_string(failures) + " legs";
  manifest.outputs.push_back("manifest.json");
  write_manifest(path_of("manifest.json"), manifest);
  return failures;
}

}  // namespace pottsfit
