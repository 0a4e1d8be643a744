#pragma once

#include "pottsfit/config.hpp"
#include "pottsfit/mcem.hpp"
#include "pottsfit/scene.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pottsfit {

// Parsed experiment description: which scene, which noise/smoothing
// settings, which methods, and the engine configuration shared by all legs.
struct ExperimentPlan {
  SceneSpec scene;
  std::vector<std::uint64_t> seeds = {1};
  std::vector<double> fwhm = {0.0};
  // proposed | gmm | icm | raw
  std::vector<std::string> methods = {"proposed"};
  int num_components = 10;
  bool run_selection = false;
  int select_lo = 1, select_hi = 1;
  double tau = 5.0;
  int summary_samples = 500;
  // negative means "use the proposed fit's beta", which then requires the
  // proposed method in the same run
  double icm_beta = -1.0;
  McemConfig mcem;
  int louis_samples = 500;
  int imputations = 20;

  void check_valid() const;
};

// Builds the scene described by the [scene] section: either a preset or
// explicit width/height/component lines. Other sections are ignored here.
SceneSpec parse_scene(const ConfigFile& cfg);

// Interprets a parsed config file; unknown sections or keys are errors.
ExperimentPlan parse_experiment_plan(const ConfigFile& cfg);

// Runs every (seed, fwhm, method) leg, writing truth files, estimate maps,
// params.csv, metrics.csv, trace.csv, selection.csv (when enabled), and a
// manifest under out_dir. Failed legs are recorded in metrics.csv and the
// run continues; returns the number of failures.
int run_experiment(const ExperimentPlan& plan, const std::string& out_dir);

}  // namespace pottsfit
