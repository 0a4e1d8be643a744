#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pottsfit/config.hpp"
#include "pottsfit/experiment.hpp"
#include "pottsfit/image_io.hpp"
#include "pottsfit/manifest.hpp"
#include "pottsfit/scene.hpp"

using namespace pottsfit;

namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::path("io_test_tmp") / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(bool(in));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(bool(in));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    rows.emplace_back();
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) rows.back().push_back(cell);
  }
  return rows;
}

ConfigFile parse_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in, "cfg");
}

std::string thrown_message(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception& ex) {
    return ex.what();
  }
  return "";
}

}  // namespace

TEST_SUITE_BEGIN("io");

TEST_CASE("csv image round-trips bit-exactly") {
  auto dir = fresh_dir("csv");
  auto img = make_image(3, 2);
  img.v = {0.1, -1.0e-300, 3.141592653589793, 1.0e300, -0.0, 7.0};
  write_csv_image((dir / "img.csv").string(), img);
  auto back = read_csv_image((dir / "img.csv").string());
  CHECK(back.width == 3);
  CHECK(back.height == 2);
  CHECK(back.v == img.v);

  // a second write of the reread image is byte-identical
  write_csv_image((dir / "img2.csv").string(), back);
  CHECK(read_text(dir / "img.csv") == read_text(dir / "img2.csv"));
}

TEST_CASE("csv image read rejects malformed input") {
  auto dir = fresh_dir("csv_bad");
  write_text(dir / "ragged.csv", "1,2,3\n4,5\n");
  CHECK_THROWS_AS(read_csv_image((dir / "ragged.csv").string()), std::runtime_error);
  write_text(dir / "cell.csv", "1,abc\n");
  CHECK_THROWS_AS(read_csv_image((dir / "cell.csv").string()), std::runtime_error);
  write_text(dir / "empty.csv", "");
  CHECK_THROWS_AS(read_csv_image((dir / "empty.csv").string()), std::runtime_error);
  CHECK_THROWS_AS(read_csv_image((dir / "missing.csv").string()), std::runtime_error);
}

TEST_CASE("label pgm round-trips and validates") {
  auto dir = fresh_dir("pgm");
  auto labels = make_labels(4, 3, 5);
  labels.v = {0, 1, 2, 3, 4, 0, 1, 2, 3, 4, 0, 1};
  write_label_pgm((dir / "l.pgm").string(), labels);
  auto back = read_label_pgm((dir / "l.pgm").string());
  CHECK(back.width == 4);
  CHECK(back.height == 3);
  CHECK(back.num_labels == 5);
  CHECK(back.v == labels.v);

  // stored bytes are label + 1 so 0 never appears in the payload
  auto bytes = read_text(dir / "l.pgm");
  CHECK(bytes.substr(0, 2) == "P5");
  CHECK(bytes.find('\0') == std::string::npos);

  auto too_many = make_labels(2, 2, 255);
  CHECK_THROWS_AS(write_label_pgm((dir / "big.pgm").string(), too_many),
                  std::invalid_argument);

  write_text(dir / "bad.pgm", "P4\n2 2\n3\nxxxx");
  CHECK_THROWS_AS(read_label_pgm((dir / "bad.pgm").string()), std::runtime_error);
  write_text(dir / "short.pgm", "P5\n2 2\n3\n\x01\x02");
  CHECK_THROWS_AS(read_label_pgm((dir / "short.pgm").string()), std::runtime_error);
  // payload byte 0 is outside the 1..maxval label range
  std::string zero = "P5\n2 1\n3\n";
  zero += '\x01';
  zero += '\x00';
  write_text(dir / "zero.pgm", zero);
  CHECK_THROWS_AS(read_label_pgm((dir / "zero.pgm").string()), std::runtime_error);
}

TEST_CASE("label pgm header comments are skipped") {
  auto dir = fresh_dir("pgm_comment");
  write_text(dir / "c.pgm", "P5\n# a comment line\n2 1\n# another\n2\n\x01\x02");
  auto back = read_label_pgm((dir / "c.pgm").string());
  CHECK(back.width == 2);
  CHECK(back.num_labels == 2);
  CHECK(back.v == std::vector<std::uint8_t>{0, 1});
}

TEST_CASE("render pgm round-trips within quantization and writes a sidecar") {
  auto dir = fresh_dir("render");
  auto img = make_image(5, 4);
  for (std::size_t i = 0; i < img.v.size(); ++i)
    img.v[i] = -2.0 + 7.0 * double(i) / double(img.v.size() - 1);
  write_render_pgm((dir / "r.pgm").string(), img);
  CHECK(fs::exists(dir / "r.pgm.json"));
  auto side = read_text(dir / "r.pgm.json");
  CHECK(side.find("\"orientation\"") != std::string::npos);
  CHECK(side.find("light-high") != std::string::npos);

  auto back = read_render_pgm((dir / "r.pgm").string());
  REQUIRE(back.v.size() == img.v.size());
  double step = 7.0 / 65535.0;
  for (std::size_t i = 0; i < img.v.size(); ++i)
    CHECK(std::fabs(back.v[i] - img.v[i]) <= 0.5 * step * (1.0 + 1e-9));
  // the extremes hit the scale endpoints exactly
  CHECK(back.v.front() == img.v.front());
  CHECK(back.v.back() == img.v.back());
}

TEST_CASE("render pgm handles a constant image") {
  auto dir = fresh_dir("render_const");
  auto img = make_image(3, 3, 4.25);
  write_render_pgm((dir / "c.pgm").string(), img);
  auto back = read_render_pgm((dir / "c.pgm").string());
  CHECK(back.v == img.v);
}

TEST_CASE("config parser handles sections, comments, and repeats") {
  auto cfg = parse_string(
      "# leading comment\n"
      "\n"
      "[alpha]\n"
      "key = one\n"
      "other =  spaced value \n"
      "\n"
      "[beta]\n"
      "key = two\n"
      "key = three\n");
  CHECK(cfg.entries.size() == 4);
  CHECK(cfg.has("alpha", "key"));
  CHECK_FALSE(cfg.has("alpha", "missing"));
  CHECK(cfg.get("alpha", "other") == "spaced value");
  // last value wins for scalar lookups
  CHECK(cfg.get("beta", "key") == "three");
  CHECK(cfg.all("beta", "key") == std::vector<std::string>{"two", "three"});
  CHECK(cfg.get_or("beta", "gone", "fallback") == "fallback");
  CHECK_THROWS_AS(cfg.get("beta", "gone"), std::invalid_argument);
  CHECK(cfg.entries[3].line == 9);
}

TEST_CASE("config parser reports the offending line") {
  auto check_fails = [](const std::string& text, const std::string& needle) {
    auto msg = thrown_message([&] { parse_string(text); });
    INFO("message: ", msg);
    CHECK(msg.find("cfg:") != std::string::npos);
    CHECK(msg.find(needle) != std::string::npos);
  };
  check_fails("key = 1\n", "outside any [section]");
  check_fails("[a]\nno equals sign\n", "expected key = value");
  check_fails("[unterminated\n", "unterminated");
  check_fails("[]\n", "empty section name");
  check_fails("[a]\n= bare value\n", "empty key");

  auto msg = thrown_message([] {
    std::istringstream in("[a]\nok = 1\nbroken\n");
    parse_config(in, "cfg");
  });
  CHECK(msg.find("cfg:3") != std::string::npos);
}

TEST_CASE("experiment plan defaults from a preset") {
  auto plan = parse_experiment_plan(parse_string(
      "[scene]\n"
      "preset = ten-component\n"));
  CHECK(plan.scene.width == 128);
  CHECK(plan.scene.num_labels() == 10);
  CHECK(plan.seeds == std::vector<std::uint64_t>{1});
  CHECK(plan.fwhm == std::vector<double>{0.0});
  CHECK(plan.methods == std::vector<std::string>{"proposed"});
  CHECK(plan.num_components == 10);
  CHECK_FALSE(plan.run_selection);
  CHECK(plan.tau == 5.0);

  auto noise = parse_experiment_plan(parse_string(
      "[scene]\n"
      "preset = pure-noise\n"));
  CHECK(noise.scene.num_labels() == 1);
}

TEST_CASE("experiment plan parses every section") {
  auto plan = parse_experiment_plan(parse_string(
      "[scene]\n"
      "width = 8\n"
      "height = 6\n"
      "component = 1 -1.5 0.5 full\n"
      "component = 2 1.5 0.5 rect 0 4 5 7\n"
      "\n"
      "[experiment]\n"
      "seeds = 3 4 5\n"
      "fwhm = 0 2\n"
      "methods = proposed gmm icm raw\n"
      "components = 2\n"
      "select = 1 3\n"
      "tau = 0\n"
      "summary_samples = 40\n"
      "icm_beta = fitted\n"
      "\n"
      "[mcem]\n"
      "max_iters = 6\n"
      "sample_base = 8\n"
      "sample_incr = 4\n"
      "sample_cap = 20\n"
      "curve_samples = 30\n"
      "burn_in = 10\n"
      "tol = 0.01\n"
      "window = 2\n"
      "beta_init = 0.3\n"
      "warm_iters = 3\n"
      "beta_warm_cap = 0.5\n"
      "beta_rate = 0.2\n"
      "beta_max = 2\n"
      "beta_step = 0.1\n"
      "\n"
      "[inference]\n"
      "louis_samples = 40\n"
      "imputations = 3\n"));
  CHECK(plan.scene.width == 8);
  CHECK(plan.scene.height == 6);
  CHECK(plan.scene.components.size() == 2);
  CHECK(plan.scene.components[0].label == 0);  // 1-based in the file
  CHECK(plan.scene.components[1].region.kind == Region::Kind::rect);
  CHECK(plan.seeds == std::vector<std::uint64_t>{3, 4, 5});
  CHECK(plan.fwhm == std::vector<double>{0.0, 2.0});
  CHECK(plan.methods.size() == 4);
  CHECK(plan.num_components == 2);
  CHECK(plan.run_selection);
  CHECK(plan.select_lo == 1);
  CHECK(plan.select_hi == 3);
  CHECK(plan.tau == 0.0);
  CHECK(plan.summary_samples == 40);
  CHECK(plan.icm_beta < 0.0);
  CHECK(plan.mcem.max_iters == 6);
  CHECK(plan.mcem.sample_base == 8);
  CHECK(plan.mcem.sample_cap == 20);
  CHECK(plan.mcem.curve_samples == 30);
  CHECK(plan.mcem.burn_in == 10);
  CHECK(plan.mcem.convergence_tol == 0.01);
  CHECK(plan.mcem.convergence_window == 2);
  CHECK(plan.mcem.beta_init == 0.3);
  CHECK(plan.mcem.warm_iters == 3);
  CHECK(plan.mcem.beta_warm_cap == 0.5);
  CHECK(plan.mcem.beta_rate == 0.2);
  CHECK(plan.mcem.beta_grid.front() == 0.0);
  CHECK(plan.mcem.beta_grid.back() == doctest::Approx(2.0));
  CHECK(plan.mcem.beta_grid[1] == doctest::Approx(0.1));
  CHECK(plan.louis_samples == 40);
  CHECK(plan.imputations == 3);
}

TEST_CASE("experiment plan rejects bad input") {
  // unknown keys and sections are errors, with the location in the message
  auto msg = thrown_message([] {
    parse_experiment_plan(parse_string("[scene]\npreset = ten-component\nbogus = 1\n"));
  });
  CHECK(msg.find("[scene] bogus") != std::string::npos);
  CHECK(msg.find("line 3") != std::string::npos);

  CHECK_THROWS_AS(parse_experiment_plan(parse_string(
                      "[scene]\npreset = ten-component\n[experiment]\nbogus = 1\n")),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_experiment_plan(parse_string(
                      "[scene]\npreset = ten-component\n[typo]\nkey = 1\n")),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_experiment_plan(parse_string(
                      "[scene]\npreset = no-such-preset\n")),
                  std::invalid_argument);
  // preset excludes the explicit geometry keys
  CHECK_THROWS_AS(parse_experiment_plan(parse_string(
                      "[scene]\npreset = ten-component\nwidth = 8\n")),
                  std::invalid_argument);
  // fitted icm beta needs the proposed fit in the same run
  CHECK_THROWS_AS(parse_experiment_plan(parse_string(
                      "[scene]\npreset = pure-noise\n"
                      "[experiment]\nmethods = icm\nicm_beta = fitted\ncomponents = 1\n")),
                  std::invalid_argument);
  // ... but a numeric beta stands alone
  CHECK_NOTHROW(parse_experiment_plan(parse_string(
      "[scene]\npreset = pure-noise\n"
      "[experiment]\nmethods = icm\nicm_beta = 0.5\ncomponents = 1\n")));
  CHECK_THROWS_AS(parse_experiment_plan(parse_string(
                      "[scene]\npreset = pure-noise\n"
                      "[experiment]\nmethods = proposed bogus\n")),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_experiment_plan(parse_string(
                      "[scene]\nwidth = 4\nheight = 4\n"
                      "component = 0 1 1 full\n")),
                  std::invalid_argument);  // labels are 1-based
  CHECK_THROWS_AS(parse_experiment_plan(parse_string(
                      "[scene]\nwidth = 4\nheight = 4\n"
                      "component = 1 0 1 blob 1 2\n")),
                  std::invalid_argument);  // unknown shape
}

namespace {

const char* kTinyExperiment =
    "[scene]\n"
    "width = 12\n"
    "height = 12\n"
    "component = 1 -2 0.5 full\n"
    "component = 2 2 0.5 rect 0 6 11 11\n"
    "[experiment]\n"
    "seeds = 3\n"
    "fwhm = 0\n"
    "methods = proposed gmm icm raw\n"
    "components = 2\n"
    "tau = 0\n"
    "summary_samples = 40\n"
    "icm_beta = fitted\n"
    "[mcem]\n"
    "max_iters = 8\n"
    "sample_base = 8\n"
    "sample_incr = 4\n"
    "sample_cap = 20\n"
    "curve_samples = 30\n"
    "burn_in = 10\n"
    "warm_iters = 2\n"
    "beta_rate = 1\n"
    "beta_max = 2\n"
    "beta_step = 0.1\n"
    "[inference]\n"
    "louis_samples = 40\n"
    "imputations = 3\n";

}  // namespace

TEST_CASE("run_experiment produces the full output set") {
  auto dir = fresh_dir("run");
  auto plan = parse_experiment_plan(parse_string(kTinyExperiment));
  int failures = run_experiment(plan, dir.string());
  CHECK(failures == 0);

  for (const char* name :
       {"manifest.json", "params.csv", "metrics.csv", "trace.csv",
        "truth_labels_s3.pgm", "truth_mean_s3.csv", "y_s3_f0.csv",
        "sd_map_s3_f0_proposed.csv", "est_map_s3_f0_proposed.csv",
        "est_map_s3_f0_proposed.pgm", "est_map_s3_f0_proposed.pgm.json",
        "est_map_s3_f0_gmm.csv", "est_map_s3_f0_icm.csv",
        "est_map_s3_f0_raw.csv"}) {
    INFO("expected output: ", name);
    CHECK(fs::exists(dir / name));
  }
  CHECK_FALSE(fs::exists(dir / "selection.csv"));

  auto manifest = read_text(dir / "manifest.json");
  CHECK(manifest.find("\"status\": \"ok\"") != std::string::npos);
  CHECK(manifest.find("\"command\": \"experiment\"") != std::string::npos);
  CHECK(manifest.find("params.csv") != std::string::npos);
  CHECK(manifest.find("est_map_s3_f0_raw.pgm.json") != std::string::npos);
  CHECK(manifest.find("icm comparison holds beta fixed") != std::string::npos);

  auto metrics = read_csv(dir / "metrics.csv");
  REQUIRE(metrics.size() == 5);  // header + one row per method
  CHECK(metrics[0][0] == "seed");
  for (std::size_t r = 1; r < metrics.size(); ++r) {
    INFO("method: ", metrics[r][2]);
    CHECK(metrics[r][3] == "ok");
    // the components sit 8 sds apart, so every method classifies well
    CHECK(std::stod(metrics[r][5]) < 0.05);
  }

  auto params = read_csv(dir / "params.csv");
  REQUIRE(params.size() == 1 + 4 * 2);
  for (std::size_t r = 1; r < params.size(); ++r) {
    double mu = std::stod(params[r][4]);
    bool first = params[r][3] == "1";
    CHECK(std::fabs(mu - (first ? -2.0 : 2.0)) < 0.5);
  }

  // the proposed leg records one trace row per iteration
  auto trace = read_csv(dir / "trace.csv");
  REQUIRE(trace.size() >= 2);
  CHECK(trace[0].size() == 6 + 2 * 2);
  CHECK(trace[1][2] == "1");

  // truth files round-trip through the documented formats
  auto labels = read_label_pgm((dir / "truth_labels_s3.pgm").string());
  CHECK(labels.width == 12);
  CHECK(labels.num_labels == 2);
  auto mean = read_csv_image((dir / "truth_mean_s3.csv").string());
  CHECK(mean.at(0, 0) == -2.0);
  CHECK(mean.at(0, 11) == 2.0);
}

TEST_CASE("run_experiment is deterministic apart from manifest timestamps") {
  auto dir_a = fresh_dir("det_a");
  auto dir_b = fresh_dir("det_b");
  auto plan = parse_experiment_plan(parse_string(kTinyExperiment));
  CHECK(run_experiment(plan, dir_a.string()) == 0);
  CHECK(run_experiment(plan, dir_b.string()) == 0);

  int compared = 0;
  for (const auto& entry : fs::directory_iterator(dir_a)) {
    auto name = entry.path().filename().string();
    if (name == "manifest.json") continue;
    INFO("file: ", name);
    REQUIRE(fs::exists(dir_b / name));
    CHECK(read_text(entry.path()) == read_text(dir_b / name));
    ++compared;
  }
  CHECK(compared >= 13);
}

TEST_CASE("run_experiment handles a degenerate single-pixel scene") {
  auto dir = fresh_dir("degenerate");
  auto plan = parse_experiment_plan(parse_string(
      "[scene]\n"
      "width = 1\n"
      "height = 1\n"
      "component = 1 2 0 full\n"
      "[experiment]\n"
      "seeds = 7\n"
      "methods = proposed gmm icm raw\n"
      "components = 1\n"
      "icm_beta = 0.5\n"
      "summary_samples = 10\n"
      "[mcem]\n"
      "max_iters = 8\n"
      "sample_base = 4\n"
      "sample_cap = 8\n"
      "curve_samples = 20\n"
      "burn_in = 3\n"
      "beta_max = 1\n"
      "beta_step = 0.5\n"
      "[inference]\n"
      "louis_samples = 10\n"
      "imputations = 2\n"));
  int failures = run_experiment(plan, dir.string());
  CHECK(failures == 0);

  // every method reproduces the single value and all error metrics vanish
  auto metrics = read_csv(dir / "metrics.csv");
  REQUIRE(metrics.size() == 5);
  for (std::size_t r = 1; r < metrics.size(); ++r) {
    INFO("method: ", metrics[r][2]);
    CHECK(metrics[r][3] == "ok");
    CHECK(std::stod(metrics[r][5]) == 0.0);  // mcr
    CHECK(std::stod(metrics[r][6]) == 0.0);  // fpr
    CHECK(std::stod(metrics[r][7]) == 0.0);  // fnr
    CHECK(std::stod(metrics[r][8]) <= 1e-18);  // ss_est_true
  }
  for (const char* m : {"proposed", "gmm", "icm", "raw"}) {
    auto est = read_csv_image((dir / ("est_map_s7_f0_" + std::string(m) + ".csv")).string());
    REQUIRE(est.v.size() == 1);
    CHECK(est.v[0] == doctest::Approx(2.0).epsilon(1e-12));
  }
}

TEST_CASE("run_experiment records selection results") {
  auto dir = fresh_dir("select");
  auto plan = parse_experiment_plan(parse_string(
      "[scene]\n"
      "width = 10\n"
      "height = 10\n"
      "component = 1 -2 0.5 full\n"
      "component = 2 2 0.5 rect 0 5 9 9\n"
      "[experiment]\n"
      "seeds = 3\n"
      "methods = gmm\n"
      "components = 2\n"
      "select = 1 2\n"
      "tau = 0\n"
      "[mcem]\n"
      "max_iters = 5\n"
      "sample_base = 8\n"
      "sample_cap = 16\n"
      "curve_samples = 20\n"
      "burn_in = 8\n"
      "warm_iters = 1\n"
      "beta_rate = 1\n"
      "beta_max = 2\n"
      "beta_step = 0.2\n"
      "[inference]\n"
      "louis_samples = 30\n"
      "imputations = 3\n"));
  int failures = run_experiment(plan, dir.string());
  CHECK(failures == 0);

  auto rows = read_csv(dir / "selection.csv");
  REQUIRE(rows.size() == 3);  // header + M = 1, 2
  CHECK(rows[0][2] == "M");
  CHECK(rows[1][2] == "1");
  CHECK(rows[2][2] == "2");
  CHECK(rows[1][3] == "ok");
  CHECK(rows[2][3] == "ok");
  // two well separated components: both criteria prefer M = 2
  CHECK(rows[1][9] == "0");
  CHECK(rows[2][9] == "1");
  CHECK(rows[2][10] == "1");
  auto manifest = read_text(dir / "manifest.json");
  CHECK(manifest.find("selection.csv") != std::string::npos);
}

TEST_SUITE_END();
