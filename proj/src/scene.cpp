#include "pottsfit/scene.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace pottsfit {

bool Region::contains(int row, int col) const {
  switch (kind) {
    case Kind::full:
      return true;
    case Kind::rect:
      return row >= a && row <= c && col >= b && col <= d;
    case Kind::ellipse: {
      if (c <= 0.0 || d <= 0.0) return false;
      double dr = (row - a) / c;
      double dc = (col - b) / d;
      return dr * dr + dc * dc <= 1.0;
    }
    case Kind::band: {
      double s = d != 0.0 ? double(row + col) : double(row - col);
      return s >= a && s <= b;
    }
    case Kind::mask:
      return false;  // handled by the caller, needs the scene width
  }
  return false;
}

Region full_region() { return Region{}; }

Region rect_region(int min_row, int min_col, int max_row, int max_col) {
  Region r;
  r.kind = Region::Kind::rect;
  r.a = min_row;
  r.b = min_col;
  r.c = max_row;
  r.d = max_col;
  return r;
}

Region ellipse_region(double center_row, double center_col, double radius_row,
                      double radius_col) {
  Region r;
  r.kind = Region::Kind::ellipse;
  r.a = center_row;
  r.b = center_col;
  r.c = radius_row;
  r.d = radius_col;
  return r;
}

Region band_region(double lo, double hi, bool anti_diagonal) {
  Region r;
  r.kind = Region::Kind::band;
  r.a = lo;
  r.b = hi;
  r.d = anti_diagonal ? 1.0 : 0.0;
  return r;
}

Region mask_region(std::vector<std::uint8_t> mask) {
  Region r;
  r.kind = Region::Kind::mask;
  r.mask = std::move(mask);
  return r;
}

int SceneSpec::num_labels() const {
  int top = -1;
  for (const auto& comp : components) top = std::max(top, comp.label);
  return top + 1;
}

void SceneSpec::check_valid() const {
  if (width < 1 || height < 1) throw std::invalid_argument("scene dimensions must be positive");
  if (components.empty()) throw std::invalid_argument("scene needs at least one component");
  int labels = num_labels();
  if (labels > 255) throw std::invalid_argument("scene label out of range");
  std::vector<char> seen(labels, 0);
  std::vector<double> mean(labels, 0.0), sd(labels, 0.0);
  for (const auto& comp : components) {
    if (comp.label < 0) throw std::invalid_argument("scene label out of range");
    if (!(comp.sd >= 0.0)) throw std::invalid_argument("scene sd must be nonnegative");
    if (!std::isfinite(comp.mean) || !std::isfinite(comp.sd))
      throw std::invalid_argument("scene parameters must be finite");
    if (comp.region.kind == Region::Kind::mask &&
        comp.region.mask.size() != std::size_t(width) * std::size_t(height))
      throw std::invalid_argument("mask region size does not match scene");
    if (seen[comp.label]) {
      if (mean[comp.label] != comp.mean || sd[comp.label] != comp.sd)
        throw std::invalid_argument("components sharing a label must share mean and sd");
    } else {
      seen[comp.label] = 1;
      mean[comp.label] = comp.mean;
      sd[comp.label] = comp.sd;
    }
  }
  for (int k = 0; k < labels; ++k)
    if (!seen[k]) throw std::invalid_argument("scene labels must be contiguous from 0");
}

ModelParams SceneSpec::label_params() const {
  check_valid();
  int labels = num_labels();
  ModelParams p;
  p.mu.assign(labels, 0.0);
  p.sigma2.assign(labels, 0.0);
  p.beta = 0.0;
  for (const auto& comp : components) {
    p.mu[comp.label] = comp.mean;
    // noise-free components still need a usable likelihood model
    p.sigma2[comp.label] = std::max(comp.sd * comp.sd, 1e-12);
  }
  return p;
}

Scene generate_scene(const SceneSpec& spec, Rng& rng) {
  spec.check_valid();
  int w = spec.width, h = spec.height;
  std::size_t n = std::size_t(w) * std::size_t(h);
  std::vector<int> paint(n, -1);
  for (const auto& comp : spec.components) {
    if (comp.region.kind == Region::Kind::mask) {
      for (std::size_t i = 0; i < n; ++i)
        if (comp.region.mask[i]) paint[i] = comp.label;
      continue;
    }
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c)
        if (comp.region.contains(r, c)) paint[std::size_t(r) * w + c] = comp.label;
  }
  for (std::size_t i = 0; i < n; ++i)
    if (paint[i] < 0)
      throw std::invalid_argument("scene leaves pixel " + std::to_string(i) + " uncovered");

  Scene out{make_labels(w, h, spec.num_labels()), make_image(w, h), make_image(w, h)};
  // raw per-label moments: noise must vanish exactly for sd == 0 components
  std::vector<double> mu_of(spec.num_labels()), sd_of(spec.num_labels());
  for (const auto& comp : spec.components) {
    mu_of[comp.label] = comp.mean;
    sd_of[comp.label] = comp.sd;
  }
  for (std::size_t i = 0; i < n; ++i) {
    int k = paint[i];
    out.labels.v[i] = std::uint8_t(k);
    out.mean_map.v[i] = mu_of[k];
    out.noisy.v[i] = mu_of[k] + sd_of[k] * rng.normal();
  }
  return out;
}

SceneSpec ten_component_scene() {
  SceneSpec spec;
  spec.width = 128;
  spec.height = 128;
  auto add = [&spec](int label, double mean, Region region) {
    spec.components.push_back({label, mean, 1.0, std::move(region)});
  };
  // background, then four vertical strips, then the right-hand block
  add(4, -0.85, full_region());
  add(0, -8.50, rect_region(0, 0, 127, 12));
  add(1, -5.95, rect_region(0, 13, 127, 25));
  add(2, -4.25, rect_region(0, 26, 127, 38));
  add(3, -2.55, rect_region(0, 39, 127, 51));
  add(5, 0.85, rect_region(0, 52, 63, 127));
  add(8, 5.95, ellipse_region(32.0, 70.0, 29.0, 15.0));
  add(9, 8.50, ellipse_region(32.0, 107.0, 29.0, 15.0));
  add(7, 4.25, rect_region(66, 60, 95, 117));
  add(6, 2.55, band_region(192.0, 226.0, true));
  return spec;
}

SceneSpec pure_noise_scene() {
  SceneSpec spec;
  spec.width = 128;
  spec.height = 128;
  spec.components.push_back({0, 0.0, 1.0, full_region()});
  return spec;
}

}  // namespace pottsfit
