#pragma once

#include "pottsfit/image.hpp"
#include "pottsfit/model.hpp"
#include "pottsfit/rng.hpp"

#include <cstdint>
#include <vector>

namespace pottsfit {

// Region primitive for painting scene components. Coordinates are pixel
// indices (row, col); rect bounds are inclusive and may extend past the
// image border (clipped when painted).
struct Region {
  enum class Kind { full, rect, ellipse, band, mask };
  Kind kind = Kind::full;
  // rect: a=min_row, b=min_col, c=max_row, d=max_col
  // ellipse: a=center_row, b=center_col, c=radius_row, d=radius_col
  // band: pixels with a <= s <= b where s = row - col (d == 0) or
  //       s = row + col (d != 0)
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
  // mask: row-major, nonzero paints; must match the scene dimensions
  std::vector<std::uint8_t> mask;

  bool contains(int row, int col) const;
};

Region full_region();
Region rect_region(int min_row, int min_col, int max_row, int max_col);
Region ellipse_region(double center_row, double center_col, double radius_row,
                      double radius_col);
Region band_region(double lo, double hi, bool anti_diagonal);
Region mask_region(std::vector<std::uint8_t> mask);

struct SceneComponent {
  int label = 0;  // 0-based; reported 1-based in file formats
  double mean = 0.0;
  double sd = 1.0;
  Region region;
};

// Components are painted in listed order; later entries overwrite earlier
// ones. Every pixel must end up covered, so the first component is normally
// a full-image background.
struct SceneSpec {
  int width = 0;
  int height = 0;
  std::vector<SceneComponent> components;

  int num_labels() const;
  void check_valid() const;
  // per-label mean/sd in label order, as a ModelParams with beta = 0
  ModelParams label_params() const;
};

struct Scene {
  LabelField labels;
  IntensityImage mean_map;
  IntensityImage noisy;
};

// Paints the label field, maps labels to component means, and adds
// independent N(0, sd_k^2) noise in row-major pixel order.
Scene generate_scene(const SceneSpec& spec, Rng& rng);

// 128x128 ten-component scene with means -8.5..8.5 and unit sds; strip,
// rectangle, band, and ellipse regions at roughly equal areas. High-mean
// ellipses touch only far-mean neighbors so threshold exceedance at 5.0
// is spatially unambiguous.
SceneSpec ten_component_scene();

// 128x128 single-component N(0,1) background.
SceneSpec pure_noise_scene();

}  // namespace pottsfit
