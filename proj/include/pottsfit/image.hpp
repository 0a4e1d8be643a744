#pragma once

#include <cstdint>
#include <vector>

#include "pottsfit/lattice.hpp"

namespace pottsfit {

// Real-valued pixel intensities, row-major from the top-left.
struct IntensityImage {
  int width = 0;
  int height = 0;
  std::vector<double> v;

  int num_pixels() const { return width * height; }
  double& at(int r, int c) { return v[static_cast<size_t>(r) * width + c]; }
  double at(int r, int c) const { return v[static_cast<size_t>(r) * width + c]; }
};

IntensityImage make_image(int width, int height, double fill = 0.0);

// Per-pixel labels. Stored 0-based in [0, num_labels); file formats and
// documentation use 1-based labels.
struct LabelField {
  int width = 0;
  int height = 0;
  int num_labels = 1;
  std::vector<uint8_t> v;

  int num_pixels() const { return width * height; }
};

LabelField make_labels(int width, int height, int num_labels, uint8_t fill = 0);

// throw std::invalid_argument on mismatched dimensions or out-of-range labels
void check_compatible(const IntensityImage& img, const Lattice& lat);
void check_compatible(const LabelField& labels, const Lattice& lat);
void check_finite(const IntensityImage& img);

}  // namespace pottsfit
