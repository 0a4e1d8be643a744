#include "pottsfit/image.hpp"

#include <cmath>
#include <stdexcept>

namespace pottsfit {

IntensityImage make_image(int width, int height, double fill) {
  if (width < 1 || height < 1)
    throw std::invalid_argument("image dimensions must be positive");
  IntensityImage img;
  img.width = width;
  img.height = height;
  img.v.assign(static_cast<size_t>(width) * height, fill);
  return img;
}

LabelField make_labels(int width, int height, int num_labels, uint8_t fill) {
  if (width < 1 || height < 1)
    throw std::invalid_argument("label field dimensions must be positive");
  if (num_labels < 1 || num_labels > 255)
    throw std::invalid_argument("num_labels must be in 1..255");
  if (fill >= num_labels) throw std::invalid_argument("fill label out of range");
  LabelField lf;
  lf.width = width;
  lf.height = height;
  lf.num_labels = num_labels;
  lf.v.assign(static_cast<size_t>(width) * height, fill);
  return lf;
}

void check_compatible(const IntensityImage& img, const Lattice& lat) {
  if (img.width != lat.width || img.height != lat.height)
    throw std::invalid_argument("image dimensions do not match lattice");
}

void check_compatible(const LabelField& labels, const Lattice& lat) {
  if (labels.width != lat.width || labels.height != lat.height)
    throw std::invalid_argument("label field dimensions do not match lattice");
  for (uint8_t z : labels.v)
    if (z >= labels.num_labels)
      throw std::invalid_argument("label out of range");
}

void check_finite(const IntensityImage& img) {
  for (double y : img.v)
    if (!std::isfinite(y)) throw std::invalid_argument("non-finite intensity");
}

}  // namespace pottsfit
