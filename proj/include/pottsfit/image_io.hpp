#pragma once

#include "pottsfit/image.hpp"

#include <string>

namespace pottsfit {

// CSV grid: one line per lattice row, comma-separated values printed with
// %.17g so a read round-trips bit-exactly.
void write_csv_image(const std::string& path, const IntensityImage& img);
IntensityImage read_csv_image(const std::string& path);

// Binary PGM (P5) with pixel value = label + 1 and maxval = num_labels;
// num_labels above 254 does not fit and is rejected.
void write_label_pgm(const std::string& path, const LabelField& labels);
LabelField read_label_pgm(const std::string& path);

// 16-bit big-endian P5 render with [min, max] scaled linearly onto
// 0..65535, light = high. The affine scale is recorded in a JSON sidecar
// at path + ".json" so the render can be inverted up to quantization.
void write_render_pgm(const std::string& path, const IntensityImage& img);
IntensityImage read_render_pgm(const std::string& path);

}  // namespace pottsfit
