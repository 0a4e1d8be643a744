#pragma once

#include "pottsfit/image.hpp"

namespace pottsfit {

// sd of the Gaussian kernel with the given full width at half maximum
double fwhm_to_sigma(double fwhm);

// Convolves with a normalized Gaussian of sd fwhm_to_sigma(fwhm), truncated
// at radius ceil(4 sigma). Boundaries use half-sample mirror extension,
// which keeps the operator symmetric and mass-preserving, so the image mean
// is exact. fwhm = 0 returns the image unchanged.
IntensityImage gaussian_smooth(const IntensityImage& img, double fwhm);

}  // namespace pottsfit
