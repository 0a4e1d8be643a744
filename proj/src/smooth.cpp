#include "pottsfit/smooth.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace pottsfit {

double fwhm_to_sigma(double fwhm) { return fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0))); }

namespace {

// half-sample mirror: ... 1 0 | 0 1 2 ... n-1 | n-1 n-2 ...
int reflect_index(int i, int n) {
  int period = 2 * n;
  int m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - 1 - m;
}

// one separable pass along a line of length n with stride
void convolve_line(const std::vector<double>& src, std::vector<double>& dst,
                   std::size_t offset, std::size_t stride, int n,
                   const std::vector<double>& kernel, int radius) {
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int t = -radius; t <= radius; ++t) {
      int j = reflect_index(i + t, n);
      acc += kernel[std::size_t(t + radius)] * src[offset + std::size_t(j) * stride];
    }
    dst[offset + std::size_t(i) * stride] = acc;
  }
}

}  // namespace

IntensityImage gaussian_smooth(const IntensityImage& img, double fwhm) {
  if (!(fwhm >= 0.0)) throw std::invalid_argument("fwhm must be nonnegative");
  if (img.width < 1 || img.height < 1) throw std::invalid_argument("empty image");
  if (fwhm == 0.0) return img;

  double sigma = fwhm_to_sigma(fwhm);
  int radius = int(std::ceil(4.0 * sigma));
  std::vector<double> kernel(std::size_t(2 * radius + 1));
  double total = 0.0;
  for (int t = -radius; t <= radius; ++t) {
    double v = std::exp(-0.5 * (t / sigma) * (t / sigma));
    kernel[std::size_t(t + radius)] = v;
    total += v;
  }
  for (auto& v : kernel) v /= total;

  IntensityImage tmp = make_image(img.width, img.height);
  IntensityImage out = make_image(img.width, img.height);
  for (int r = 0; r < img.height; ++r)
    convolve_line(img.v, tmp.v, std::size_t(r) * img.width, 1, img.width, kernel, radius);
  for (int c = 0; c < img.width; ++c)
    convolve_line(tmp.v, out.v, std::size_t(c), std::size_t(img.width), img.height, kernel,
                  radius);
  return out;
}

}  // namespace pottsfit
