#include "pottsfit/lattice.hpp"

#include <stdexcept>

namespace pottsfit {

Lattice build_lattice(int width, int height) {
  if (width < 1 || height < 1)
    throw std::invalid_argument("lattice dimensions must be positive");
  if (static_cast<int64_t>(width) * height > 100'000'000)
    throw std::invalid_argument("lattice too large");

  Lattice lat;
  lat.width = width;
  lat.height = height;
  const int n = width * height;
  lat.edges.reserve(static_cast<size_t>(width) * (height - 1) +
                    static_cast<size_t>(height) * (width - 1));
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      int32_t i = r * width + c;
      if (c + 1 < width) lat.edges.push_back({i, i + 1});
      if (r + 1 < height) lat.edges.push_back({i, i + width});
    }
  }

  std::vector<int32_t> deg(n, 0);
  for (const auto& e : lat.edges) {
    ++deg[e.a];
    ++deg[e.b];
  }
  lat.nbr_start.assign(n + 1, 0);
  for (int i = 0; i < n; ++i) lat.nbr_start[i + 1] = lat.nbr_start[i] + deg[i];
  lat.nbr.resize(lat.nbr_start[n]);
  std::vector<int32_t> cursor(lat.nbr_start.begin(), lat.nbr_start.end() - 1);
  for (const auto& e : lat.edges) {
    lat.nbr[cursor[e.a]++] = e.b;
    lat.nbr[cursor[e.b]++] = e.a;
  }
  return lat;
}

}  // namespace pottsfit
