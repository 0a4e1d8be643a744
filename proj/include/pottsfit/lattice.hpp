#pragma once

#include <cstdint>
#include <vector>

namespace pottsfit {

// First-order 2D lattice with free (non-wrapping) boundary. Pixels are indexed
// row-major from the top-left. Edges are emitted pixel by pixel, right edge
// before down edge; samplers rely on this fixed order for reproducibility.
struct Lattice {
  int width = 0;
  int height = 0;

  struct Edge {
    int32_t a, b;
  };
  std::vector<Edge> edges;

  // neighbor lists in CSR form: neighbors of pixel i are
  // nbr[nbr_start[i] .. nbr_start[i+1])
  std::vector<int32_t> nbr_start;
  std::vector<int32_t> nbr;

  int num_pixels() const { return width * height; }
  int num_edges() const { return static_cast<int>(edges.size()); }
};

Lattice build_lattice(int width, int height);

}  // namespace pottsfit
