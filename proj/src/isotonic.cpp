#include "pottsfit/isotonic.hpp"

#include <stdexcept>

namespace pottsfit {

std::vector<double> isotonic_fit(const std::vector<double>& y,
                                 const std::vector<double>& w) {
  if (y.size() != w.size()) throw std::invalid_argument("isotonic size mismatch");
  for (double wi : w)
    if (!(wi > 0.0)) throw std::invalid_argument("isotonic weights must be > 0");

  struct Block {
    double wsum, mean;
    int len;
  };
  std::vector<Block> blocks;
  blocks.reserve(y.size());
  for (size_t i = 0; i < y.size(); ++i) {
    blocks.push_back({w[i], y[i], 1});
    while (blocks.size() > 1 &&
           blocks[blocks.size() - 2].mean > blocks.back().mean) {
      Block b = blocks.back();
      blocks.pop_back();
      Block& a = blocks.back();
      a.mean = (a.wsum * a.mean + b.wsum * b.mean) / (a.wsum + b.wsum);
      a.wsum += b.wsum;
      a.len += b.len;
    }
  }
  std::vector<double> out;
  out.reserve(y.size());
  for (const Block& b : blocks) out.insert(out.end(), b.len, b.mean);
  return out;
}

}  // namespace pottsfit
