#pragma once

#include <vector>

namespace pottsfit {

// Weighted least-squares isotonic (nondecreasing) fit by pool-adjacent-
// violators. Weights must be positive; a very large weight pins its point.
std::vector<double> isotonic_fit(const std::vector<double>& y,
                                 const std::vector<double>& w);

}  // namespace pottsfit
