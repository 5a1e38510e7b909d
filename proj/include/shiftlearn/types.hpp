#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace shiftlearn {

using Label = std::size_t;
using ScoreVector = std::vector<double>;

struct LabeledExample {
  std::vector<double> x;
  Label y = 0;

  bool operator==(const LabeledExample&) const = default;
};

/// Index of the largest score; ties go to the smallest index.
inline Label argmax(std::span<const double> scores) {
  Label best = 0;
  for (std::size_t k = 1; k < scores.size(); ++k)
    if (scores[k] > scores[best]) best = k;
  return best;
}

}  // namespace shiftlearn
