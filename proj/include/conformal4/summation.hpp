#pragma once

// Deterministic pairwise summation. Values are combined along a fixed binary
// tree determined only by their order, so a given sequence always produces
// the same rounding.

#include <array>
#include <cstddef>
#include <span>

namespace conformal4 {

class PairwiseSum {
 public:
  void add(double x) {
    // Binary counter over block sizes 2^k.
    int level = 0;
    std::size_t n = count_;
    while (n & 1) {
      x = partial_[level] + x;
      n >>= 1;
      ++level;
    }
    partial_[level] = x;
    ++count_;
  }

  double value() const {
    double s = 0.0;
    bool first = true;
    for (int level = 0; level < 64; ++level)
      if ((count_ >> level) & 1) {
        s = first ? partial_[level] : partial_[level] + s;
        first = false;
      }
    return s;
  }

  std::size_t count() const { return count_; }

 private:
  std::array<double, 64> partial_{};
  std::size_t count_ = 0;
};

inline double pairwise_sum(std::span<const double> values) {
  PairwiseSum s;
  for (double v : values) s.add(v);
  return s.value();
}

}  // namespace conformal4
