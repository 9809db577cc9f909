#pragma once

// Brute-force path similarity: for each template leaf, scan the tree leaves
// in order and count the first match. Operands are integers (thresholds in
// hundredths) so the band test is exact. Returns an unreduced fraction.

#include <algorithm>
#include <string>
#include <vector>

namespace oracle {

struct Leaf {
  std::string sensor;
  int comparator;  // index into the comparator enum
  bool threshold;  // false: exact operand
  int value;       // hundredths for thresholds, 0/1 for exact
};

struct Fraction {
  int num;
  int den;
};

inline Fraction similarity(const std::vector<Leaf>& stp, const std::vector<Leaf>& dtp, int band_hundredths = 25) {
  int count = 0;
  for (const Leaf& snode : stp) {
    for (const Leaf& dnode : dtp) {
      if (snode.sensor == dnode.sensor && snode.comparator == dnode.comparator) {
        if (snode.threshold && dnode.threshold) {
          int diff = snode.value - dnode.value;
          if (diff < 0) diff = -diff;
          if (diff <= band_hundredths) {
            count = count + 1;
            break;
          }
        } else if (!snode.threshold && !dnode.threshold) {
          if (snode.value == dnode.value) {
            count = count + 1;
            break;
          }
        }
      }
    }
  }
  const int length = static_cast<int>(std::max(stp.size(), dtp.size()));
  return {count, length};
}

}  // namespace oracle
