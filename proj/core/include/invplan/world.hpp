#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace invplan {

// gridheight x gridwidth boolean matrix, indexed (row=y, col=x), 1-based.
struct BitMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<std::uint64_t> words;

  BitMatrix() = default;
  BitMatrix(int rows, int cols)
      : rows(rows), cols(cols),
        words((static_cast<std::size_t>(rows) * cols + 63) / 64, 0) {}

  bool in_bounds(long long y, long long x) const {
    return y >= 1 && y <= rows && x >= 1 && x <= cols;
  }
  bool get(long long y, long long x) const {
    if (!in_bounds(y, x)) return false;
    std::size_t i = static_cast<std::size_t>(y - 1) * cols + (x - 1);
    return (words[i >> 6] >> (i & 63)) & 1u;
  }
  void set(long long y, long long x, bool v) {
    std::size_t i = static_cast<std::size_t>(y - 1) * cols + (x - 1);
    if (v) {
      words[i >> 6] |= (std::uint64_t{1} << (i & 63));
    } else {
      words[i >> 6] &= ~(std::uint64_t{1} << (i & 63));
    }
  }
  bool operator==(const BitMatrix&) const = default;
};

// One symbolic environment state: integer fluents (coordinates, counters),
// boolean fluents (ground predicates) and terrain bit-matrices. Value type;
// transition application returns fresh states.
struct WorldState {
  std::vector<long long> ints;
  std::vector<std::uint8_t> bools;
  std::vector<BitMatrix> mats;

  bool operator==(const WorldState&) const = default;

  // Canonical byte serialization; used as exact memoization key.
  std::string digest() const;
};

}  // namespace invplan
