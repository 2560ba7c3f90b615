#pragma once

#include <initializer_list>
#include <vector>

#include "discforge/setsystem.hpp"

namespace testing {

inline discforge::SetSystem system_of(std::size_t n, std::initializer_list<std::initializer_list<std::size_t>> ranges) {
  discforge::SetSystem sys(n);
  for (auto r : ranges) sys.add_range(discforge::Bitset(n, r));
  return sys;
}

/// All runs {a, ..., b} on 0..n-1 plus the empty set, built from scratch.
inline discforge::SetSystem brute_intervals(std::size_t n) {
  discforge::SetSystem sys(n);
  sys.add_range(discforge::Bitset(n));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b) {
      discforge::Bitset s(n);
      for (std::size_t e = a; e <= b; ++e) s.set(e);
      sys.add_range(s);
    }
  return sys;
}

inline std::vector<discforge::Bitset> rows(const discforge::SetSystem& sys) {
  std::vector<discforge::Bitset> out;
  for (std::size_t i = 0; i < sys.size(); ++i) out.push_back(sys.range_bitset(i));
  return out;
}

}  // namespace testing
