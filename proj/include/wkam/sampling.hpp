#pragma once

#include <cstdint>

namespace wkam {

/// Van der Corput radical inverse of `index` in `base`.
inline double radical_inverse(std::uint64_t index, std::uint32_t base) {
  double inv = 1.0 / base;
  double scale = inv;
  double out = 0.0;
  while (index > 0) {
    out += double(index % base) * scale;
    index /= base;
    scale *= inv;
  }
  return out;
}

/// Component `dim` of the Halton point `index` (first 16 prime bases).
inline double halton(std::uint64_t index, int dim) {
  static constexpr std::uint32_t kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19,
                                              23, 29, 31, 37, 41, 43, 47, 53};
  return radical_inverse(index + 1, kPrimes[dim % 16]);
}

}  // namespace wkam
