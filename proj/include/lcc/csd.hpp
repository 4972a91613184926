#pragma once

// Per-entry scalar quantization baselines.

#include <cmath>
#include <vector>

#include "lcc/core.hpp"

namespace lcc {

/// Canonically-signed-digit style recoding truncated to `digits` nonzero
/// digits: repeatedly take the signed power of two nearest the residual
/// (ties toward the larger magnitude). Each subtraction is exact since the
/// chosen power lies within a factor two of the residual.
inline std::vector<ShiftCoefficient> csd_quantize(double value, int digits,
                                                  const ExponentBounds& bounds = {}) {
  if (digits < 1) throw Error(ErrorKind::invalid_argument, "digits must be >= 1");
  if (!std::isfinite(value)) throw Error(ErrorKind::invalid_argument, "non-finite value");
  std::vector<ShiftCoefficient> out;
  double r = value;
  for (int d = 0; d < digits && r != 0.0; ++d) {
    const double mag = std::fabs(r);
    int e = std::ilogb(mag);
    if (mag >= 1.5 * std::ldexp(1.0, e)) ++e;
    if (!bounds.contains(e)) break;
    const ShiftCoefficient c(r < 0.0 ? -1 : 1, e);
    out.push_back(c);
    r -= c.value();
  }
  return out;
}

inline double reconstruct(const std::vector<ShiftCoefficient>& digits) {
  double s = 0.0;
  for (const ShiftCoefficient& c : digits) s += c.value();
  return s;
}

/// Plain binary: round to `bits` significant bits (round half away from zero).
inline double binary_quantize(double value, int bits) {
  if (bits < 1) throw Error(ErrorKind::invalid_argument, "bits must be >= 1");
  if (value == 0.0 || !std::isfinite(value)) return value;
  const int e = std::ilogb(std::fabs(value));
  const int lsb = e - bits + 1;
  return std::ldexp(std::round(std::ldexp(value, -lsb)), lsb);
}

}  // namespace lcc
