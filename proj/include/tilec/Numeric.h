//===- Numeric.h - Element types and RNG ------------------------*- C++ -*-===//
//
// Part of the tilec project, under the Apache License v2.0 with LLVM
// Exceptions. See https://llvm.org/LICENSE.txt for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#ifndef TILEC_NUMERIC_H
#define TILEC_NUMERIC_H

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>

namespace tilec {

enum class ElemType : uint8_t { F16, F32, I32, I1 };

std::string_view elemName(ElemType elem);
std::optional<ElemType> parseElemName(std::string_view text);
int elemBits(ElemType elem);
inline int elemBytes(ElemType elem) {
  return elem == ElemType::I1 ? 1 : elemBits(elem) / 8;
}
inline bool isFloat(ElemType elem) {
  return elem == ElemType::F16 || elem == ElemType::F32;
}

/// IEEE binary16 conversions, round-to-nearest-even on the way down.
uint16_t f32ToF16Bits(float value);
float f16BitsToF32(uint16_t bits);
inline float roundToF16(float value) {
  return f16BitsToF32(f32ToF16Bits(value));
}

/// Snaps `value` onto the set of values representable by `elem`. f16 and f32
/// round to nearest even, i32 wraps, i1 becomes 0 or 1.
double canonicalize(double value, ElemType elem);

/// Seedable generator used for all input synthesis. The engine is
/// std::mt19937_64, whose output sequence is fixed by the C++ standard; the
/// conversion to doubles is done here (53 high bits scaled by 2^-53) so the
/// values do not depend on the standard library's distribution classes.
class Rng {
public:
  explicit Rng(uint64_t seed) : engine(seed) {}

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) {
    double unit = static_cast<double>(engine() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * unit;
  }
  /// Uniform integer in [0, bound).
  uint64_t below(uint64_t bound) { return engine() % bound; }

private:
  std::mt19937_64 engine;
};

} // namespace tilec

#endif // TILEC_NUMERIC_H
