//===- Numeric.cpp - Element types and RNG --------------------------------===//
//
// Part of the tilec project, under the Apache License v2.0 with LLVM
// Exceptions. See https://llvm.org/LICENSE.txt for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "tilec/Numeric.h"

#include <bit>
#include <cmath>

namespace tilec {

std::string_view elemName(ElemType elem) {
  switch (elem) {
  case ElemType::F16:
    return "f16";
  case ElemType::F32:
    return "f32";
  case ElemType::I32:
    return "i32";
  case ElemType::I1:
    return "i1";
  }
  return "?";
}

std::optional<ElemType> parseElemName(std::string_view text) {
  if (text == "f16")
    return ElemType::F16;
  if (text == "f32")
    return ElemType::F32;
  if (text == "i32")
    return ElemType::I32;
  if (text == "i1")
    return ElemType::I1;
  return std::nullopt;
}

int elemBits(ElemType elem) {
  switch (elem) {
  case ElemType::F16:
    return 16;
  case ElemType::F32:
  case ElemType::I32:
    return 32;
  case ElemType::I1:
    return 1;
  }
  return 0;
}

uint16_t f32ToF16Bits(float value) {
  uint32_t x = std::bit_cast<uint32_t>(value);
  uint32_t sign = (x >> 16) & 0x8000u;
  uint32_t exponent = (x >> 23) & 0xffu;
  uint32_t mantissa = x & 0x7fffffu;
  if (exponent == 0xff)
    return static_cast<uint16_t>(sign | 0x7c00u | (mantissa ? 0x200u : 0u));
  int e = static_cast<int>(exponent) - 127 + 15;
  if (e >= 0x1f)
    return static_cast<uint16_t>(sign | 0x7c00u);
  if (e <= 0) {
    // Subnormal (or zero) result.
    if (e < -10)
      return static_cast<uint16_t>(sign);
    mantissa |= 0x800000u;
    int shift = 14 - e;
    uint32_t half = mantissa >> shift;
    uint32_t rem = mantissa & ((1u << shift) - 1);
    uint32_t halfway = 1u << (shift - 1);
    if (rem > halfway || (rem == halfway && (half & 1u)))
      ++half;
    return static_cast<uint16_t>(sign | half);
  }
  uint32_t half = sign | (static_cast<uint32_t>(e) << 10) | (mantissa >> 13);
  uint32_t rem = mantissa & 0x1fffu;
  // A carry out of the mantissa correctly bumps the exponent (up to inf).
  if (rem > 0x1000u || (rem == 0x1000u && (half & 1u)))
    ++half;
  return static_cast<uint16_t>(half);
}

float f16BitsToF32(uint16_t bits) {
  uint32_t sign = static_cast<uint32_t>(bits & 0x8000u) << 16;
  uint32_t exponent = (bits >> 10) & 0x1fu;
  uint32_t mantissa = bits & 0x3ffu;
  if (exponent == 0) {
    float magnitude = std::ldexp(static_cast<float>(mantissa), -24);
    return sign ? -magnitude : magnitude;
  }
  if (exponent == 0x1f)
    return std::bit_cast<float>(sign | 0x7f800000u | (mantissa << 13));
  return std::bit_cast<float>(sign | ((exponent - 15 + 127) << 23) |
                              (mantissa << 13));
}

double canonicalize(double value, ElemType elem) {
  switch (elem) {
  case ElemType::F16:
    return roundToF16(static_cast<float>(value));
  case ElemType::F32:
    return static_cast<float>(value);
  case ElemType::I32: {
    if (std::isnan(value))
      return 0;
    double t = std::trunc(value);
    double wrapped = std::fmod(t, 4294967296.0);
    if (wrapped < 0)
      wrapped += 4294967296.0;
    auto bits = static_cast<uint32_t>(wrapped);
    return static_cast<int32_t>(bits);
  }
  case ElemType::I1:
    return value != 0 ? 1.0 : 0.0;
  }
  return value;
}

} // namespace tilec
