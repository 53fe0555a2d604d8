//===- Target.h - Hardware target description -------------------*- C++ -*-===//
//
// Part of the tilec project, under the Apache License v2.0 with LLVM
// Exceptions. See https://llvm.org/LICENSE.txt for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#ifndef TILEC_TARGET_H
#define TILEC_TARGET_H

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace tilec {

enum class CodegenStyle : uint8_t { Simt, Simd };

std::string_view styleName(CodegenStyle style);

/// Hardware envelope that match-target-size and lowering honour.
struct TargetConfig {
  std::array<int64_t, 2> maxLoad = {32, 32};
  int64_t maxDotM = 8;
  int64_t maxDotN = 16;
  int64_t maxDotK = 16;
  int64_t threadsPerWarp = 16;
  int64_t slmBytes = 131072;
  CodegenStyle style = CodegenStyle::Simd;

  /// The shipped default profile (Intel Data Center GPU Max).
  static TargetConfig pvc() { return TargetConfig{}; }
};

/// Reads the flat key=value format, e.g.
///   max_load=32x32
///   max_dot=8x16x16
///   threads_per_warp=16
///   slm_bytes=131072
///   style=simd
/// Unspecified keys keep their PVC defaults. Blank lines and lines starting
/// with '#' are ignored. Throws std::runtime_error on malformed input.
TargetConfig parseTargetConfig(std::string_view text);
std::string printTargetConfig(const TargetConfig &target);

} // namespace tilec

#endif // TILEC_TARGET_H
