//===- Verifier.h - IR verifier ---------------------------------*- C++ -*-===//
//
// Part of the tilec project, under the Apache License v2.0 with LLVM
// Exceptions. See https://llvm.org/LICENSE.txt for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#ifndef TILEC_VERIFIER_H
#define TILEC_VERIFIER_H

#include "tilec/IR.h"

#include <string>
#include <vector>

namespace tilec {

/// Checks SSA dominance, per-op type rules and encoding ranks. Returns one
/// message per violation, in program order; empty when well formed.
std::vector<std::string> verify(const KernelFn &fn);
std::vector<std::string> verify(const KernelModule &module);

} // namespace tilec

#endif // TILEC_VERIFIER_H
