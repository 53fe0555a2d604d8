//===- DefUse.h - Def-use queries -------------------------------*- C++ -*-===//
//
// Part of the tilec project, under the Apache License v2.0 with LLVM
// Exceptions. See https://llvm.org/LICENSE.txt for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#ifndef TILEC_DEFUSE_H
#define TILEC_DEFUSE_H

#include "tilec/IR.h"

#include <vector>

namespace tilec {

/// Def-use graph of one function. Op pointers refer into the function, which
/// must outlive the graph and stay unmodified.
class DefUse {
public:
  explicit DefUse(const KernelFn &fn);

  /// Null for region arguments (kernel arguments, loop induction variables
  /// and iteration arguments).
  const Op *definingOp(Value v) const { return defs.at(v.id); }
  /// Op owning the region that declares `v` as an argument; null otherwise
  /// or for kernel arguments.
  const Op *argOwner(Value v) const { return argOwners.at(v.id); }
  /// Each user op appears once per operand slot that reads `v`.
  const std::vector<const Op *> &users(Value v) const { return uses.at(v.id); }
  /// Op whose region directly contains `op`; null at function level.
  const Op *parentOf(const Op *op) const;

  /// Values linked through loop iteration: init operand, body argument,
  /// yield operand and loop result of one carried slot. Contains `v` itself.
  std::vector<Value> carriedGroup(Value v) const;

  size_t numValues() const { return defs.size(); }

private:
  uint32_t find(uint32_t x) const;
  void unite(uint32_t a, uint32_t b);

  std::vector<const Op *> defs;
  std::vector<const Op *> argOwners;
  std::vector<std::vector<const Op *>> uses;
  std::vector<std::pair<const Op *, const Op *>> parents;
  mutable std::vector<uint32_t> leader;
};

} // namespace tilec

#endif // TILEC_DEFUSE_H
