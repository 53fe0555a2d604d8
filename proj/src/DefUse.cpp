//===- DefUse.cpp - Def-use queries ---------------------------------------===//
//
// Part of the tilec project, under the Apache License v2.0 with LLVM
// Exceptions. See https://llvm.org/LICENSE.txt for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "tilec/DefUse.h"

#include <algorithm>

namespace tilec {

DefUse::DefUse(const KernelFn &fn)
    : defs(fn.values.size(), nullptr), argOwners(fn.values.size(), nullptr),
      uses(fn.values.size()), leader(fn.values.size()) {
  for (uint32_t i = 0; i < leader.size(); ++i)
    leader[i] = i;

  auto visit = [&](auto &self, const Region &region, const Op *owner) -> void {
    for (Value arg : region.args)
      argOwners[arg.id] = owner;
    for (const Op &op : region.ops) {
      parents.emplace_back(&op, owner);
      for (Value v : op.operands)
        uses[v.id].push_back(&op);
      for (Value v : op.results)
        defs[v.id] = &op;
      for (const Region &nested : op.regions)
        self(self, nested, &op);
      if (op.kind == OpKind::For && !op.regions.empty()) {
        const Region &body = op.regions.front();
        const Op *yield =
            !body.ops.empty() && body.ops.back().kind == OpKind::Yield
                ? &body.ops.back()
                : nullptr;
        for (size_t i = 0; i < op.results.size(); ++i) {
          uint32_t r = op.results[i].id;
          if (3 + i < op.operands.size())
            unite(r, op.operands[3 + i].id);
          if (1 + i < body.args.size())
            unite(r, body.args[1 + i].id);
          if (yield && i < yield->operands.size())
            unite(r, yield->operands[i].id);
        }
      }
    }
  };
  visit(visit, fn.body, nullptr);
}

const Op *DefUse::parentOf(const Op *op) const {
  for (const auto &[child, parent] : parents)
    if (child == op)
      return parent;
  return nullptr;
}

uint32_t DefUse::find(uint32_t x) const {
  while (leader[x] != x) {
    leader[x] = leader[leader[x]];
    x = leader[x];
  }
  return x;
}

void DefUse::unite(uint32_t a, uint32_t b) {
  a = find(a);
  b = find(b);
  if (a != b)
    leader[std::max(a, b)] = std::min(a, b);
}

std::vector<Value> DefUse::carriedGroup(Value v) const {
  std::vector<Value> group;
  uint32_t root = find(v.id);
  for (uint32_t i = 0; i < leader.size(); ++i)
    if (find(i) == root)
      group.push_back(Value{i});
  return group;
}

} // namespace tilec
