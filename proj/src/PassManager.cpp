//===- PassManager.cpp - Pass pipeline ------------------------------------===//
//
// Part of the tilec project, under the Apache License v2.0 with LLVM
// Exceptions. See https://llvm.org/LICENSE.txt for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "tilec/Passes.h"
#include "tilec/Verifier.h"

namespace tilec {

void PassManager::addPass(std::string name, PassFn pass) {
  passes.emplace_back(std::move(name), std::move(pass));
}

KernelFn PassManager::run(KernelFn fn) const {
  for (const auto &[name, pass] : passes) {
    fn = pass(fn);
    std::vector<std::string> errors = verify(fn);
    if (!errors.empty()) {
      for (std::string &e : errors)
        e = "after " + name + ": " + e;
      throw CompileError(std::move(errors));
    }
    if (dump)
      dump(name, fn);
  }
  return fn;
}

std::vector<std::string> PassManager::passNames() const {
  std::vector<std::string> names;
  for (const auto &p : passes)
    names.push_back(p.first);
  return names;
}

PassManager buildPipeline(const TargetConfig &target,
                          const std::string &lastPass) {
  PassManager pm;
  pm.addPass(kAssignLayouts, assignLayoutsPass);
  if (lastPass == kAssignLayouts)
    return pm;
  pm.addPass(kDistributeToWarps, distributeToWarps);
  if (lastPass == kDistributeToWarps)
    return pm;
  pm.addPass(kMatchTargetSize, [target](const KernelFn &fn) {
    return matchTargetSize(fn, target);
  });
  if (lastPass == kMatchTargetSize || lastPass == kLowerToVisa)
    return pm;
  throw CompileError({"unknown pass '" + lastPass + "'"});
}

} // namespace tilec
