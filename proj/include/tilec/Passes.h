//===- Passes.h - Compiler passes -------------------------------*- C++ -*-===//
//
// Part of the tilec project, under the Apache License v2.0 with LLVM
// Exceptions. See https://llvm.org/LICENSE.txt for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#ifndef TILEC_PASSES_H
#define TILEC_PASSES_H

#include "tilec/IR.h"
#include "tilec/Target.h"

#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace tilec {

/// Thrown by passes; carries every diagnostic the pass produced.
class CompileError : public std::runtime_error {
public:
  explicit CompileError(std::vector<std::string> diagnostics);

  const std::vector<std::string> &diagnostics() const { return diags; }

private:
  std::vector<std::string> diags;
};

enum class WorkloadClass : uint8_t { Elementwise, Reduction, Gemm, Attention };

std::string_view workloadName(WorkloadClass cls);

struct Classification {
  WorkloadClass cls = WorkloadClass::Elementwise;
  /// The op whose result (or, for reductions, whose source) is tiled first.
  const Op *root = nullptr;
};

Classification classifyWorkload(const KernelFn &fn);

/// Encoding per value id; values without an entry are uniform (scalars, raw
/// pointers, single-element block pointers).
using LayoutMap = std::map<uint32_t, LayoutEncoding>;

/// Seeds the root (and dot operands) and completes the map by propagation.
LayoutMap assignLayouts(const KernelFn &fn, const Classification &cls);

/// Worklist fixpoint over the def-use graph starting from `seeds`.
LayoutMap propagateLayouts(const KernelFn &fn, LayoutMap seeds);

/// True for values that receive an encoding during layout assignment.
bool needsLayout(const Type &type);

/// Copy of `fn` with encodings from `layouts` attached to types.
KernelFn applyLayouts(const KernelFn &fn, const LayoutMap &layouts);

/// Pre-order index of dot ops, as used by `--hint dotN=...`.
std::vector<const Op *> dotOps(const KernelFn &fn);
/// Sets the tiling attribute of the selected dots. Throws CompileError for an
/// index with no matching dot.
void applyHints(KernelFn &fn, const std::map<int64_t, TilingHint> &hints);

/// Workgroup level with encodings -> warp level.
KernelFn distributeToWarps(const KernelFn &fn);

/// Warp level -> intrinsic level for `target`.
KernelFn matchTargetSize(const KernelFn &fn, const TargetConfig &target);

/// Layout assignment as a whole-function pass: classify, assign, propagate
/// and annotate. Identity on warp-level input.
KernelFn assignLayoutsPass(const KernelFn &fn);

//===----------------------------------------------------------------------===//
// Pass manager
//===----------------------------------------------------------------------===//

/// Pass names in pipeline order.
inline constexpr const char *kAssignLayouts = "assign-layouts";
inline constexpr const char *kDistributeToWarps = "distribute-to-warps";
inline constexpr const char *kMatchTargetSize = "match-target-size";
inline constexpr const char *kLowerToVisa = "lower-to-visa";

class PassManager {
public:
  using PassFn = std::function<KernelFn(const KernelFn &)>;
  using DumpHook =
      std::function<void(const std::string &pass, const KernelFn &fn)>;

  void addPass(std::string name, PassFn pass);
  void setDumpHook(DumpHook hook) { dump = std::move(hook); }
  /// Verifies after each pass; a verifier failure becomes a CompileError
  /// naming the pass.
  KernelFn run(KernelFn fn) const;

  std::vector<std::string> passNames() const;

private:
  std::vector<std::pair<std::string, PassFn>> passes;
  DumpHook dump;
};

/// The IR pipeline up to `lastPass` (inclusive) for `target`.
PassManager buildPipeline(const TargetConfig &target,
                          const std::string &lastPass = kMatchTargetSize);

} // namespace tilec

#endif // TILEC_PASSES_H
