//===- PassesTest.cpp - Pass tests ----------------------------------------===//
//
// Part of the tilec project, under the Apache License v2.0 with LLVM
// Exceptions. See https://llvm.org/LICENSE.txt for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "TestUtil.h"

#include "tilec/Verifier.h"

#include <gtest/gtest.h>

#include <map>

using namespace tilec;
using namespace tilec::test;

namespace {

using Vec = std::vector<int64_t>;

Value byName(const KernelFn &fn, const std::string &name) {
  for (uint32_t i = 0; i < fn.values.size(); ++i)
    if (fn.values[i].name == name)
      return Value{i};
  throw std::runtime_error("no value " + name);
}

LayoutEncoding encOf(const KernelFn &fn, const std::string &name) {
  const LayoutEncoding *e = encodingOf(fn.type(byName(fn, name)));
  if (!e)
    throw std::runtime_error("no encoding on " + name);
  return *e;
}

const TensorType &tensorOf(const KernelFn &fn, const std::string &name) {
  return *shapedPart(fn.type(byName(fn, name)));
}

std::string diagnosticsOf(const std::function<void()> &body) {
  try {
    body();
  } catch (const CompileError &e) {
    std::string all;
    for (const std::string &d : e.diagnostics())
      all += d + "\n";
    return all;
  }
  return {};
}

const char *kCopy = R"(
tt.func @copy(%x: !tt.ptr<f32>, %y: !tt.ptr<f32>) attributes {num_warps = 4, warp_level = false} {
  %c0 = arith.constant 0 : i32
  %c1 = arith.constant 1 : i32
  %c64 = arith.constant 64 : i32
  %px = tt.make_tensor_ptr %x, [%c64, %c64], [%c64, %c1], [%c0, %c0] {order = [1, 0]} : !tt.ptr<tensor<64x64xf32>>
  %py = tt.make_tensor_ptr %y, [%c64, %c64], [%c64, %c1], [%c0, %c0] {order = [1, 0]} : !tt.ptr<tensor<64x64xf32>>
  %v = tt.load %px : tensor<64x64xf32>
  tt.store %py, %v
  tt.return
}
)";

const char *kRowMax = R"(
tt.func @rowmax(%x: !tt.ptr<f32>, %y: !tt.ptr<f32>) attributes {num_warps = 4, warp_level = false} {
  %c0 = arith.constant 0 : i32
  %c1 = arith.constant 1 : i32
  %c64 = arith.constant 64 : i32
  %px = tt.make_tensor_ptr %x, [%c64, %c64], [%c64, %c1], [%c0, %c0] {order = [1, 0]} : !tt.ptr<tensor<64x64xf32>>
  %py = tt.make_tensor_ptr %y, [%c64, %c1], [%c1, %c1], [%c0, %c0] {order = [1, 0]} : !tt.ptr<tensor<64x1xf32>>
  %v = tt.load %px : tensor<64x64xf32>
  %m = tt.reduce %v {axis = 1, kind = "max"} : tensor<64xf32>
  %mc = tt.expand_dims %m {axis = 1} : tensor<64x1xf32>
  tt.store %py, %mc
  tt.return
}
)";

// One load used as both dot operands.
const char *kSharedOperand = R"(
tt.func @shared(%x: !tt.ptr<f16>, %y: !tt.ptr<f32>) attributes {num_warps = 4, warp_level = false} {
  %c0 = arith.constant 0 : i32
  %c1 = arith.constant 1 : i32
  %c64 = arith.constant 64 : i32
  %px = tt.make_tensor_ptr %x, [%c64, %c64], [%c64, %c1], [%c0, %c0] {order = [1, 0]} : !tt.ptr<tensor<64x64xf16>>
  %py = tt.make_tensor_ptr %y, [%c64, %c64], [%c64, %c1], [%c0, %c0] {order = [1, 0]} : !tt.ptr<tensor<64x64xf32>>
  %sq = tt.load %px : tensor<64x64xf16>
  %z = arith.constant 0.0 : tensor<64x64xf32>
  %d = tt.dot %sq, %sq, %z : tensor<64x64xf32>
  tt.store %py, %d
  tt.return
}
)";

const char *kTwoChains = R"(
tt.func @two(%x: !tt.ptr<f16>) attributes {num_warps = 1, warp_level = false} {
  %c0 = arith.constant 0 : i32
  %c1 = arith.constant 1 : i32
  %c16 = arith.constant 16 : i32
  %px = tt.make_tensor_ptr %x, [%c16, %c16], [%c16, %c1], [%c0, %c0] {order = [1, 0]} : !tt.ptr<tensor<16x16xf16>>
  %a = tt.load %px : tensor<16x16xf16>
  %z = arith.constant 0.0 : tensor<16x16xf32>
  %d1 = tt.dot %a, %a, %z : tensor<16x16xf32>
  %h1 = tt.convert %d1 : tensor<16x16xf16>
  %d2 = tt.dot %h1, %a, %z : tensor<16x16xf32>
  %d3 = tt.dot %a, %a, %z : tensor<16x16xf32>
  %h3 = tt.convert %d3 : tensor<16x16xf16>
  %d4 = tt.dot %h3, %a, %z : tensor<16x16xf32>
  tt.return
}
)";

TEST(Classify, Gemm) {
  KernelFn fn = loadKernel(fixture("gemm"));
  Classification c = classifyWorkload(fn);
  EXPECT_EQ(c.cls, WorkloadClass::Gemm);
  ASSERT_NE(c.root, nullptr);
  EXPECT_EQ(c.root->kind, OpKind::Dot);
}

TEST(Classify, AttentionRootIsSecondDot) {
  KernelFn fn = loadKernel(fixture("fa2_d64"));
  Classification c = classifyWorkload(fn);
  EXPECT_EQ(c.cls, WorkloadClass::Attention);
  EXPECT_EQ(c.root, dotOps(fn).at(1));
}

TEST(Classify, CopyIsElementwise) {
  KernelFn fn = parseOne(kCopy);
  Classification c = classifyWorkload(fn);
  EXPECT_EQ(c.cls, WorkloadClass::Elementwise);
  EXPECT_EQ(c.root->kind, OpKind::Store);
  EXPECT_EQ(c.root->operands[1], byName(fn, "v"));
}

TEST(Classify, Reduction) {
  Classification c = classifyWorkload(parseOne(kRowMax));
  EXPECT_EQ(c.cls, WorkloadClass::Reduction);
  EXPECT_EQ(c.root->kind, OpKind::Reduce);
}

TEST(Classify, IndependentChainsRejected) {
  EXPECT_THROW(classifyWorkload(parseOne(kTwoChains)), CompileError);
}

TEST(AssignLayouts, GemmEncodings) {
  KernelFn fn = assignLayoutsPass(loadKernel(fixture("gemm")));
  LayoutEncoding c = LayoutEncoding::blocked({32, 64}, {8, 4}, {1, 0});
  EXPECT_EQ(encOf(fn, "d"), c);
  EXPECT_EQ(encOf(fn, "c_init"), c);
  EXPECT_EQ(encOf(fn, "acc"), c);
  EXPECT_EQ(encOf(fn, "a"), LayoutEncoding::dotOperand(0, c));
  EXPECT_EQ(encOf(fn, "b"), LayoutEncoding::dotOperand(1, c));
}

TEST(AssignLayouts, PointerChainInheritsOperandEncoding) {
  KernelFn fn = assignLayoutsPass(loadKernel(fixture("gemm")));
  LayoutEncoding dot0 = LayoutEncoding::dotOperand(
      0, LayoutEncoding::blocked({32, 64}, {8, 4}, {1, 0}));
  for (const char *v : {"a_block", "pa", "pa_next", "a_end"})
    EXPECT_EQ(encOf(fn, v), dot0) << v;
}

TEST(AssignLayouts, FlashAttentionTable) {
  KernelFn fn = assignLayoutsPass(loadKernel(fixture("fa2_d64")));
  LayoutEncoding o = LayoutEncoding::blocked({16, 64}, {8, 1}, {1, 0});
  LayoutEncoding dot0 = LayoutEncoding::dotOperand(0, o);
  EXPECT_EQ(encOf(fn, "acc"), o);
  EXPECT_EQ(encOf(fn, "v"), LayoutEncoding::dotOperand(1, o));
  EXPECT_EQ(encOf(fn, "qk"), dot0);
  EXPECT_EQ(encOf(fn, "p"), dot0);
  EXPECT_EQ(encOf(fn, "k"), LayoutEncoding::dotOperand(1, dot0));
  EXPECT_EQ(encOf(fn, "q"), LayoutEncoding::dotOperand(0, dot0));
  EXPECT_EQ(encOf(fn, "m_ij"), LayoutEncoding::slice(1, dot0));
  EXPECT_EQ(encOf(fn, "m"), LayoutEncoding::slice(1, dot0));
  EXPECT_EQ(encOf(fn, "l"), LayoutEncoding::slice(1, dot0));
}

TEST(AssignLayouts, SingleWarpGemm) {
  KernelFn src = loadKernel(fixture("gemm"));
  src.numWarps = 1;
  KernelFn fn = assignLayoutsPass(src);
  walk(fn.body, [&](const Op &op) {
    for (Value r : op.results)
      if (const LayoutEncoding *e = encodingOf(fn.type(r))) {
        EXPECT_EQ(
            equivalentBlocked(*e, shapedPart(fn.type(r))->shape).warpsPerCTA(),
            (Vec{1, 1}));
      }
  });
}

TEST(AssignLayouts, HorizontalHintOnGemm) {
  KernelFn src = loadKernel(fixture("gemm"));
  applyHints(src, {{0, TilingHint::Horizontal}});
  KernelFn fn = assignLayoutsPass(src);
  EXPECT_EQ(encOf(fn, "d").warpsPerCTA(), (Vec{32, 1}));
  EXPECT_EQ(encOf(fn, "d").sizePerWarp(), (Vec{8, 256}));
  EXPECT_NE(printFunction(fn).find("warpsPerCTA = [32, 1]"), std::string::npos);
}

TEST(AssignLayouts, VerticalHintOnGemm) {
  KernelFn src = loadKernel(fixture("gemm"));
  applyHints(src, {{0, TilingHint::Vertical}});
  EXPECT_EQ(encOf(assignLayoutsPass(src), "d").warpsPerCTA(), (Vec{1, 32}));
}

TEST(AssignLayouts, HintOnMissingDot) {
  KernelFn src = loadKernel(fixture("gemm"));
  EXPECT_THROW(applyHints(src, {{3, TilingHint::Square}}), CompileError);
}

TEST(AssignLayouts, ReductionDefaultsToHorizontal) {
  KernelFn fn = assignLayoutsPass(parseOne(kRowMax));
  EXPECT_EQ(encOf(fn, "v").warpsPerCTA(), (Vec{4, 1}));
  EXPECT_TRUE(encOf(fn, "m").isSlice());
}

TEST(AssignLayouts, ElementwiseDefaultsToSquare) {
  KernelFn fn = assignLayoutsPass(parseOne(kCopy));
  EXPECT_EQ(encOf(fn, "v").warpsPerCTA(), (Vec{2, 2}));
  EXPECT_EQ(encOf(fn, "py"), encOf(fn, "v"));
}

TEST(PropagateLayouts, SharedOperandConflictNamesValue) {
  std::string d =
      diagnosticsOf([] { assignLayoutsPass(parseOne(kSharedOperand)); });
  EXPECT_NE(d.find("conflicting layouts"), std::string::npos) << d;
  EXPECT_NE(d.find("%sq"), std::string::npos) << d;
}

TEST(PropagateLayouts, DisconnectedValue) {
  std::string text = kCopy;
  text.insert(text.find("  tt.return"),
              "  %lonely = arith.constant 1.0 : tensor<8x8xf32>\n");
  std::string d = diagnosticsOf([&] { assignLayoutsPass(parseOne(text)); });
  EXPECT_NE(d.find("%lonely"), std::string::npos) << d;
}

TEST(PropagateLayouts, ExplicitSeeds) {
  KernelFn fn = parseOne(kCopy);
  LayoutEncoding e = LayoutEncoding::blocked({64, 16}, {1, 4}, {1, 0});
  LayoutMap map = propagateLayouts(fn, {{byName(fn, "v").id, e}});
  for (const char *v : {"px", "py", "v"})
    EXPECT_EQ(map.at(byName(fn, v).id), e) << v;
}

TEST(AssignLayouts, AddsNoOps) {
  for (const KernelFixture &f : loadSuite(manifestPath())) {
    KernelFn src = loadKernel(f);
    if (src.warpLevel)
      continue;
    KernelFn out = assignLayoutsPass(src);
    std::map<OpKind, int64_t> before, after;
    walk(src.body, [&](const Op &op) { ++before[op.kind]; });
    walk(out.body, [&](const Op &op) { ++after[op.kind]; });
    EXPECT_EQ(before, after) << f.name;
    // Only type annotations differ.
    KernelFn stripped = out;
    for (ValueInfo &v : stripped.values)
      setEncoding(v.type, std::nullopt);
    EXPECT_TRUE(structurallyEqual(stripped, src)) << f.name;
  }
}

TEST(Distribute, GemmDotShape) {
  KernelFn fn = compileTo(loadKernel(fixture("gemm")), kDistributeToWarps);
  EXPECT_TRUE(fn.warpLevel);
  EXPECT_EQ(tensorOf(fn, "d").shape, (Vec{32, 64}));
  EXPECT_EQ(tensorOf(fn, "a").shape, (Vec{32, 32}));
  EXPECT_EQ(tensorOf(fn, "b").shape, (Vec{32, 64}));
  EXPECT_EQ(countOps(fn, OpKind::WarpId), 1);
  EXPECT_EQ(countOps(fn, OpKind::Dot), 1);
}

TEST(Distribute, SingleWarpKeepsShapes) {
  KernelFn src = loadKernel(fixture("gemm"));
  src.numWarps = 1;
  KernelFn fn = compileTo(src, kDistributeToWarps);
  EXPECT_EQ(tensorOf(fn, "d").shape, (Vec{256, 256}));
  EXPECT_EQ(tensorOf(fn, "a").shape, (Vec{256, 32}));
}

TEST(Distribute, NonDivisibleShape) {
  KernelFn src = parseOne(kCopy);
  src.numWarps = 3;
  EXPECT_THROW(compileTo(src, kDistributeToWarps), CompileError);
}

TEST(Distribute, WarpLevelInputUnchanged) {
  KernelFn src = loadKernel(fixture("paged_warp"));
  KernelFn fn = compileTo(src, kDistributeToWarps);
  EXPECT_TRUE(structurallyEqual(fn, src));
}

TEST(PassManager, PipelineNamesAndPrefixes) {
  PassManager full = buildPipeline(TargetConfig::pvc());
  EXPECT_EQ(full.passNames(),
            (std::vector<std::string>{kAssignLayouts, kDistributeToWarps,
                                      kMatchTargetSize}));
  EXPECT_EQ(buildPipeline(TargetConfig::pvc(), kAssignLayouts).passNames(),
            (std::vector<std::string>{kAssignLayouts}));
  EXPECT_THROW(buildPipeline(TargetConfig::pvc(), "fuse-everything"),
               CompileError);
}

TEST(PassManager, VerifierFailureNamesPass) {
  PassManager pm;
  pm.addPass("break-it", [](const KernelFn &fn) {
    KernelFn out = fn;
    out.body.ops.pop_back();
    return out;
  });
  std::string d = diagnosticsOf([&] { pm.run(loadKernel(fixture("gemm"))); });
  EXPECT_NE(d.find("after break-it"), std::string::npos) << d;
}

TEST(PassManager, DumpHookSeesEveryPass) {
  PassManager pm = buildPipeline(TargetConfig::pvc());
  std::vector<std::string> seen;
  pm.setDumpHook(
      [&](const std::string &pass, const KernelFn &) { seen.push_back(pass); });
  pm.run(loadKernel(fixture("gemm")));
  EXPECT_EQ(seen, pm.passNames());
}

} // namespace
