//===- IRTest.cpp - IR tests ----------------------------------------------===//
//
// Part of the tilec project, under the Apache License v2.0 with LLVM
// Exceptions. See https://llvm.org/LICENSE.txt for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "TestUtil.h"

#include "tilec/DefUse.h"
#include "tilec/IR.h"
#include "tilec/Verifier.h"

#include <gtest/gtest.h>

#include <algorithm>

using namespace tilec;
using namespace tilec::test;

namespace {

KernelFn gemm() { return loadKernel(fixture("gemm")); }

Value byName(const KernelFn &fn, const std::string &name) {
  for (uint32_t i = 0; i < fn.values.size(); ++i)
    if (fn.values[i].name == name)
      return Value{i};
  throw std::runtime_error("no value " + name);
}

const char *kBadDot = R"(
tt.func @bad(%p: !tt.ptr<f16>, %q: !tt.ptr<f16>) attributes {num_warps = 1, warp_level = false} {
  %c0 = arith.constant 0 : i32
  %c1 = arith.constant 1 : i32
  %c64 = arith.constant 64 : i32
  %pa = tt.make_tensor_ptr %p, [%c64, %c64], [%c64, %c1], [%c0, %c0] {order = [1, 0]} : !tt.ptr<tensor<32x32xf16>>
  %pb = tt.make_tensor_ptr %q, [%c64, %c64], [%c64, %c1], [%c0, %c0] {order = [1, 0]} : !tt.ptr<tensor<16x64xf16>>
  %a = tt.load %pa : tensor<32x32xf16>
  %b = tt.load %pb : tensor<16x64xf16>
  %z = arith.constant 0.0 : tensor<32x64xf32>
  %d = tt.dot %a, %b, %z : tensor<32x64xf32>
  tt.return
}
)";

const char *kBarrier = R"(
tt.func @sync() attributes {num_warps = 4, warp_level = false} {
  tt.barrier
  tt.return
}
)";

TEST(Verify, GemmIsClean) { EXPECT_TRUE(verify(gemm()).empty()); }

TEST(Verify, AllFixturesClean) {
  for (const KernelFixture &f : loadSuite(manifestPath()))
    EXPECT_TRUE(verify(loadKernel(f)).empty()) << f.name;
}

TEST(Verify, DotKMismatch) {
  std::vector<std::string> d = verify(parseOne(kBadDot));
  ASSERT_EQ(d.size(), 1u);
  EXPECT_NE(d[0].find("tt.dot"), std::string::npos) << d[0];
  EXPECT_NE(d[0].find("32x32"), std::string::npos) << d[0];
  EXPECT_NE(d[0].find("16x64"), std::string::npos) << d[0];
}

TEST(Verify, BarrierNeedsWarpLevel) {
  KernelFn fn = parseOne(kBarrier);
  std::vector<std::string> d = verify(fn);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_NE(d[0].find("tt.barrier"), std::string::npos);
  fn.warpLevel = true;
  EXPECT_TRUE(verify(fn).empty());
}

TEST(Verify, Dominance) {
  KernelFn fn;
  fn.name = "dom";
  OpBuilder b(fn);
  Value later = b.constantInt(1, "later");
  b.create1(OpKind::Add, {later, later}, scalarType(ElemType::I32), {}, "sum");
  std::swap(fn.body.ops[0], fn.body.ops[1]);
  b.create(OpKind::Return, {}, {});
  std::vector<std::string> d = verify(fn);
  ASSERT_FALSE(d.empty());
  EXPECT_NE(d[0].find("%later"), std::string::npos) << d[0];
}

TEST(Verify, ReduceMustDropOneAxis) {
  const char *text = R"(
tt.func @r() attributes {num_warps = 1, warp_level = false} {
  %x = arith.constant 1.0 : tensor<4x8xf32>
  %y = tt.reduce %x {axis = 1, kind = "sum"} : tensor<8xf32>
  tt.return
}
)";
  EXPECT_EQ(verify(parseOne(text)).size(), 1u);
}

TEST(Verify, LoadShapeMatchesPointer) {
  const char *text = R"(
tt.func @l(%p: !tt.ptr<f16>) attributes {num_warps = 1, warp_level = false} {
  %c0 = arith.constant 0 : i32
  %c1 = arith.constant 1 : i32
  %c64 = arith.constant 64 : i32
  %pa = tt.make_tensor_ptr %p, [%c64, %c64], [%c64, %c1], [%c0, %c0] {order = [1, 0]} : !tt.ptr<tensor<32x32xf16>>
  %a = tt.load %pa : tensor<32x16xf16>
  tt.return
}
)";
  EXPECT_EQ(verify(parseOne(text)).size(), 1u);
}

TEST(Verify, Deterministic) {
  KernelFn fn = parseOne(kBadDot);
  fn.body.ops.insert(fn.body.ops.begin(), parseOne(kBarrier).body.ops.front());
  EXPECT_EQ(verify(fn), verify(fn));
  EXPECT_GE(verify(fn).size(), 2u);
}

TEST(DefUse, LoadFeedsDot) {
  KernelFn fn = gemm();
  DefUse du(fn);
  Value a = byName(fn, "a");
  ASSERT_EQ(du.users(a).size(), 1u);
  EXPECT_EQ(du.users(a)[0]->kind, OpKind::Dot);
  EXPECT_EQ(du.definingOp(a)->kind, OpKind::Load);
}

TEST(DefUse, UnusedValue) {
  KernelFn fn = gemm();
  DefUse du(fn);
  EXPECT_TRUE(du.users(byName(fn, "a_end")).empty());
}

TEST(DefUse, CarriedAccumulatorChain) {
  KernelFn fn = gemm();
  DefUse du(fn);
  std::vector<Value> group = du.carriedGroup(byName(fn, "c"));
  std::sort(group.begin(), group.end());
  std::vector<Value> expect = {byName(fn, "c_init"), byName(fn, "c"),
                               byName(fn, "d"), byName(fn, "acc")};
  std::sort(expect.begin(), expect.end());
  EXPECT_EQ(group, expect);
  EXPECT_EQ(du.argOwner(byName(fn, "c"))->kind, OpKind::For);
  EXPECT_EQ(du.definingOp(byName(fn, "acc"))->kind, OpKind::For);
  // Every member of the chain reports the same group.
  for (Value v : expect) {
    std::vector<Value> g = du.carriedGroup(v);
    std::sort(g.begin(), g.end());
    EXPECT_EQ(g, expect);
  }
}

TEST(DefUse, EdgesAreSymmetric) {
  for (const KernelFixture &f : loadSuite(manifestPath())) {
    KernelFn fn = compileTo(loadKernel(f), kMatchTargetSize);
    DefUse du(fn);
    walk(fn.body, [&](const Op &op) {
      for (Value v : op.operands) {
        const auto &users = du.users(v);
        EXPECT_NE(std::find(users.begin(), users.end(), &op), users.end());
      }
    });
    for (uint32_t v = 0; v < fn.values.size(); ++v)
      for (const Op *user : du.users(Value{v}))
        EXPECT_NE(
            std::find(user->operands.begin(), user->operands.end(), Value{v}),
            user->operands.end());
  }
}

TEST(Builder, BuildsVerifiableFunction) {
  KernelFn fn;
  fn.name = "copy";
  OpBuilder b(fn);
  Value x = b.constant(2.0, tensorType({4, 4}, ElemType::F32), "x");
  Value y = b.create1(OpKind::Add, {x, x}, tensorType({4, 4}, ElemType::F32),
                      {}, "y");
  b.create(OpKind::Return, {}, {});
  EXPECT_TRUE(verify(fn).empty());
  EXPECT_EQ(fn.nameOf(y), "y");
  EXPECT_EQ(asTensor(fn.type(y)).numel(), 16);
}

TEST(Types, Helpers) {
  TensorType t = tensorType({256, 32}, ElemType::F16);
  EXPECT_EQ(t.numel(), 8192);
  EXPECT_TRUE(scalarType(ElemType::I32).isScalar());
  EXPECT_EQ(shapeStr({8, 16}), "8x16");
  EXPECT_TRUE(isWarpOnly(OpKind::Barrier));
  EXPECT_FALSE(isWarpOnly(OpKind::Dot));
}

} // namespace
