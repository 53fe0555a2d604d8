//===- VisaTest.cpp - Lowering tests --------------------------------------===//
//
// Part of the tilec project, under the Apache License v2.0 with LLVM
// Exceptions. See https://llvm.org/LICENSE.txt for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "TestUtil.h"

#include "tilec/VISA.h"

#include <gtest/gtest.h>

using namespace tilec;
using namespace tilec::test;

namespace {

using Vec = std::vector<int64_t>;

TargetConfig styled(CodegenStyle style) {
  TargetConfig t = TargetConfig::pvc();
  t.style = style;
  return t;
}

VProgram lowerFixture(const std::string &name, const TargetConfig &t) {
  return lower(compileTo(loadKernel(fixture(name)), kMatchTargetSize, t), t);
}

const VInstr *firstLoad(const VProgram &p, ElemType elem) {
  for (const VInstr &i : p.instrs)
    if (i.opcode == VOpcode::Block2dLoad && i.elem == elem)
      return &i;
  return nullptr;
}

TEST(Lower, LoadAWidths) {
  VProgram simt = lowerFixture("gemm", styled(CodegenStyle::Simt));
  VProgram simd = lowerFixture("gemm", styled(CodegenStyle::Simd));
  const VInstr *a = firstLoad(simt, ElemType::F16);
  const VInstr *b = firstLoad(simd, ElemType::F16);
  ASSERT_TRUE(a && b);
  EXPECT_EQ(a->shape, (Vec{32, 32}));
  EXPECT_EQ(a->vectorLen, 64);
  EXPECT_EQ(a->packedType, "i16");
  EXPECT_EQ(a->packedLen, 64);
  EXPECT_EQ(a->mnemonic, "2DBlockRead.v64i16");
  EXPECT_EQ(b->vectorLen, 1024);
  EXPECT_EQ(b->packedType, "i32");
  EXPECT_EQ(b->packedLen, 512);
  EXPECT_EQ(b->mnemonic, "load2d.stateless.v512i32");
}

TEST(Lower, StoreCWidth) {
  VProgram simt = lowerFixture("gemm", styled(CodegenStyle::Simt));
  int64_t stores = 0;
  for (const VInstr &i : simt.instrs)
    if (i.opcode == VOpcode::Block2dStore) {
      ++stores;
      EXPECT_EQ(i.shape, (Vec{8, 16}));
      EXPECT_EQ(i.vectorLen, 8);
      EXPECT_EQ(i.mnemonic, "2DBlockWrite.v8i32");
    }
  EXPECT_EQ(stores, 16);
}

TEST(Lower, MmaSimtWidths) {
  VProgram simt = lowerFixture("gemm", styled(CodegenStyle::Simt));
  int64_t mmas = 0;
  for (const VInstr &i : simt.instrs)
    if (i.opcode == VOpcode::Mma) {
      ++mmas;
      EXPECT_EQ(i.vectorLen, 8);
      EXPECT_EQ(i.mnemonic, "dpas.v8f32.v8i16.v8i32");
    }
  EXPECT_EQ(mmas, 32);
}

TEST(Lower, SimdSimtDuality) {
  TargetConfig simtT = styled(CodegenStyle::Simt);
  VProgram simt = lowerFixture("gemm", simtT);
  VProgram simd = lowerFixture("gemm", styled(CodegenStyle::Simd));
  ASSERT_EQ(simt.instrs.size(), simd.instrs.size());
  for (size_t i = 0; i < simt.instrs.size(); ++i) {
    EXPECT_EQ(simt.instrs[i].opcode, simd.instrs[i].opcode);
    EXPECT_EQ(simd.instrs[i].vectorLen,
              simt.instrs[i].vectorLen * simtT.threadsPerWarp)
        << i;
  }
}

TEST(Lower, DualityWithOtherWarpWidth) {
  TargetConfig simt = styled(CodegenStyle::Simt);
  simt.threadsPerWarp = 8;
  TargetConfig simd = simt;
  simd.style = CodegenStyle::Simd;
  VProgram a = lowerFixture("gemm", simt), b = lowerFixture("gemm", simd);
  for (size_t i = 0; i < a.instrs.size(); ++i)
    EXPECT_EQ(b.instrs[i].vectorLen, a.instrs[i].vectorLen * 8);
}

TEST(Lower, OneToOne) {
  for (const KernelFixture &f : loadSuite(manifestPath())) {
    TargetConfig t = TargetConfig::pvc();
    KernelFn fn = compileTo(loadKernel(f), kMatchTargetSize, t);
    VProgram p = lower(fn, t);
    int64_t ops = 0, ctl = 0;
    walk(fn.body, [&](const Op &op) {
      bool control = op.kind == OpKind::For || op.kind == OpKind::If ||
                     op.kind == OpKind::Yield || op.kind == OpKind::Return;
      ops += !control;
    });
    int64_t instrs = 0;
    for (const VInstr &i : p.instrs) {
      if (i.opcode == VOpcode::LoopCtl)
        ++ctl;
      else
        ++instrs;
    }
    EXPECT_EQ(instrs, ops) << f.name;
    EXPECT_GT(ctl, 0) << f.name;
  }
}

TEST(Lower, TotalOnPipelineOutput) {
  for (const KernelFixture &f : loadSuite(manifestPath()))
    EXPECT_NO_THROW(lowerFixture(f.name, TargetConfig::pvc())) << f.name;
}

TEST(Lower, SimtRejectsIndivisibleWidths) {
  TargetConfig t = styled(CodegenStyle::Simt);
  try {
    lower(compileTo(loadKernel(fixture("fa2_d64")), kMatchTargetSize, t), t);
    FAIL() << "expected a diagnostic";
  } catch (const CompileError &e) {
    EXPECT_NE(e.diagnostics()[0].find("threadsPerWarp"), std::string::npos);
  }
}

TEST(Lower, SimtLoweringChecksWidthsToo) {
  KernelFn fn = compileTo(loadKernel(fixture("fa2_d64")), kMatchTargetSize);
  EXPECT_THROW(lower(fn, styled(CodegenStyle::Simt)), CompileError);
}

TEST(Lower, SlmOverflow) {
  TargetConfig t = TargetConfig::pvc();
  t.slmBytes = 64;
  KernelFn fn =
      compileTo(loadKernel(fixture("paged_warp")), kMatchTargetSize, t);
  EXPECT_THROW(lower(fn, t), CompileError);
  t.slmBytes = 128;
  EXPECT_EQ(lower(fn, t).slmBytesUsed, 128);
}

TEST(Lower, RejectsUnsplitOps) {
  TargetConfig t = TargetConfig::pvc();
  KernelFn warp = compileTo(loadKernel(fixture("gemm")), kDistributeToWarps, t);
  EXPECT_THROW(lower(warp, t), CompileError);
  EXPECT_NO_THROW(linearize(warp, t));
}

/// Independent mma count for one dot: every (m, n, k) tile of the target.
int64_t mmaTiles(const Vec &a, const Vec &b, const TargetConfig &t) {
  return (a[0] + t.maxDotM - 1) / t.maxDotM * (b[1] / t.maxDotN) *
         (a[1] / t.maxDotK);
}

TEST(Stats, GemmLoopBody) {
  VProgram p = lowerFixture("gemm", TargetConfig::pvc());
  ProgramStats s = countStats(p, {{"K", 256}});
  ASSERT_EQ(s.loops.size(), 1u);
  EXPECT_EQ(s.loops[0].body.loads, 3);
  EXPECT_EQ(s.loops[0].body.mmas, 32);
  EXPECT_EQ(s.loops[0].body.bytesLoaded, 3 * 32 * 32 * 2);
  EXPECT_EQ(s.loops[0].trips, 8);
  ASSERT_TRUE(s.dynamic);
  EXPECT_EQ(s.dynamic->mmas, 32 * 8);
  EXPECT_EQ(s.total.loads, 19);
  EXPECT_EQ(s.total.stores, 16);
}

TEST(Stats, UnknownTripCount) {
  VProgram p = lowerFixture("gemm", TargetConfig::pvc());
  ProgramStats s = countStats(p);
  EXPECT_FALSE(s.loops[0].trips);
  EXPECT_FALSE(s.dynamic);
}

TEST(Stats, EmptyKernel) {
  KernelFn fn = parseOne("tt.func @f() attributes {num_warps = 1, "
                         "warp_level = true} { tt.return }");
  ProgramStats s = countStats(lower(fn, TargetConfig::pvc()));
  EXPECT_EQ(s.total, Stats{});
  ASSERT_TRUE(s.dynamic);
  EXPECT_EQ(*s.dynamic, Stats{});
  EXPECT_TRUE(s.loops.empty());
}

TEST(Stats, FlashAttentionLoopBody) {
  TargetConfig t = TargetConfig::pvc();
  for (int64_t d : {64, 128}) {
    std::string name = "fa2_d" + std::to_string(d);
    // Per warp: 16 rows; QK is 16xB = 16xD * DxB, PV is 16xD = 16xB * BxD.
    int64_t block = 64;
    int64_t expect =
        mmaTiles({16, d}, {d, block}, t) + mmaTiles({16, block}, {block, d}, t);
    ProgramStats s = countStats(lowerFixture(name, t), {{"N", 512}});
    ASSERT_EQ(s.loops.size(), 1u) << name;
    EXPECT_EQ(s.loops[0].body.mmas, expect) << name;
    EXPECT_EQ(s.dynamic->mmas, expect * 512 / block) << name;
  }
}

TEST(Stats, BarriersAndSlm) {
  VProgram p = lowerFixture("paged_warp", TargetConfig::pvc());
  ProgramStats s = countStats(p, {{"NB", 32}});
  EXPECT_EQ(s.total.barriers, 1);
  EXPECT_EQ(s.total.slmBytesUsed, 128);
  EXPECT_EQ(s.loops.size(), 3u);
  for (const LoopStats &l : s.loops)
    EXPECT_EQ(l.trips, 4);
}

TEST(Stats, FormatHasTableAndKeyValues) {
  std::string text = formatStats(
      countStats(lowerFixture("gemm", TargetConfig::pvc()), {{"K", 256}}));
  EXPECT_NE(text.find("loop0.mmas=32"), std::string::npos);
  EXPECT_NE(text.find("loop0.trips=8"), std::string::npos);
  EXPECT_NE(text.find("dynamic.mmas=256"), std::string::npos);
  EXPECT_NE(text.find("static.loads=19"), std::string::npos);
}

TEST(Disassemble, DeterministicAndComplete) {
  VProgram p = lowerFixture("gemm", TargetConfig::pvc());
  std::string a = disassemble(p);
  EXPECT_EQ(a, disassemble(lowerFixture("gemm", TargetConfig::pvc())));
  EXPECT_EQ(a.rfind("vprogram @matmul_kernel_with_block_pointers", 0), 0u);
  int64_t lines = std::count(a.begin(), a.end(), '\n');
  EXPECT_EQ(lines, int64_t(p.instrs.size()) + 2);
}

} // namespace
