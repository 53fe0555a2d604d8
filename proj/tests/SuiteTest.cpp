//===- SuiteTest.cpp - Fixture suite tests --------------------------------===//
//
// Part of the tilec project, under the Apache License v2.0 with LLVM
// Exceptions. See https://llvm.org/LICENSE.txt for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "TestUtil.h"

#include "tilec/Oracle.h"
#include "tilec/Sim.h"
#include "tilec/VISA.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <set>

using namespace tilec;
using namespace tilec::test;

namespace {

std::vector<std::string> aliasLines(const std::string &text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line))
    if (!line.empty() && line[0] == '#')
      out.push_back(line);
  return out;
}

TEST(Suite, Contents) {
  std::vector<KernelFixture> suite = loadSuite(manifestPath());
  EXPECT_GE(suite.size(), 4u);
  std::set<std::string> names;
  std::vector<std::string> ids = oracleIds();
  for (const KernelFixture &f : suite) {
    EXPECT_TRUE(names.insert(f.name).second) << f.name;
    EXPECT_NE(std::find(ids.begin(), ids.end(), f.oracle), ids.end());
    EXPECT_GT(f.tolerance, 0.0);
    EXPECT_EQ(loadKernel(f).numWarps, f.numWarps);
  }
  for (const char *n :
       {"gemm", "fa2_d64", "fa2_d128", "paged_wg", "paged_warp"})
    EXPECT_TRUE(names.count(n)) << n;
}

TEST(Suite, ExpectedEncodings) {
  for (const KernelFixture &f : loadSuite(manifestPath())) {
    if (f.encodings.empty())
      continue;
    std::string text = printFunction(compileTo(loadKernel(f), kAssignLayouts));
    std::vector<std::string> lines = aliasLines(text);
    std::multiset<std::string> got(lines.begin(), lines.end());
    std::multiset<std::string> want(f.encodings.begin(), f.encodings.end());
    EXPECT_EQ(got, want) << f.name << "\n" << text.substr(0, 600);
  }
}

TEST(Suite, GemmAliasLinesVerbatim) {
  KernelFixture f = fixture("gemm");
  std::vector<std::string> lines =
      aliasLines(printFunction(compileTo(loadKernel(f), kAssignLayouts)));
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0], "#blocked = #triton_gpu.blocked<{sizePerWarp = [32, 64], "
                      "warpsPerCTA = [8, 4], order = [1, 0]}>");
  EXPECT_EQ(lines[1],
            "#dot0 = #triton_gpu.dot_op<{opIdx = 0, parent = #blocked}>");
  EXPECT_EQ(lines[2],
            "#dot1 = #triton_gpu.dot_op<{opIdx = 1, parent = #blocked}>");
}

TEST(Suite, ExpectedOpCounts) {
  for (const KernelFixture &f : loadSuite(manifestPath())) {
    KernelFn fn = compileTo(loadKernel(f), kMatchTargetSize);
    for (const auto &[name, count] : f.counts) {
      std::optional<OpKind> kind = parseOpKind(name);
      ASSERT_TRUE(kind) << name;
      EXPECT_EQ(countOps(fn, *kind), count) << f.name << " " << name;
    }
  }
}

TEST(Suite, WarpLevelPagedUsesEveryExtension) {
  KernelFn fn = loadKernel(fixture("paged_warp"));
  EXPECT_TRUE(fn.warpLevel);
  EXPECT_GE(countOps(fn, OpKind::WarpId), 1);
  EXPECT_GE(countOps(fn, OpKind::Alloc), 1);
  EXPECT_GE(countOps(fn, OpKind::Barrier), 1);
  std::set<std::string> crossKinds;
  bool withDst = false, withoutDst = false;
  walk(fn.body, [&](const Op &op) {
    if (op.kind != OpKind::Reduce || !op.boolAttr("cross_warp"))
      return;
    crossKinds.insert(op.strAttr("kind"));
    (op.hasAttr("dst_warps") ? withDst : withoutDst) = true;
  });
  EXPECT_EQ(crossKinds, (std::set<std::string>{"max", "sum"}));
  EXPECT_TRUE(withDst);
  EXPECT_TRUE(withoutDst);
}

struct Levels {
  KernelFn workgroup, warp, intrinsic;
  VProgram visa;
};

Levels allLevels(const KernelFixture &f) {
  TargetConfig t = TargetConfig::pvc();
  Levels l;
  l.workgroup = loadKernel(f);
  l.warp = compileTo(l.workgroup, kDistributeToWarps, t);
  l.intrinsic = compileTo(l.workgroup, kMatchTargetSize, t);
  l.visa = lower(l.intrinsic, t);
  return l;
}

TEST(Suite, EveryFixturePassesAtEveryLevel) {
  for (const KernelFixture &f : loadSuite(manifestPath())) {
    Levels l = allLevels(f);
    Problem base = makeProblem(f, 7);
    Reference ref = reference(f, base);
    for (int level = 0; level < 4; ++level) {
      Problem p = base;
      if (level == 0)
        run(l.workgroup, p.launch, p.mem, p.args);
      else if (level == 1)
        run(l.warp, p.launch, p.mem, p.args);
      else if (level == 2)
        run(l.intrinsic, p.launch, p.mem, p.args);
      else
        run(l.visa, p.launch, p.mem, p.args);
      EXPECT_LE(maxRelativeError(p.mem[p.output].data, ref.values), f.tolerance)
          << f.name << " level " << level;
    }
  }
}

TEST(Suite, ZeroInputsGiveZeroError) {
  for (const KernelFixture &f : loadSuite(manifestPath())) {
    Problem p = makeProblem(f, 7, InputFill::Zeros);
    Reference ref = reference(f, p);
    run(allLevels(f).visa, p.launch, p.mem, p.args);
    EXPECT_EQ(maxRelativeError(p.mem[p.output].data, ref.values), 0.0)
        << f.name;
  }
}

TEST(Suite, ProblemsAreSeeded) {
  KernelFixture f = fixture("paged_warp");
  Problem a = makeProblem(f, 7), b = makeProblem(f, 7), c = makeProblem(f, 8);
  EXPECT_TRUE(a.mem.identical(b.mem));
  EXPECT_FALSE(a.mem.identical(c.mem));
  // Block table rows hold distinct physical blocks.
  const Buffer &table = a.mem[a.buffers.at("table")];
  for (int64_t r = 0; r < table.dims[0]; ++r) {
    std::set<double> row(table.data.begin() + r * table.dims[1],
                         table.data.begin() + (r + 1) * table.dims[1]);
    EXPECT_EQ(int64_t(row.size()), table.dims[1]);
  }
}

TEST(Suite, BadManifest) {
  std::filesystem::path dir =
      std::filesystem::temp_directory_path() / "tilec_suite_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "manifest.json") << R"({"fixtures": [{"name": "x",
      "path": "missing.ttir", "oracle": "gemm", "grid": [1,1,1],
      "num_warps": 1, "tolerance": 1e-4, "params": {}}]})";
  }
  EXPECT_ANY_THROW(loadSuite((dir / "manifest.json").string()));
  {
    std::ofstream(dir / "manifest.json") << "{ not json";
  }
  EXPECT_ANY_THROW(loadSuite((dir / "manifest.json").string()));
}

} // namespace
