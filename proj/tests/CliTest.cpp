//===- CliTest.cpp - Driver tests -----------------------------------------===//
//
// Part of the tilec project, under the Apache License v2.0 with LLVM
// Exceptions. See https://llvm.org/LICENSE.txt for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "TestUtil.h"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <sys/wait.h>

using namespace tilec::test;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result tilec(const std::string &args, const std::string &env = "") {
  std::string cmd =
      env + " '" + std::string(TILEC_CLI_PATH) + "' " + args + " 2>&1";
  Result r;
  FILE *pipe = popen(cmd.c_str(), "r");
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0)
    r.out.append(buf, n);
  int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

class Cli : public testing::Test {
protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("tilec_cli_" +
           std::string(
               testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  std::string manifest() const { return "--manifest '" + manifestPath() + "'"; }
  std::string path(const std::string &name) const {
    return (dir / name).string();
  }
  fs::path dir;
};

TEST_F(Cli, CompileDumpAll) {
  Result r = tilec("compile gemm " + manifest() + " --dump-after=all",
                   "TILEC_DUMP_DIR='" + dir.string() + "'");
  ASSERT_EQ(r.code, 0) << r.out;
  for (const char *f :
       {"gemm.assign-layouts.ttir", "gemm.distribute-to-warps.ttir",
        "gemm.match-target-size.ttir", "gemm.lower-to-visa.vasm"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  EXPECT_EQ(
      std::distance(fs::directory_iterator(dir), fs::directory_iterator()), 4);
}

TEST_F(Cli, CompileIsIdempotent) {
  ASSERT_EQ(tilec("compile fa2_d64 " + manifest() +
                  " --dump-after all --out-dir '" + path("a") + "'")
                .code,
            0);
  ASSERT_EQ(tilec("compile fa2_d64 " + manifest() +
                  " --dump-after all --out-dir '" + path("b") + "'")
                .code,
            0);
  for (const auto &entry : fs::directory_iterator(dir / "a"))
    EXPECT_EQ(slurp(entry.path().string()),
              slurp((dir / "b" / entry.path().filename()).string()))
        << entry.path();
}

TEST_F(Cli, HorizontalHint) {
  Result r = tilec("compile " + sourcePath("kernels/gemm.ttir") +
                   " --hint dot0=horizontal --dump-after assign-layouts "
                   "--out-dir '" +
                   dir.string() + "'");
  ASSERT_EQ(r.code, 0) << r.out;
  std::string text = slurp(path("gemm.assign-layouts.ttir"));
  EXPECT_NE(text.find("warpsPerCTA = [32, 1]"), std::string::npos) << text;
}

TEST_F(Cli, ConflictingLayoutsExitOne) {
  std::ofstream(path("shared.ttir")) << R"(
tt.func @shared(%x: !tt.ptr<f16>, %y: !tt.ptr<f32>) attributes {num_warps = 4, warp_level = false} {
  %c0 = arith.constant 0 : i32
  %c1 = arith.constant 1 : i32
  %c64 = arith.constant 64 : i32
  %px = tt.make_tensor_ptr %x, [%c64, %c64], [%c64, %c1], [%c0, %c0] {order = [1, 0]} : !tt.ptr<tensor<64x64xf16>>
  %py = tt.make_tensor_ptr %y, [%c64, %c64], [%c64, %c1], [%c0, %c0] {order = [1, 0]} : !tt.ptr<tensor<64x64xf32>>
  %operand = tt.load %px : tensor<64x64xf16>
  %z = arith.constant 0.0 : tensor<64x64xf32>
  %d = tt.dot %operand, %operand, %z : tensor<64x64xf32>
  tt.store %py, %d
  tt.return
}
)";
  Result r = tilec("compile '" + path("shared.ttir") + "' --out-dir '" +
                   dir.string() + "'");
  EXPECT_EQ(r.code, 1) << r.out;
  EXPECT_NE(r.out.find("%operand"), std::string::npos) << r.out;
}

TEST_F(Cli, ParseErrorExitOne) {
  std::ofstream(path("bad.ttir")) << "tt.func @f() {\n  tt.dotx\n}\n";
  Result r = tilec("compile '" + path("bad.ttir") + "'");
  EXPECT_EQ(r.code, 1) << r.out;
  EXPECT_NE(r.out.find("bad.ttir:2:3"), std::string::npos) << r.out;
}

TEST_F(Cli, CheckGemm) {
  Result r = tilec("check gemm " + manifest() + " --seed 7");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("PASS gemm"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("max_rel_err="), std::string::npos) << r.out;
}

TEST_F(Cli, CheckFlashAttentionEveryLevel) {
  for (const char *level : {"workgroup", "warp", "intrinsic", "visa"}) {
    Result r =
        tilec("check fa2_d64 " + manifest() + " --seed 7 --level " + level);
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("PASS fa2_d64"), std::string::npos) << r.out;
  }
}

TEST_F(Cli, CheckZeroInputs) {
  Result r = tilec("check paged_warp " + manifest() + " --zeros");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("max_rel_err=0 "), std::string::npos) << r.out;
}

TEST_F(Cli, CheckFailureExitTwo) {
  std::string src = slurp(sourcePath("kernels/gemm.ttir"));
  src.replace(src.find("tt.store %c_block, %acc"), 23,
              "tt.store %c_block, %c_init");
  std::ofstream(path("gemm.ttir")) << src;
  std::ofstream(path("manifest.json")) << R"({"fixtures": [{"name": "gemm",
    "path": "gemm.ttir", "oracle": "gemm", "grid": [1, 1, 1],
    "num_warps": 32, "tolerance": 1e-4,
    "params": {"M": 256, "N": 256, "K": 256}}]})";
  Result r = tilec("check gemm --manifest '" + path("manifest.json") + "'");
  EXPECT_EQ(r.code, 2) << r.out;
  EXPECT_NE(r.out.find("FAIL gemm"), std::string::npos) << r.out;
}

TEST_F(Cli, CheckWithoutOracle) {
  std::ofstream(path("lonely.ttir")) << "tt.func @f() { tt.return }\n";
  Result r = tilec("check '" + path("lonely.ttir") + "'");
  EXPECT_EQ(r.code, 2) << r.out;
  EXPECT_NE(r.out.find("no oracle"), std::string::npos) << r.out;
}

TEST_F(Cli, RunThenCheckWithExplicitInputs) {
  Result r = tilec("run gemm " + manifest() + " --zeros --output '" +
                   path("c.tlct") + "'");
  ASSERT_EQ(r.code, 0) << r.out;
  ASSERT_TRUE(fs::exists(path("c.tlct")));
  // All-zero C used as the accumulator input.
  r = tilec("check gemm " + manifest() + " --input c_ptr='" + path("c.tlct") +
            "'");
  EXPECT_EQ(r.code, 0) << r.out;
  r = tilec("check gemm " + manifest() + " --input a_ptr='" + path("c.tlct") +
            "'");
  EXPECT_EQ(r.code, 3) << r.out;
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(tilec("").code, 3);
  EXPECT_EQ(tilec("frobnicate gemm").code, 3);
  EXPECT_EQ(tilec("check gemm " + manifest() + " --level thread").code, 3);
  EXPECT_EQ(tilec("compile gemm " + manifest() + " --dump-after fuse").code, 3);
  EXPECT_EQ(tilec("check gemm " + manifest() + " --style vliw").code, 3);
  EXPECT_EQ(
      tilec("check gemm " + manifest() + " --seed 1 --input a_ptr=x").code, 3);
  EXPECT_EQ(tilec("compile no_such_kernel " + manifest()).code, 3);
  EXPECT_EQ(tilec("compile gemm " + manifest() + " --hint dotX=square").code,
            3);
  EXPECT_EQ(tilec("check gemm " + manifest() + " --grid 1,x").code, 3);
  EXPECT_EQ(tilec("--help").code, 0);
}

TEST_F(Cli, SimtStyleCompileErrors) {
  EXPECT_EQ(tilec("compile gemm " + manifest() + " --style simt --out-dir '" +
                  dir.string() + "'")
                .code,
            0);
  Result r = tilec("compile fa2_d64 " + manifest() + " --style simt");
  EXPECT_EQ(r.code, 1) << r.out;
}

TEST_F(Cli, TargetFile) {
  std::ofstream(path("small.cfg"))
      << "max_load=16x16\nmax_dot=8x16x16\nthreads_per_warp=16\n"
         "slm_bytes=65536\nstyle=simd\n";
  Result r = tilec("stats gemm " + manifest() + " --target '" +
                   path("small.cfg") + "'");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("loop0.loads=12"), std::string::npos) << r.out;
  std::ofstream(path("broken.cfg")) << "max_load=sixteen\n";
  EXPECT_EQ(tilec("stats gemm " + manifest() + " --target '" +
                  path("broken.cfg") + "'")
                .code,
            3);
}

TEST_F(Cli, Stats) {
  Result r = tilec("stats gemm " + manifest());
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("loop0.mmas=32"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("loop0.loads=3"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("dynamic.mmas=256"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("scope"), std::string::npos) << r.out;
}

TEST_F(Cli, StatsEmptyKernel) {
  std::ofstream(path("empty.ttir"))
      << "tt.func @f() attributes {num_warps = 1, warp_level = true} "
         "{ tt.return }\n";
  Result r = tilec("stats '" + path("empty.ttir") + "'");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("static.mmas=0"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("dynamic.loads=0"), std::string::npos) << r.out;
}

TEST_F(Cli, NumWarpsOverride) {
  Result r = tilec("compile gemm " + manifest() +
                   " --num-warps 16 --dump-after assign-layouts --out-dir '" +
                   dir.string() + "'");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(
      slurp(path("gemm.assign-layouts.ttir")).find("warpsPerCTA = [4, 4]"),
      std::string::npos);
  EXPECT_EQ(tilec("compile paged_warp " + manifest() + " --num-warps 4").code,
            3);
}

} // namespace
