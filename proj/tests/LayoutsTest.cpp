//===- LayoutsTest.cpp - Layout tests -------------------------------------===//
//
// Part of the tilec project, under the Apache License v2.0 with LLVM
// Exceptions. See https://llvm.org/LICENSE.txt for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "tilec/Layouts.h"

#include <gtest/gtest.h>

#include <numeric>
#include <set>

using namespace tilec;

namespace {

using Vec = std::vector<int64_t>;

LayoutEncoding gemmC() {
  return LayoutEncoding::blocked({32, 64}, {8, 4}, {1, 0});
}

TEST(TileRoot, SquareGemm) {
  LayoutEncoding e = tileRoot(Vec{256, 256}, 32, TilingHint::Square);
  EXPECT_EQ(e.warpsPerCTA(), (Vec{8, 4}));
  EXPECT_EQ(e.sizePerWarp(), (Vec{32, 64}));
  EXPECT_EQ(e.order(), (Vec{1, 0}));
}

TEST(TileRoot, HorizontalAttention) {
  LayoutEncoding e = tileRoot(Vec{128, 64}, 8, TilingHint::Horizontal);
  EXPECT_EQ(e.warpsPerCTA(), (Vec{8, 1}));
  EXPECT_EQ(e.sizePerWarp(), (Vec{16, 64}));
}

TEST(TileRoot, Vertical) {
  LayoutEncoding e = tileRoot(Vec{128, 64}, 8, TilingHint::Vertical);
  EXPECT_EQ(e.warpsPerCTA(), (Vec{1, 8}));
  EXPECT_EQ(e.sizePerWarp(), (Vec{128, 8}));
}

TEST(TileRoot, SingleWarp) {
  LayoutEncoding e = tileRoot(Vec{64, 64}, 1, TilingHint::Square);
  EXPECT_EQ(e.warpsPerCTA(), (Vec{1, 1}));
  EXPECT_EQ(e.sizePerWarp(), (Vec{64, 64}));
}

TEST(TileRoot, SquareWarpCountIsSymmetric) {
  LayoutEncoding e = tileRoot(Vec{128, 128}, 16, TilingHint::Square);
  EXPECT_EQ(e.warpsPerCTA(), (Vec{4, 4}));
}

TEST(TileRoot, NoneBehavesAsSquare) {
  EXPECT_EQ(tileRoot(Vec{256, 256}, 32, TilingHint::None),
            tileRoot(Vec{256, 256}, 32, TilingHint::Square));
}

TEST(TileRoot, NonDivisibleIsError) {
  EXPECT_THROW(tileRoot(Vec{100, 64}, 8, TilingHint::Horizontal), LayoutError);
  EXPECT_THROW(tileRoot(Vec{64, 64}, 0, TilingHint::Square), LayoutError);
}

TEST(TileRoot, SquareMinimizesAspectRatio) {
  // Brute force over all factorizations.
  for (int64_t warps : {1, 2, 4, 8, 16, 32, 64})
    for (Vec shape :
         {Vec{256, 256}, Vec{128, 64}, Vec{64, 256}, Vec{512, 64}}) {
      double best = 1e30;
      int64_t bestW0 = 0;
      for (int64_t w0 = 1; w0 <= warps; ++w0) {
        if (warps % w0 || shape[0] % w0 || shape[1] % (warps / w0))
          continue;
        double a = double(shape[0] / w0), b = double(shape[1] / (warps / w0));
        double ratio = std::max(a, b) / std::min(a, b);
        if (ratio < best - 1e-12 ||
            (std::abs(ratio - best) < 1e-12 && w0 > bestW0)) {
          best = ratio;
          bestW0 = w0;
        }
      }
      LayoutEncoding e = tileRoot(shape, warps, TilingHint::Square);
      EXPECT_EQ(e.warpsPerCTA()[0], bestW0)
          << shape[0] << "x" << shape[1] << " / " << warps;
    }
}

TEST(Encoding, InvariantsRejected) {
  EXPECT_THROW(LayoutEncoding::blocked({32}, {8, 4}, {1, 0}), LayoutError);
  EXPECT_THROW(LayoutEncoding::blocked({32, 0}, {8, 4}, {1, 0}), LayoutError);
  EXPECT_THROW(LayoutEncoding::blocked({32, 64}, {8, 4}, {1, 1}), LayoutError);
  EXPECT_THROW(LayoutEncoding::dotOperand(2, gemmC()), LayoutError);
  EXPECT_THROW(LayoutEncoding::slice(2, gemmC()), LayoutError);
}

TEST(Encoding, DotOperandOverSliceRejected) {
  LayoutEncoding s = LayoutEncoding::slice(1, gemmC());
  EXPECT_THROW(LayoutEncoding::dotOperand(0, s), LayoutError);
}

TEST(Encoding, StructuralEquality) {
  EXPECT_EQ(LayoutEncoding::dotOperand(0, gemmC()),
            LayoutEncoding::dotOperand(0, gemmC()));
  EXPECT_FALSE(LayoutEncoding::dotOperand(0, gemmC()) ==
               LayoutEncoding::dotOperand(1, gemmC()));
  EXPECT_FALSE(gemmC() == LayoutEncoding::blocked({32, 64}, {8, 4}, {0, 1}));
}

TEST(EquivalentBlocked, DotOperandA) {
  LayoutEncoding e =
      equivalentBlocked(LayoutEncoding::dotOperand(0, gemmC()), Vec{256, 32});
  EXPECT_EQ(e.sizePerWarp(), (Vec{32, 32}));
  EXPECT_EQ(e.warpsPerCTA(), (Vec{8, 4}));
}

TEST(EquivalentBlocked, DotOperandB) {
  LayoutEncoding e =
      equivalentBlocked(LayoutEncoding::dotOperand(1, gemmC()), Vec{32, 256});
  EXPECT_EQ(e.sizePerWarp(), (Vec{32, 64}));
  EXPECT_EQ(e.warpsPerCTA(), (Vec{8, 4}));
}

TEST(EquivalentBlocked, SliceOfDotOperand) {
  LayoutEncoding root = LayoutEncoding::blocked({16, 64}, {8, 1}, {1, 0});
  LayoutEncoding dot0 = LayoutEncoding::dotOperand(0, root);
  LayoutEncoding e =
      equivalentBlocked(LayoutEncoding::slice(1, dot0), Vec{128});
  EXPECT_EQ(e.sizePerWarp(), (Vec{16}));
  EXPECT_EQ(e.warpsPerCTA(), (Vec{8}));
}

TEST(EquivalentBlocked, NestedDotOperand) {
  // Q of FA-2: #dot00 on a 128x64 tensor; K: #dot10 on 64x64.
  LayoutEncoding root = LayoutEncoding::blocked({16, 64}, {8, 1}, {1, 0});
  LayoutEncoding dot0 = LayoutEncoding::dotOperand(0, root);
  LayoutEncoding q =
      equivalentBlocked(LayoutEncoding::dotOperand(0, dot0), Vec{128, 64});
  EXPECT_EQ(q.sizePerWarp(), (Vec{16, 64}));
  LayoutEncoding k =
      equivalentBlocked(LayoutEncoding::dotOperand(1, dot0), Vec{64, 64});
  EXPECT_EQ(k.sizePerWarp(), (Vec{64, 64}));
  EXPECT_EQ(k.warpsPerCTA(), (Vec{8, 1}));
}

TEST(EquivalentBlocked, IdempotentOnBlocked) {
  EXPECT_EQ(equivalentBlocked(gemmC(), Vec{256, 256}), gemmC());
  LayoutEncoding once =
      equivalentBlocked(LayoutEncoding::dotOperand(0, gemmC()), Vec{256, 32});
  EXPECT_EQ(equivalentBlocked(once, Vec{256, 32}), once);
}

TEST(EquivalentBlocked, RankMismatch) {
  EXPECT_THROW(equivalentBlocked(gemmC(), Vec{256}), LayoutError);
}

TEST(EquivalentBlocked, CoverageAtLeastShape) {
  LayoutEncoding root = gemmC();
  struct Case {
    LayoutEncoding enc;
    Vec shape;
    bool replicated;
  };
  std::vector<Case> cases = {
      {root, {256, 256}, false},
      {LayoutEncoding::dotOperand(0, root), {256, 32}, true},
      {LayoutEncoding::dotOperand(1, root), {32, 256}, true},
      {LayoutEncoding::slice(1, root), {256}, false},
  };
  for (const Case &c : cases) {
    LayoutEncoding b = equivalentBlocked(c.enc, c.shape);
    int64_t covered = 1, numel = 1;
    for (size_t d = 0; d < c.shape.size(); ++d) {
      covered *= b.sizePerWarp()[d] * b.warpsPerCTA()[d];
      numel *= c.shape[d];
    }
    EXPECT_GE(covered, numel);
    EXPECT_EQ(covered > numel, c.replicated) << c.enc.str();
  }
}

TEST(WarpCoords, Examples) {
  EXPECT_EQ(warpCoords(5, Vec{8, 4}, Vec{1, 0}), (Vec{1, 1}));
  EXPECT_EQ(warpCoords(0, Vec{8, 4}, Vec{1, 0}), (Vec{0, 0}));
  EXPECT_EQ(warpCoords(4, Vec{8, 1}, Vec{1, 0}), (Vec{4, 0}));
  EXPECT_EQ(warpCoords(5, Vec{8, 4}, Vec{0, 1}), (Vec{5, 0}));
  EXPECT_THROW(warpCoords(32, Vec{8, 4}, Vec{1, 0}), LayoutError);
  EXPECT_THROW(warpCoords(-1, Vec{8, 4}, Vec{1, 0}), LayoutError);
}

TEST(WarpCoords, RowZeroIsWarpsZeroToThree) {
  for (int64_t w = 0; w < 32; ++w)
    EXPECT_EQ(warpCoords(w, Vec{8, 4}, Vec{1, 0})[0] == 0, w < 4);
}

TEST(WarpCoords, Bijection) {
  for (Vec grid : {Vec{8, 4}, Vec{4, 8}, Vec{1, 16}, Vec{16, 1}, Vec{2, 3}})
    for (Vec order : {Vec{1, 0}, Vec{0, 1}}) {
      std::set<Vec> seen;
      int64_t n = grid[0] * grid[1];
      for (int64_t w = 0; w < n; ++w) {
        Vec c = warpCoords(w, grid, order);
        ASSERT_LT(c[0], grid[0]);
        ASSERT_LT(c[1], grid[1]);
        seen.insert(c);
      }
      EXPECT_EQ(int64_t(seen.size()), n);
    }
}

TEST(WarpBlockOrigin, ReplicationPattern) {
  LayoutEncoding a = LayoutEncoding::dotOperand(0, gemmC());
  LayoutEncoding b = LayoutEncoding::dotOperand(1, gemmC());
  for (int64_t w = 0; w < 32; ++w) {
    Vec oa = warpBlockOrigin(a, Vec{256, 32}, w);
    Vec ob = warpBlockOrigin(b, Vec{32, 256}, w);
    EXPECT_EQ(oa, (Vec{w / 4 * 32, 0}));
    EXPECT_EQ(ob, (Vec{0, w % 4 * 64}));
    EXPECT_EQ(warpBlockOrigin(gemmC(), Vec{256, 256}, w),
              (Vec{w / 4 * 32, w % 4 * 64}));
  }
}

TEST(Hints, Names) {
  for (TilingHint h :
       {TilingHint::Horizontal, TilingHint::Vertical, TilingHint::Square})
    EXPECT_EQ(parseHintName(hintName(h)), h);
  EXPECT_FALSE(parseHintName("diagonal"));
}

} // namespace
