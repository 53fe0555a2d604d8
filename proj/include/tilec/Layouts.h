//===- Layouts.h - Layout encodings -----------------------------*- C++ -*-===//
//
// Part of the tilec project, under the Apache License v2.0 with LLVM
// Exceptions. See https://llvm.org/LICENSE.txt for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#ifndef TILEC_LAYOUTS_H
#define TILEC_LAYOUTS_H

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tilec {

/// Partition strategy requested for the root dot of a kernel.
enum class TilingHint : uint8_t { None, Horizontal, Vertical, Square };

std::string_view hintName(TilingHint hint);
std::optional<TilingHint> parseHintName(std::string_view text);

class LayoutError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Describes how a workgroup-level tensor is partitioned between warps.
///
/// A Blocked encoding carries the per-warp block shape and the warp grid
/// directly. DotOperand and Slice encodings are derived from a parent and only
/// acquire concrete sizes once attached to a tensor shape (see
/// equivalentBlocked).
class LayoutEncoding {
public:
  enum class Kind : uint8_t { Blocked, DotOperand, Slice };

  static LayoutEncoding blocked(std::vector<int64_t> sizePerWarp,
                                std::vector<int64_t> warpsPerCTA,
                                std::vector<int64_t> order);
  static LayoutEncoding dotOperand(int64_t opIdx, const LayoutEncoding &parent);
  static LayoutEncoding slice(int64_t dim, const LayoutEncoding &parent);

  Kind kind() const { return kind_; }
  bool isBlocked() const { return kind_ == Kind::Blocked; }
  bool isDotOperand() const { return kind_ == Kind::DotOperand; }
  bool isSlice() const { return kind_ == Kind::Slice; }

  // Blocked only.
  const std::vector<int64_t> &sizePerWarp() const { return sizePerWarp_; }
  const std::vector<int64_t> &warpsPerCTA() const { return warpsPerCTA_; }
  const std::vector<int64_t> &order() const { return order_; }

  int64_t opIdx() const { return index_; } // DotOperand only.
  int64_t dim() const { return index_; }   // Slice only.
  const LayoutEncoding &parent() const { return *parent_; }

  size_t rank() const;

  /// Inline textual form with parents expanded, for diagnostics.
  std::string str() const;

  friend bool operator==(const LayoutEncoding &lhs, const LayoutEncoding &rhs);

private:
  LayoutEncoding() = default;

  Kind kind_ = Kind::Blocked;
  std::vector<int64_t> sizePerWarp_;
  std::vector<int64_t> warpsPerCTA_;
  std::vector<int64_t> order_;
  int64_t index_ = 0;
  std::shared_ptr<const LayoutEncoding> parent_;
};

/// Picks the Blocked encoding of a root value from its workgroup shape.
///
/// Horizontal puts every warp on dim 0, vertical on dim 1. Square picks the
/// factorization w0 * w1 == numWarps whose per-warp block is closest to
/// square, preferring more warps along dim 0 on ties; None behaves as Square.
/// Throws LayoutError when the shape cannot be divided evenly.
LayoutEncoding tileRoot(std::span<const int64_t> workgroupShape,
                        int64_t numWarps, TilingHint hint);

/// Resolves any encoding attached to a tensor of `shape` to the Blocked
/// encoding that describes the same warp partition.
LayoutEncoding equivalentBlocked(const LayoutEncoding &encoding,
                                 std::span<const int64_t> shape);

/// Linear warp id -> per-dimension coordinates; order[0] varies fastest.
std::vector<int64_t> warpCoords(int64_t warpId,
                                std::span<const int64_t> warpsPerCTA,
                                std::span<const int64_t> order);

/// Shape of the block one warp owns. Block sizes larger than the tensor are
/// clamped to the tensor extent (the warp then holds the whole dimension).
std::vector<int64_t> perWarpShape(const LayoutEncoding &encoding,
                                  std::span<const int64_t> shape);

/// Element offsets of the block owned by `warpId`. Slices use the warp grid
/// of their parent. When more warps than blocks exist along a dimension the
/// coordinate wraps, so several warps share one block.
std::vector<int64_t> warpBlockOrigin(const LayoutEncoding &encoding,
                                     std::span<const int64_t> shape,
                                     int64_t warpId);

/// Two encodings are interchangeable on `shape` when they produce the same
/// per-warp partition.
bool compatible(const LayoutEncoding &lhs, const LayoutEncoding &rhs,
                std::span<const int64_t> shape);

} // namespace tilec

#endif // TILEC_LAYOUTS_H
