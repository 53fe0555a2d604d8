//===- Layouts.cpp - Layout encodings -------------------------------------===//
//
// Part of the tilec project, under the Apache License v2.0 with LLVM
// Exceptions. See https://llvm.org/LICENSE.txt for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "tilec/Layouts.h"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace tilec {

namespace {

std::string listStr(const std::vector<int64_t> &values) {
  std::ostringstream os;
  os << '[';
  for (size_t i = 0; i < values.size(); ++i)
    os << (i ? ", " : "") << values[i];
  os << ']';
  return os.str();
}

bool isPermutation(const std::vector<int64_t> &order) {
  std::vector<int64_t> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  for (size_t i = 0; i < sorted.size(); ++i)
    if (sorted[i] != static_cast<int64_t>(i))
      return false;
  return true;
}

} // namespace

std::string_view hintName(TilingHint hint) {
  switch (hint) {
  case TilingHint::None:
    return "none";
  case TilingHint::Horizontal:
    return "horizontal";
  case TilingHint::Vertical:
    return "vertical";
  case TilingHint::Square:
    return "square";
  }
  return "none";
}

std::optional<TilingHint> parseHintName(std::string_view text) {
  for (TilingHint hint : {TilingHint::None, TilingHint::Horizontal,
                          TilingHint::Vertical, TilingHint::Square})
    if (hintName(hint) == text)
      return hint;
  return std::nullopt;
}

LayoutEncoding LayoutEncoding::blocked(std::vector<int64_t> sizePerWarp,
                                       std::vector<int64_t> warpsPerCTA,
                                       std::vector<int64_t> order) {
  if (sizePerWarp.size() != warpsPerCTA.size() ||
      sizePerWarp.size() != order.size())
    throw LayoutError("blocked encoding: sizePerWarp, warpsPerCTA and order "
                      "must have the same length");
  if (sizePerWarp.empty())
    throw LayoutError("blocked encoding: rank must be at least 1");
  for (size_t i = 0; i < sizePerWarp.size(); ++i)
    if (sizePerWarp[i] < 1 || warpsPerCTA[i] < 1)
      throw LayoutError("blocked encoding: sizes must be positive");
  if (!isPermutation(order))
    throw LayoutError("blocked encoding: order " + listStr(order) +
                      " is not a permutation");
  LayoutEncoding enc;
  enc.kind_ = Kind::Blocked;
  enc.sizePerWarp_ = std::move(sizePerWarp);
  enc.warpsPerCTA_ = std::move(warpsPerCTA);
  enc.order_ = std::move(order);
  return enc;
}

LayoutEncoding LayoutEncoding::dotOperand(int64_t opIdx,
                                          const LayoutEncoding &parent) {
  if (opIdx != 0 && opIdx != 1)
    throw LayoutError("dot_op encoding: opIdx must be 0 or 1");
  if (parent.isSlice())
    throw LayoutError("dot_op encoding: a slice parent is not supported");
  if (parent.rank() != 2)
    throw LayoutError("dot_op encoding: parent must have rank 2");
  LayoutEncoding enc;
  enc.kind_ = Kind::DotOperand;
  enc.index_ = opIdx;
  enc.parent_ = std::make_shared<const LayoutEncoding>(parent);
  return enc;
}

LayoutEncoding LayoutEncoding::slice(int64_t dim,
                                     const LayoutEncoding &parent) {
  if (parent.rank() < 2)
    throw LayoutError("slice encoding: parent must have rank >= 2");
  if (dim < 0 || dim >= static_cast<int64_t>(parent.rank()))
    throw LayoutError("slice encoding: dim " + std::to_string(dim) +
                      " out of range for parent rank " +
                      std::to_string(parent.rank()));
  LayoutEncoding enc;
  enc.kind_ = Kind::Slice;
  enc.index_ = dim;
  enc.parent_ = std::make_shared<const LayoutEncoding>(parent);
  return enc;
}

size_t LayoutEncoding::rank() const {
  switch (kind_) {
  case Kind::Blocked:
    return sizePerWarp_.size();
  case Kind::DotOperand:
    return 2;
  case Kind::Slice:
    return parent_->rank() - 1;
  }
  return 0;
}

std::string LayoutEncoding::str() const {
  switch (kind_) {
  case Kind::Blocked:
    return "#triton_gpu.blocked<{sizePerWarp = " + listStr(sizePerWarp_) +
           ", warpsPerCTA = " + listStr(warpsPerCTA_) +
           ", order = " + listStr(order_) + "}>";
  case Kind::DotOperand:
    return "#triton_gpu.dot_op<{opIdx = " + std::to_string(index_) +
           ", parent = " + parent_->str() + "}>";
  case Kind::Slice:
    return "#triton_gpu.slice<{dim = " + std::to_string(index_) +
           ", parent = " + parent_->str() + "}>";
  }
  return {};
}

bool operator==(const LayoutEncoding &lhs, const LayoutEncoding &rhs) {
  if (lhs.kind_ != rhs.kind_)
    return false;
  if (lhs.kind_ == LayoutEncoding::Kind::Blocked)
    return lhs.sizePerWarp_ == rhs.sizePerWarp_ &&
           lhs.warpsPerCTA_ == rhs.warpsPerCTA_ && lhs.order_ == rhs.order_;
  return lhs.index_ == rhs.index_ && *lhs.parent_ == *rhs.parent_;
}

LayoutEncoding tileRoot(std::span<const int64_t> workgroupShape,
                        int64_t numWarps, TilingHint hint) {
  if (numWarps < 1)
    throw LayoutError("numWarps must be at least 1");
  size_t rank = workgroupShape.size();
  if (rank == 0 || rank > 2)
    throw LayoutError("root tiling supports rank 1 or 2 only");

  auto shapeStr = [&] {
    return listStr({workgroupShape.begin(), workgroupShape.end()});
  };

  if (rank == 1) {
    if (workgroupShape[0] % numWarps != 0)
      throw LayoutError("workgroup shape " + shapeStr() +
                        " is not divisible by " + std::to_string(numWarps) +
                        " warps");
    return LayoutEncoding::blocked({workgroupShape[0] / numWarps}, {numWarps},
                                   {0});
  }

  int64_t rows = workgroupShape[0];
  int64_t cols = workgroupShape[1];
  std::vector<int64_t> warps;
  switch (hint) {
  case TilingHint::Horizontal:
    warps = {numWarps, 1};
    break;
  case TilingHint::Vertical:
    warps = {1, numWarps};
    break;
  case TilingHint::None:
  case TilingHint::Square: {
    // Aspect ratio max/min compared by cross-multiplication; iterating w0
    // downwards and keeping strict improvements favours larger w0 on ties.
    int64_t bestMax = 0, bestMin = 0;
    for (int64_t w0 = numWarps; w0 >= 1; --w0) {
      if (numWarps % w0 != 0)
        continue;
      int64_t w1 = numWarps / w0;
      if (rows % w0 != 0 || cols % w1 != 0)
        continue;
      int64_t s0 = rows / w0, s1 = cols / w1;
      int64_t hi = std::max(s0, s1), lo = std::min(s0, s1);
      if (warps.empty() || hi * bestMin < bestMax * lo) {
        warps = {w0, w1};
        bestMax = hi;
        bestMin = lo;
      }
    }
    if (warps.empty())
      throw LayoutError("no square partition of " + shapeStr() + " over " +
                        std::to_string(numWarps) + " warps divides evenly");
    break;
  }
  }
  if (rows % warps[0] != 0 || cols % warps[1] != 0)
    throw LayoutError("workgroup shape " + shapeStr() +
                      " is not divisible by warpsPerCTA " + listStr(warps));
  return LayoutEncoding::blocked({rows / warps[0], cols / warps[1]}, warps,
                                 {1, 0});
}

LayoutEncoding equivalentBlocked(const LayoutEncoding &encoding,
                                 std::span<const int64_t> shape) {
  if (encoding.rank() != shape.size())
    throw LayoutError("encoding of rank " + std::to_string(encoding.rank()) +
                      " attached to a shape of rank " +
                      std::to_string(shape.size()));
  switch (encoding.kind()) {
  case LayoutEncoding::Kind::Blocked:
    return encoding;
  case LayoutEncoding::Kind::DotOperand: {
    LayoutEncoding parent = equivalentBlocked(encoding.parent(), shape);
    std::vector<int64_t> size = parent.sizePerWarp();
    if (encoding.opIdx() == 0)
      size = {size[0], shape[1]};
    else
      size = {shape[0], size[1]};
    return LayoutEncoding::blocked(size, parent.warpsPerCTA(), parent.order());
  }
  case LayoutEncoding::Kind::Slice: {
    auto dim = static_cast<size_t>(encoding.dim());
    std::vector<int64_t> parentShape(shape.begin(), shape.end());
    parentShape.insert(parentShape.begin() + dim, 1);
    LayoutEncoding parent = equivalentBlocked(encoding.parent(), parentShape);
    std::vector<int64_t> size = parent.sizePerWarp();
    std::vector<int64_t> warps = parent.warpsPerCTA();
    size.erase(size.begin() + dim);
    warps.erase(warps.begin() + dim);
    std::vector<int64_t> order;
    for (int64_t d : parent.order()) {
      if (d == static_cast<int64_t>(dim))
        continue;
      order.push_back(d > static_cast<int64_t>(dim) ? d - 1 : d);
    }
    return LayoutEncoding::blocked(size, warps, order);
  }
  }
  return encoding;
}

std::vector<int64_t> warpCoords(int64_t warpId,
                                std::span<const int64_t> warpsPerCTA,
                                std::span<const int64_t> order) {
  int64_t total = std::accumulate(warpsPerCTA.begin(), warpsPerCTA.end(),
                                  int64_t{1}, std::multiplies<>());
  if (warpId < 0 || warpId >= total)
    throw LayoutError("warp id " + std::to_string(warpId) +
                      " out of range for " + std::to_string(total) + " warps");
  if (order.size() != warpsPerCTA.size())
    throw LayoutError("warp grid order has the wrong rank");
  std::vector<int64_t> coords(warpsPerCTA.size(), 0);
  int64_t rest = warpId;
  for (int64_t dim : order) {
    coords[dim] = rest % warpsPerCTA[dim];
    rest /= warpsPerCTA[dim];
  }
  return coords;
}

std::vector<int64_t> perWarpShape(const LayoutEncoding &encoding,
                                  std::span<const int64_t> shape) {
  LayoutEncoding blocked = equivalentBlocked(encoding, shape);
  std::vector<int64_t> result(shape.size());
  for (size_t d = 0; d < shape.size(); ++d) {
    int64_t size = std::min(blocked.sizePerWarp()[d], shape[d]);
    if (shape[d] % size != 0)
      throw LayoutError("dimension " + std::to_string(d) + " of extent " +
                        std::to_string(shape[d]) +
                        " is not divisible by sizePerWarp " +
                        std::to_string(size));
    if (size * blocked.warpsPerCTA()[d] < shape[d])
      throw LayoutError("encoding " + encoding.str() + " covers only " +
                        std::to_string(size * blocked.warpsPerCTA()[d]) +
                        " of " + std::to_string(shape[d]) +
                        " elements along dimension " + std::to_string(d));
    result[d] = size;
  }
  return result;
}

std::vector<int64_t> warpBlockOrigin(const LayoutEncoding &encoding,
                                     std::span<const int64_t> shape,
                                     int64_t warpId) {
  if (encoding.isSlice()) {
    auto dim = static_cast<size_t>(encoding.dim());
    std::vector<int64_t> parentShape(shape.begin(), shape.end());
    parentShape.insert(parentShape.begin() + dim, 1);
    std::vector<int64_t> origin =
        warpBlockOrigin(encoding.parent(), parentShape, warpId);
    origin.erase(origin.begin() + dim);
    return origin;
  }
  LayoutEncoding blocked = equivalentBlocked(encoding, shape);
  std::vector<int64_t> size = perWarpShape(encoding, shape);
  std::vector<int64_t> coords =
      warpCoords(warpId, blocked.warpsPerCTA(), blocked.order());
  std::vector<int64_t> origin(shape.size());
  for (size_t d = 0; d < shape.size(); ++d)
    origin[d] = (coords[d] % (shape[d] / size[d])) * size[d];
  return origin;
}

bool compatible(const LayoutEncoding &lhs, const LayoutEncoding &rhs,
                std::span<const int64_t> shape) {
  if (lhs == rhs)
    return true;
  try {
    LayoutEncoding a = equivalentBlocked(lhs, shape);
    LayoutEncoding b = equivalentBlocked(rhs, shape);
    return perWarpShape(a, shape) == perWarpShape(b, shape) &&
           a.warpsPerCTA() == b.warpsPerCTA() && a.order() == b.order();
  } catch (const LayoutError &) {
    return false;
  }
}

} // namespace tilec
