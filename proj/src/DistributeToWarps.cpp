//===- DistributeToWarps.cpp - Warp distribution --------------------------===//
//
// Part of the tilec project, under the Apache License v2.0 with LLVM
// Exceptions. See https://llvm.org/LICENSE.txt for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "tilec/Passes.h"

namespace tilec {

namespace {

/// The warp grid an encoding partitions over, restricted to the tensor's
/// dims: how many distinct blocks exist per dim and how large each is.
struct GridInfo {
  std::vector<int64_t> warps;
  std::vector<int64_t> order;
  std::vector<int64_t> blocks;
  std::vector<int64_t> size;
  /// Grid dims the tensor does not have (erased by a slice).
  std::vector<size_t> droppedDims;
};

GridInfo gridFor(const LayoutEncoding &enc, const std::vector<int64_t> &shape) {
  if (enc.isSlice()) {
    std::vector<int64_t> parentShape = shape;
    auto dim = static_cast<size_t>(enc.dim());
    parentShape.insert(parentShape.begin() + dim, 1);
    GridInfo info = gridFor(enc.parent(), parentShape);
    info.droppedDims.push_back(dim);
    return info;
  }
  LayoutEncoding blocked = equivalentBlocked(enc, shape);
  std::vector<int64_t> size = perWarpShape(enc, shape);
  GridInfo info;
  info.warps = blocked.warpsPerCTA();
  info.order = blocked.order();
  info.size = size;
  for (size_t d = 0; d < shape.size(); ++d)
    info.blocks.push_back(shape[d] / size[d]);
  return info;
}

class Distributor {
public:
  explicit Distributor(const KernelFn &fn) : src(fn), out(fn) {}

  KernelFn run() {
    out.warpLevel = true;
    retype();
    checkReduces(src.body);
    if (!diags.empty())
      throw CompileError(diags);

    Region entry;
    entryRegion = &entry;
    OpBuilder b(out, entry);
    warpId =
        b.create1(OpKind::WarpId, {}, scalarType(ElemType::I32), {}, "warp_id");
    rewriteRegion(out.body);
    entry.ops.insert(entry.ops.end(),
                     std::make_move_iterator(out.body.ops.begin()),
                     std::make_move_iterator(out.body.ops.end()));
    out.body.ops = std::move(entry.ops);
    if (!diags.empty())
      throw CompileError(diags);
    return std::move(out);
  }

private:
  std::string ref(Value v) const {
    const std::string &n = src.nameOf(v);
    return "%" + (n.empty() ? std::to_string(v.id) : n);
  }

  void retype() {
    for (uint32_t id = 0; id < src.values.size(); ++id) {
      const Type &type = src.values[id].type;
      if (!needsLayout(type))
        continue;
      const TensorType *shaped = shapedPart(type);
      if (!shaped->encoding) {
        diags.push_back("@" + src.name + ": " + ref(Value{id}) +
                        " has no layout encoding; run " + kAssignLayouts +
                        " first");
        continue;
      }
      try {
        std::vector<int64_t> per =
            perWarpShape(*shaped->encoding, shaped->shape);
        shapedPart(out.values[id].type)->shape = per;
      } catch (const LayoutError &err) {
        diags.push_back("@" + src.name + ": cannot distribute " +
                        ref(Value{id}) + " of shape " +
                        shapeStr(shaped->shape) + ": " + err.what());
      }
    }
  }

  void checkReduces(const Region &region) {
    walk(region, [&](const Op &op) {
      if (op.kind != OpKind::Reduce || op.boolAttr("cross_warp"))
        return;
      const auto &whole = asTensor(src.type(op.operands[0])).shape;
      const auto &per = asTensor(out.type(op.operands[0])).shape;
      int64_t axis = op.intAttr("axis");
      if (per[axis] != whole[axis])
        diags.push_back("@" + src.name + ": tt.reduce over axis " +
                        std::to_string(axis) + " of " + ref(op.operands[0]) +
                        " is split across warps (" + std::to_string(per[axis]) +
                        " of " + std::to_string(whole[axis]) + " per warp)");
    });
  }

  Value constant(int64_t value) {
    auto it = constants.find(value);
    if (it != constants.end())
      return it->second;
    OpBuilder b(out, *entryRegion);
    Value v = b.constantInt(value, "c" + std::to_string(value) + "_i32");
    constants.emplace(value, v);
    return v;
  }

  /// Per-dim offset deltas of this warp's block; invalid entries mean zero.
  std::vector<Value> deltas(const LayoutEncoding &enc,
                            const std::vector<int64_t> &shape) {
    std::string key = enc.str() + "@" + shapeStr(shape);
    auto it = deltaCache.find(key);
    if (it != deltaCache.end())
      return it->second;

    GridInfo info = gridFor(enc, shape);
    size_t rank = info.warps.size();
    OpBuilder b(out, *entryRegion);
    std::vector<Value> coords(rank);
    Value rest = warpId;
    for (size_t i = 0; i < info.order.size(); ++i) {
      auto dim = static_cast<size_t>(info.order[i]);
      int64_t w = info.warps[dim];
      if (w == 1)
        continue;
      coords[dim] = b.create1(OpKind::Rem, {rest, constant(w)},
                              scalarType(ElemType::I32), {}, "warp_coord");
      if (i + 1 < info.order.size())
        rest = b.create1(OpKind::Div, {rest, constant(w)},
                         scalarType(ElemType::I32), {}, "warp_rest");
    }
    std::vector<Value> full(rank);
    for (size_t d = 0; d < rank; ++d) {
      if (!coords[d].valid() || info.blocks[d] == 1)
        continue;
      Value c = coords[d];
      if (info.blocks[d] < info.warps[d])
        c = b.create1(OpKind::Rem, {c, constant(info.blocks[d])},
                      scalarType(ElemType::I32), {}, "warp_block");
      full[d] = b.create1(OpKind::Mul, {c, constant(info.size[d])},
                          scalarType(ElemType::I32), {}, "warp_offset");
    }
    std::vector<Value> result;
    for (size_t d = 0; d < rank; ++d) {
      bool dropped = false;
      for (size_t x : info.droppedDims)
        dropped |= x == d;
      if (!dropped)
        result.push_back(full[d]);
    }
    deltaCache.emplace(key, result);
    return result;
  }

  void rewriteRegion(Region &region) {
    std::vector<Op> ops;
    ops.reserve(region.ops.size());
    for (Op &op : region.ops) {
      for (Region &nested : op.regions)
        rewriteRegion(nested);
      if (op.kind == OpKind::MakeTensorPtr) {
        const TensorType &block = *asPointer(src.type(op.results[0])).block;
        if (block.encoding && block.numel() > 1) {
          std::vector<Value> d = deltas(*block.encoding, block.shape);
          size_t rank = block.shape.size();
          for (size_t i = 0; i < rank; ++i) {
            if (!d[i].valid())
              continue;
            Value offset = op.operands[1 + 2 * rank + i];
            Value sum = out.newValue(scalarType(ElemType::I32), "warp_off");
            Op add;
            add.kind = OpKind::Add;
            add.operands = {offset, d[i]};
            add.results = {sum};
            ops.push_back(std::move(add));
            op.operands[1 + 2 * rank + i] = sum;
          }
        }
      }
      ops.push_back(std::move(op));
    }
    region.ops = std::move(ops);
  }

  const KernelFn &src;
  KernelFn out;
  Region *entryRegion = nullptr;
  Value warpId;
  std::map<int64_t, Value> constants;
  std::map<std::string, std::vector<Value>> deltaCache;
  std::vector<std::string> diags;
};

} // namespace

KernelFn distributeToWarps(const KernelFn &fn) {
  if (fn.warpLevel)
    return fn;
  return Distributor(fn).run();
}

} // namespace tilec
