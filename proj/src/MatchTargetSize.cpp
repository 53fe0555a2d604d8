//===- MatchTargetSize.cpp - Intrinsic-size splitting ---------------------===//
//
// Part of the tilec project, under the Apache License v2.0 with LLVM
// Exceptions. See https://llvm.org/LICENSE.txt for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "tilec/Passes.h"

#include <algorithm>
#include <set>

namespace tilec {

namespace {

/// A warp-level value re-expressed as a row-major grid of equally shaped
/// intrinsic-level values. Scalars and pointers are a single part.
struct Pieces {
  uint32_t key = 0;
  Type whole;
  std::vector<int64_t> shape;
  std::vector<int64_t> split;
  std::vector<Value> parts;

  std::vector<int64_t> grid() const {
    std::vector<int64_t> g(shape.size());
    for (size_t d = 0; d < shape.size(); ++d)
      g[d] = shape[d] / split[d];
    return g;
  }
};

int64_t product(const std::vector<int64_t> &v) {
  int64_t n = 1;
  for (int64_t x : v)
    n *= x;
  return n;
}

std::vector<int64_t> unravel(int64_t index, const std::vector<int64_t> &grid) {
  std::vector<int64_t> coord(grid.size());
  for (size_t d = grid.size(); d-- > 0;) {
    coord[d] = index % grid[d];
    index /= grid[d];
  }
  return coord;
}

int64_t ravel(const std::vector<int64_t> &coord,
              const std::vector<int64_t> &grid) {
  int64_t index = 0;
  for (size_t d = 0; d < grid.size(); ++d)
    index = index * grid[d] + coord[d];
  return index;
}

std::vector<int64_t> mulv(const std::vector<int64_t> &a,
                          const std::vector<int64_t> &b) {
  std::vector<int64_t> r(a.size());
  for (size_t d = 0; d < a.size(); ++d)
    r[d] = a[d] * b[d];
  return r;
}

std::vector<int64_t> eraseAt(std::vector<int64_t> v, int64_t i) {
  v.erase(v.begin() + i);
  return v;
}

Type withShape(const Type &type, std::vector<int64_t> shape) {
  Type t = type;
  shapedPart(t)->shape = std::move(shape);
  return t;
}

bool isSplittable(const Type &type) {
  const auto *t = std::get_if<TensorType>(&type);
  return t && !t->isScalar();
}

class Matcher {
public:
  Matcher(const KernelFn &fn, const TargetConfig &target)
      : src(fn), target(target), leader(fn.values.size()),
        limits(fn.values.size()), splits(fn.values.size()),
        mapped(fn.values.size()), nextKey(fn.values.size()) {
    for (uint32_t i = 0; i < leader.size(); ++i)
      leader[i] = i;
  }

  KernelFn run() {
    buildClasses();
    chooseSplits();
    if (!diags.empty())
      throw CompileError(diags);

    out.name = src.name;
    out.isPublic = src.isPublic;
    out.numWarps = src.numWarps;
    out.warpLevel = true;
    OpBuilder builder(out);
    b = &builder;
    for (Value arg : src.body.args)
      mapWhole(arg, builder.addArg(src.type(arg), src.nameOf(arg)));
    scopes.emplace_back();
    emitRegion(src.body);
    scopes.pop_back();
    if (!diags.empty())
      throw CompileError(diags);
    return std::move(out);
  }

private:
  // Split classes ------------------------------------------------------===//

  uint32_t find(uint32_t x) {
    while (leader[x] != x) {
      leader[x] = leader[leader[x]];
      x = leader[x];
    }
    return x;
  }

  void unite(Value a, Value c) {
    if (!isSplittable(src.type(a)) || !isSplittable(src.type(c)))
      return;
    uint32_t x = find(a.id), y = find(c.id);
    if (x != y)
      leader[std::max(x, y)] = std::min(x, y);
  }

  void limit(Value v, std::vector<int64_t> bound) {
    if (!isSplittable(src.type(v)))
      return;
    auto &l = limits[v.id];
    if (l.empty())
      l = bound;
    else
      for (size_t d = 0; d < l.size(); ++d)
        l[d] = std::min(l[d], bound[d]);
  }

  std::vector<int64_t> loadLimit(size_t rank) const {
    if (rank == 1)
      return {target.maxLoad[1]};
    return {target.maxLoad[0], target.maxLoad[1]};
  }

  void buildClasses() {
    std::map<std::string, Value> byEncoding;
    for (uint32_t id = 0; id < src.values.size(); ++id) {
      const Type &type = src.values[id].type;
      if (!isSplittable(type) || !asTensor(type).encoding)
        continue;
      std::string key =
          asTensor(type).encoding->str() + "@" + shapeStr(asTensor(type).shape);
      auto [it, inserted] = byEncoding.emplace(key, Value{id});
      if (!inserted)
        unite(it->second, Value{id});
    }
    walk(src.body, [&](const Op &op) {
      if (isElementwise(op.kind)) {
        for (Value v : op.operands)
          unite(v, op.results[0]);
      } else if (op.kind == OpKind::Dot) {
        unite(op.operands[2], op.results[0]);
        limit(op.results[0], {target.maxDotM, target.maxDotN});
      } else if (op.kind == OpKind::Reduce && op.boolAttr("cross_warp")) {
        unite(op.operands[0], op.results[0]);
      } else if (op.kind == OpKind::Load) {
        const Type &t = src.type(op.results[0]);
        if (isSplittable(t))
          limit(op.results[0], loadLimit(asTensor(t).shape.size()));
      } else if (op.kind == OpKind::Store) {
        const Type &t = src.type(op.operands[1]);
        if (isSplittable(t))
          limit(op.operands[1], loadLimit(asTensor(t).shape.size()));
      } else if (op.kind == OpKind::For) {
        const Region &body = op.regions[0];
        const Op &yield = body.ops.back();
        for (size_t i = 0; i < op.results.size(); ++i) {
          unite(op.operands[3 + i], op.results[i]);
          unite(body.args[1 + i], op.results[i]);
          unite(yield.operands[i], op.results[i]);
        }
      }
    });
  }

  void chooseSplits() {
    std::map<uint32_t, std::vector<int64_t>> classLimit;
    for (uint32_t id = 0; id < src.values.size(); ++id) {
      if (limits[id].empty())
        continue;
      auto &l = classLimit[find(id)];
      if (l.empty())
        l = limits[id];
      else
        for (size_t d = 0; d < l.size(); ++d)
          l[d] = std::min(l[d], limits[id][d]);
    }
    std::set<uint32_t> reported;
    for (uint32_t id = 0; id < src.values.size(); ++id) {
      const Type &type = src.values[id].type;
      if (!isSplittable(type))
        continue;
      const std::vector<int64_t> &shape = asTensor(type).shape;
      std::vector<int64_t> split = shape;
      auto it = classLimit.find(find(id));
      if (it != classLimit.end())
        for (size_t d = 0; d < shape.size(); ++d)
          split[d] = std::min(shape[d], it->second[d]);
      for (size_t d = 0; d < shape.size(); ++d)
        if (shape[d] % split[d] != 0 && reported.insert(find(id)).second)
          diags.push_back("@" + src.name + ": per-warp shape " +
                          shapeStr(shape) + " of " + ref(Value{id}) +
                          " is not divisible by the split shape " +
                          shapeStr(split));
      splits[id] = split;
    }
  }

  std::string ref(Value v) const {
    const std::string &n = src.nameOf(v);
    return "%" + (n.empty() ? std::to_string(v.id) : n);
  }

  // Value mapping -------------------------------------------------------===//

  void mapWhole(Value srcValue, Value part) {
    Pieces p;
    p.key = srcValue.id;
    p.whole = src.type(srcValue);
    if (const TensorType *s = shapedPart(p.whole)) {
      p.shape = s->shape;
      p.split = s->shape;
    }
    p.parts = {part};
    mapped[srcValue.id] = std::move(p);
  }

  const Pieces &pieces(Value v) {
    if (!mapped[v.id])
      throw CompileError({"@" + src.name + ": internal error: " + ref(v) +
                          " used before it was split"});
    return *mapped[v.id];
  }

  Value single(Value v) { return pieces(v).parts.front(); }

  Pieces fresh(const Value srcValue) {
    Pieces p;
    p.key = srcValue.id;
    p.whole = src.type(srcValue);
    p.shape = shapedPart(p.whole)->shape;
    p.split = splits[srcValue.id];
    return p;
  }

  Value emit(OpKind kind, std::vector<Value> operands, Type type,
             AttrMap attrs = {}, std::string name = {}) {
    checkSimt(type);
    return b->create1(kind, std::move(operands), std::move(type),
                      std::move(attrs), std::move(name));
  }

  void emit0(OpKind kind, std::vector<Value> operands, AttrMap attrs = {}) {
    b->create(kind, std::move(operands), {}, std::move(attrs));
  }

  void checkSimt(const Type &type) {
    if (target.style != CodegenStyle::Simt || !isSplittable(type))
      return;
    const TensorType &t = asTensor(type);
    if (t.numel() % target.threadsPerWarp == 0)
      return;
    std::string key = shapeStr(t.shape) + std::string(elemName(t.elem));
    if (simtReported.insert(key).second)
      diags.push_back("@" + src.name + ": SIMT lowering needs " +
                      shapeStr(t.shape) + "x" + std::string(elemName(t.elem)) +
                      " to be divisible by threadsPerWarp " +
                      std::to_string(target.threadsPerWarp));
  }

  using CacheKey =
      std::tuple<uint32_t, std::vector<int64_t>, std::vector<int64_t>>;

  Value *cached(const CacheKey &key) {
    for (auto it = scopes.rbegin(); it != scopes.rend(); ++it) {
      auto found = it->find(key);
      if (found != it->end())
        return &found->second;
    }
    return nullptr;
  }

  /// The sub-block of `p` at `origin` of `shape`, built from extract and
  /// glue as needed.
  Value region(const Pieces &p, const std::vector<int64_t> &origin,
               const std::vector<int64_t> &shape) {
    if (shape == p.shape && p.parts.size() == 1)
      return p.parts.front();
    CacheKey key{p.key, origin, shape};
    if (Value *hit = cached(key))
      return *hit;

    size_t rank = shape.size();
    std::vector<int64_t> lo(rank), hi(rank);
    bool one = true;
    for (size_t d = 0; d < rank; ++d) {
      lo[d] = origin[d] / p.split[d];
      hi[d] = (origin[d] + shape[d] - 1) / p.split[d];
      one &= lo[d] == hi[d];
    }
    std::vector<int64_t> grid = p.grid();
    Value base;
    std::vector<int64_t> baseOrigin, baseShape;
    if (one) {
      base = p.parts[ravel(lo, grid)];
      baseOrigin = mulv(lo, p.split);
      baseShape = p.split;
    } else {
      std::vector<int64_t> sub(rank);
      for (size_t d = 0; d < rank; ++d)
        sub[d] = hi[d] - lo[d] + 1;
      baseOrigin = mulv(lo, p.split);
      baseShape = mulv(sub, p.split);
      CacheKey glueKey{p.key, baseOrigin, baseShape};
      if (Value *hit = cached(glueKey)) {
        base = *hit;
      } else {
        std::vector<Value> parts;
        for (int64_t i = 0; i < product(sub); ++i) {
          std::vector<int64_t> c = unravel(i, sub);
          for (size_t d = 0; d < rank; ++d)
            c[d] += lo[d];
          parts.push_back(p.parts[ravel(c, grid)]);
        }
        if (isPointer(p.whole))
          fail("cannot glue pointer pieces");
        base = emit(OpKind::Glue, parts, withShape(p.whole, baseShape), {},
                    out.nameOf(p.parts.front()));
        scopes.back().emplace(glueKey, base);
      }
    }
    if (baseShape == shape)
      return base;

    std::vector<int64_t> subGrid(rank), local(rank);
    for (size_t d = 0; d < rank; ++d) {
      int64_t off = origin[d] - baseOrigin[d];
      if (baseShape[d] % shape[d] != 0 || off % shape[d] != 0) {
        fail("sub-block " + shapeStr(shape) + " at offset " +
             std::to_string(origin[d]) + " is not aligned to the " +
             shapeStr(baseShape) + " split");
        return base;
      }
      subGrid[d] = baseShape[d] / shape[d];
      local[d] = off / shape[d];
    }
    Value v = emit(OpKind::Extract, {base}, withShape(p.whole, shape),
                   {{"index", ravel(local, subGrid)}}, out.nameOf(base));
    scopes.back().emplace(key, v);
    return v;
  }

  void fail(const std::string &msg) {
    diags.push_back("@" + src.name + ": " + msg);
  }

  template <typename Fn> void forEachPiece(const Pieces &p, Fn &&fn) {
    std::vector<int64_t> grid = p.grid();
    for (int64_t i = 0; i < product(grid); ++i)
      fn(mulv(unravel(i, grid), p.split));
  }

  // Emission ------------------------------------------------------------===//

  void emitRegion(const Region &region) {
    for (const Op &op : region.ops)
      emitOp(op);
  }

  bool isUniformOp(const Op &op) const {
    for (Value v : op.operands)
      if (isSplittable(src.type(v)))
        return false;
    for (Value v : op.results)
      if (isSplittable(src.type(v)))
        return false;
    return op.regions.empty();
  }

  void emitOp(const Op &op) {
    switch (op.kind) {
    case OpKind::For:
      return emitFor(op);
    case OpKind::If:
      return emitIf(op);
    case OpKind::Yield:
      return;
    case OpKind::Extract:
    case OpKind::Glue:
      return fail(std::string(opKindName(op.kind)) +
                  " is not expected before match-target-size");
    case OpKind::Store:
      if (isSplittable(src.type(op.operands[1])))
        return emitStore(op);
      break;
    default:
      break;
    }
    if (isUniformOp(op))
      return cloneUniform(op);

    switch (op.kind) {
    case OpKind::Load:
      return emitPerPiece(op, [&](auto &o, auto &s, const Type &t) {
        Value ptr = region(pieces(op.operands[0]), o, s);
        return emit(OpKind::Load, {ptr}, t, {}, name(op));
      });
    case OpKind::Constant:
      return emitPerPiece(op, [&](auto &, auto &, const Type &t) {
        return emit(OpKind::Constant, {}, t, op.attrs, name(op));
      });
    case OpKind::Splat:
      return emitPerPiece(op, [&](auto &, auto &, const Type &t) {
        return emit(OpKind::Splat, {single(op.operands[0])}, t, {}, name(op));
      });
    case OpKind::Dot:
      return emitDot(op);
    case OpKind::Reduce:
      if (op.boolAttr("cross_warp"))
        return emitPerPiece(op, [&](auto &o, auto &s, const Type &t) {
          Value in = region(pieces(op.operands[0]), o, s);
          return emit(OpKind::Reduce, {in}, t, op.attrs, name(op));
        });
      return emitReduce(op);
    case OpKind::ExpandDims: {
      int64_t axis = op.intAttr("axis");
      return emitPerPiece(op, [&](auto &o, auto &s, const Type &t) {
        Value in =
            region(pieces(op.operands[0]), eraseAt(o, axis), eraseAt(s, axis));
        return emit(OpKind::ExpandDims, {in}, t, op.attrs, name(op));
      });
    }
    case OpKind::Broadcast: {
      const auto &from = asTensor(src.type(op.operands[0])).shape;
      const auto &to = asTensor(src.type(op.results[0])).shape;
      return emitPerPiece(op, [&](auto &o, auto &s, const Type &t) {
        std::vector<int64_t> so = o, ss = s;
        for (size_t d = 0; d < from.size(); ++d)
          if (from[d] == 1 && to[d] > 1) {
            so[d] = 0;
            ss[d] = 1;
          }
        Value in = region(pieces(op.operands[0]), so, ss);
        if (ss == s)
          return in;
        return emit(OpKind::Broadcast, {in}, t, {}, name(op));
      });
    }
    default:
      if (isElementwise(op.kind))
        return emitPerPiece(op, [&](auto &o, auto &s, const Type &t) {
          std::vector<Value> ins;
          for (Value v : op.operands)
            ins.push_back(region(pieces(v), o, s));
          return emit(op.kind, ins, t, op.attrs, name(op));
        });
      return fail("cannot split " + std::string(opKindName(op.kind)));
    }
  }

  std::string name(const Op &op) const {
    return op.results.empty() ? "" : src.nameOf(op.results[0]);
  }

  void cloneUniform(const Op &op) {
    std::vector<Value> ins;
    for (Value v : op.operands)
      ins.push_back(single(v));
    std::vector<Type> types;
    std::vector<std::string> names;
    for (Value r : op.results) {
      types.push_back(src.type(r));
      names.push_back(src.nameOf(r));
    }
    size_t idx = b->create(op.kind, ins, types, op.attrs, names);
    for (size_t i = 0; i < op.results.size(); ++i)
      mapWhole(op.results[i], b->op(idx).results[i]);
  }

  template <typename Fn> void emitPerPiece(const Op &op, Fn &&fn) {
    Value result = op.results[0];
    Pieces p = fresh(result);
    forEachPiece(p, [&](const std::vector<int64_t> &origin) {
      p.parts.push_back(fn(origin, p.split, withShape(p.whole, p.split)));
    });
    mapped[result.id] = std::move(p);
  }

  void emitStore(const Op &op) {
    const Pieces &value = pieces(op.operands[1]);
    const Pieces &ptr = pieces(op.operands[0]);
    size_t i = 0;
    forEachPiece(value, [&](const std::vector<int64_t> &origin) {
      Value part = value.parts[i++];
      emit0(OpKind::Store, {region(ptr, origin, value.split), part});
    });
  }

  void emitDot(const Op &op) {
    const Pieces &a = pieces(op.operands[0]);
    const Pieces &bOp = pieces(op.operands[1]);
    const Pieces &c = pieces(op.operands[2]);
    Pieces result = fresh(op.results[0]);
    int64_t m = result.shape[0], k = a.shape[1];
    int64_t bm = result.split[0], bn = result.split[1], bk = target.maxDotK;
    bool mOk = bm == target.maxDotM || (bm == m && m < target.maxDotM);
    if (!mOk || bn != target.maxDotN || k % bk != 0) {
      fail("tt.dot " + shapeStr(result.shape) + " = " + shapeStr(a.shape) +
           " * " + shapeStr(bOp.shape) + " cannot be split into " +
           std::to_string(target.maxDotM) + "x" +
           std::to_string(target.maxDotN) + "x" +
           std::to_string(target.maxDotK) + " pieces (got " +
           std::to_string(bm) + "x" + std::to_string(bn) + ")");
      return;
    }
    std::vector<int64_t> grid = result.grid();
    Type pieceType = withShape(result.whole, result.split);
    AttrMap attrs;
    for (int64_t i = 0; i < grid[0]; ++i)
      for (int64_t j = 0; j < grid[1]; ++j) {
        Value acc = region(c, {i * bm, j * bn}, {bm, bn});
        for (int64_t kk = 0; kk < k / bk; ++kk) {
          Value lhs = region(a, {i * bm, kk * bk}, {bm, bk});
          Value rhs = region(bOp, {kk * bk, j * bn}, {bk, bn});
          acc = emit(OpKind::Dot, {lhs, rhs, acc}, pieceType, attrs, name(op));
        }
        result.parts.push_back(acc);
      }
    mapped[op.results[0].id] = std::move(result);
  }

  void emitReduce(const Op &op) {
    const Pieces &in = pieces(op.operands[0]);
    int64_t axis = op.intAttr("axis");
    OpKind combine =
        op.strAttr("kind") == "max" ? OpKind::Maximum : OpKind::Add;
    Value result = op.results[0];
    const Type &resultType = src.type(result);
    std::vector<int64_t> grid = in.grid();
    std::vector<int64_t> partSplit = eraseAt(in.split, axis);
    Type partType = withShape(resultType, partSplit);

    std::vector<Value> partials;
    for (Value part : in.parts)
      partials.push_back(
          emit(OpKind::Reduce, {part}, partType, op.attrs, name(op)));

    Pieces folded;
    folded.key = nextKey++;
    folded.whole = resultType;
    folded.shape = eraseAt(in.shape, axis);
    folded.split = partSplit;
    std::vector<int64_t> restGrid = eraseAt(grid, axis);
    for (int64_t r = 0; r < product(restGrid); ++r) {
      std::vector<int64_t> rest = unravel(r, restGrid);
      Value acc;
      for (int64_t s = 0; s < grid[axis]; ++s) {
        std::vector<int64_t> coord = rest;
        coord.insert(coord.begin() + axis, s);
        Value part = partials[ravel(coord, grid)];
        acc =
            s == 0 ? part : emit(combine, {acc, part}, partType, {}, name(op));
      }
      folded.parts.push_back(acc);
    }
    if (folded.shape.empty()) {
      mapped[result.id] = std::move(folded);
      return;
    }
    Pieces p = fresh(result);
    forEachPiece(p, [&](const std::vector<int64_t> &origin) {
      p.parts.push_back(region(folded, origin, p.split));
    });
    mapped[result.id] = std::move(p);
  }

  /// Parts of `v` re-blocked to the split chosen for `slot`.
  std::vector<Value> flatten(Value v, Value slot) {
    const Pieces &p = pieces(v);
    if (!isSplittable(src.type(slot)))
      return {p.parts.front()};
    Pieces target = fresh(slot);
    std::vector<Value> parts;
    forEachPiece(target, [&](const std::vector<int64_t> &origin) {
      parts.push_back(region(p, origin, target.split));
    });
    return parts;
  }

  size_t partCount(Value slot) {
    if (!isSplittable(src.type(slot)))
      return 1;
    return static_cast<size_t>(product(fresh(slot).grid()));
  }

  void emitFor(const Op &op) {
    const Region &body = op.regions[0];
    std::vector<Value> ins = {single(op.operands[0]), single(op.operands[1]),
                              single(op.operands[2])};
    std::vector<Type> types;
    std::vector<std::string> names;
    for (size_t i = 0; i < op.results.size(); ++i) {
      Value slot = body.args[1 + i];
      std::vector<Value> parts = flatten(op.operands[3 + i], slot);
      ins.insert(ins.end(), parts.begin(), parts.end());
      Type t = isSplittable(src.type(slot))
                   ? withShape(src.type(slot), splits[slot.id])
                   : src.type(slot);
      for (size_t j = 0; j < parts.size(); ++j) {
        types.push_back(t);
        names.push_back(src.nameOf(op.results[i]));
      }
    }
    size_t idx = b->create(OpKind::For, ins, types, {}, names);
    std::vector<Value> newResults = b->op(idx).results;
    b->enterNewRegion();
    mapWhole(body.args[0],
             b->addArg(src.type(body.args[0]), src.nameOf(body.args[0])));
    size_t cursor = 0;
    for (size_t i = 0; i < op.results.size(); ++i) {
      Value slot = body.args[1 + i];
      Pieces p = isSplittable(src.type(slot)) ? fresh(slot) : Pieces{};
      if (!isSplittable(src.type(slot))) {
        p.key = slot.id;
        p.whole = src.type(slot);
        if (const TensorType *s = shapedPart(p.whole))
          p.shape = p.split = s->shape;
      }
      size_t n = partCount(slot);
      for (size_t j = 0; j < n; ++j)
        p.parts.push_back(b->addArg(types[cursor + j], src.nameOf(slot)));
      mapped[slot.id] = std::move(p);
      cursor += n;
    }
    scopes.emplace_back();
    emitRegion(body);
    const Op &yield = body.ops.back();
    std::vector<Value> yielded;
    for (size_t i = 0; i < yield.operands.size(); ++i) {
      std::vector<Value> parts = flatten(yield.operands[i], body.args[1 + i]);
      yielded.insert(yielded.end(), parts.begin(), parts.end());
    }
    emit0(OpKind::Yield, yielded);
    scopes.pop_back();
    b->exit();

    cursor = 0;
    for (size_t i = 0; i < op.results.size(); ++i) {
      Value res = op.results[i];
      Pieces p = isSplittable(src.type(res)) ? fresh(res) : Pieces{};
      if (!isSplittable(src.type(res))) {
        p.key = res.id;
        p.whole = src.type(res);
        if (const TensorType *s = shapedPart(p.whole))
          p.shape = p.split = s->shape;
      }
      size_t n = partCount(body.args[1 + i]);
      for (size_t j = 0; j < n; ++j)
        p.parts.push_back(newResults[cursor + j]);
      mapped[res.id] = std::move(p);
      cursor += n;
    }
  }

  void emitIf(const Op &op) {
    b->create(OpKind::If, {single(op.operands[0])}, {});
    b->enterNewRegion();
    scopes.emplace_back();
    emitRegion(op.regions[0]);
    scopes.pop_back();
    b->exit();
  }

  const KernelFn &src;
  const TargetConfig &target;
  KernelFn out;
  OpBuilder *b = nullptr;
  std::vector<uint32_t> leader;
  std::vector<std::vector<int64_t>> limits;
  std::vector<std::vector<int64_t>> splits;
  std::vector<std::optional<Pieces>> mapped;
  uint32_t nextKey;
  std::vector<std::map<CacheKey, Value>> scopes;
  std::set<std::string> simtReported;
  std::vector<std::string> diags;
};

} // namespace

KernelFn matchTargetSize(const KernelFn &fn, const TargetConfig &target) {
  if (!fn.warpLevel)
    throw CompileError({"@" + fn.name + ": " + kMatchTargetSize +
                        " expects a warp-level function"});
  return Matcher(fn, target).run();
}

} // namespace tilec
