//===- LayoutAssignment.cpp - Layout assignment ---------------------------===//
//
// Part of the tilec project, under the Apache License v2.0 with LLVM
// Exceptions. See https://llvm.org/LICENSE.txt for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "tilec/DefUse.h"
#include "tilec/Passes.h"

#include <deque>
#include <set>

namespace tilec {

CompileError::CompileError(std::vector<std::string> diagnostics)
    : std::runtime_error(diagnostics.empty() ? "compilation failed"
                                             : diagnostics.front()),
      diags(std::move(diagnostics)) {}

std::string_view workloadName(WorkloadClass cls) {
  switch (cls) {
  case WorkloadClass::Elementwise:
    return "elementwise";
  case WorkloadClass::Reduction:
    return "reduction";
  case WorkloadClass::Gemm:
    return "gemm";
  case WorkloadClass::Attention:
    return "attention";
  }
  return "elementwise";
}

namespace {

std::string valueRef(const KernelFn &fn, Value v) {
  const std::string &name = fn.nameOf(v);
  return "%" + (name.empty() ? std::to_string(v.id) : name);
}

bool passesThrough(OpKind kind) {
  return isElementwise(kind) || kind == OpKind::Reduce ||
         kind == OpKind::Broadcast || kind == OpKind::ExpandDims ||
         kind == OpKind::Splat;
}

} // namespace

std::vector<const Op *> dotOps(const KernelFn &fn) {
  std::vector<const Op *> dots;
  walk(fn.body, [&](const Op &op) {
    if (op.kind == OpKind::Dot)
      dots.push_back(&op);
  });
  return dots;
}

void applyHints(KernelFn &fn, const std::map<int64_t, TilingHint> &hints) {
  std::vector<Op *> dots;
  walk(fn.body, [&](Op &op) {
    if (op.kind == OpKind::Dot)
      dots.push_back(&op);
  });
  std::vector<std::string> diags;
  for (const auto &[index, hint] : hints) {
    if (index < 0 || index >= static_cast<int64_t>(dots.size())) {
      diags.push_back("@" + fn.name + ": no dot" + std::to_string(index) +
                      " (function has " + std::to_string(dots.size()) +
                      " dots)");
      continue;
    }
    dots[index]->attrs["tiling"] = std::string(hintName(hint));
  }
  if (!diags.empty())
    throw CompileError(diags);
}

Classification classifyWorkload(const KernelFn &fn) {
  DefUse du(fn);
  std::vector<const Op *> dots = dotOps(fn);
  std::set<std::pair<const Op *, const Op *>> edges;
  for (const Op *dot : dots) {
    std::set<uint32_t> seen;
    std::deque<Value> queue{dot->results[0]};
    while (!queue.empty()) {
      Value v = queue.front();
      queue.pop_front();
      if (!seen.insert(v.id).second)
        continue;
      for (const Op *user : du.users(v)) {
        if (user->kind == OpKind::Dot) {
          if (user != dot)
            edges.emplace(dot, user);
        } else if (passesThrough(user->kind)) {
          for (Value r : user->results)
            queue.push_back(r);
        } else if (user->kind == OpKind::Yield || user->kind == OpKind::For) {
          for (Value m : du.carriedGroup(v))
            queue.push_back(m);
        }
      }
    }
  }

  Classification result;
  if (edges.size() > 1)
    throw CompileError({"@" + fn.name + ": " + std::to_string(edges.size()) +
                        " dot-to-dot chains found; at most one is supported"});
  if (edges.size() == 1) {
    result.cls = WorkloadClass::Attention;
    result.root = edges.begin()->second;
    return result;
  }
  if (!dots.empty()) {
    result.cls = WorkloadClass::Gemm;
    result.root = dots.back();
    return result;
  }
  const Op *firstReduce = nullptr;
  const Op *firstStore = nullptr;
  walk(fn.body, [&](const Op &op) {
    if (op.kind == OpKind::Reduce && !op.boolAttr("cross_warp") && !firstReduce)
      firstReduce = &op;
    if (op.kind == OpKind::Store && !firstStore &&
        needsLayout(fn.type(op.operands[1])))
      firstStore = &op;
  });
  if (firstReduce) {
    result.cls = WorkloadClass::Reduction;
    result.root = firstReduce;
    return result;
  }
  if (!firstStore)
    throw CompileError({"@" + fn.name +
                        ": no root operation (no dot, reduce "
                        "or tensor store)"});
  result.cls = WorkloadClass::Elementwise;
  result.root = firstStore;
  return result;
}

bool needsLayout(const Type &type) {
  if (const auto *t = std::get_if<TensorType>(&type))
    return !t->isScalar();
  const PointerType &p = std::get<PointerType>(type);
  return p.block && p.block->numel() > 1;
}

namespace {

class Propagator {
public:
  explicit Propagator(const KernelFn &fn)
      : fn(fn), du(fn), enc(fn.values.size()) {}

  void seed(Value v, const LayoutEncoding &e) { assign(v, e); }

  LayoutMap run() {
    while (true) {
      while (!work.empty()) {
        Value v = work.front();
        work.pop_front();
        visit(v);
      }
      if (!inferOneBackward())
        break;
    }
    // Every rule in both directions; with the map complete this only checks.
    walk(fn.body, [&](const Op &op) {
      apply(op, Dir::Forward);
      apply(op, Dir::Backward);
    });
    normalize();
    for (uint32_t id = 0; id < fn.values.size(); ++id)
      if (needsLayout(fn.values[id].type) && !enc[id])
        diags.push_back("@" + fn.name + ": no layout could be inferred for " +
                        valueRef(fn, Value{id}) +
                        " (not connected to the root operation)");
    if (!diags.empty())
      throw CompileError(diags);
    LayoutMap out;
    for (uint32_t id = 0; id < enc.size(); ++id)
      if (enc[id])
        out.emplace(id, *enc[id]);
    return out;
  }

private:
  /// Forward rules derive an op's results (or a store's pointer) from its
  /// operands; backward rules go from results to operands.
  enum class Dir { Forward, Backward };

  const LayoutEncoding *get(Value v) const {
    return enc[v.id] ? &*enc[v.id] : nullptr;
  }

  void assign(Value v, const LayoutEncoding &e) {
    const Type &type = fn.type(v);
    if (!needsLayout(type))
      return;
    const TensorType *shaped = shapedPart(type);
    if (e.rank() != shaped->shape.size()) {
      diags.push_back("@" + fn.name + ": layout " + e.str() + " of rank " +
                      std::to_string(e.rank()) + " cannot apply to " +
                      valueRef(fn, v) + " of shape " + shapeStr(shaped->shape));
      return;
    }
    if (proposals) {
      if (!enc[v.id])
        proposals->emplace(v.id, e);
      return;
    }
    if (!enc[v.id]) {
      enc[v.id] = e;
      work.push_back(v);
      return;
    }
    if (*enc[v.id] == e || compatible(*enc[v.id], e, shaped->shape))
      return;
    diags.push_back("@" + fn.name + ": conflicting layouts for " +
                    valueRef(fn, v) + ": " + enc[v.id]->str() + " vs " +
                    e.str());
  }

  /// Assigns the lowest-numbered value that a backward rule can reach.
  bool inferOneBackward() {
    std::map<uint32_t, LayoutEncoding> found;
    proposals = &found;
    walk(fn.body, [&](const Op &op) { apply(op, Dir::Backward); });
    proposals = nullptr;
    if (found.empty())
      return false;
    assign(Value{found.begin()->first}, found.begin()->second);
    return true;
  }

  /// Copies the first known encoding of `from` onto every value of `to`.
  void propagate(const std::vector<Value> &from, const std::vector<Value> &to) {
    for (Value f : from)
      if (const LayoutEncoding *e = get(f)) {
        LayoutEncoding copy = *e;
        for (Value t : to)
          assign(t, copy);
        return;
      }
  }

  void visit(Value v) {
    for (const Op *user : du.users(v))
      apply(*user, Dir::Forward);
    if (const LayoutEncoding *e = get(v)) {
      LayoutEncoding copy = *e;
      for (Value m : du.carriedGroup(v))
        assign(m, copy);
    }
  }

  void apply(const Op &op, Dir dir) {
    try {
      applyRule(op, dir);
    } catch (const LayoutError &err) {
      diags.push_back("@" + fn.name + ": " + std::string(opKindName(op.kind)) +
                      ": " + err.what());
    }
  }

  void applyRule(const Op &op, Dir dir) {
    bool fwd = dir == Dir::Forward;
    switch (op.kind) {
    case OpKind::Load:
    case OpKind::Advance:
    case OpKind::Broadcast:
      if (fwd)
        propagate({op.operands[0]}, {op.results[0]});
      else
        propagate({op.results[0]}, {op.operands[0]});
      return;
    case OpKind::Store:
      if (fwd)
        propagate({op.operands[1]}, {op.operands[0]});
      else
        propagate({op.operands[0]}, {op.operands[1]});
      return;
    case OpKind::ExpandDims: {
      int64_t axis = op.intAttr("axis");
      if (fwd) {
        if (const LayoutEncoding *src = get(op.operands[0]))
          if (src->isSlice() && src->dim() == axis)
            assign(op.results[0], src->parent());
      } else if (const LayoutEncoding *res = get(op.results[0])) {
        assign(op.operands[0], LayoutEncoding::slice(axis, *res));
      }
      return;
    }
    case OpKind::Reduce: {
      if (op.boolAttr("cross_warp")) {
        if (fwd)
          propagate({op.operands[0]}, {op.results[0]});
        else
          propagate({op.results[0]}, {op.operands[0]});
        return;
      }
      int64_t axis = op.intAttr("axis");
      if (fwd) {
        if (const LayoutEncoding *src = get(op.operands[0]))
          if (src->rank() >= 2)
            assign(op.results[0], LayoutEncoding::slice(axis, *src));
      } else if (const LayoutEncoding *res = get(op.results[0])) {
        if (res->isSlice() && res->dim() == axis)
          assign(op.operands[0], res->parent());
      }
      return;
    }
    case OpKind::Dot: {
      Value a = op.operands[0], b = op.operands[1], c = op.operands[2];
      Value r = op.results[0];
      if (fwd) {
        if (const LayoutEncoding *ea = get(a))
          if (ea->isDotOperand() && ea->opIdx() == 0)
            assign(r, ea->parent());
        if (const LayoutEncoding *eb = get(b))
          if (eb->isDotOperand() && eb->opIdx() == 1)
            assign(r, eb->parent());
        propagate({c}, {r});
      } else if (const LayoutEncoding *er = get(r)) {
        LayoutEncoding parent = *er;
        assign(a, LayoutEncoding::dotOperand(0, parent));
        assign(b, LayoutEncoding::dotOperand(1, parent));
        assign(c, parent);
      }
      return;
    }
    default:
      if (isElementwise(op.kind)) {
        if (fwd)
          propagate(op.operands, op.results);
        else
          propagate(op.results, op.operands);
      }
      return;
    }
  }

  /// Makes types that must be identical (advance results, loop-carried
  /// slots) carry the very same encoding object rather than merely a
  /// compatible one.
  void normalize() {
    bool changed = true;
    auto force = [&](Value to, Value from) {
      if (enc[from.id] && !(enc[to.id] && *enc[to.id] == *enc[from.id])) {
        enc[to.id] = enc[from.id];
        changed = true;
      }
    };
    while (changed) {
      changed = false;
      walk(fn.body, [&](const Op &op) {
        if (op.kind == OpKind::Advance)
          force(op.results[0], op.operands[0]);
        if (op.kind == OpKind::For) {
          const Region &body = op.regions[0];
          const Op &yield = body.ops.back();
          for (size_t i = 0; i < op.results.size(); ++i) {
            Value arg = body.args[1 + i];
            force(op.operands[3 + i], arg);
            force(op.results[i], arg);
            force(yield.operands[i], arg);
          }
        }
      });
    }
  }

  const KernelFn &fn;
  DefUse du;
  std::vector<std::optional<LayoutEncoding>> enc;
  std::deque<Value> work;
  std::map<uint32_t, LayoutEncoding> *proposals = nullptr;
  std::vector<std::string> diags;
};

TilingHint defaultHint(WorkloadClass cls) {
  switch (cls) {
  case WorkloadClass::Gemm:
  case WorkloadClass::Elementwise:
    return TilingHint::Square;
  case WorkloadClass::Attention:
  case WorkloadClass::Reduction:
    return TilingHint::Horizontal;
  }
  return TilingHint::Square;
}

} // namespace

LayoutMap propagateLayouts(const KernelFn &fn, LayoutMap seeds) {
  Propagator prop(fn);
  for (const auto &[id, e] : seeds)
    prop.seed(Value{id}, e);
  return prop.run();
}

LayoutMap assignLayouts(const KernelFn &fn, const Classification &cls) {
  const Op &root = *cls.root;
  Value tiled;
  TilingHint hint = defaultHint(cls.cls);
  switch (cls.cls) {
  case WorkloadClass::Gemm:
  case WorkloadClass::Attention:
    tiled = root.results[0];
    if (root.hasAttr("tiling")) {
      hint = *parseHintName(root.strAttr("tiling"));
      if (hint == TilingHint::None)
        hint = defaultHint(cls.cls);
    }
    break;
  case WorkloadClass::Reduction:
    tiled = root.operands[0];
    break;
  case WorkloadClass::Elementwise:
    tiled = root.operands[1];
    break;
  }
  const TensorType &shape = asTensor(fn.type(tiled));
  LayoutEncoding rootEnc = [&] {
    try {
      return tileRoot(shape.shape, fn.numWarps, hint);
    } catch (const LayoutError &err) {
      throw CompileError({"@" + fn.name + ": cannot tile root " +
                          valueRef(fn, tiled) + ": " + err.what()});
    }
  }();

  Propagator prop(fn);
  if (root.kind == OpKind::Dot) {
    prop.seed(root.operands[0], LayoutEncoding::dotOperand(0, rootEnc));
    prop.seed(root.operands[1], LayoutEncoding::dotOperand(1, rootEnc));
    prop.seed(root.operands[2], rootEnc);
  }
  prop.seed(tiled, rootEnc);
  return prop.run();
}

KernelFn applyLayouts(const KernelFn &fn, const LayoutMap &layouts) {
  KernelFn out = fn;
  for (const auto &[id, e] : layouts)
    setEncoding(out.values.at(id).type, e);
  return out;
}

KernelFn assignLayoutsPass(const KernelFn &fn) {
  if (fn.warpLevel)
    return fn;
  Classification cls = classifyWorkload(fn);
  return applyLayouts(fn, assignLayouts(fn, cls));
}

} // namespace tilec
