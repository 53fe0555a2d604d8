//===- Verifier.cpp - IR verifier -----------------------------------------===//
//
// Part of the tilec project, under the Apache License v2.0 with LLVM
// Exceptions. See https://llvm.org/LICENSE.txt for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "tilec/Verifier.h"

#include <algorithm>
#include <numeric>
#include <set>

namespace tilec {

namespace {

class Verifier {
public:
  Verifier(const KernelFn &fn, std::vector<std::string> &diags)
      : fn(fn), diags(diags) {}

  void run() {
    if (fn.numWarps < 1)
      error("num_warps must be at least 1");
    for (Value arg : fn.body.args) {
      define(arg);
      const Type &t = fn.type(arg);
      if (isPointer(t) ? asPointer(t).isBlock() : !asTensor(t).isScalar())
        error("kernel argument %" + fn.nameOf(arg) +
              " must be a scalar or a raw pointer");
    }
    visible.push_back({});
    for (Value arg : fn.body.args)
      visible.back().insert(arg.id);
    region(fn.body, nullptr);
    if (fn.body.ops.empty() || fn.body.ops.back().kind != OpKind::Return)
      error("function body must end with tt.return");
  }

private:
  void error(const std::string &msg) {
    diags.push_back("@" + fn.name + ": " + msg);
  }
  void opError(const Op &op, const std::string &msg) {
    error(std::string(opKindName(op.kind)) + ": " + msg);
  }

  void define(Value v) {
    if (v.id >= fn.values.size()) {
      error("value id " + std::to_string(v.id) + " out of range");
      return;
    }
    if (!defined.insert(v.id).second)
      error("value %" + name(v) + " defined more than once");
    checkType(fn.type(v), v);
  }

  std::string name(Value v) const {
    if (v.id >= fn.values.size())
      return "<invalid>";
    const std::string &n = fn.nameOf(v);
    return n.empty() ? std::to_string(v.id) : n;
  }

  void checkTensor(const TensorType &t, Value v) {
    if (t.shape.size() > 2)
      error("%" + name(v) + ": tensors of rank > 2 are not supported");
    for (int64_t d : t.shape)
      if (d < 1)
        error("%" + name(v) + ": shape entries must be positive");
    if (t.encoding) {
      if (t.isScalar())
        error("%" + name(v) + ": scalars cannot carry an encoding");
      else if (t.encoding->rank() != t.shape.size())
        error("%" + name(v) + ": encoding rank " +
              std::to_string(t.encoding->rank()) + " does not match shape " +
              shapeStr(t.shape));
    }
  }

  void checkType(const Type &t, Value v) {
    if (const TensorType *s = shapedPart(t)) {
      checkTensor(*s, v);
      if (isPointer(t) && s->isScalar())
        error("%" + name(v) + ": block pointers need a non-empty block");
      if (isPointer(t) && s->elem != asPointer(t).elem)
        error("%" + name(v) + ": block element type mismatch");
    }
  }

  bool isVisible(Value v) const {
    for (const auto &scope : visible)
      if (scope.count(v.id))
        return true;
    return false;
  }

  void region(const Region &r, const Op *owner) {
    for (size_t i = 0; i < r.ops.size(); ++i) {
      const Op &op = r.ops[i];
      bool last = i + 1 == r.ops.size();
      if (op.kind == OpKind::Yield &&
          !(last && owner && owner->kind == OpKind::For))
        opError(op, "must terminate an scf.for body");
      if (op.kind == OpKind::Return && (owner || !last))
        opError(op, "must be the last op of the function body");
      for (Value v : op.operands)
        if (v.id >= fn.values.size() || !isVisible(v))
          opError(op, "operand %" + name(v) + " used before definition");
      for (const Region &nested : op.regions) {
        visible.push_back({});
        for (Value arg : nested.args) {
          define(arg);
          visible.back().insert(arg.id);
        }
        region(nested, &op);
        visible.pop_back();
      }
      for (Value res : op.results) {
        define(res);
        visible.back().insert(res.id);
      }
      checkOp(op);
    }
  }

  const TensorType *tensor(Value v) const {
    if (v.id >= fn.values.size())
      return nullptr;
    return std::get_if<TensorType>(&fn.type(v));
  }
  const PointerType *pointer(Value v) const {
    if (v.id >= fn.values.size())
      return nullptr;
    return std::get_if<PointerType>(&fn.type(v));
  }
  bool isI32Scalar(Value v) const {
    const TensorType *t = tensor(v);
    return t && t->isScalar() && t->elem == ElemType::I32;
  }

  bool arity(const Op &op, size_t operands, size_t results) {
    if (op.operands.size() != operands || op.results.size() != results) {
      opError(op, "expected " + std::to_string(operands) + " operands and " +
                      std::to_string(results) + " results");
      return false;
    }
    return true;
  }

  void checkOrder(const Op &op, size_t rank) {
    if (!op.hasAttr("order"))
      return;
    std::vector<int64_t> order = op.listAttr("order");
    std::vector<int64_t> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int64_t> iota(rank);
    std::iota(iota.begin(), iota.end(), 0);
    if (sorted != iota)
      opError(op, "order must be a permutation of the block dims");
  }

  void checkOp(const Op &op) {
    if (isWarpOnly(op.kind) && !fn.warpLevel)
      opError(op, "only allowed in warp-level kernels");
    switch (op.kind) {
    case OpKind::GetProgramId: {
      if (!arity(op, 0, 1))
        return;
      int64_t axis = op.intAttr("axis", -1);
      if (axis < 0 || axis > 2)
        opError(op, "axis must be 0, 1 or 2");
      if (!isI32Scalar(op.results[0]))
        opError(op, "result must be i32");
      return;
    }
    case OpKind::WarpId:
      if (arity(op, 0, 1) && !isI32Scalar(op.results[0]))
        opError(op, "result must be i32");
      return;
    case OpKind::MakeTensorPtr: {
      if (op.results.size() != 1)
        return opError(op, "expected one result");
      const PointerType *p = pointer(op.results[0]);
      if (!p || !p->isBlock())
        return opError(op, "result must be a block pointer");
      size_t rank = p->block->shape.size();
      if (op.operands.size() != 1 + 3 * rank)
        return opError(op, "expected base plus shape, strides and offsets "
                           "for rank " +
                               std::to_string(rank));
      const PointerType *base = pointer(op.operands[0]);
      if (!base || base->isBlock() || base->elem != p->elem)
        opError(op, "base must be a raw pointer of the block element type");
      for (size_t i = 1; i < op.operands.size(); ++i)
        if (!isI32Scalar(op.operands[i]))
          opError(op, "shape, strides and offsets must be i32 scalars");
      checkOrder(op, rank);
      return;
    }
    case OpKind::Advance: {
      if (op.results.size() != 1 || op.operands.empty())
        return opError(op, "expected a pointer operand and one result");
      const PointerType *p = pointer(op.operands[0]);
      if (!p || !p->isBlock())
        return opError(op, "operand must be a block pointer");
      if (op.operands.size() != 1 + p->block->shape.size())
        opError(op, "expected one delta per block dimension");
      for (size_t i = 1; i < op.operands.size(); ++i)
        if (!isI32Scalar(op.operands[i]))
          opError(op, "deltas must be i32 scalars");
      if (!(fn.type(op.results[0]) == fn.type(op.operands[0])))
        opError(op, "result type must equal the pointer type");
      return;
    }
    case OpKind::Load: {
      if (!arity(op, 1, 1))
        return;
      const PointerType *p = pointer(op.operands[0]);
      const TensorType *t = tensor(op.results[0]);
      if (!p || !p->isBlock() || !t)
        return opError(op, "expected block pointer operand and tensor result");
      checkAccessShape(op, *p->block, *t);
      return;
    }
    case OpKind::Store: {
      if (!arity(op, 2, 0))
        return;
      const PointerType *p = pointer(op.operands[0]);
      const TensorType *t = tensor(op.operands[1]);
      if (!p || !p->isBlock() || !t)
        return opError(op, "expected block pointer and tensor operands");
      checkAccessShape(op, *p->block, *t);
      return;
    }
    case OpKind::Dot: {
      if (!arity(op, 3, 1))
        return;
      const TensorType *a = tensor(op.operands[0]);
      const TensorType *b = tensor(op.operands[1]);
      const TensorType *c = tensor(op.operands[2]);
      const TensorType *r = tensor(op.results[0]);
      if (!a || !b || !c || !r || a->shape.size() != 2 ||
          b->shape.size() != 2 || c->shape.size() != 2 || r->shape.size() != 2)
        return opError(op, "operands and result must be rank-2 tensors");
      if (a->shape[1] != b->shape[0] || c->shape[0] != a->shape[0] ||
          c->shape[1] != b->shape[1] || r->shape != c->shape)
        opError(op, "shape mismatch: " + shapeStr(r->shape) + " = " +
                        shapeStr(a->shape) + " * " + shapeStr(b->shape) +
                        " + " + shapeStr(c->shape));
      if (a->elem != b->elem || !isFloat(a->elem))
        opError(op, "A and B must share a float element type");
      if (c->elem != ElemType::F32 || r->elem != ElemType::F32)
        opError(op, "accumulator and result must be f32");
      if (op.hasAttr("tiling") && !parseHintName(op.strAttr("tiling")))
        opError(op, "unknown tiling hint '" + op.strAttr("tiling") + "'");
      return;
    }
    case OpKind::Reduce: {
      if (!arity(op, 1, 1))
        return;
      std::string kind = op.strAttr("kind");
      if (kind != "max" && kind != "sum")
        opError(op, "kind must be \"max\" or \"sum\"");
      const TensorType *s = tensor(op.operands[0]);
      const TensorType *r = tensor(op.results[0]);
      if (!s || !r)
        return opError(op, "expected tensor operand and result");
      if (s->elem != r->elem)
        opError(op, "element type must be preserved");
      if (op.boolAttr("cross_warp")) {
        if (!fn.warpLevel)
          opError(op, "cross_warp reduce only allowed in warp-level kernels");
        if (r->shape != s->shape)
          opError(op, "cross_warp reduce must preserve the shape");
        for (int64_t w : op.listAttr("dst_warps"))
          if (w < 0 || w >= fn.numWarps)
            opError(op,
                    "dst_warps entry " + std::to_string(w) + " out of range");
        if (op.hasAttr("axis"))
          opError(op, "cross_warp reduce takes no axis");
        return;
      }
      if (op.hasAttr("dst_warps"))
        opError(op, "dst_warps requires cross_warp");
      int64_t axis = op.intAttr("axis", -1);
      if (axis < 0 || axis >= static_cast<int64_t>(s->shape.size()))
        return opError(op, "axis out of range");
      std::vector<int64_t> expect = s->shape;
      expect.erase(expect.begin() + axis);
      if (r->shape != expect)
        opError(op, "result shape " + shapeStr(r->shape) +
                        " must drop exactly axis " + std::to_string(axis) +
                        " of " + shapeStr(s->shape));
      return;
    }
    case OpKind::Splat: {
      if (!arity(op, 1, 1))
        return;
      const TensorType *s = tensor(op.operands[0]);
      const TensorType *r = tensor(op.results[0]);
      if (!s || !r || !s->isScalar() || r->isScalar() || s->elem != r->elem)
        opError(op, "expected scalar to tensor of the same element type");
      return;
    }
    case OpKind::Convert: {
      if (!arity(op, 1, 1))
        return;
      const TensorType *s = tensor(op.operands[0]);
      const TensorType *r = tensor(op.results[0]);
      if (!s || !r || s->shape != r->shape)
        opError(op, "shape must be preserved");
      return;
    }
    case OpKind::ExpandDims: {
      if (!arity(op, 1, 1))
        return;
      const TensorType *s = tensor(op.operands[0]);
      const TensorType *r = tensor(op.results[0]);
      int64_t axis = op.intAttr("axis", -1);
      if (!s || !r || axis < 0 || axis > static_cast<int64_t>(s->shape.size()))
        return opError(op, "axis out of range");
      std::vector<int64_t> expect = s->shape;
      expect.insert(expect.begin() + axis, 1);
      if (r->shape != expect || r->elem != s->elem)
        opError(op, "result must insert a unit dim at axis " +
                        std::to_string(axis));
      return;
    }
    case OpKind::Broadcast: {
      if (!arity(op, 1, 1))
        return;
      const TensorType *s = tensor(op.operands[0]);
      const TensorType *r = tensor(op.results[0]);
      if (!s || !r || s->shape.size() != r->shape.size() || s->elem != r->elem)
        return opError(op, "rank and element type must be preserved");
      for (size_t d = 0; d < s->shape.size(); ++d)
        if (s->shape[d] != r->shape[d] && s->shape[d] != 1)
          opError(op, "cannot broadcast " + shapeStr(s->shape) + " to " +
                          shapeStr(r->shape));
      return;
    }
    case OpKind::Alloc: {
      if (!arity(op, 0, 1))
        return;
      const PointerType *p = pointer(op.results[0]);
      if (!p || !p->isBlock())
        opError(op, "result must be a block pointer");
      return;
    }
    case OpKind::Barrier:
      arity(op, 0, 0);
      return;
    case OpKind::Extract: {
      if (!arity(op, 1, 1))
        return;
      const TensorType *s = shapedPart(fn.type(op.operands[0]));
      const TensorType *r = shapedPart(fn.type(op.results[0]));
      if (!s || !r || s->shape.size() != r->shape.size() ||
          isPointer(fn.type(op.operands[0])) !=
              isPointer(fn.type(op.results[0])))
        return opError(op, "source and result must be alike and of equal "
                           "rank");
      int64_t count = 1;
      for (size_t d = 0; d < s->shape.size(); ++d) {
        if (s->shape[d] % r->shape[d] != 0)
          return opError(op, "sub-block " + shapeStr(r->shape) +
                                 " does not tile " + shapeStr(s->shape));
        count *= s->shape[d] / r->shape[d];
      }
      int64_t index = op.intAttr("index", -1);
      if (index < 0 || index >= count)
        opError(op, "index " + std::to_string(index) + " out of range");
      return;
    }
    case OpKind::Glue: {
      if (op.results.size() != 1 || op.operands.empty())
        return opError(op, "expected parts and one result");
      const TensorType *r = tensor(op.results[0]);
      const TensorType *p = tensor(op.operands[0]);
      if (!r || !p || r->shape.size() != p->shape.size())
        return opError(op, "parts and result must be tensors of equal rank");
      int64_t count = 1;
      for (size_t d = 0; d < r->shape.size(); ++d) {
        if (r->shape[d] % p->shape[d] != 0)
          return opError(op, "parts do not tile the result");
        count *= r->shape[d] / p->shape[d];
      }
      if (static_cast<int64_t>(op.operands.size()) != count)
        opError(op, "expected " + std::to_string(count) + " parts");
      for (Value part : op.operands) {
        const TensorType *t = tensor(part);
        if (!t || t->shape != p->shape || t->elem != r->elem)
          opError(op, "parts must share shape and element type");
      }
      return;
    }
    case OpKind::Return:
      arity(op, 0, 0);
      return;
    case OpKind::Constant: {
      if (!arity(op, 0, 1))
        return;
      if (!op.hasAttr("value"))
        opError(op, "missing value");
      if (!tensor(op.results[0]))
        opError(op, "result must be a tensor or scalar");
      return;
    }
    case OpKind::Add:
    case OpKind::Sub:
    case OpKind::Mul:
    case OpKind::Div:
    case OpKind::Rem:
    case OpKind::Maximum:
    case OpKind::Cmp: {
      if (!arity(op, 2, 1))
        return;
      const TensorType *a = tensor(op.operands[0]);
      const TensorType *b = tensor(op.operands[1]);
      const TensorType *r = tensor(op.results[0]);
      if (!a || !b || !r || a->shape != b->shape || a->elem != b->elem ||
          r->shape != a->shape)
        return opError(op, "operands must share shape and element type");
      if (op.kind == OpKind::Cmp) {
        static const std::set<std::string> preds = {"eq", "ne", "lt",
                                                    "le", "gt", "ge"};
        if (!preds.count(op.strAttr("predicate")))
          opError(op, "unknown predicate");
        if (r->elem != ElemType::I1)
          opError(op, "result must be i1");
      } else if (r->elem != a->elem) {
        opError(op, "result element type must match operands");
      }
      checkCompatible(op, *a, *b);
      return;
    }
    case OpKind::Exp: {
      if (!arity(op, 1, 1))
        return;
      const TensorType *s = tensor(op.operands[0]);
      const TensorType *r = tensor(op.results[0]);
      if (!s || !r || s->shape != r->shape || s->elem != r->elem ||
          !isFloat(s->elem))
        opError(op, "expected float operand and matching result");
      return;
    }
    case OpKind::For: {
      if (op.operands.size() < 3 || op.regions.size() != 1)
        return opError(op, "expected bounds, step and a body");
      for (size_t i = 0; i < 3; ++i)
        if (!isI32Scalar(op.operands[i]))
          opError(op, "bounds and step must be i32 scalars");
      size_t n = op.operands.size() - 3;
      const Region &body = op.regions[0];
      if (op.results.size() != n || body.args.size() != n + 1)
        return opError(op, "iteration argument count mismatch");
      if (!isI32Scalar(body.args[0]))
        opError(op, "induction variable must be i32");
      const Op *yield =
          !body.ops.empty() && body.ops.back().kind == OpKind::Yield
              ? &body.ops.back()
              : nullptr;
      if (!yield)
        return opError(op, "body must end with scf.yield");
      if (yield->operands.size() != n)
        return opError(op, "scf.yield must return every iteration argument");
      for (size_t i = 0; i < n; ++i) {
        const Type &init = fn.type(op.operands[3 + i]);
        if (!(fn.type(body.args[1 + i]) == init) ||
            !(fn.type(op.results[i]) == init) ||
            !(fn.type(yield->operands[i]) == init))
          opError(op, "iteration argument " + std::to_string(i) +
                          " has inconsistent types");
      }
      return;
    }
    case OpKind::If: {
      if (!arity(op, 1, 0) || op.regions.size() != 1)
        return opError(op, "expected a condition and a body");
      const TensorType *c = tensor(op.operands[0]);
      if (!c || !c->isScalar() || c->elem != ElemType::I1)
        opError(op, "condition must be an i1 scalar");
      if (!op.regions[0].args.empty())
        opError(op, "body takes no arguments");
      return;
    }
    case OpKind::Yield:
      if (!op.results.empty())
        opError(op, "has no results");
      return;
    }
  }

  void checkAccessShape(const Op &op, const TensorType &block,
                        const TensorType &value) {
    bool scalarOk = value.isScalar() && block.numel() == 1;
    if (value.shape != block.shape && !scalarOk)
      opError(op, "tensor shape " + shapeStr(value.shape) +
                      " does not match block shape " + shapeStr(block.shape));
    if (value.elem != block.elem)
      opError(op, "element type does not match the pointer");
  }

  void checkCompatible(const Op &op, const TensorType &a, const TensorType &b) {
    if (fn.warpLevel || !a.encoding || !b.encoding)
      return;
    if (!compatible(*a.encoding, *b.encoding, a.shape))
      opError(op, "operand encodings are incompatible");
  }

  const KernelFn &fn;
  std::vector<std::string> &diags;
  std::set<uint32_t> defined;
  std::vector<std::set<uint32_t>> visible;
};

} // namespace

std::vector<std::string> verify(const KernelFn &fn) {
  std::vector<std::string> diags;
  Verifier(fn, diags).run();
  return diags;
}

std::vector<std::string> verify(const KernelModule &module) {
  std::vector<std::string> diags;
  std::set<std::string> names;
  for (const KernelFn &fn : module.functions) {
    if (!names.insert(fn.name).second)
      diags.push_back("@" + fn.name + ": duplicate function name");
    std::vector<std::string> part = verify(fn);
    diags.insert(diags.end(), part.begin(), part.end());
  }
  return diags;
}

} // namespace tilec
