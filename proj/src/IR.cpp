//===- IR.cpp - Core SSA IR -----------------------------------------------===//
//
// Part of the tilec project, under the Apache License v2.0 with LLVM
// Exceptions. See https://llvm.org/LICENSE.txt for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "tilec/IR.h"

#include <array>
#include <functional>
#include <sstream>
#include <unordered_map>

namespace tilec {

int64_t TensorType::numel() const {
  int64_t n = 1;
  for (int64_t d : shape)
    n *= d;
  return n;
}

TensorType TensorType::withShape(std::vector<int64_t> newShape) const {
  TensorType t = *this;
  t.shape = std::move(newShape);
  return t;
}

TensorType TensorType::withoutEncoding() const {
  TensorType t = *this;
  t.encoding.reset();
  return t;
}

TensorType scalarType(ElemType elem) { return TensorType{{}, elem, {}}; }

TensorType tensorType(std::vector<int64_t> shape, ElemType elem,
                      std::optional<LayoutEncoding> encoding) {
  return TensorType{std::move(shape), elem, std::move(encoding)};
}

const TensorType *shapedPart(const Type &type) {
  if (const auto *t = std::get_if<TensorType>(&type))
    return t;
  const auto &p = std::get<PointerType>(type);
  return p.block ? &*p.block : nullptr;
}

TensorType *shapedPart(Type &type) {
  if (auto *t = std::get_if<TensorType>(&type))
    return t;
  auto &p = std::get<PointerType>(type);
  return p.block ? &*p.block : nullptr;
}

const LayoutEncoding *encodingOf(const Type &type) {
  const TensorType *t = shapedPart(type);
  return t && t->encoding ? &*t->encoding : nullptr;
}

void setEncoding(Type &type, std::optional<LayoutEncoding> encoding) {
  if (TensorType *t = shapedPart(type))
    t->encoding = std::move(encoding);
}

std::string shapeStr(const std::vector<int64_t> &shape) {
  std::string out;
  for (size_t i = 0; i < shape.size(); ++i)
    out += (i ? "x" : "") + std::to_string(shape[i]);
  return out;
}

static std::string tensorStr(const TensorType &t) {
  if (t.isScalar())
    return std::string(elemName(t.elem));
  std::string out =
      "tensor<" + shapeStr(t.shape) + "x" + std::string(elemName(t.elem));
  if (t.encoding)
    out += ", " + t.encoding->str();
  return out + ">";
}

std::string typeStr(const Type &type) {
  if (const auto *t = std::get_if<TensorType>(&type))
    return tensorStr(*t);
  const auto &p = std::get<PointerType>(type);
  return "!tt.ptr<" +
         (p.block ? tensorStr(*p.block) : std::string(elemName(p.elem))) + ">";
}

//===----------------------------------------------------------------------===//
// Op kinds
//===----------------------------------------------------------------------===//

namespace {

struct KindEntry {
  OpKind kind;
  std::string_view name;
};

constexpr std::array kKinds = {
    KindEntry{OpKind::GetProgramId, "tt.get_program_id"},
    KindEntry{OpKind::WarpId, "tt.warp_id"},
    KindEntry{OpKind::MakeTensorPtr, "tt.make_tensor_ptr"},
    KindEntry{OpKind::Advance, "tt.advance"},
    KindEntry{OpKind::Load, "tt.load"},
    KindEntry{OpKind::Store, "tt.store"},
    KindEntry{OpKind::Dot, "tt.dot"},
    KindEntry{OpKind::Reduce, "tt.reduce"},
    KindEntry{OpKind::Splat, "tt.splat"},
    KindEntry{OpKind::Convert, "tt.convert"},
    KindEntry{OpKind::ExpandDims, "tt.expand_dims"},
    KindEntry{OpKind::Broadcast, "tt.broadcast"},
    KindEntry{OpKind::Alloc, "tt.alloc"},
    KindEntry{OpKind::Barrier, "tt.barrier"},
    KindEntry{OpKind::Extract, "tt.extract"},
    KindEntry{OpKind::Glue, "tt.glue"},
    KindEntry{OpKind::Return, "tt.return"},
    KindEntry{OpKind::Constant, "arith.constant"},
    KindEntry{OpKind::Add, "arith.add"},
    KindEntry{OpKind::Sub, "arith.sub"},
    KindEntry{OpKind::Mul, "arith.mul"},
    KindEntry{OpKind::Div, "arith.div"},
    KindEntry{OpKind::Rem, "arith.rem"},
    KindEntry{OpKind::Maximum, "arith.maximum"},
    KindEntry{OpKind::Cmp, "arith.cmp"},
    KindEntry{OpKind::Exp, "math.exp"},
    KindEntry{OpKind::For, "scf.for"},
    KindEntry{OpKind::If, "scf.if"},
    KindEntry{OpKind::Yield, "scf.yield"},
};

} // namespace

std::string_view opKindName(OpKind kind) {
  for (const KindEntry &e : kKinds)
    if (e.kind == kind)
      return e.name;
  return "<unknown>";
}

std::optional<OpKind> parseOpKind(std::string_view name) {
  for (const KindEntry &e : kKinds)
    if (e.name == name)
      return e.kind;
  return std::nullopt;
}

bool isElementwiseBinary(OpKind kind) {
  switch (kind) {
  case OpKind::Add:
  case OpKind::Sub:
  case OpKind::Mul:
  case OpKind::Div:
  case OpKind::Rem:
  case OpKind::Maximum:
  case OpKind::Cmp:
    return true;
  default:
    return false;
  }
}

bool isElementwise(OpKind kind) {
  return isElementwiseBinary(kind) || kind == OpKind::Exp ||
         kind == OpKind::Convert;
}

bool isWarpOnly(OpKind kind) {
  return kind == OpKind::WarpId || kind == OpKind::Alloc ||
         kind == OpKind::Barrier;
}

//===----------------------------------------------------------------------===//
// Op / function helpers
//===----------------------------------------------------------------------===//

int64_t Op::intAttr(std::string_view key, int64_t fallback) const {
  auto it = attrs.find(key);
  if (it == attrs.end())
    return fallback;
  if (const auto *v = std::get_if<int64_t>(&it->second))
    return *v;
  return fallback;
}

bool Op::boolAttr(std::string_view key, bool fallback) const {
  auto it = attrs.find(key);
  if (it == attrs.end())
    return fallback;
  if (const auto *v = std::get_if<bool>(&it->second))
    return *v;
  return fallback;
}

std::string Op::strAttr(std::string_view key, std::string fallback) const {
  auto it = attrs.find(key);
  if (it == attrs.end())
    return fallback;
  if (const auto *v = std::get_if<std::string>(&it->second))
    return *v;
  return fallback;
}

std::vector<int64_t> Op::listAttr(std::string_view key) const {
  auto it = attrs.find(key);
  if (it == attrs.end())
    return {};
  if (const auto *v = std::get_if<std::vector<int64_t>>(&it->second))
    return *v;
  return {};
}

double Op::floatAttr(std::string_view key, double fallback) const {
  auto it = attrs.find(key);
  if (it == attrs.end())
    return fallback;
  if (const auto *v = std::get_if<double>(&it->second))
    return *v;
  if (const auto *v = std::get_if<int64_t>(&it->second))
    return static_cast<double>(*v);
  return fallback;
}

Value KernelFn::newValue(Type type, std::string name) {
  values.push_back(ValueInfo{std::move(type), std::move(name)});
  return Value{static_cast<uint32_t>(values.size() - 1)};
}

const KernelFn *KernelModule::lookup(std::string_view name) const {
  for (const KernelFn &fn : functions)
    if (fn.name == name)
      return &fn;
  return nullptr;
}

//===----------------------------------------------------------------------===//
// Structural equality
//===----------------------------------------------------------------------===//

namespace {

class EqualityChecker {
public:
  EqualityChecker(const KernelFn &lhs, const KernelFn &rhs, bool names)
      : lhs(lhs), rhs(rhs), names(names) {}

  bool run() {
    if (lhs.name != rhs.name || lhs.isPublic != rhs.isPublic ||
        lhs.numWarps != rhs.numWarps || lhs.warpLevel != rhs.warpLevel)
      return false;
    return regionEq(lhs.body, rhs.body);
  }

private:
  bool bind(Value a, Value b) {
    if (!(lhs.type(a) == rhs.type(b)))
      return false;
    if (names && lhs.nameOf(a) != rhs.nameOf(b))
      return false;
    return map.emplace(a.id, b.id).second;
  }

  bool use(Value a, Value b) {
    auto it = map.find(a.id);
    return it != map.end() && it->second == b.id;
  }

  bool regionEq(const Region &a, const Region &b) {
    if (a.args.size() != b.args.size() || a.ops.size() != b.ops.size())
      return false;
    for (size_t i = 0; i < a.args.size(); ++i)
      if (!bind(a.args[i], b.args[i]))
        return false;
    for (size_t i = 0; i < a.ops.size(); ++i)
      if (!opEq(a.ops[i], b.ops[i]))
        return false;
    return true;
  }

  bool opEq(const Op &a, const Op &b) {
    if (a.kind != b.kind || a.attrs != b.attrs ||
        a.operands.size() != b.operands.size() ||
        a.results.size() != b.results.size() ||
        a.regions.size() != b.regions.size())
      return false;
    for (size_t i = 0; i < a.operands.size(); ++i)
      if (!use(a.operands[i], b.operands[i]))
        return false;
    for (size_t i = 0; i < a.regions.size(); ++i)
      if (!regionEq(a.regions[i], b.regions[i]))
        return false;
    for (size_t i = 0; i < a.results.size(); ++i)
      if (!bind(a.results[i], b.results[i]))
        return false;
    return true;
  }

  const KernelFn &lhs;
  const KernelFn &rhs;
  bool names;
  std::unordered_map<uint32_t, uint32_t> map;
};

} // namespace

bool structurallyEqual(const KernelFn &lhs, const KernelFn &rhs,
                       bool compareNames) {
  return EqualityChecker(lhs, rhs, compareNames).run();
}

bool structurallyEqual(const KernelModule &lhs, const KernelModule &rhs,
                       bool compareNames) {
  if (lhs.functions.size() != rhs.functions.size())
    return false;
  for (size_t i = 0; i < lhs.functions.size(); ++i)
    if (!structurallyEqual(lhs.functions[i], rhs.functions[i], compareNames))
      return false;
  return true;
}

//===----------------------------------------------------------------------===//
// OpBuilder
//===----------------------------------------------------------------------===//

Value OpBuilder::addArg(Type type, std::string name) {
  Value v = fn.newValue(std::move(type), std::move(name));
  region->args.push_back(v);
  return v;
}

size_t OpBuilder::create(OpKind kind, std::vector<Value> operands,
                         std::vector<Type> resultTypes, AttrMap attrs,
                         std::vector<std::string> names) {
  Op op;
  op.kind = kind;
  op.operands = std::move(operands);
  op.attrs = std::move(attrs);
  for (size_t i = 0; i < resultTypes.size(); ++i)
    op.results.push_back(fn.newValue(std::move(resultTypes[i]),
                                     i < names.size() ? names[i] : ""));
  region->ops.push_back(std::move(op));
  return region->ops.size() - 1;
}

Value OpBuilder::create1(OpKind kind, std::vector<Value> operands,
                         Type resultType, AttrMap attrs, std::string name) {
  size_t idx = create(kind, std::move(operands), {std::move(resultType)},
                      std::move(attrs), {std::move(name)});
  return region->ops[idx].results.front();
}

Value OpBuilder::constant(double value, TensorType type, std::string name) {
  Attr attr =
      isFloat(type.elem) ? Attr(value) : Attr(static_cast<int64_t>(value));
  return create1(OpKind::Constant, {}, std::move(type), {{"value", attr}},
                 std::move(name));
}

Value OpBuilder::constantInt(int64_t value, std::string name) {
  return create1(OpKind::Constant, {}, scalarType(ElemType::I32),
                 {{"value", value}}, std::move(name));
}

Region &OpBuilder::enterNewRegion() {
  Op &owner = region->ops.back();
  owner.regions.emplace_back();
  stack.push_back(region);
  region = &owner.regions.back();
  return *region;
}

void OpBuilder::exit() {
  region = stack.back();
  stack.pop_back();
}

} // namespace tilec
