//===- IR.h - Core SSA IR ---------------------------------------*- C++ -*-===//
//
// Part of the tilec project, under the Apache License v2.0 with LLVM
// Exceptions. See https://llvm.org/LICENSE.txt for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#ifndef TILEC_IR_H
#define TILEC_IR_H

#include "tilec/Layouts.h"
#include "tilec/Numeric.h"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace tilec {

//===----------------------------------------------------------------------===//
// Types
//===----------------------------------------------------------------------===//

/// A tensor of rank 0 to 2. Rank 0 is a scalar; scalars never carry an
/// encoding.
struct TensorType {
  std::vector<int64_t> shape;
  ElemType elem = ElemType::F32;
  std::optional<LayoutEncoding> encoding;

  bool isScalar() const { return shape.empty(); }
  int64_t numel() const;
  TensorType withShape(std::vector<int64_t> newShape) const;
  TensorType withoutEncoding() const;

  friend bool operator==(const TensorType &, const TensorType &) = default;
};

/// `!tt.ptr<f16>` when `block` is empty (a raw kernel argument), otherwise a
/// block pointer `!tt.ptr<tensor<...>>` addressing tiles of `block`'s shape.
struct PointerType {
  ElemType elem = ElemType::F32;
  std::optional<TensorType> block;

  bool isBlock() const { return block.has_value(); }

  friend bool operator==(const PointerType &, const PointerType &) = default;
};

using Type = std::variant<TensorType, PointerType>;

inline bool isTensor(const Type &type) {
  return std::holds_alternative<TensorType>(type);
}
inline bool isPointer(const Type &type) {
  return std::holds_alternative<PointerType>(type);
}
inline const TensorType &asTensor(const Type &type) {
  return std::get<TensorType>(type);
}
inline const PointerType &asPointer(const Type &type) {
  return std::get<PointerType>(type);
}
inline bool isScalarType(const Type &type) {
  return isTensor(type) && asTensor(type).isScalar();
}

TensorType scalarType(ElemType elem);
TensorType tensorType(std::vector<int64_t> shape, ElemType elem,
                      std::optional<LayoutEncoding> encoding = std::nullopt);

/// The tensor shape a value partitions: the tensor itself, or the block of a
/// block pointer. Null for scalars-free raw pointers.
const TensorType *shapedPart(const Type &type);
TensorType *shapedPart(Type &type);

/// Encoding attached to a tensor or block pointer, if any.
const LayoutEncoding *encodingOf(const Type &type);
void setEncoding(Type &type, std::optional<LayoutEncoding> encoding);

/// Inline rendering with encodings spelled out, used in diagnostics.
std::string typeStr(const Type &type);
std::string shapeStr(const std::vector<int64_t> &shape);

//===----------------------------------------------------------------------===//
// Operations
//===----------------------------------------------------------------------===//

enum class OpKind : uint8_t {
  GetProgramId,
  WarpId,
  MakeTensorPtr,
  Advance,
  Load,
  Store,
  Dot,
  Reduce,
  Splat,
  Convert,
  ExpandDims,
  Broadcast,
  Alloc,
  Barrier,
  Extract,
  Glue,
  Return,
  Constant,
  Add,
  Sub,
  Mul,
  Div,
  Rem,
  Maximum,
  Cmp,
  Exp,
  For,
  If,
  Yield,
};

std::string_view opKindName(OpKind kind);
std::optional<OpKind> parseOpKind(std::string_view name);

bool isElementwiseBinary(OpKind kind);
bool isElementwise(OpKind kind);
/// Ops that exist only once a kernel is expressed per warp.
bool isWarpOnly(OpKind kind);

using Attr =
    std::variant<int64_t, double, bool, std::string, std::vector<int64_t>>;
using AttrMap = std::map<std::string, Attr, std::less<>>;

struct Value {
  uint32_t id = UINT32_MAX;

  bool valid() const { return id != UINT32_MAX; }
  friend bool operator==(Value, Value) = default;
  friend auto operator<=>(Value, Value) = default;
};

struct Region;

struct Op {
  OpKind kind = OpKind::Return;
  std::vector<Value> operands;
  std::vector<Value> results;
  AttrMap attrs;
  std::vector<Region> regions;

  bool hasAttr(std::string_view key) const {
    return attrs.find(key) != attrs.end();
  }
  int64_t intAttr(std::string_view key, int64_t fallback = 0) const;
  bool boolAttr(std::string_view key, bool fallback = false) const;
  std::string strAttr(std::string_view key, std::string fallback = {}) const;
  std::vector<int64_t> listAttr(std::string_view key) const;
  double floatAttr(std::string_view key, double fallback = 0.0) const;
};

struct Region {
  std::vector<Value> args;
  std::vector<Op> ops;
};

struct ValueInfo {
  Type type;
  std::string name;
};

struct KernelFn {
  std::string name;
  bool isPublic = false;
  int64_t numWarps = 1;
  bool warpLevel = false;
  std::vector<ValueInfo> values;
  /// Body region; its arguments are the kernel arguments.
  Region body;

  const Type &type(Value v) const { return values.at(v.id).type; }
  Type &type(Value v) { return values.at(v.id).type; }
  const std::string &nameOf(Value v) const { return values.at(v.id).name; }
  Value newValue(Type type, std::string name = {});
};

struct KernelModule {
  std::vector<KernelFn> functions;

  const KernelFn *lookup(std::string_view name) const;
};

/// Walks every op in pre-order, descending into regions.
template <typename Fn> void walk(const Region &region, Fn &&fn) {
  for (const Op &op : region.ops) {
    fn(op);
    for (const Region &nested : op.regions)
      walk(nested, fn);
  }
}
template <typename Fn> void walk(Region &region, Fn &&fn) {
  for (Op &op : region.ops) {
    fn(op);
    for (Region &nested : op.regions)
      walk(nested, fn);
  }
}

/// Structural equality. Value ids are matched positionally in definition
/// order; name hints are compared only when `compareNames` is set.
bool structurallyEqual(const KernelFn &lhs, const KernelFn &rhs,
                       bool compareNames = false);
bool structurallyEqual(const KernelModule &lhs, const KernelModule &rhs,
                       bool compareNames = false);

//===----------------------------------------------------------------------===//
// Builder
//===----------------------------------------------------------------------===//

/// Appends ops to a region of a function. Regions of ops created through the
/// builder may be entered with `enter`, which keeps the previous insertion
/// point on a stack until `exit`.
class OpBuilder {
public:
  explicit OpBuilder(KernelFn &fn) : fn(fn), region(&fn.body) {}
  OpBuilder(KernelFn &fn, Region &region) : fn(fn), region(&region) {}

  KernelFn &function() { return fn; }
  Region &insertionRegion() { return *region; }

  Value addArg(Type type, std::string name = {});

  /// Creates an op with fresh results of `resultTypes` and returns its index
  /// in the current region.
  size_t create(OpKind kind, std::vector<Value> operands,
                std::vector<Type> resultTypes, AttrMap attrs = {},
                std::vector<std::string> names = {});
  /// Single-result convenience.
  Value create1(OpKind kind, std::vector<Value> operands, Type resultType,
                AttrMap attrs = {}, std::string name = {});

  Value constant(double value, TensorType type, std::string name = {});
  Value constantInt(int64_t value, std::string name = {});

  Op &op(size_t index) { return region->ops[index]; }
  Op &last() { return region->ops.back(); }

  /// Adds an empty region to the last op and makes it the insertion point.
  Region &enterNewRegion();
  void exit();

private:
  KernelFn &fn;
  Region *region;
  std::vector<Region *> stack;
};

} // namespace tilec

#endif // TILEC_IR_H
