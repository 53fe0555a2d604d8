//===- Sim.cpp - Virtual GPU simulator ------------------------------------===//
//
// Part of the tilec project, under the Apache License v2.0 with LLVM
// Exceptions. See https://llvm.org/LICENSE.txt for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "tilec/Sim.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace tilec {

Tile::Tile(std::vector<int64_t> shape, ElemType elem, double fill)
    : shape(std::move(shape)), elem(elem) {
  int64_t n = 1;
  for (int64_t d : this->shape)
    n *= d;
  data.assign(n, canonicalize(fill, elem));
}

Buffer Buffer::zeros(ElemType elem, std::vector<int64_t> dims) {
  Buffer b;
  b.elem = elem;
  int64_t n = 1;
  for (int64_t d : dims)
    n *= d;
  b.dims = std::move(dims);
  b.data.assign(n, 0.0);
  return b;
}

Buffer Buffer::fromTile(const Tile &tile) {
  Buffer b;
  b.elem = tile.elem;
  b.dims = tile.shape;
  b.data = tile.data;
  return b;
}

bool Buffer::identical(const Buffer &other) const {
  return elem == other.elem && dims == other.dims &&
         data.size() == other.data.size() &&
         std::memcmp(data.data(), other.data.data(),
                     data.size() * sizeof(double)) == 0;
}

bool DeviceMemory::identical(const DeviceMemory &other) const {
  if (size() != other.size())
    return false;
  for (size_t i = 0; i < size(); ++i)
    if (!buffers[i].identical(other.buffers[i]))
      return false;
  return true;
}

std::vector<Tile> crossWarpReduce(const std::vector<Tile> &values,
                                  const std::string &kind,
                                  const std::vector<int64_t> &dstWarps) {
  if (values.empty())
    throw SimError("cross-warp reduce over no warps");
  if (kind != "max" && kind != "sum")
    throw SimError("unknown reduction kind '" + kind + "'");
  for (const Tile &t : values)
    if (t.shape != values[0].shape || t.elem != values[0].elem)
      throw SimError("cross-warp reduce: warps hold different shapes " +
                     shapeStr(values[0].shape) + " and " + shapeStr(t.shape));
  for (int64_t w : dstWarps)
    if (w < 0 || w >= static_cast<int64_t>(values.size()))
      throw SimError("cross-warp reduce: invalid destination warp " +
                     std::to_string(w));
  Tile combined = values[0];
  for (size_t w = 1; w < values.size(); ++w)
    for (size_t i = 0; i < combined.data.size(); ++i) {
      float a = static_cast<float>(combined.data[i]);
      float b = static_cast<float>(values[w].data[i]);
      float r = kind == "max" ? std::fmax(a, b) : a + b;
      combined.data[i] = canonicalize(r, combined.elem);
    }
  std::vector<Tile> out = values;
  for (size_t w = 0; w < values.size(); ++w)
    if (dstWarps.empty() ||
        std::find(dstWarps.begin(), dstWarps.end(), static_cast<int64_t>(w)) !=
            dstWarps.end())
      out[w] = combined;
  return out;
}

namespace {

struct RawPtr {
  bool slm = false;
  size_t buffer = 0;
  int64_t base = 0;
  ElemType elem = ElemType::F32;
};

struct BlockPtr {
  RawPtr raw;
  std::vector<int64_t> shape, strides, offsets, block, order;
};

using Reg = std::variant<std::monostate, Tile, BlockPtr, RawPtr>;

int64_t product(const std::vector<int64_t> &v) {
  int64_t n = 1;
  for (int64_t x : v)
    n *= x;
  return n;
}

std::vector<int64_t> unravel(int64_t index, const std::vector<int64_t> &grid) {
  std::vector<int64_t> c(grid.size());
  for (size_t d = grid.size(); d-- > 0;) {
    c[d] = index % grid[d];
    index /= grid[d];
  }
  return c;
}

double toDouble(const Attr &a) {
  if (const auto *i = std::get_if<int64_t>(&a))
    return static_cast<double>(*i);
  if (const auto *d = std::get_if<double>(&a))
    return *d;
  if (const auto *b = std::get_if<bool>(&a))
    return *b ? 1.0 : 0.0;
  throw SimError("constant value is not numeric");
}

double binary(OpKind kind, ElemType elem, double a, double b) {
  if (isFloat(elem)) {
    float x = static_cast<float>(a), y = static_cast<float>(b), r = 0;
    switch (kind) {
    case OpKind::Add:
      r = x + y;
      break;
    case OpKind::Sub:
      r = x - y;
      break;
    case OpKind::Mul:
      r = x * y;
      break;
    case OpKind::Div:
      r = x / y;
      break;
    case OpKind::Rem:
      r = std::fmod(x, y);
      break;
    case OpKind::Maximum:
      r = std::fmax(x, y);
      break;
    default:
      throw SimError("not an arithmetic op");
    }
    return canonicalize(r, elem);
  }
  int64_t x = static_cast<int64_t>(a), y = static_cast<int64_t>(b), r = 0;
  switch (kind) {
  case OpKind::Add:
    r = x + y;
    break;
  case OpKind::Sub:
    r = x - y;
    break;
  case OpKind::Mul:
    r = x * y;
    break;
  case OpKind::Div:
  case OpKind::Rem:
    if (y == 0)
      throw SimError("integer division by zero");
    r = kind == OpKind::Div ? x / y : x % y;
    break;
  case OpKind::Maximum:
    r = std::max(x, y);
    break;
  default:
    throw SimError("not an arithmetic op");
  }
  return canonicalize(static_cast<double>(r), elem);
}

bool compare(const std::string &pred, double a, double b) {
  if (pred == "eq")
    return a == b;
  if (pred == "ne")
    return a != b;
  if (pred == "lt")
    return a < b;
  if (pred == "le")
    return a <= b;
  if (pred == "gt")
    return a > b;
  if (pred == "ge")
    return a >= b;
  throw SimError("unknown predicate '" + pred + "'");
}

double convert(double v, ElemType from, ElemType to) {
  if (isFloat(from) && !isFloat(to)) {
    if (!std::isfinite(v))
      throw SimError("converting a non-finite value to an integer");
    v = std::trunc(v);
  }
  if (isFloat(to))
    v = static_cast<float>(v);
  return canonicalize(v, to);
}

enum class WarpState { Running, Waiting, Done };

struct Warp {
  size_t pc = 0;
  WarpState state = WarpState::Running;
  std::vector<Reg> regs;
};

class Workgroup {
public:
  Workgroup(const VProgram &prog, const LaunchConfig &launch, DeviceMemory &mem,
            std::array<int64_t, 3> pid, Observer *obs)
      : prog(prog), launch(launch), mem(mem), pid(pid), obs(obs) {
    slm.assign(static_cast<size_t>(launch.target.slmBytes / 2), 0.0);
  }

  void run(const std::vector<Reg> &argRegs) {
    int64_t count = prog.warpLevel ? prog.numWarps : 1;
    warps.resize(count);
    for (Warp &w : warps)
      w.regs = argRegs;
    while (true) {
      for (size_t w = 0; w < warps.size(); ++w)
        if (warps[w].state == WarpState::Running)
          runUntilSync(w);
      bool anyDone = false, anyWaiting = false;
      for (const Warp &w : warps) {
        anyDone |= w.state == WarpState::Done;
        anyWaiting |= w.state == WarpState::Waiting;
      }
      if (!anyWaiting)
        return;
      if (anyDone)
        throw SimError(where(0, warps[0].pc) +
                       "barrier divergence: some warps returned while "
                       "others wait at a synchronization point");
      size_t pc = warps[0].pc;
      for (size_t w = 1; w < warps.size(); ++w)
        if (warps[w].pc != pc)
          throw SimError(where(w, warps[w].pc) +
                         "barrier divergence: warp waits at instruction " +
                         std::to_string(warps[w].pc) + ", warp 0 at " +
                         std::to_string(pc));
      resolve(pc);
    }
  }

private:
  std::string where(size_t warp, size_t pc) const {
    std::string op = pc < prog.instrs.size()
                         ? std::string(opKindName(prog.instrs[pc].op))
                         : "end";
    return "workgroup (" + std::to_string(pid[0]) + "," +
           std::to_string(pid[1]) + "," + std::to_string(pid[2]) + ") warp " +
           std::to_string(warp) + " instr " + std::to_string(pc) + " (" + op +
           "): ";
  }

  void resolve(size_t pc) {
    const VInstr &in = prog.instrs[pc];
    if (in.opcode == VOpcode::CrossWarpReduce) {
      std::vector<Tile> inputs;
      for (Warp &w : warps)
        inputs.push_back(std::get<Tile>(w.regs[in.srcs[0]]));
      std::vector<int64_t> dst;
      auto it = in.attrs.find("dst_warps");
      if (it != in.attrs.end())
        dst = std::get<std::vector<int64_t>>(it->second);
      std::vector<Tile> outputs;
      try {
        outputs = crossWarpReduce(
            inputs, std::get<std::string>(in.attrs.at("kind")), dst);
      } catch (const SimError &e) {
        throw SimError(where(0, pc) + e.what());
      }
      if (obs) {
        CollectiveEvent ev;
        ev.workgroup = pid;
        ev.instr = pc;
        ev.kind = std::get<std::string>(in.attrs.at("kind"));
        ev.dstWarps = dst;
        ev.inputs = inputs;
        ev.outputs = outputs;
        obs->onCollective(ev);
      }
      for (size_t w = 0; w < warps.size(); ++w)
        warps[w].regs[in.dsts[0]] = std::move(outputs[w]);
    }
    for (Warp &w : warps) {
      w.pc = pc + 1;
      w.state = WarpState::Running;
    }
  }

  void runUntilSync(size_t w) {
    Warp &warp = warps[w];
    while (warp.state == WarpState::Running) {
      if (warp.pc >= prog.instrs.size()) {
        warp.state = WarpState::Done;
        return;
      }
      const VInstr &in = prog.instrs[warp.pc];
      if (in.opcode == VOpcode::Barrier ||
          in.opcode == VOpcode::CrossWarpReduce) {
        warp.state = WarpState::Waiting;
        return;
      }
      try {
        step(w, warp, in);
      } catch (const SimError &e) {
        throw SimError(where(w, warp.pc) + e.what());
      }
    }
  }

  const Tile &tile(Warp &w, uint32_t r) {
    if (auto *t = std::get_if<Tile>(&w.regs[r]))
      return *t;
    throw SimError("register " + std::to_string(r) + " does not hold a tile");
  }

  int64_t scalar(Warp &w, uint32_t r) {
    const Tile &t = tile(w, r);
    if (t.numel() != 1)
      throw SimError("expected a scalar");
    return static_cast<int64_t>(t.data[0]);
  }

  const TensorType &resultTensor(const VInstr &in) {
    return asTensor(prog.regTypes[in.dsts[0]]);
  }

  void step(size_t w, Warp &warp, const VInstr &in) {
    size_t next = warp.pc + 1;
    auto &regs = warp.regs;
    switch (in.ctl) {
    case VCtl::ForBegin: {
      int64_t lb = scalar(warp, in.srcs[0]), ub = scalar(warp, in.srcs[1]);
      if (scalar(warp, in.srcs[2]) <= 0)
        throw SimError("loop step must be positive");
      if (lb < ub) {
        regs[in.dsts[0]] = Tile({}, ElemType::I32, static_cast<double>(lb));
        for (size_t i = 3; i < in.srcs.size(); ++i)
          regs[in.dsts[i - 2]] = regs[in.srcs[i]];
      } else {
        for (size_t i = 3; i < in.srcs.size(); ++i)
          regs[in.aux[i - 3]] = regs[in.srcs[i]];
        next = static_cast<size_t>(in.target);
      }
      warp.pc = next;
      return;
    }
    case VCtl::ForEnd: {
      const VInstr &begin = prog.instrs[in.target];
      std::vector<Reg> yielded;
      for (uint32_t r : in.srcs)
        yielded.push_back(regs[r]);
      int64_t iv = scalar(warp, begin.dsts[0]) + scalar(warp, begin.srcs[2]);
      if (iv < scalar(warp, begin.srcs[1])) {
        regs[begin.dsts[0]] = Tile({}, ElemType::I32, static_cast<double>(iv));
        for (size_t i = 0; i < yielded.size(); ++i)
          regs[begin.dsts[i + 1]] = std::move(yielded[i]);
        next = static_cast<size_t>(in.target) + 1;
      } else {
        for (size_t i = 0; i < yielded.size(); ++i)
          regs[begin.aux[i]] = std::move(yielded[i]);
      }
      warp.pc = next;
      return;
    }
    case VCtl::IfBegin:
      if (scalar(warp, in.srcs[0]) == 0)
        next = static_cast<size_t>(in.target);
      warp.pc = next;
      return;
    case VCtl::IfEnd:
      warp.pc = next;
      return;
    case VCtl::Return:
      warp.state = WarpState::Done;
      return;
    case VCtl::None:
      break;
    }
    execute(w, warp, in);
    warp.pc = next;
  }

  void execute(size_t w, Warp &warp, const VInstr &in) {
    auto &regs = warp.regs;
    switch (in.op) {
    case OpKind::GetProgramId: {
      int64_t axis = std::get<int64_t>(in.attrs.at("axis"));
      if (axis < 0 || axis > 2)
        throw SimError("program id axis out of range");
      regs[in.dsts[0]] =
          Tile({}, ElemType::I32, static_cast<double>(pid[axis]));
      return;
    }
    case OpKind::WarpId:
      if (!prog.warpLevel)
        throw SimError("tt.warp_id in a workgroup-level program");
      regs[in.dsts[0]] = Tile({}, ElemType::I32, static_cast<double>(w));
      return;
    case OpKind::Constant: {
      const TensorType &t = resultTensor(in);
      regs[in.dsts[0]] = Tile(t.shape, t.elem, toDouble(in.attrs.at("value")));
      return;
    }
    case OpKind::MakeTensorPtr: {
      const auto *raw = std::get_if<RawPtr>(&regs[in.srcs[0]]);
      if (!raw)
        throw SimError("base is not a raw pointer");
      const PointerType &pt = std::get<PointerType>(prog.regTypes[in.dsts[0]]);
      BlockPtr p;
      p.raw = *raw;
      p.block = pt.block->shape;
      size_t rank = p.block.size();
      for (size_t d = 0; d < rank; ++d) {
        p.shape.push_back(scalar(warp, in.srcs[1 + d]));
        p.strides.push_back(scalar(warp, in.srcs[1 + rank + d]));
        p.offsets.push_back(scalar(warp, in.srcs[1 + 2 * rank + d]));
      }
      auto it = in.attrs.find("order");
      if (it != in.attrs.end())
        p.order = std::get<std::vector<int64_t>>(it->second);
      regs[in.dsts[0]] = std::move(p);
      return;
    }
    case OpKind::Advance: {
      BlockPtr p = std::get<BlockPtr>(regs[in.srcs[0]]);
      for (size_t d = 0; d < p.offsets.size(); ++d)
        p.offsets[d] += scalar(warp, in.srcs[1 + d]);
      regs[in.dsts[0]] = std::move(p);
      return;
    }
    case OpKind::Alloc: {
      const PointerType &pt = std::get<PointerType>(prog.regTypes[in.dsts[0]]);
      const TensorType &block = *pt.block;
      int64_t bytes = block.numel() * elemBytes(block.elem);
      if (in.slmOffset + bytes > launch.target.slmBytes)
        throw SimError("SLM overflow: " + std::to_string(in.slmOffset + bytes) +
                       " bytes needed, " +
                       std::to_string(launch.target.slmBytes) + " available");
      BlockPtr p;
      p.raw = {true, 0, in.slmOffset, block.elem};
      p.block = block.shape;
      p.shape = block.shape;
      p.offsets.assign(block.shape.size(), 0);
      p.strides.assign(block.shape.size(), 1);
      for (size_t d = block.shape.size(); d-- > 1;)
        p.strides[d - 1] = p.strides[d] * block.shape[d];
      regs[in.dsts[0]] = std::move(p);
      return;
    }
    case OpKind::Load: {
      const auto &p = std::get<BlockPtr>(regs[in.srcs[0]]);
      const TensorType &t = resultTensor(in);
      Tile out(t.shape, t.elem);
      access(w, warp.pc, p, false, out);
      regs[in.dsts[0]] = std::move(out);
      return;
    }
    case OpKind::Store: {
      const auto &p = std::get<BlockPtr>(regs[in.srcs[0]]);
      Tile value = tile(warp, in.srcs[1]);
      access(w, warp.pc, p, true, value);
      return;
    }
    case OpKind::Dot:
      regs[in.dsts[0]] = dot(tile(warp, in.srcs[0]), tile(warp, in.srcs[1]),
                             tile(warp, in.srcs[2]));
      return;
    case OpKind::Reduce:
      regs[in.dsts[0]] =
          reduce(tile(warp, in.srcs[0]), std::get<int64_t>(in.attrs.at("axis")),
                 std::get<std::string>(in.attrs.at("kind")));
      return;
    case OpKind::Splat: {
      const TensorType &t = resultTensor(in);
      regs[in.dsts[0]] = Tile(t.shape, t.elem, tile(warp, in.srcs[0]).data[0]);
      return;
    }
    case OpKind::Convert: {
      const Tile &src = tile(warp, in.srcs[0]);
      const TensorType &t = resultTensor(in);
      Tile out(t.shape, t.elem);
      for (size_t i = 0; i < src.data.size(); ++i)
        out.data[i] = convert(src.data[i], src.elem, t.elem);
      regs[in.dsts[0]] = std::move(out);
      return;
    }
    case OpKind::ExpandDims: {
      Tile out = tile(warp, in.srcs[0]);
      out.shape = resultTensor(in).shape;
      regs[in.dsts[0]] = std::move(out);
      return;
    }
    case OpKind::Broadcast:
      regs[in.dsts[0]] =
          broadcast(tile(warp, in.srcs[0]), resultTensor(in).shape);
      return;
    case OpKind::Extract:
      regs[in.dsts[0]] = extract(regs[in.srcs[0]], prog.regTypes[in.dsts[0]],
                                 std::get<int64_t>(in.attrs.at("index")));
      return;
    case OpKind::Glue: {
      std::vector<const Tile *> parts;
      for (uint32_t r : in.srcs)
        parts.push_back(&tile(warp, r));
      regs[in.dsts[0]] = glue(parts, resultTensor(in));
      return;
    }
    case OpKind::Exp: {
      Tile out = tile(warp, in.srcs[0]);
      for (double &v : out.data)
        v = canonicalize(std::exp(static_cast<float>(v)), out.elem);
      regs[in.dsts[0]] = std::move(out);
      return;
    }
    case OpKind::Cmp: {
      const Tile &a = tile(warp, in.srcs[0]), &b = tile(warp, in.srcs[1]);
      const std::string &pred = std::get<std::string>(in.attrs.at("predicate"));
      Tile out(a.shape, ElemType::I1);
      for (size_t i = 0; i < a.data.size(); ++i)
        out.data[i] = compare(pred, a.data[i], b.data[i]) ? 1.0 : 0.0;
      regs[in.dsts[0]] = std::move(out);
      return;
    }
    default:
      break;
    }
    if (isElementwiseBinary(in.op)) {
      const Tile &a = tile(warp, in.srcs[0]), &b = tile(warp, in.srcs[1]);
      if (a.shape != b.shape)
        throw SimError("operand shapes differ");
      Tile out(a.shape, a.elem);
      for (size_t i = 0; i < a.data.size(); ++i)
        out.data[i] = binary(in.op, a.elem, a.data[i], b.data[i]);
      regs[in.dsts[0]] = std::move(out);
      return;
    }
    throw SimError("cannot execute " + std::string(opKindName(in.op)));
  }

  void access(size_t w, size_t pc, const BlockPtr &p, bool store, Tile &t) {
    if (product(p.block) != t.numel())
      throw SimError("block " + shapeStr(p.block) + " does not match " +
                     shapeStr(t.shape));
    if (obs) {
      AccessEvent ev;
      ev.workgroup = pid;
      ev.warp = static_cast<int64_t>(w);
      ev.instr = pc;
      ev.store = store;
      ev.slm = p.raw.slm;
      ev.buffer = p.raw.buffer;
      ev.offsets = p.offsets;
      ev.block = p.block;
      obs->onAccess(ev);
    }
    Buffer *buf = p.raw.slm ? nullptr : &mem[p.raw.buffer];
    int64_t bytes = elemBytes(p.raw.elem);
    size_t rank = p.block.size();
    std::vector<int64_t> idx(rank, 0);
    for (int64_t e = 0; e < t.numel(); ++e) {
      int64_t addr = p.raw.base;
      if (p.raw.slm)
        addr = 0;
      for (size_t d = 0; d < rank; ++d) {
        int64_t c = p.offsets[d] + idx[d];
        if (c < 0 || c >= p.shape[d])
          throw SimError(std::string("out-of-bounds block ") +
                         (store ? "store" : "load") + ": offsets " +
                         shapeStr(p.offsets) + " block " + shapeStr(p.block) +
                         " exceed tensor shape " + shapeStr(p.shape));
        addr += c * p.strides[d];
      }
      if (p.raw.slm) {
        int64_t byte = p.raw.base + addr * bytes;
        if (byte < 0 || byte + bytes > launch.target.slmBytes)
          throw SimError("out-of-bounds SLM access at byte " +
                         std::to_string(byte));
        double &slot = slm[static_cast<size_t>(byte / 2)];
        if (store)
          slot = canonicalize(t.data[e], p.raw.elem);
        else
          t.data[e] = canonicalize(slot, t.elem);
      } else {
        if (addr < 0 || addr >= buf->numel())
          throw SimError("out-of-bounds access at element " +
                         std::to_string(addr) + " of a buffer of " +
                         std::to_string(buf->numel()));
        if (store)
          buf->data[addr] = canonicalize(t.data[e], buf->elem);
        else
          t.data[e] = canonicalize(buf->data[addr], t.elem);
      }
      for (size_t d = rank; d-- > 0;) {
        if (++idx[d] < p.block[d])
          break;
        idx[d] = 0;
      }
    }
  }

  static Tile dot(const Tile &a, const Tile &b, const Tile &c) {
    int64_t m = a.shape[0], k = a.shape[1], n = b.shape[1];
    if (b.shape[0] != k || c.shape[0] != m || c.shape[1] != n)
      throw SimError("dot shape mismatch");
    Tile out = c;
    std::vector<float> bf(b.data.begin(), b.data.end());
    for (int64_t i = 0; i < m; ++i)
      for (int64_t j = 0; j < n; ++j) {
        float acc = static_cast<float>(c.at(i, j));
        for (int64_t kk = 0; kk < k; ++kk)
          acc = acc + static_cast<float>(a.at(i, kk)) * bf[kk * n + j];
        out.at(i, j) = acc;
      }
    return out;
  }

  static Tile reduce(const Tile &src, int64_t axis, const std::string &kind) {
    bool isMax = kind == "max";
    std::vector<int64_t> shape = src.shape;
    shape.erase(shape.begin() + axis);
    Tile out(shape, src.elem);
    int64_t len = src.shape[axis];
    int64_t inner = 1;
    for (size_t d = axis + 1; d < src.shape.size(); ++d)
      inner *= src.shape[d];
    int64_t outer = src.numel() / (len * inner);
    for (int64_t o = 0; o < outer; ++o)
      for (int64_t i = 0; i < inner; ++i) {
        double acc = src.data[o * len * inner + i];
        for (int64_t l = 1; l < len; ++l) {
          double v = src.data[(o * len + l) * inner + i];
          if (isFloat(src.elem)) {
            float x = static_cast<float>(acc), y = static_cast<float>(v);
            acc = canonicalize(isMax ? std::fmax(x, y) : x + y, src.elem);
          } else {
            acc = canonicalize(isMax ? std::max(acc, v) : acc + v, src.elem);
          }
        }
        out.data[o * inner + i] = acc;
      }
    return out;
  }

  static Tile broadcast(const Tile &src, const std::vector<int64_t> &shape) {
    Tile out(shape, src.elem);
    for (int64_t e = 0; e < out.numel(); ++e) {
      std::vector<int64_t> c = unravel(e, shape);
      int64_t s = 0;
      for (size_t d = 0; d < shape.size(); ++d)
        s = s * src.shape[d] + (src.shape[d] == 1 ? 0 : c[d]);
      out.data[e] = src.data[s];
    }
    return out;
  }

  static Reg extract(const Reg &src, const Type &resultType, int64_t index) {
    const TensorType &rt = *shapedPart(resultType);
    if (const auto *p = std::get_if<BlockPtr>(&src)) {
      std::vector<int64_t> grid(p->block.size());
      for (size_t d = 0; d < grid.size(); ++d)
        grid[d] = p->block[d] / rt.shape[d];
      std::vector<int64_t> c = unravel(index, grid);
      BlockPtr out = *p;
      for (size_t d = 0; d < grid.size(); ++d)
        out.offsets[d] += c[d] * rt.shape[d];
      out.block = rt.shape;
      return out;
    }
    const Tile &t = std::get<Tile>(src);
    std::vector<int64_t> grid(t.shape.size());
    for (size_t d = 0; d < grid.size(); ++d)
      grid[d] = t.shape[d] / rt.shape[d];
    std::vector<int64_t> c = unravel(index, grid);
    Tile out(rt.shape, t.elem);
    for (int64_t e = 0; e < out.numel(); ++e) {
      std::vector<int64_t> local = unravel(e, rt.shape);
      int64_t s = 0;
      for (size_t d = 0; d < grid.size(); ++d)
        s = s * t.shape[d] + c[d] * rt.shape[d] + local[d];
      out.data[e] = t.data[s];
    }
    return out;
  }

  static Tile glue(const std::vector<const Tile *> &parts,
                   const TensorType &rt) {
    const std::vector<int64_t> &ps = parts[0]->shape;
    std::vector<int64_t> grid(ps.size());
    for (size_t d = 0; d < grid.size(); ++d)
      grid[d] = rt.shape[d] / ps[d];
    Tile out(rt.shape, rt.elem);
    for (size_t p = 0; p < parts.size(); ++p) {
      std::vector<int64_t> c = unravel(static_cast<int64_t>(p), grid);
      for (int64_t e = 0; e < parts[p]->numel(); ++e) {
        std::vector<int64_t> local = unravel(e, ps);
        int64_t s = 0;
        for (size_t d = 0; d < grid.size(); ++d)
          s = s * rt.shape[d] + c[d] * ps[d] + local[d];
        out.data[s] = parts[p]->data[e];
      }
    }
    return out;
  }

  const VProgram &prog;
  const LaunchConfig &launch;
  DeviceMemory &mem;
  std::array<int64_t, 3> pid;
  Observer *obs;
  std::vector<Warp> warps;
  std::vector<double> slm;
};

} // namespace

void run(const VProgram &prog, const LaunchConfig &launch, DeviceMemory &mem,
         const std::vector<KernelArg> &args, Observer *observer) {
  if (launch.numWarps != 0 && launch.numWarps != prog.numWarps)
    throw SimError("launch asks for " + std::to_string(launch.numWarps) +
                   " warps but @" + prog.name + " is compiled for " +
                   std::to_string(prog.numWarps));
  for (int64_t g : launch.grid)
    if (g < 1)
      throw SimError("grid dimensions must be at least 1");
  if (args.size() != prog.args.size())
    throw SimError("@" + prog.name + " expects " +
                   std::to_string(prog.args.size()) + " arguments, got " +
                   std::to_string(args.size()));
  std::vector<Reg> regs(prog.regTypes.size());
  for (size_t i = 0; i < args.size(); ++i) {
    uint32_t r = prog.args[i];
    const Type &type = prog.regTypes[r];
    if (const auto *p = std::get_if<PointerType>(&type)) {
      const auto *ref = std::get_if<BufferRef>(&args[i]);
      if (!ref || ref->index >= mem.size())
        throw SimError("argument " + std::to_string(i) + " must be a buffer");
      if (mem[ref->index].elem != p->elem)
        throw SimError("argument " + std::to_string(i) + " expects a " +
                       std::string(elemName(p->elem)) + " buffer");
      regs[r] = RawPtr{false, ref->index, 0, p->elem};
    } else {
      ElemType elem = asTensor(type).elem;
      double v = 0;
      if (const auto *iv = std::get_if<int64_t>(&args[i]))
        v = static_cast<double>(*iv);
      else if (const auto *dv = std::get_if<double>(&args[i]))
        v = *dv;
      else
        throw SimError("argument " + std::to_string(i) + " must be a scalar");
      regs[r] = Tile({}, elem, v);
    }
  }
  int64_t total = launch.grid[0] * launch.grid[1] * launch.grid[2];
  std::vector<int64_t> order = launch.schedule;
  if (order.empty())
    for (int64_t i = 0; i < total; ++i)
      order.push_back(i);
  std::vector<int64_t> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  for (int64_t i = 0; i < total; ++i)
    if (static_cast<int64_t>(sorted.size()) != total || sorted[i] != i)
      throw SimError("schedule is not a permutation of the grid");
  for (int64_t linear : order) {
    std::array<int64_t, 3> pid = {linear % launch.grid[0],
                                  linear / launch.grid[0] % launch.grid[1],
                                  linear / (launch.grid[0] * launch.grid[1])};
    Workgroup(prog, launch, mem, pid, observer).run(regs);
  }
}

void run(const KernelFn &fn, const LaunchConfig &launch, DeviceMemory &mem,
         const std::vector<KernelArg> &args, Observer *observer) {
  run(linearize(fn, launch.target), launch, mem, args, observer);
}

namespace {

constexpr char kMagic[4] = {'T', 'L', 'C', 'T'};

template <typename T> void putLE(std::ostream &os, T v) {
  for (size_t i = 0; i < sizeof(T); ++i)
    os.put(static_cast<char>((static_cast<uint64_t>(v) >> (8 * i)) & 0xff));
}

template <typename T> T getLE(std::istream &is) {
  uint64_t v = 0;
  for (size_t i = 0; i < sizeof(T); ++i) {
    int c = is.get();
    if (c == EOF)
      throw SimError("truncated tensor file");
    v |= static_cast<uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return static_cast<T>(v);
}

} // namespace

void writeTensor(std::ostream &os, const Buffer &buffer) {
  os.write(kMagic, 4);
  putLE<uint32_t>(os, 1);
  putLE<uint32_t>(os, static_cast<uint32_t>(buffer.elem));
  putLE<uint32_t>(os, static_cast<uint32_t>(buffer.dims.size()));
  for (int64_t d : buffer.dims)
    putLE<uint64_t>(os, static_cast<uint64_t>(d));
  for (double v : buffer.data) {
    switch (buffer.elem) {
    case ElemType::F16:
      putLE<uint16_t>(os, f32ToF16Bits(static_cast<float>(v)));
      break;
    case ElemType::F32: {
      float f = static_cast<float>(v);
      uint32_t bits;
      std::memcpy(&bits, &f, 4);
      putLE<uint32_t>(os, bits);
      break;
    }
    case ElemType::I32:
      putLE<uint32_t>(os, static_cast<uint32_t>(static_cast<int32_t>(v)));
      break;
    case ElemType::I1:
      putLE<uint8_t>(os, v != 0 ? 1 : 0);
      break;
    }
  }
}

Buffer readTensor(std::istream &is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw SimError("not a tensor file (bad magic)");
  if (getLE<uint32_t>(is) != 1)
    throw SimError("unsupported tensor file version");
  uint32_t tag = getLE<uint32_t>(is);
  if (tag > static_cast<uint32_t>(ElemType::I1))
    throw SimError("unknown element tag " + std::to_string(tag));
  std::vector<int64_t> dims(getLE<uint32_t>(is));
  for (int64_t &d : dims)
    d = static_cast<int64_t>(getLE<uint64_t>(is));
  Buffer b = Buffer::zeros(static_cast<ElemType>(tag), dims);
  for (double &v : b.data) {
    switch (b.elem) {
    case ElemType::F16:
      v = f16BitsToF32(getLE<uint16_t>(is));
      break;
    case ElemType::F32: {
      uint32_t bits = getLE<uint32_t>(is);
      float f;
      std::memcpy(&f, &bits, 4);
      v = f;
      break;
    }
    case ElemType::I32:
      v = static_cast<int32_t>(getLE<uint32_t>(is));
      break;
    case ElemType::I1:
      v = getLE<uint8_t>(is) ? 1.0 : 0.0;
      break;
    }
  }
  return b;
}

void saveTensor(const std::string &path, const Buffer &buffer) {
  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw SimError("cannot write " + path);
  writeTensor(os, buffer);
}

Buffer loadTensor(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw SimError("cannot read " + path);
  return readTensor(is);
}

} // namespace tilec
