//===- Visa.cpp - Lowering to the virtual ISA -----------------------------===//
//
// Part of the tilec project, under the Apache License v2.0 with LLVM
// Exceptions. See https://llvm.org/LICENSE.txt for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "tilec/VISA.h"
#include "tilec/Passes.h"
#include "tilec/TextIO.h"

#include <functional>
#include <set>
#include <sstream>

namespace tilec {

std::string_view vopcodeName(VOpcode op) {
  switch (op) {
  case VOpcode::Block2dLoad:
    return "block2d_load";
  case VOpcode::Block2dStore:
    return "block2d_store";
  case VOpcode::Mma:
    return "mma";
  case VOpcode::Extract:
    return "extract";
  case VOpcode::Glue:
    return "glue";
  case VOpcode::ReduceLane:
    return "reduce_lane";
  case VOpcode::CrossWarpReduce:
    return "cross_warp_reduce";
  case VOpcode::Barrier:
    return "barrier";
  case VOpcode::SlmAlloc:
    return "slm_alloc";
  case VOpcode::Alu:
    return "alu";
  case VOpcode::Mov:
    return "mov";
  case VOpcode::LoopCtl:
    return "loop_ctl";
  }
  return "?";
}

namespace {

VOpcode opcodeFor(const Op &op) {
  switch (op.kind) {
  case OpKind::Load:
    return VOpcode::Block2dLoad;
  case OpKind::Store:
    return VOpcode::Block2dStore;
  case OpKind::Dot:
    return VOpcode::Mma;
  case OpKind::Extract:
    return VOpcode::Extract;
  case OpKind::Glue:
    return VOpcode::Glue;
  case OpKind::Reduce:
    return op.boolAttr("cross_warp") ? VOpcode::CrossWarpReduce
                                     : VOpcode::ReduceLane;
  case OpKind::Barrier:
    return VOpcode::Barrier;
  case OpKind::Alloc:
    return VOpcode::SlmAlloc;
  case OpKind::Advance:
  case OpKind::Convert:
  case OpKind::Exp:
    return VOpcode::Alu;
  case OpKind::For:
  case OpKind::If:
  case OpKind::Yield:
  case OpKind::Return:
    return VOpcode::LoopCtl;
  default:
    return isElementwiseBinary(op.kind) ? VOpcode::Alu : VOpcode::Mov;
  }
}

bool isVector(const Type &type) {
  const auto *t = std::get_if<TensorType>(&type);
  return t && !t->isScalar();
}

class Linearizer {
public:
  Linearizer(const KernelFn &fn, const TargetConfig &target)
      : fn(fn), target(target) {}

  VProgram run() {
    prog.name = fn.name;
    prog.numWarps = fn.numWarps;
    prog.warpLevel = fn.warpLevel;
    prog.style = target.style;
    prog.threadsPerWarp = target.threadsPerWarp;
    for (const ValueInfo &info : fn.values) {
      prog.regTypes.push_back(info.type);
      prog.regNames.push_back(info.name);
    }
    for (Value arg : fn.body.args)
      prog.args.push_back(arg.id);
    findDotRhs();
    emitRegion(fn.body);
    return std::move(prog);
  }

private:
  void findDotRhs() {
    std::vector<const Op *> ops;
    walk(fn.body, [&](const Op &op) { ops.push_back(&op); });
    for (const Op *op : ops)
      if (op->kind == OpKind::Dot)
        rhs.insert(op->operands[1].id);
    for (auto it = ops.rbegin(); it != ops.rend(); ++it) {
      const Op &op = **it;
      if ((op.kind == OpKind::Extract || op.kind == OpKind::Glue) &&
          rhs.count(op.results[0].id))
        for (Value v : op.operands)
          rhs.insert(v.id);
    }
  }

  static std::vector<uint32_t> ids(const std::vector<Value> &values) {
    std::vector<uint32_t> out;
    for (Value v : values)
      out.push_back(v.id);
    return out;
  }

  void emitRegion(const Region &region) {
    for (const Op &op : region.ops)
      emitOp(op);
  }

  void emitOp(const Op &op) {
    VInstr in;
    in.opcode = opcodeFor(op);
    in.op = op.kind;
    in.attrs = op.attrs;
    switch (op.kind) {
    case OpKind::For: {
      in.ctl = VCtl::ForBegin;
      in.srcs = ids(op.operands);
      in.dsts = ids(op.regions[0].args);
      in.aux = ids(op.results);
      size_t begin = prog.instrs.size();
      prog.instrs.push_back(std::move(in));
      loops.push_back(begin);
      emitRegion(op.regions[0]);
      loops.pop_back();
      prog.instrs[begin].target = static_cast<int64_t>(prog.instrs.size());
      return;
    }
    case OpKind::Yield:
      in.ctl = VCtl::ForEnd;
      in.srcs = ids(op.operands);
      in.target = static_cast<int64_t>(loops.back());
      prog.instrs.push_back(std::move(in));
      return;
    case OpKind::If: {
      in.ctl = VCtl::IfBegin;
      in.srcs = ids(op.operands);
      size_t begin = prog.instrs.size();
      prog.instrs.push_back(std::move(in));
      emitRegion(op.regions[0]);
      VInstr end;
      end.opcode = VOpcode::LoopCtl;
      end.op = OpKind::If;
      end.ctl = VCtl::IfEnd;
      prog.instrs.push_back(std::move(end));
      prog.instrs[begin].target = static_cast<int64_t>(prog.instrs.size());
      return;
    }
    case OpKind::Return:
      in.ctl = VCtl::Return;
      prog.instrs.push_back(std::move(in));
      return;
    default:
      break;
    }
    in.srcs = ids(op.operands);
    in.dsts = ids(op.results);
    if (op.kind == OpKind::Alloc) {
      const TensorType &block =
          *std::get<PointerType>(fn.type(op.results[0])).block;
      int64_t bytes = block.numel() * elemBytes(block.elem);
      in.slmOffset = prog.slmBytesUsed;
      prog.slmBytesUsed += (bytes + 15) / 16 * 16;
    }
    setWidths(op, in);
    prog.instrs.push_back(std::move(in));
  }

  void setWidths(const Op &op, VInstr &in) {
    std::optional<Value> data;
    if (op.kind == OpKind::Store)
      data = op.operands[1];
    else if (!op.results.empty())
      data = op.results[0];
    else if (!op.operands.empty())
      data = op.operands[0];
    if (!data || !isVector(fn.type(*data)))
      return;
    bool vector = false;
    for (Value v : op.operands)
      vector |= isVector(fn.type(v));
    for (Value v : op.results)
      vector |= isVector(fn.type(v));
    if (!vector)
      return;
    const TensorType &t = asTensor(fn.type(*data));
    in.shape = t.shape;
    in.elem = t.elem;
    int64_t n = t.numel();
    int64_t tpw = target.threadsPerWarp;
    bool simt = target.style == CodegenStyle::Simt;
    in.vectorLen = simt ? std::max<int64_t>(n / tpw, 1) : n;

    auto packed = [&](const TensorType &tt, bool vnni) {
      int64_t count = tt.numel();
      if (tt.elem == ElemType::F16) {
        if (simt)
          return vnni ? std::pair{std::string("i32"), count / 2 / tpw}
                      : std::pair{std::string("i16"), count / tpw};
        return std::pair{std::string("i32"), count / 2};
      }
      return std::pair{std::string("i32"), simt ? count / tpw : count};
    };
    auto vec = [](const std::pair<std::string, int64_t> &p) {
      return "v" + std::to_string(p.second) + p.first;
    };

    if (op.kind == OpKind::Load || op.kind == OpKind::Store) {
      bool vnni = op.kind == OpKind::Load && rhs.count(op.results[0].id);
      auto p = packed(t, vnni);
      in.packedType = p.first;
      in.packedLen = p.second;
      if (op.kind == OpKind::Load)
        in.mnemonic = (simt ? "2DBlockRead." : "load2d.stateless.") + vec(p);
      else
        in.mnemonic = (simt ? "2DBlockWrite." : "store2d.stateless.") + vec(p);
    } else if (op.kind == OpKind::Dot) {
      const TensorType &a = asTensor(fn.type(op.operands[0]));
      const TensorType &b = asTensor(fn.type(op.operands[1]));
      int64_t acc = simt ? n / tpw : n;
      in.packedType = "f32";
      in.packedLen = acc;
      std::string accStr = "v" + std::to_string(acc) + "f32";
      if (simt)
        in.mnemonic = "dpas." + accStr + "." + vec(packed(a, false)) + "." +
                      vec(packed(b, true));
      else
        in.mnemonic = "dpas2." + accStr + "." + vec(packed(b, true)) + "." +
                      vec(packed(a, false));
    }
  }

  const KernelFn &fn;
  const TargetConfig &target;
  VProgram prog;
  std::vector<size_t> loops;
  std::set<uint32_t> rhs;
};

void checkIntrinsicLevel(const KernelFn &fn, const TargetConfig &target,
                         const VProgram &prog) {
  std::vector<std::string> diags;
  auto err = [&](const std::string &msg) {
    diags.push_back("@" + fn.name + ": " + msg);
  };
  if (!fn.warpLevel)
    err("lowering expects an intrinsic-level function");
  walk(fn.body, [&](const Op &op) {
    auto fitsLoad = [&](const std::vector<int64_t> &shape) {
      if (shape.size() == 1)
        return shape[0] <= target.maxLoad[1];
      return shape.size() != 2 ||
             (shape[0] <= target.maxLoad[0] && shape[1] <= target.maxLoad[1]);
    };
    if (op.kind == OpKind::Load || op.kind == OpKind::Store) {
      Value data = op.kind == OpKind::Load ? op.results[0] : op.operands[1];
      const TensorType &t = asTensor(fn.type(data));
      if (!fitsLoad(t.shape))
        err(std::string(opKindName(op.kind)) + " of " + shapeStr(t.shape) +
            " exceeds the target load shape");
    } else if (op.kind == OpKind::Dot) {
      const auto &r = asTensor(fn.type(op.results[0])).shape;
      const auto &a = asTensor(fn.type(op.operands[0])).shape;
      bool m = r[0] == target.maxDotM || r[0] < target.maxDotM;
      if (!m || r[1] != target.maxDotN || a[1] != target.maxDotK)
        err("tt.dot " + shapeStr(r) + " = " + shapeStr(a) +
            " * ... does not match the target dot shape");
    }
  });
  if (target.style == CodegenStyle::Simt) {
    for (const VInstr &in : prog.instrs) {
      if (in.isUniform())
        continue;
      int64_t n = 1;
      for (int64_t d : in.shape)
        n *= d;
      if (n % target.threadsPerWarp != 0)
        err(std::string(vopcodeName(in.opcode)) + " of " + shapeStr(in.shape) +
            " is not divisible by threadsPerWarp " +
            std::to_string(target.threadsPerWarp));
    }
  }
  if (prog.slmBytesUsed > target.slmBytes)
    err("SLM allocations need " + std::to_string(prog.slmBytesUsed) +
        " bytes, target has " + std::to_string(target.slmBytes));
  if (!diags.empty())
    throw CompileError(diags);
}

std::string regName(const VProgram &prog, uint32_t id) {
  const std::string &n = prog.regNames[id];
  return "%" + (n.empty() ? std::to_string(id) : n + "." + std::to_string(id));
}

std::string attrStr(const Attr &a) {
  if (const auto *i = std::get_if<int64_t>(&a))
    return std::to_string(*i);
  if (const auto *d = std::get_if<double>(&a))
    return formatFloat(*d);
  if (const auto *b = std::get_if<bool>(&a))
    return *b ? "true" : "false";
  if (const auto *s = std::get_if<std::string>(&a))
    return "\"" + *s + "\"";
  std::string out = "[";
  const auto &l = std::get<std::vector<int64_t>>(a);
  for (size_t i = 0; i < l.size(); ++i)
    out += (i ? ", " : "") + std::to_string(l[i]);
  return out + "]";
}

} // namespace

VProgram linearize(const KernelFn &fn, const TargetConfig &target) {
  return Linearizer(fn, target).run();
}

VProgram lower(const KernelFn &fn, const TargetConfig &target) {
  VProgram prog = linearize(fn, target);
  checkIntrinsicLevel(fn, target, prog);
  return prog;
}

std::string disassemble(const VProgram &prog) {
  std::ostringstream os;
  os << "vprogram @" << prog.name << " num_warps=" << prog.numWarps
     << " style=" << styleName(prog.style)
     << " threads_per_warp=" << prog.threadsPerWarp
     << " slm_bytes=" << prog.slmBytesUsed << "\n";
  os << "args";
  for (uint32_t a : prog.args)
    os << " " << regName(prog, a);
  os << "\n";
  int depth = 0;
  for (size_t i = 0; i < prog.instrs.size(); ++i) {
    const VInstr &in = prog.instrs[i];
    if (in.ctl == VCtl::ForEnd || in.ctl == VCtl::IfEnd)
      --depth;
    std::string line = std::to_string(i);
    line.insert(0, line.size() < 4 ? 4 - line.size() : 0, ' ');
    os << line << ": " << std::string(2 * depth, ' ') << vopcodeName(in.opcode)
       << "." << opKindName(in.op);
    switch (in.ctl) {
    case VCtl::ForBegin:
      os << ".begin";
      break;
    case VCtl::ForEnd:
      os << ".end";
      break;
    case VCtl::IfBegin:
      os << ".begin";
      break;
    case VCtl::IfEnd:
      os << ".end";
      break;
    default:
      break;
    }
    if (!in.dsts.empty()) {
      os << " ";
      for (size_t k = 0; k < in.dsts.size(); ++k)
        os << (k ? ", " : "") << regName(prog, in.dsts[k]);
      os << " =";
    }
    for (size_t k = 0; k < in.srcs.size(); ++k)
      os << (k ? ", " : " ") << regName(prog, in.srcs[k]);
    if (!in.aux.empty()) {
      os << " ->";
      for (size_t k = 0; k < in.aux.size(); ++k)
        os << (k ? ", " : " ") << regName(prog, in.aux[k]);
    }
    if (!in.attrs.empty()) {
      os << " {";
      bool first = true;
      for (const auto &[k, v] : in.attrs) {
        os << (first ? "" : ", ") << k << " = " << attrStr(v);
        first = false;
      }
      os << "}";
    }
    if (in.target >= 0)
      os << " @" << in.target;
    if (in.opcode == VOpcode::SlmAlloc)
      os << " slm+" << in.slmOffset;
    if (!in.isUniform()) {
      os << " : " << shapeStr(in.shape) << "x" << elemName(in.elem)
         << " len=" << in.vectorLen;
      if (!in.mnemonic.empty())
        os << " ; " << in.mnemonic;
    }
    os << "\n";
    if (in.ctl == VCtl::ForBegin || in.ctl == VCtl::IfBegin)
      ++depth;
  }
  return os.str();
}

namespace {

void account(Stats &s, const VInstr &in, const VProgram &prog, int64_t weight) {
  switch (in.opcode) {
  case VOpcode::Block2dLoad: {
    s.loads += weight;
    const TensorType *t = std::get_if<TensorType>(&prog.regTypes[in.dsts[0]]);
    if (t)
      s.bytesLoaded += weight * t->numel() * elemBytes(t->elem);
    break;
  }
  case VOpcode::Block2dStore:
    s.stores += weight;
    break;
  case VOpcode::Mma:
    s.mmas += weight;
    break;
  case VOpcode::Barrier:
    s.barriers += weight;
    break;
  case VOpcode::SlmAlloc: {
    const auto &p = std::get<PointerType>(prog.regTypes[in.dsts[0]]);
    s.slmBytesUsed += weight * p.block->numel() * elemBytes(p.block->elem);
    break;
  }
  default:
    break;
  }
}

std::optional<int64_t> foldScalar(const VInstr &in,
                                  const std::map<uint32_t, int64_t> &known) {
  auto get = [&](size_t i) -> std::optional<int64_t> {
    auto it = known.find(in.srcs[i]);
    if (it == known.end())
      return std::nullopt;
    return it->second;
  };
  switch (in.op) {
  case OpKind::Constant:
    if (const auto *v = std::get_if<int64_t>(&in.attrs.at("value")))
      return *v;
    return std::nullopt;
  case OpKind::GetProgramId:
  case OpKind::WarpId:
    return 0;
  case OpKind::Add:
  case OpKind::Sub:
  case OpKind::Mul:
  case OpKind::Div:
  case OpKind::Rem:
  case OpKind::Maximum: {
    auto a = get(0), b = get(1);
    if (!a || !b)
      return std::nullopt;
    switch (in.op) {
    case OpKind::Add:
      return *a + *b;
    case OpKind::Sub:
      return *a - *b;
    case OpKind::Mul:
      return *a * *b;
    case OpKind::Div:
      return *b ? std::optional<int64_t>(*a / *b) : std::nullopt;
    case OpKind::Rem:
      return *b ? std::optional<int64_t>(*a % *b) : std::nullopt;
    default:
      return std::max(*a, *b);
    }
  }
  default:
    return std::nullopt;
  }
}

} // namespace

ProgramStats countStats(const VProgram &prog,
                        const std::map<std::string, int64_t> &scalarArgs) {
  ProgramStats out;
  std::map<uint32_t, int64_t> known;
  for (uint32_t a : prog.args) {
    auto it = scalarArgs.find(prog.regNames[a]);
    if (it != scalarArgs.end())
      known[a] = it->second;
  }
  struct Open {
    size_t loop;
    int64_t weight;
    bool exact;
  };
  std::vector<Open> open;
  Stats dynamic;
  bool exact = true;
  for (size_t i = 0; i < prog.instrs.size(); ++i) {
    const VInstr &in = prog.instrs[i];
    int64_t weight = open.empty() ? 1 : open.back().weight;
    bool wExact = open.empty() || open.back().exact;
    if (in.ctl == VCtl::ForBegin) {
      LoopStats loop;
      loop.begin = i;
      loop.depth = static_cast<int>(open.size());
      auto lb = known.find(in.srcs[0]), ub = known.find(in.srcs[1]),
           st = known.find(in.srcs[2]);
      if (lb != known.end() && ub != known.end() && st != known.end() &&
          st->second > 0)
        loop.trips = std::max<int64_t>(
            0, (ub->second - lb->second + st->second - 1) / st->second);
      out.loops.push_back(loop);
      open.push_back({out.loops.size() - 1, weight * loop.trips.value_or(0),
                      wExact && loop.trips.has_value()});
      continue;
    }
    if (in.ctl == VCtl::ForEnd) {
      open.pop_back();
      continue;
    }
    account(out.total, in, prog, 1);
    for (const Open &o : open)
      account(out.loops[o.loop].body, in, prog, 1);
    account(dynamic, in, prog, weight);
    if (!wExact &&
        (in.opcode == VOpcode::Block2dLoad ||
         in.opcode == VOpcode::Block2dStore || in.opcode == VOpcode::Mma ||
         in.opcode == VOpcode::Barrier || in.opcode == VOpcode::SlmAlloc))
      exact = false;
    if (in.dsts.size() == 1)
      if (std::optional<int64_t> v = foldScalar(in, known))
        known[in.dsts[0]] = *v;
  }
  if (exact)
    out.dynamic = dynamic;
  return out;
}

std::string formatStats(const ProgramStats &stats) {
  std::ostringstream os;
  auto row = [&](const std::string &label, const Stats &s) {
    char buf[160];
    std::snprintf(
        buf, sizeof(buf), "%-12s %8lld %8lld %8lld %12lld %10lld %9lld\n",
        label.c_str(), static_cast<long long>(s.loads),
        static_cast<long long>(s.stores), static_cast<long long>(s.mmas),
        static_cast<long long>(s.bytesLoaded),
        static_cast<long long>(s.slmBytesUsed),
        static_cast<long long>(s.barriers));
    os << buf;
  };
  char head[160];
  std::snprintf(head, sizeof(head), "%-12s %8s %8s %8s %12s %10s %9s\n",
                "scope", "loads", "stores", "mmas", "bytes_loaded", "slm_bytes",
                "barriers");
  os << head;
  row("static", stats.total);
  for (size_t i = 0; i < stats.loops.size(); ++i)
    row("loop" + std::to_string(i), stats.loops[i].body);
  if (stats.dynamic)
    row("dynamic", *stats.dynamic);
  auto kv = [&](const std::string &prefix, const Stats &s) {
    os << prefix << "loads=" << s.loads << "\n"
       << prefix << "stores=" << s.stores << "\n"
       << prefix << "mmas=" << s.mmas << "\n"
       << prefix << "bytes_loaded=" << s.bytesLoaded << "\n"
       << prefix << "slm_bytes_used=" << s.slmBytesUsed << "\n"
       << prefix << "barriers=" << s.barriers << "\n";
  };
  kv("static.", stats.total);
  for (size_t i = 0; i < stats.loops.size(); ++i) {
    kv("loop" + std::to_string(i) + ".", stats.loops[i].body);
    if (stats.loops[i].trips)
      os << "loop" << i << ".trips=" << *stats.loops[i].trips << "\n";
  }
  if (stats.dynamic)
    kv("dynamic.", *stats.dynamic);
  return os.str();
}

} // namespace tilec
