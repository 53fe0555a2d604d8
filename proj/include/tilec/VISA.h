//===- VISA.h - Virtual ISA -------------------------------------*- C++ -*-===//
//
// Part of the tilec project, under the Apache License v2.0 with LLVM
// Exceptions. See https://llvm.org/LICENSE.txt for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#ifndef TILEC_VISA_H
#define TILEC_VISA_H

#include "tilec/IR.h"
#include "tilec/Target.h"

#include <optional>
#include <string>
#include <vector>

namespace tilec {

enum class VOpcode : uint8_t {
  Block2dLoad,
  Block2dStore,
  Mma,
  Extract,
  Glue,
  ReduceLane,
  CrossWarpReduce,
  Barrier,
  SlmAlloc,
  Alu,
  Mov,
  LoopCtl,
};

std::string_view vopcodeName(VOpcode op);

/// Control role of a LoopCtl instruction.
enum class VCtl : uint8_t { None, ForBegin, ForEnd, IfBegin, IfEnd, Return };

/// One virtual instruction. Registers are the ids of the IR values they were
/// lowered from.
struct VInstr {
  VOpcode opcode = VOpcode::Mov;
  /// The IR op this instruction implements; selects the ALU operation.
  OpKind op = OpKind::Return;
  VCtl ctl = VCtl::None;
  std::vector<uint32_t> dsts;
  std::vector<uint32_t> srcs;
  /// ForBegin: the loop results.
  std::vector<uint32_t> aux;
  AttrMap attrs;
  /// Data shape and element type (block shape for memory ops, accumulator
  /// shape for Mma). Empty for uniform instructions.
  std::vector<int64_t> shape;
  ElemType elem = ElemType::F32;
  /// Elements per lane (SIMT) or per warp (SIMD); 0 for uniform work.
  int64_t vectorLen = 0;
  /// Register view required by the vendor intrinsic, e.g. i16 x 64.
  std::string packedType;
  int64_t packedLen = 0;
  std::string mnemonic;
  /// ForBegin/IfBegin: index after the matching end. ForEnd: its ForBegin.
  int64_t target = -1;
  /// SlmAlloc: byte offset into SLM.
  int64_t slmOffset = 0;

  bool isUniform() const { return vectorLen == 0; }
};

struct VProgram {
  std::string name;
  int64_t numWarps = 1;
  bool warpLevel = false;
  CodegenStyle style = CodegenStyle::Simd;
  int64_t threadsPerWarp = 16;
  std::vector<Type> regTypes;
  std::vector<std::string> regNames;
  std::vector<uint32_t> args;
  std::vector<VInstr> instrs;
  int64_t slmBytesUsed = 0;
};

/// Linear form of `fn` at any level. Computes widths and intrinsic
/// mnemonics but checks nothing against the target; used to execute IR.
VProgram linearize(const KernelFn &fn, const TargetConfig &target);

/// One-to-one lowering of an intrinsic-level function. Throws CompileError
/// for shapes the target cannot execute, non-divisible SIMT widths or SLM
/// overflow.
VProgram lower(const KernelFn &fn, const TargetConfig &target);

/// One instruction per line.
std::string disassemble(const VProgram &prog);

struct Stats {
  int64_t loads = 0;
  int64_t stores = 0;
  int64_t mmas = 0;
  int64_t bytesLoaded = 0;
  int64_t slmBytesUsed = 0;
  int64_t barriers = 0;

  bool operator==(const Stats &) const = default;
};

struct LoopStats {
  size_t begin = 0;
  int depth = 0;
  /// One iteration of the body, nested loops counted once.
  Stats body;
  std::optional<int64_t> trips;
};

struct ProgramStats {
  /// Every instruction counted once.
  Stats total;
  std::vector<LoopStats> loops;
  /// Per warp, weighted by loop trip counts; If bodies count as taken.
  /// Program and warp ids are taken as 0.
  /// Empty when some trip count depends on unknown values.
  std::optional<Stats> dynamic;
};

/// `scalarArgs` binds kernel argument names to values for trip counts;
/// program ids are taken as 0.
ProgramStats countStats(const VProgram &prog,
                        const std::map<std::string, int64_t> &scalarArgs = {});

std::string formatStats(const ProgramStats &stats);

} // namespace tilec

#endif // TILEC_VISA_H
