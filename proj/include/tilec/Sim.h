//===- Sim.h - Virtual GPU simulator ----------------------------*- C++ -*-===//
//
// Part of the tilec project, under the Apache License v2.0 with LLVM
// Exceptions. See https://llvm.org/LICENSE.txt for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#ifndef TILEC_SIM_H
#define TILEC_SIM_H

#include "tilec/IR.h"
#include "tilec/Target.h"
#include "tilec/VISA.h"

#include <array>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace tilec {

/// A row-major block of values. Scalars have an empty shape. Every element
/// is kept exactly representable in `elem`.
struct Tile {
  std::vector<int64_t> shape;
  ElemType elem = ElemType::F32;
  std::vector<double> data;

  Tile() = default;
  Tile(std::vector<int64_t> shape, ElemType elem, double fill = 0.0);

  int64_t numel() const { return static_cast<int64_t>(data.size()); }
  double &at(int64_t i, int64_t j) { return data[i * shape[1] + j]; }
  double at(int64_t i, int64_t j) const { return data[i * shape[1] + j]; }
};

struct Buffer {
  ElemType elem = ElemType::F32;
  std::vector<int64_t> dims;
  std::vector<double> data;

  static Buffer zeros(ElemType elem, std::vector<int64_t> dims);
  static Buffer fromTile(const Tile &tile);
  int64_t numel() const { return static_cast<int64_t>(data.size()); }
  /// Bitwise equality of element type, dims and data.
  bool identical(const Buffer &other) const;
};

class DeviceMemory {
public:
  size_t add(Buffer buffer) {
    buffers.push_back(std::move(buffer));
    return buffers.size() - 1;
  }
  Buffer &operator[](size_t i) { return buffers.at(i); }
  const Buffer &operator[](size_t i) const { return buffers.at(i); }
  size_t size() const { return buffers.size(); }
  bool identical(const DeviceMemory &other) const;

private:
  std::vector<Buffer> buffers;
};

struct BufferRef {
  size_t index = 0;
};

/// Kernel arguments in declaration order: buffers for raw pointers, numbers
/// for scalars.
using KernelArg = std::variant<int64_t, double, BufferRef>;

struct LaunchConfig {
  std::array<int64_t, 3> grid = {1, 1, 1};
  /// 0 means the program's own warp count.
  int64_t numWarps = 0;
  TargetConfig target = TargetConfig::pvc();
  /// Workgroup execution order as linear indices (x fastest); empty means
  /// ascending.
  std::vector<int64_t> schedule;
};

class SimError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct AccessEvent {
  std::array<int64_t, 3> workgroup = {0, 0, 0};
  int64_t warp = 0;
  size_t instr = 0;
  bool store = false;
  bool slm = false;
  /// Global buffer index; unused for SLM.
  size_t buffer = 0;
  std::vector<int64_t> offsets;
  std::vector<int64_t> block;
};

struct CollectiveEvent {
  std::array<int64_t, 3> workgroup = {0, 0, 0};
  size_t instr = 0;
  std::string kind;
  std::vector<int64_t> dstWarps;
  std::vector<Tile> inputs;
  std::vector<Tile> outputs;
};

/// Instrumentation hooks; called in execution order.
class Observer {
public:
  virtual ~Observer() = default;
  virtual void onAccess(const AccessEvent &) {}
  virtual void onCollective(const CollectiveEvent &) {}
};

/// Executes every workgroup of `launch` on `mem`. Warps of a workgroup run
/// in ascending order between synchronization points (barriers and
/// cross-warp reductions). A program that is not warp level runs as a single
/// logical context holding whole-workgroup tiles.
void run(const VProgram &prog, const LaunchConfig &launch, DeviceMemory &mem,
         const std::vector<KernelArg> &args, Observer *observer = nullptr);

/// Runs IR at its own level (workgroup, warp or intrinsic).
void run(const KernelFn &fn, const LaunchConfig &launch, DeviceMemory &mem,
         const std::vector<KernelArg> &args, Observer *observer = nullptr);

/// Elementwise combine of per-warp tiles in ascending warp order. Warps in
/// `dstWarps` (all warps when empty) receive the result; others keep their
/// input.
std::vector<Tile> crossWarpReduce(const std::vector<Tile> &values,
                                  const std::string &kind,
                                  const std::vector<int64_t> &dstWarps);

/// Binary tensor files: "TLCT", u32 version (1), u32 element tag, u32 rank,
/// u64 dims, then little-endian element data.
void writeTensor(std::ostream &os, const Buffer &buffer);
Buffer readTensor(std::istream &is);
void saveTensor(const std::string &path, const Buffer &buffer);
Buffer loadTensor(const std::string &path);

} // namespace tilec

#endif // TILEC_SIM_H
