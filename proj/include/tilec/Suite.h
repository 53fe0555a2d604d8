//===- Suite.h - Kernel fixture suite ---------------------------*- C++ -*-===//
//
// Part of the tilec project, under the Apache License v2.0 with LLVM
// Exceptions. See https://llvm.org/LICENSE.txt for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#ifndef TILEC_SUITE_H
#define TILEC_SUITE_H

#include "tilec/IR.h"
#include "tilec/Sim.h"

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tilec {

struct KernelFixture {
  std::string name;
  /// Absolute path of the .ttir file.
  std::string path;
  /// One of oracleIds().
  std::string oracle;
  std::array<int64_t, 3> grid = {1, 1, 1};
  int64_t numWarps = 1;
  double tolerance = 0.0;
  std::map<std::string, int64_t> params;
  /// Alias definitions expected verbatim in the assign-layouts dump.
  std::vector<std::string> encodings;
  /// Expected op counts (by op name) after match-target-size.
  std::map<std::string, int64_t> counts;
};

/// Reads a manifest; relative kernel paths resolve against its directory.
/// Every fixture is parsed and verified; any failure throws.
std::vector<KernelFixture> loadSuite(const std::string &manifestPath);

/// The single function of the fixture's kernel file.
KernelFn loadKernel(const KernelFixture &fixture);

std::vector<std::string> oracleIds();

/// Buffers, arguments and launch for one run of a fixture.
struct Problem {
  DeviceMemory mem;
  std::vector<KernelArg> args;
  /// Kernel argument name -> buffer index, for input overrides.
  std::map<std::string, size_t> buffers;
  LaunchConfig launch;
  size_t output = 0;
  std::map<std::string, int64_t> scalarArgs;
};

enum class InputFill { Random, Zeros };

/// Inputs are drawn from Rng(seed), uniform in [-1, 1) and rounded to the
/// buffer's element type. Block tables are random distinct physical blocks.
Problem makeProblem(const KernelFixture &fixture, uint64_t seed,
                    InputFill fill = InputFill::Random);

struct Reference {
  std::vector<double> values;
  /// Internal consistency measure of the oracle, when it has one.
  std::optional<double> selfCheck;
};

/// Oracle output computed from the problem's input buffers.
Reference reference(const KernelFixture &fixture, const Problem &problem);

} // namespace tilec

#endif // TILEC_SUITE_H
