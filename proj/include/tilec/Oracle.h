//===- Oracle.h - Reference implementations ---------------------*- C++ -*-===//
//
// Part of the tilec project, under the Apache License v2.0 with LLVM
// Exceptions. See https://llvm.org/LICENSE.txt for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#ifndef TILEC_ORACLE_H
#define TILEC_ORACLE_H

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace tilec {

/// Dense row-major matrix of doubles.
struct Matrix {
  int64_t rows = 0;
  int64_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int64_t rows, int64_t cols, double fill = 0.0)
      : rows(rows), cols(cols), data(rows * cols, fill) {}

  double &operator()(int64_t i, int64_t j) { return data[i * cols + j]; }
  double operator()(int64_t i, int64_t j) const { return data[i * cols + j]; }
};

class OracleError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// C0 + A * B with an f32 accumulator per output, k ascending.
Matrix gemmRef(const Matrix &a, const Matrix &b, const Matrix &c0);

struct AttentionProblem {
  Matrix q, k, v;
  int64_t blockSize = 64;
};

struct AttentionResult {
  Matrix o;
  std::vector<double> m;
  std::vector<double> l;
  /// Max relative difference between the online and monolithic paths.
  double selfCheck = 0.0;
};

/// Blockwise online softmax (running max and sum with rescaling) checked
/// against softmax(Q K^T) V computed in one piece. Both paths use f64 and
/// no 1/sqrt(D) scaling. Throws OracleError when they disagree by more than
/// `tolerance`.
AttentionResult attentionRef(const AttentionProblem &p,
                             double tolerance = 1e-3);
Matrix attentionMonolithic(const AttentionProblem &p);

struct PagedKV {
  /// Logical block -> physical block.
  std::vector<int64_t> blockTable;
  /// Physical blocks, each blockLen x D.
  std::vector<Matrix> kBlocks;
  std::vector<Matrix> vBlocks;
  int64_t blockLen = 0;
};

/// Single-query attention over the gathered blocks, f64.
std::vector<double> pagedAttentionRef(const std::vector<double> &q,
                                      const PagedKV &kv);

/// Blockwise paged attention: each block's scores are normalized by that
/// block's own max and sum, and the per-block contributions are added without
/// rescaling.
std::vector<double> pagedAttentionBlockwiseRef(const std::vector<double> &q,
                                               const PagedKV &kv);

/// max |x - ref| / max(max |ref|, 1e-6).
double maxRelativeError(const std::vector<double> &x,
                        const std::vector<double> &ref);

} // namespace tilec

#endif // TILEC_ORACLE_H
