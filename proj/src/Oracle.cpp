//===- Oracle.cpp - Reference implementations -----------------------------===//
//
// Part of the tilec project, under the Apache License v2.0 with LLVM
// Exceptions. See https://llvm.org/LICENSE.txt for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "tilec/Oracle.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace tilec {

Matrix gemmRef(const Matrix &a, const Matrix &b, const Matrix &c0) {
  if (a.cols != b.rows || c0.rows != a.rows || c0.cols != b.cols)
    throw OracleError("gemm shape mismatch");
  Matrix c = c0;
  for (int64_t i = 0; i < a.rows; ++i)
    for (int64_t j = 0; j < b.cols; ++j) {
      float acc = static_cast<float>(c0(i, j));
      for (int64_t k = 0; k < a.cols; ++k)
        acc = acc + static_cast<float>(a(i, k)) * static_cast<float>(b(k, j));
      c(i, j) = acc;
    }
  return c;
}

namespace {

void checkProblem(const AttentionProblem &p) {
  if (p.q.cols != p.k.cols || p.k.rows != p.v.rows || p.blockSize <= 0 ||
      p.k.rows % p.blockSize != 0)
    throw OracleError("attention problem shapes are inconsistent");
}

double dotRow(const Matrix &a, int64_t i, const Matrix &b, int64_t j) {
  double s = 0;
  for (int64_t d = 0; d < a.cols; ++d)
    s += a(i, d) * b(j, d);
  return s;
}

} // namespace

Matrix attentionMonolithic(const AttentionProblem &p) {
  checkProblem(p);
  int64_t n = p.k.rows;
  Matrix o(p.q.rows, p.v.cols);
  std::vector<double> s(n);
  for (int64_t i = 0; i < p.q.rows; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int64_t j = 0; j < n; ++j) {
      s[j] = dotRow(p.q, i, p.k, j);
      mx = std::max(mx, s[j]);
    }
    double sum = 0;
    for (int64_t j = 0; j < n; ++j) {
      s[j] = std::exp(s[j] - mx);
      sum += s[j];
    }
    for (int64_t j = 0; j < n; ++j)
      for (int64_t d = 0; d < p.v.cols; ++d)
        o(i, d) += s[j] / sum * p.v(j, d);
  }
  return o;
}

AttentionResult attentionRef(const AttentionProblem &p, double tolerance) {
  checkProblem(p);
  int64_t rows = p.q.rows, n = p.k.rows, bs = p.blockSize;
  AttentionResult r;
  r.o = Matrix(rows, p.v.cols);
  r.m.assign(rows, -std::numeric_limits<double>::infinity());
  r.l.assign(rows, 0.0);
  std::vector<double> s(bs);
  for (int64_t j0 = 0; j0 < n; j0 += bs)
    for (int64_t i = 0; i < rows; ++i) {
      double mBlock = -std::numeric_limits<double>::infinity();
      for (int64_t j = 0; j < bs; ++j) {
        s[j] = dotRow(p.q, i, p.k, j0 + j);
        mBlock = std::max(mBlock, s[j]);
      }
      double mNew = std::max(r.m[i], mBlock);
      double alpha = std::exp(r.m[i] - mNew);
      double lBlock = 0;
      for (int64_t j = 0; j < bs; ++j) {
        s[j] = std::exp(s[j] - mNew);
        lBlock += s[j];
      }
      r.l[i] = r.l[i] * alpha + lBlock;
      for (int64_t d = 0; d < p.v.cols; ++d) {
        double acc = r.o(i, d) * alpha;
        for (int64_t j = 0; j < bs; ++j)
          acc += s[j] * p.v(j0 + j, d);
        r.o(i, d) = acc;
      }
      r.m[i] = mNew;
    }
  for (int64_t i = 0; i < rows; ++i)
    for (int64_t d = 0; d < p.v.cols; ++d)
      r.o(i, d) /= r.l[i];
  r.selfCheck = maxRelativeError(r.o.data, attentionMonolithic(p).data);
  if (!(r.selfCheck <= tolerance))
    throw OracleError("online softmax disagrees with the monolithic path: " +
                      std::to_string(r.selfCheck));
  return r;
}

namespace {

void checkPaged(const std::vector<double> &q, const PagedKV &kv) {
  if (kv.kBlocks.size() != kv.vBlocks.size() || kv.blockLen <= 0)
    throw OracleError("paged KV storage is inconsistent");
  for (int64_t b : kv.blockTable)
    if (b < 0 || b >= static_cast<int64_t>(kv.kBlocks.size()))
      throw OracleError("block table entry " + std::to_string(b) +
                        " out of range");
  for (size_t i = 0; i < kv.kBlocks.size(); ++i)
    if (kv.kBlocks[i].rows != kv.blockLen ||
        kv.kBlocks[i].cols != static_cast<int64_t>(q.size()) ||
        kv.vBlocks[i].rows != kv.blockLen)
      throw OracleError("physical block " + std::to_string(i) +
                        " has the wrong shape");
}

AttentionProblem gather(const std::vector<double> &q, const PagedKV &kv) {
  int64_t d = static_cast<int64_t>(q.size());
  int64_t dv = kv.vBlocks.empty() ? 0 : kv.vBlocks[0].cols;
  int64_t n = static_cast<int64_t>(kv.blockTable.size()) * kv.blockLen;
  AttentionProblem p;
  p.q = Matrix(1, d);
  p.q.data = q;
  p.k = Matrix(n, d);
  p.v = Matrix(n, dv);
  p.blockSize = kv.blockLen;
  for (size_t b = 0; b < kv.blockTable.size(); ++b) {
    const Matrix &kb = kv.kBlocks[kv.blockTable[b]];
    const Matrix &vb = kv.vBlocks[kv.blockTable[b]];
    for (int64_t r = 0; r < kv.blockLen; ++r) {
      int64_t row = static_cast<int64_t>(b) * kv.blockLen + r;
      for (int64_t c = 0; c < d; ++c)
        p.k(row, c) = kb(r, c);
      for (int64_t c = 0; c < dv; ++c)
        p.v(row, c) = vb(r, c);
    }
  }
  return p;
}

} // namespace

std::vector<double> pagedAttentionRef(const std::vector<double> &q,
                                      const PagedKV &kv) {
  checkPaged(q, kv);
  return attentionMonolithic(gather(q, kv)).data;
}

std::vector<double> pagedAttentionBlockwiseRef(const std::vector<double> &q,
                                               const PagedKV &kv) {
  checkPaged(q, kv);
  AttentionProblem p = gather(q, kv);
  std::vector<double> o(p.v.cols, 0.0);
  int64_t bs = kv.blockLen;
  std::vector<double> s(bs);
  for (int64_t j0 = 0; j0 < p.k.rows; j0 += bs) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int64_t j = 0; j < bs; ++j) {
      s[j] = dotRow(p.q, 0, p.k, j0 + j);
      mx = std::max(mx, s[j]);
    }
    double sum = 0;
    for (int64_t j = 0; j < bs; ++j) {
      s[j] = std::exp(s[j] - mx);
      sum += s[j];
    }
    for (int64_t d = 0; d < p.v.cols; ++d)
      for (int64_t j = 0; j < bs; ++j)
        o[d] += s[j] / sum * p.v(j0 + j, d);
  }
  return o;
}

double maxRelativeError(const std::vector<double> &x,
                        const std::vector<double> &ref) {
  if (x.size() != ref.size())
    return std::numeric_limits<double>::infinity();
  double diff = 0, scale = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    double e = std::abs(x[i] - ref[i]);
    if (std::isnan(e))
      return std::numeric_limits<double>::infinity();
    diff = std::max(diff, e);
    scale = std::max(scale, std::abs(ref[i]));
  }
  return diff / std::max(scale, 1e-6);
}

} // namespace tilec
