//===- Suite.cpp - Kernel fixture suite -----------------------------------===//
//
// Part of the tilec project, under the Apache License v2.0 with LLVM
// Exceptions. See https://llvm.org/LICENSE.txt for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "tilec/Suite.h"
#include "tilec/Oracle.h"
#include "tilec/TextIO.h"
#include "tilec/Verifier.h"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace tilec {

namespace {

std::string readFile(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int64_t param(const KernelFixture &f, const std::string &key) {
  auto it = f.params.find(key);
  if (it == f.params.end())
    throw std::runtime_error("fixture '" + f.name + "' lacks parameter '" +
                             key + "'");
  return it->second;
}

Buffer randomBuffer(Rng &rng, ElemType elem, std::vector<int64_t> dims,
                    InputFill fill) {
  Buffer b = Buffer::zeros(elem, std::move(dims));
  if (fill == InputFill::Random)
    for (double &v : b.data)
      v = canonicalize(rng.uniform(-1.0, 1.0), elem);
  return b;
}

Matrix toMatrix(const Buffer &b, int64_t rowOffset, int64_t rows) {
  int64_t cols = b.dims.at(1);
  Matrix m(rows, cols);
  std::copy(b.data.begin() + rowOffset * cols,
            b.data.begin() + (rowOffset + rows) * cols, m.data.begin());
  return m;
}

} // namespace

std::vector<std::string> oracleIds() {
  return {"gemm", "attention", "paged", "paged_blockwise"};
}

std::vector<KernelFixture> loadSuite(const std::string &manifestPath) {
  nlohmann::json j = nlohmann::json::parse(readFile(manifestPath));
  std::filesystem::path dir = std::filesystem::path(manifestPath).parent_path();
  std::vector<KernelFixture> out;
  for (const auto &e : j.at("fixtures")) {
    KernelFixture f;
    f.name = e.at("name").get<std::string>();
    f.path =
        (dir / e.at("path").get<std::string>()).lexically_normal().string();
    f.oracle = e.at("oracle").get<std::string>();
    auto ids = oracleIds();
    if (std::find(ids.begin(), ids.end(), f.oracle) == ids.end())
      throw std::runtime_error("fixture '" + f.name + "': unknown oracle '" +
                               f.oracle + "'");
    auto grid = e.at("grid").get<std::vector<int64_t>>();
    for (size_t i = 0; i < 3 && i < grid.size(); ++i)
      f.grid[i] = grid[i];
    f.numWarps = e.at("num_warps").get<int64_t>();
    f.tolerance = e.at("tolerance").get<double>();
    f.params = e.at("params").get<std::map<std::string, int64_t>>();
    if (e.contains("expect")) {
      const auto &x = e.at("expect");
      if (x.contains("encodings"))
        f.encodings = x.at("encodings").get<std::vector<std::string>>();
      if (x.contains("counts"))
        f.counts = x.at("counts").get<std::map<std::string, int64_t>>();
    }
    KernelFn fn = loadKernel(f);
    if (fn.numWarps != f.numWarps)
      throw std::runtime_error("fixture '" + f.name + "': manifest says " +
                               std::to_string(f.numWarps) +
                               " warps, kernel has " +
                               std::to_string(fn.numWarps));
    out.push_back(std::move(f));
  }
  return out;
}

KernelFn loadKernel(const KernelFixture &fixture) {
  KernelModule m = parseModule(readFile(fixture.path), fixture.path);
  if (m.functions.size() != 1)
    throw std::runtime_error(fixture.path + ": expected exactly one function");
  std::vector<std::string> errors = verify(m);
  if (!errors.empty())
    throw std::runtime_error(fixture.path + ": " + errors.front());
  return std::move(m.functions.front());
}

Problem makeProblem(const KernelFixture &f, uint64_t seed, InputFill fill) {
  Problem p;
  Rng rng(seed);
  p.launch.grid = f.grid;
  p.launch.numWarps = f.numWarps;
  auto buffer = [&](const std::string &name, Buffer b) {
    size_t index = p.mem.add(std::move(b));
    p.buffers[name] = index;
    p.args.push_back(BufferRef{index});
    return index;
  };
  auto scalar = [&](const std::string &name, int64_t v) {
    p.scalarArgs[name] = v;
    p.args.push_back(v);
  };
  if (f.oracle == "gemm") {
    int64_t m = param(f, "M"), n = param(f, "N"), k = param(f, "K");
    buffer("a_ptr", randomBuffer(rng, ElemType::F16, {m, k}, fill));
    buffer("b_ptr", randomBuffer(rng, ElemType::F16, {k, n}, fill));
    p.output = buffer("c_ptr", randomBuffer(rng, ElemType::F32, {m, n}, fill));
    scalar("M", m);
    scalar("N", n);
    scalar("K", k);
    scalar("stride_am", k);
    scalar("stride_bk", n);
    scalar("stride_cm", n);
  } else if (f.oracle == "attention") {
    int64_t n = param(f, "N"), d = param(f, "D");
    buffer("q_ptr", randomBuffer(rng, ElemType::F16, {n, d}, fill));
    buffer("k_ptr", randomBuffer(rng, ElemType::F16, {n, d}, fill));
    buffer("v_ptr", randomBuffer(rng, ElemType::F16, {n, d}, fill));
    p.output = buffer("o_ptr", Buffer::zeros(ElemType::F32, {n, d}));
    scalar("N", n);
  } else {
    int64_t s = param(f, "S"), nb = param(f, "NB"), phys = param(f, "P"),
            len = param(f, "block_len"), d = param(f, "D");
    if (phys < nb)
      throw std::runtime_error("fixture '" + f.name +
                               "': fewer physical than logical blocks");
    buffer("q_ptr", randomBuffer(rng, ElemType::F16, {s, d}, fill));
    buffer("k_cache", randomBuffer(rng, ElemType::F16, {phys * len, d}, fill));
    buffer("v_cache", randomBuffer(rng, ElemType::F16, {phys * len, d}, fill));
    Buffer table = Buffer::zeros(ElemType::I32, {s, nb});
    for (int64_t r = 0; r < s; ++r) {
      std::vector<int64_t> pool(phys);
      for (int64_t i = 0; i < phys; ++i)
        pool[i] = i;
      for (int64_t i = 0; i < nb; ++i) {
        int64_t pick = i + static_cast<int64_t>(rng.below(phys - i));
        std::swap(pool[i], pool[pick]);
        table.data[r * nb + i] = static_cast<double>(pool[i]);
      }
    }
    buffer("table", std::move(table));
    p.output = buffer("o_ptr", Buffer::zeros(ElemType::F32, {s, d}));
    scalar("S", s);
    scalar("NB", nb);
    scalar("rows", phys * len);
  }
  return p;
}

Reference reference(const KernelFixture &f, const Problem &p) {
  Reference r;
  if (f.oracle == "gemm") {
    const Buffer &a = p.mem[p.buffers.at("a_ptr")];
    const Buffer &b = p.mem[p.buffers.at("b_ptr")];
    const Buffer &c = p.mem[p.buffers.at("c_ptr")];
    r.values = gemmRef(toMatrix(a, 0, a.dims[0]), toMatrix(b, 0, b.dims[0]),
                       toMatrix(c, 0, c.dims[0]))
                   .data;
    return r;
  }
  if (f.oracle == "attention") {
    AttentionProblem ap;
    const Buffer &q = p.mem[p.buffers.at("q_ptr")];
    ap.q = toMatrix(q, 0, q.dims[0]);
    ap.k = toMatrix(p.mem[p.buffers.at("k_ptr")], 0, q.dims[0]);
    ap.v = toMatrix(p.mem[p.buffers.at("v_ptr")], 0, q.dims[0]);
    ap.blockSize = param(f, "block");
    AttentionResult res = attentionRef(ap);
    r.values = res.o.data;
    r.selfCheck = res.selfCheck;
    return r;
  }
  const Buffer &q = p.mem[p.buffers.at("q_ptr")];
  const Buffer &kc = p.mem[p.buffers.at("k_cache")];
  const Buffer &vc = p.mem[p.buffers.at("v_cache")];
  const Buffer &table = p.mem[p.buffers.at("table")];
  int64_t len = param(f, "block_len"), s = q.dims[0], d = q.dims[1];
  int64_t nb = table.dims[1];
  PagedKV kv;
  kv.blockLen = len;
  for (int64_t b = 0; b < kc.dims[0] / len; ++b) {
    kv.kBlocks.push_back(toMatrix(kc, b * len, len));
    kv.vBlocks.push_back(toMatrix(vc, b * len, len));
  }
  for (int64_t row = 0; row < s; ++row) {
    kv.blockTable.clear();
    for (int64_t i = 0; i < nb; ++i)
      kv.blockTable.push_back(static_cast<int64_t>(table.data[row * nb + i]));
    std::vector<double> qv(q.data.begin() + row * d,
                           q.data.begin() + (row + 1) * d);
    std::vector<double> o = f.oracle == "paged"
                                ? pagedAttentionRef(qv, kv)
                                : pagedAttentionBlockwiseRef(qv, kv);
    r.values.insert(r.values.end(), o.begin(), o.end());
  }
  return r;
}

} // namespace tilec
