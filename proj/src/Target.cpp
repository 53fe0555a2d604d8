//===- Target.cpp - Target config files -----------------------------------===//
//
// Part of the tilec project, under the Apache License v2.0 with LLVM
// Exceptions. See https://llvm.org/LICENSE.txt for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "tilec/Target.h"

#include <charconv>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace tilec {

std::string_view styleName(CodegenStyle style) {
  return style == CodegenStyle::Simt ? "simt" : "simd";
}

namespace {

std::string trim(std::string_view s) {
  size_t b = s.find_first_not_of(" \t\r");
  size_t e = s.find_last_not_of(" \t\r");
  return b == std::string_view::npos ? "" : std::string(s.substr(b, e - b + 1));
}

int64_t positive(std::string_view text, std::string_view key) {
  int64_t value = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() ||
      value < 1)
    throw std::runtime_error("target config: '" + std::string(key) +
                             "' needs a positive integer, got '" +
                             std::string(text) + "'");
  return value;
}

std::vector<int64_t> dims(std::string_view text, std::string_view key,
                          size_t count) {
  std::vector<int64_t> out;
  size_t start = 0;
  while (true) {
    size_t x = text.find('x', start);
    out.push_back(positive(text.substr(start, x - start), key));
    if (x == std::string_view::npos)
      break;
    start = x + 1;
  }
  if (out.size() != count)
    throw std::runtime_error("target config: '" + std::string(key) +
                             "' expects " + std::to_string(count) +
                             " dimensions");
  return out;
}

} // namespace

TargetConfig parseTargetConfig(std::string_view text) {
  TargetConfig target;
  std::istringstream in{std::string(text)};
  std::string raw;
  int lineNo = 0;
  while (std::getline(in, raw)) {
    ++lineNo;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#')
      continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("target config line " + std::to_string(lineNo) +
                               ": expected key=value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key == "max_load") {
      auto d = dims(value, key, 2);
      target.maxLoad = {d[0], d[1]};
    } else if (key == "max_dot") {
      auto d = dims(value, key, 3);
      target.maxDotM = d[0];
      target.maxDotN = d[1];
      target.maxDotK = d[2];
    } else if (key == "threads_per_warp") {
      target.threadsPerWarp = positive(value, key);
    } else if (key == "slm_bytes") {
      target.slmBytes = positive(value, key);
    } else if (key == "style") {
      if (value == "simt")
        target.style = CodegenStyle::Simt;
      else if (value == "simd")
        target.style = CodegenStyle::Simd;
      else
        throw std::runtime_error("target config: style must be simt or simd");
    } else {
      throw std::runtime_error("target config line " + std::to_string(lineNo) +
                               ": unknown key '" + key + "'");
    }
  }
  return target;
}

std::string printTargetConfig(const TargetConfig &target) {
  std::ostringstream out;
  out << "max_load=" << target.maxLoad[0] << "x" << target.maxLoad[1] << "\n"
      << "max_dot=" << target.maxDotM << "x" << target.maxDotN << "x"
      << target.maxDotK << "\n"
      << "threads_per_warp=" << target.threadsPerWarp << "\n"
      << "slm_bytes=" << target.slmBytes << "\n"
      << "style=" << styleName(target.style) << "\n";
  return out.str();
}

} // namespace tilec
