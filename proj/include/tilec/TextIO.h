//===- TextIO.h - IR parser and printer -------------------------*- C++ -*-===//
//
// Part of the tilec project, under the Apache License v2.0 with LLVM
// Exceptions. See https://llvm.org/LICENSE.txt for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#ifndef TILEC_TEXTIO_H
#define TILEC_TEXTIO_H

#include "tilec/IR.h"

#include <stdexcept>
#include <string>
#include <string_view>

namespace tilec {

struct SourceSpan {
  std::string file;
  int line = 1;
  int col = 1;

  std::string str() const;
};

class ParseError : public std::runtime_error {
public:
  ParseError(SourceSpan span, const std::string &message);

  const SourceSpan &span() const { return where; }
  const std::string &detail() const { return what_; }

private:
  SourceSpan where;
  std::string what_;
};

/// Parses a module in the textual IR syntax documented in docs/grammar.md.
/// Throws ParseError on the first syntax or attribute error.
KernelModule parseModule(std::string_view text,
                         std::string_view fileName = "<input>");

/// Canonical text: encoding aliases first (in first-use order, parents before
/// children), then each function. Output uses LF line endings.
std::string printModule(const KernelModule &module);
std::string printFunction(const KernelFn &fn);

/// Formats a double with the shortest round-tripping digits, always keeping a
/// decimal point or exponent ("1.0", "-inf", "3.5e-07").
std::string formatFloat(double value);

} // namespace tilec

#endif // TILEC_TEXTIO_H
