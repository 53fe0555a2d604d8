//===- TextIO.cpp - IR parser and printer ---------------------------------===//
//
// Part of the tilec project, under the Apache License v2.0 with LLVM
// Exceptions. See https://llvm.org/LICENSE.txt for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "tilec/TextIO.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>
#include <unordered_map>

namespace tilec {

std::string SourceSpan::str() const {
  return file + ":" + std::to_string(line) + ":" + std::to_string(col);
}

ParseError::ParseError(SourceSpan span, const std::string &message)
    : std::runtime_error(span.str() + ": error: " + message),
      where(std::move(span)), what_(message) {}

std::string formatFloat(double value) {
  if (std::isnan(value))
    return "nan";
  if (std::isinf(value))
    return value < 0 ? "-inf" : "inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  std::string out(buf, res.ptr);
  if (out.find_first_of(".e") == std::string::npos)
    out += ".0";
  return out;
}

//===----------------------------------------------------------------------===//
// Printer
//===----------------------------------------------------------------------===//

namespace {

std::string listText(const std::vector<int64_t> &values) {
  std::string out = "[";
  for (size_t i = 0; i < values.size(); ++i)
    out += (i ? ", " : "") + std::to_string(values[i]);
  return out + "]";
}

std::string attrText(const Attr &attr) {
  if (const auto *v = std::get_if<int64_t>(&attr))
    return std::to_string(*v);
  if (const auto *v = std::get_if<double>(&attr))
    return formatFloat(*v);
  if (const auto *v = std::get_if<bool>(&attr))
    return *v ? "true" : "false";
  if (const auto *v = std::get_if<std::string>(&attr)) {
    std::string out = "\"";
    for (char c : *v) {
      if (c == '"' || c == '\\')
        out += '\\';
      out += c;
    }
    return out + "\"";
  }
  return listText(std::get<std::vector<int64_t>>(attr));
}

bool validIdent(const std::string &name) {
  if (name.empty())
    return false;
  bool allDigits = true;
  for (char c : name) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_')
      return false;
    allDigits &= std::isdigit(static_cast<unsigned char>(c)) != 0;
  }
  return !allDigits;
}

class Printer {
public:
  explicit Printer(const KernelModule &module) : module(module) {}

  std::string run() {
    for (const KernelFn &fn : module.functions)
      collectAliases(fn);
    std::string out;
    for (const auto &[enc, name] : aliases)
      out += "#" + name + " = " + encodingBody(enc) + "\n";
    for (size_t i = 0; i < module.functions.size(); ++i) {
      if (!out.empty())
        out += "\n";
      printFn(module.functions[i], out);
    }
    return out;
  }

private:
  void noteType(const Type &type) {
    if (const LayoutEncoding *enc = encodingOf(type))
      noteEncoding(*enc);
  }

  void noteEncoding(const LayoutEncoding &enc) {
    if (lookupAlias(enc))
      return;
    if (!enc.isBlocked())
      noteEncoding(enc.parent());
    std::string base;
    switch (enc.kind()) {
    case LayoutEncoding::Kind::Blocked:
      base = numbered("blocked", blockedCount);
      break;
    case LayoutEncoding::Kind::Slice:
      base = numbered("slice", sliceCount);
      break;
    case LayoutEncoding::Kind::DotOperand: {
      base = "dot" + std::to_string(enc.opIdx());
      if (enc.parent().isDotOperand())
        base += lookupAlias(enc.parent())->substr(3);
      std::string name = base;
      for (int k = 1; used.count(name); ++k)
        name = base + "_" + std::to_string(k);
      base = name;
      break;
    }
    }
    used.insert(base);
    aliases.emplace_back(enc, base);
  }

  std::string numbered(const std::string &stem, int &counter) {
    std::string name;
    do {
      name = counter == 0 ? stem : stem + std::to_string(counter);
      ++counter;
    } while (used.count(name));
    return name;
  }

  const std::string *lookupAlias(const LayoutEncoding &enc) const {
    for (const auto &[e, name] : aliases)
      if (e == enc)
        return &name;
    return nullptr;
  }

  void collectAliases(const KernelFn &fn) {
    for (Value arg : fn.body.args)
      noteType(fn.type(arg));
    collectRegion(fn, fn.body);
  }

  void collectRegion(const KernelFn &fn, const Region &region) {
    for (const Op &op : region.ops) {
      for (const Region &nested : op.regions) {
        for (Value arg : nested.args)
          noteType(fn.type(arg));
        collectRegion(fn, nested);
      }
      for (Value res : op.results)
        noteType(fn.type(res));
    }
  }

  std::string encodingRef(const LayoutEncoding &enc) const {
    return "#" + *lookupAlias(enc);
  }

  std::string encodingBody(const LayoutEncoding &enc) const {
    switch (enc.kind()) {
    case LayoutEncoding::Kind::Blocked:
      return "#triton_gpu.blocked<{sizePerWarp = " +
             listText(enc.sizePerWarp()) +
             ", warpsPerCTA = " + listText(enc.warpsPerCTA()) +
             ", order = " + listText(enc.order()) + "}>";
    case LayoutEncoding::Kind::DotOperand:
      return "#triton_gpu.dot_op<{opIdx = " + std::to_string(enc.opIdx()) +
             ", parent = " + encodingRef(enc.parent()) + "}>";
    case LayoutEncoding::Kind::Slice:
      return "#triton_gpu.slice<{dim = " + std::to_string(enc.dim()) +
             ", parent = " + encodingRef(enc.parent()) + "}>";
    }
    return {};
  }

  std::string tensorText(const TensorType &t) const {
    if (t.isScalar())
      return std::string(elemName(t.elem));
    std::string out =
        "tensor<" + shapeStr(t.shape) + "x" + std::string(elemName(t.elem));
    if (t.encoding)
      out += ", " + encodingRef(*t.encoding);
    return out + ">";
  }

  std::string typeText(const Type &type) const {
    if (const auto *t = std::get_if<TensorType>(&type))
      return tensorText(*t);
    const PointerType &p = std::get<PointerType>(type);
    return "!tt.ptr<" +
           (p.block ? tensorText(*p.block) : std::string(elemName(p.elem))) +
           ">";
  }

  void nameValues(const KernelFn &fn) {
    names.assign(fn.values.size(), "");
    std::set<std::string> taken;
    int counter = 0;
    auto assign = [&](Value v) {
      const std::string &hint = fn.nameOf(v);
      if (!validIdent(hint)) {
        names[v.id] = std::to_string(counter++);
        return;
      }
      std::string name = hint;
      for (int k = 1; taken.count(name); ++k)
        name = hint + "_" + std::to_string(k);
      taken.insert(name);
      names[v.id] = name;
    };
    for (Value arg : fn.body.args)
      assign(arg);
    auto visit = [&](auto &self, const Region &region) -> void {
      for (const Op &op : region.ops) {
        for (Value res : op.results)
          assign(res);
        for (const Region &nested : op.regions) {
          for (Value arg : nested.args)
            assign(arg);
          self(self, nested);
        }
      }
    };
    visit(visit, fn.body);
  }

  std::string ref(Value v) const { return "%" + names.at(v.id); }

  std::string refList(const std::vector<Value> &values, size_t begin,
                      size_t end) const {
    std::string out;
    for (size_t i = begin; i < end; ++i)
      out += (i > begin ? ", " : "") + ref(values[i]);
    return out;
  }

  static std::string attrDict(const AttrMap &attrs) {
    if (attrs.empty())
      return "";
    std::string out = " {";
    bool first = true;
    for (const auto &[key, value] : attrs) {
      out += (first ? "" : ", ") + key + " = " + attrText(value);
      first = false;
    }
    return out + "}";
  }

  void printFn(const KernelFn &fn, std::string &out) {
    nameValues(fn);
    out += "tt.func ";
    if (fn.isPublic)
      out += "public ";
    out += "@" + fn.name + "(";
    for (size_t i = 0; i < fn.body.args.size(); ++i) {
      Value arg = fn.body.args[i];
      out += (i ? ", " : "") + ref(arg) + ": " + typeText(fn.type(arg));
    }
    out += ") attributes {num_warps = " + std::to_string(fn.numWarps) +
           ", warp_level = " + (fn.warpLevel ? "true" : "false") + "} {\n";
    printRegion(fn, fn.body, 1, out);
    out += "}\n";
  }

  void printRegion(const KernelFn &fn, const Region &region, int depth,
                   std::string &out) {
    for (const Op &op : region.ops)
      printOp(fn, op, depth, out);
  }

  void printOp(const KernelFn &fn, const Op &op, int depth, std::string &out) {
    std::string indent(2 * depth, ' ');
    out += indent;
    if (!op.results.empty())
      out += refList(op.results, 0, op.results.size()) + " = ";
    out += opKindName(op.kind);
    auto resultTypes = [&] {
      std::string s;
      for (size_t i = 0; i < op.results.size(); ++i)
        s += (i ? ", " : "") + typeText(fn.type(op.results[i]));
      return s;
    };
    switch (op.kind) {
    case OpKind::Constant: {
      const Attr &value = op.attrs.at("value");
      out += " " + attrText(value) + " : " + resultTypes() + "\n";
      return;
    }
    case OpKind::MakeTensorPtr: {
      size_t rank = (op.operands.size() - 1) / 3;
      out += " " + ref(op.operands[0]);
      for (size_t g = 0; g < 3; ++g)
        out += ", [" + refList(op.operands, 1 + g * rank, 1 + (g + 1) * rank) +
               "]";
      out += attrDict(op.attrs) + " : " + resultTypes() + "\n";
      return;
    }
    case OpKind::Advance:
      out += " " + ref(op.operands[0]) + ", [" +
             refList(op.operands, 1, op.operands.size()) +
             "] : " + resultTypes() + "\n";
      return;
    case OpKind::For: {
      const Region &body = op.regions[0];
      out += " " + ref(body.args[0]) + " = " + ref(op.operands[0]) + " to " +
             ref(op.operands[1]) + " step " + ref(op.operands[2]);
      if (!op.results.empty()) {
        out += " iter_args(";
        for (size_t i = 0; i < op.results.size(); ++i)
          out += (i ? ", " : "") + ref(body.args[1 + i]) + " = " +
                 ref(op.operands[3 + i]);
        out += ") -> (" + resultTypes() + ")";
      }
      out += " {\n";
      printRegion(fn, body, depth + 1, out);
      out += indent + "}\n";
      return;
    }
    case OpKind::If:
      out += " " + ref(op.operands[0]) + " {\n";
      printRegion(fn, op.regions[0], depth + 1, out);
      out += indent + "}\n";
      return;
    default:
      break;
    }
    if (!op.operands.empty())
      out += " " + refList(op.operands, 0, op.operands.size());
    out += attrDict(op.attrs);
    if (!op.results.empty())
      out += " : " + resultTypes();
    out += "\n";
  }

  const KernelModule &module;
  std::vector<std::pair<LayoutEncoding, std::string>> aliases;
  std::set<std::string> used;
  int blockedCount = 0;
  int sliceCount = 0;
  std::vector<std::string> names;
};

//===----------------------------------------------------------------------===//
// Parser
//===----------------------------------------------------------------------===//

const std::set<std::string> &allowedAttrs(OpKind kind) {
  static const std::set<std::string> none;
  static const std::set<std::string> axis = {"axis"};
  static const std::set<std::string> order = {"order"};
  static const std::set<std::string> tiling = {"tiling"};
  static const std::set<std::string> reduce = {"kind", "axis", "cross_warp",
                                               "dst_warps"};
  static const std::set<std::string> index = {"index"};
  static const std::set<std::string> predicate = {"predicate"};
  switch (kind) {
  case OpKind::GetProgramId:
  case OpKind::ExpandDims:
    return axis;
  case OpKind::MakeTensorPtr:
    return order;
  case OpKind::Dot:
    return tiling;
  case OpKind::Reduce:
    return reduce;
  case OpKind::Extract:
    return index;
  case OpKind::Cmp:
    return predicate;
  default:
    return none;
  }
}

class Parser {
public:
  Parser(std::string_view text, std::string_view file)
      : src(text), file(file) {}

  KernelModule run() {
    KernelModule module;
    while (true) {
      skipWs();
      if (atEnd())
        break;
      if (peek("#")) {
        parseAliasDef();
      } else if (peekWord("tt.func")) {
        module.functions.push_back(parseFunction());
      } else {
        fail("expected an encoding alias or 'tt.func', found '" +
             tokenPreview() + "'");
      }
    }
    return module;
  }

private:
  // Lexing helpers ------------------------------------------------------===//

  bool atEnd() const { return pos >= src.size(); }
  char cur() const { return atEnd() ? '\0' : src[pos]; }

  void advance(size_t n = 1) {
    for (size_t i = 0; i < n && !atEnd(); ++i) {
      if (src[pos] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++pos;
    }
  }

  void skipWs() {
    while (!atEnd()) {
      char c = cur();
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        advance();
      } else if (src.substr(pos, 2) == "//") {
        while (!atEnd() && cur() != '\n')
          advance();
      } else {
        break;
      }
    }
  }

  SourceSpan here() const { return SourceSpan{std::string(file), line, col}; }

  [[noreturn]] void fail(const std::string &msg) const {
    throw ParseError(here(), msg);
  }
  [[noreturn]] void failAt(const SourceSpan &span,
                           const std::string &msg) const {
    throw ParseError(span, msg);
  }

  std::string tokenPreview() const {
    size_t end = pos;
    while (end < src.size() &&
           !std::isspace(static_cast<unsigned char>(src[end])) &&
           end - pos < 24)
      ++end;
    return atEnd() ? "<end of input>" : std::string(src.substr(pos, end - pos));
  }

  /// True when `c` is the next character on the current line.
  bool peekInline(char c) {
    while (!atEnd() && (cur() == ' ' || cur() == '\t'))
      advance();
    return cur() == c;
  }

  bool peek(std::string_view s) {
    skipWs();
    return src.substr(pos, s.size()) == s;
  }

  static bool isIdentChar(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  }

  bool peekWord(std::string_view s) {
    if (!peek(s))
      return false;
    size_t after = pos + s.size();
    return after >= src.size() || !isIdentChar(src[after]);
  }

  bool consume(std::string_view s) {
    if (!peek(s))
      return false;
    advance(s.size());
    return true;
  }

  bool consumeWord(std::string_view s) {
    if (!peekWord(s))
      return false;
    advance(s.size());
    return true;
  }

  void expect(std::string_view s) {
    if (!consume(s))
      fail("expected '" + std::string(s) + "', found '" + tokenPreview() + "'");
  }

  std::string ident() {
    skipWs();
    size_t start = pos;
    while (!atEnd() && isIdentChar(cur()))
      advance();
    if (start == pos)
      fail("expected an identifier, found '" + tokenPreview() + "'");
    return std::string(src.substr(start, pos - start));
  }

  /// Dotted op name such as `tt.load`.
  std::string opName() {
    skipWs();
    size_t start = pos;
    while (!atEnd() && (isIdentChar(cur()) || cur() == '.'))
      advance();
    if (start == pos)
      fail("expected an op name, found '" + tokenPreview() + "'");
    return std::string(src.substr(start, pos - start));
  }

  int64_t integer() {
    skipWs();
    size_t start = pos;
    if (cur() == '-')
      advance();
    while (!atEnd() && std::isdigit(static_cast<unsigned char>(cur())))
      advance();
    std::string_view text = src.substr(start, pos - start);
    int64_t value = 0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || res.ec != std::errc() ||
        res.ptr != text.data() + text.size())
      fail("expected an integer");
    return value;
  }

  /// Parses a numeric literal. Returns the value and whether it was written
  /// as an integer.
  std::pair<double, bool> number() {
    skipWs();
    SourceSpan span = here();
    size_t start = pos;
    bool negative = false;
    if (cur() == '-') {
      negative = true;
      advance();
    }
    if (consumeWord("inf"))
      return {negative ? -INFINITY : INFINITY, false};
    if (consumeWord("nan"))
      return {NAN, false};
    bool isInt = true;
    while (!atEnd()) {
      char c = cur();
      if (std::isdigit(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '.' || c == 'e' || c == 'E') {
        isInt = false;
        advance();
        if ((c == 'e' || c == 'E') && (cur() == '-' || cur() == '+'))
          advance();
      } else {
        break;
      }
    }
    std::string text(src.substr(start, pos - start));
    if (text.empty() || text == "-")
      failAt(span, "expected a number");
    double value = 0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
      failAt(span, "malformed number '" + text + "'");
    return {value, isInt};
  }

  std::vector<int64_t> intList() {
    expect("[");
    std::vector<int64_t> values;
    if (!consume("]")) {
      do
        values.push_back(integer());
      while (consume(","));
      expect("]");
    }
    return values;
  }

  std::string stringLit() {
    skipWs();
    if (cur() != '"')
      fail("expected a string literal");
    advance();
    std::string out;
    while (!atEnd() && cur() != '"') {
      if (cur() == '\\')
        advance();
      out += cur();
      advance();
    }
    if (atEnd())
      fail("unterminated string literal");
    advance();
    return out;
  }

  Attr attrValue() {
    if (peek("\""))
      return stringLit();
    if (peek("["))
      return intList();
    if (consumeWord("true"))
      return true;
    if (consumeWord("false"))
      return false;
    auto [value, isInt] = number();
    if (isInt)
      return static_cast<int64_t>(value);
    return value;
  }

  // Encodings -----------------------------------------------------------===//

  void parseAliasDef() {
    expect("#");
    SourceSpan span = here();
    std::string name = ident();
    expect("=");
    LayoutEncoding enc = parseEncoding();
    if (!aliases.emplace(name, enc).second)
      failAt(span, "encoding alias #" + name + " redefined");
  }

  LayoutEncoding parseEncoding() {
    skipWs();
    SourceSpan span = here();
    expect("#");
    if (!consume("triton_gpu.")) {
      std::string name = ident();
      auto it = aliases.find(name);
      if (it == aliases.end())
        failAt(span, "unknown encoding alias #" + name);
      return it->second;
    }
    std::string kind = ident();
    expect("<{");
    std::map<std::string, std::vector<int64_t>> lists;
    std::map<std::string, int64_t> ints;
    std::optional<LayoutEncoding> parent;
    std::set<std::string> keys;
    if (kind == "blocked")
      keys = {"sizePerWarp", "warpsPerCTA", "order"};
    else if (kind == "dot_op")
      keys = {"opIdx", "parent"};
    else if (kind == "slice")
      keys = {"dim", "parent"};
    else
      failAt(span, "unknown encoding kind '" + kind + "'");
    do {
      SourceSpan keySpan = here();
      std::string key = ident();
      if (!keys.count(key))
        failAt(keySpan,
               "unknown attribute key '" + key + "' in " + kind + " encoding");
      expect("=");
      if (key == "parent")
        parent = parseEncoding();
      else if (kind == "blocked")
        lists[key] = intList();
      else
        ints[key] = integer();
      keys.erase(key);
    } while (consume(","));
    expect("}>");
    if (!keys.empty())
      failAt(span,
             "missing key '" + *keys.begin() + "' in " + kind + " encoding");
    try {
      if (kind == "blocked")
        return LayoutEncoding::blocked(lists["sizePerWarp"],
                                       lists["warpsPerCTA"], lists["order"]);
      if (kind == "dot_op")
        return LayoutEncoding::dotOperand(ints["opIdx"], *parent);
      return LayoutEncoding::slice(ints["dim"], *parent);
    } catch (const LayoutError &e) {
      failAt(span, e.what());
    }
  }

  // Types ---------------------------------------------------------------===//

  ElemType elemType() {
    SourceSpan span = here();
    std::string name = ident();
    auto elem = parseElemName(name);
    if (!elem)
      failAt(span, "unknown element type '" + name + "'");
    return *elem;
  }

  TensorType tensorBody() {
    expect("tensor<");
    TensorType t;
    skipWs();
    while (std::isdigit(static_cast<unsigned char>(cur()))) {
      t.shape.push_back(integer());
      if (cur() != 'x')
        fail("expected 'x' in tensor shape");
      advance();
    }
    t.elem = elemType();
    if (consume(","))
      t.encoding = parseEncoding();
    expect(">");
    return t;
  }

  Type parseType() {
    skipWs();
    if (consume("!tt.ptr<")) {
      PointerType p;
      if (peek("tensor<")) {
        p.block = tensorBody();
        p.elem = p.block->elem;
      } else {
        p.elem = elemType();
      }
      expect(">");
      return p;
    }
    if (peek("tensor<"))
      return tensorBody();
    return scalarType(elemType());
  }

  // Values --------------------------------------------------------------===//

  std::string valueName() {
    skipWs();
    if (cur() != '%')
      fail("expected a value name, found '" + tokenPreview() + "'");
    advance();
    return ident();
  }

  Value defineValue(const std::string &name, const SourceSpan &span,
                    Type type) {
    bool numeric = std::all_of(name.begin(), name.end(), [](char c) {
      return std::isdigit(static_cast<unsigned char>(c));
    });
    Value v = fn->newValue(std::move(type), numeric ? "" : name);
    if (!scope.emplace(name, v).second)
      failAt(span, "value %" + name + " redefined");
    return v;
  }

  Value useValue() {
    SourceSpan span = here();
    std::string name = valueName();
    auto it = scope.find(name);
    if (it == scope.end())
      failAt(span, "use of undefined value %" + name);
    return it->second;
  }

  std::vector<Value> bracketValues() {
    expect("[");
    std::vector<Value> values;
    if (!consume("]")) {
      do
        values.push_back(useValue());
      while (consume(","));
      expect("]");
    }
    return values;
  }

  // Functions and ops ---------------------------------------------------===//

  KernelFn parseFunction() {
    KernelFn result;
    fn = &result;
    scope.clear();
    expect("tt.func");
    if (consumeWord("public"))
      result.isPublic = true;
    expect("@");
    result.name = ident();
    expect("(");
    if (!consume(")")) {
      do {
        SourceSpan span = here();
        std::string name = valueName();
        expect(":");
        Type type = parseType();
        result.body.args.push_back(defineValue(name, span, std::move(type)));
      } while (consume(","));
      expect(")");
    }
    if (consumeWord("attributes")) {
      expect("{");
      do {
        SourceSpan span = here();
        std::string key = ident();
        expect("=");
        if (key == "num_warps") {
          result.numWarps = integer();
        } else if (key == "warp_level") {
          if (consumeWord("true"))
            result.warpLevel = true;
          else if (consumeWord("false"))
            result.warpLevel = false;
          else
            fail("expected true or false");
        } else {
          failAt(span, "unknown attribute key '" + key + "'");
        }
      } while (consume(","));
      expect("}");
    }
    parseRegionBody(result.body);
    fn = nullptr;
    return result;
  }

  void parseRegionBody(Region &region) {
    expect("{");
    while (!consume("}")) {
      if (atEnd())
        fail("unterminated region");
      parseOp(region);
    }
  }

  void parseAttrDict(Op &op, const SourceSpan &opSpan) {
    if (!consume("{"))
      return;
    const std::set<std::string> &allowed = allowedAttrs(op.kind);
    do {
      SourceSpan span = here();
      std::string key = ident();
      if (!allowed.count(key))
        failAt(span, "unknown attribute key '" + key + "' for " +
                         std::string(opKindName(op.kind)));
      expect("=");
      if (!op.attrs.emplace(key, attrValue()).second)
        failAt(span, "duplicate attribute '" + key + "'");
    } while (consume(","));
    expect("}");
    if (op.kind == OpKind::MakeTensorPtr && op.hasAttr("order")) {
      std::vector<int64_t> order = op.listAttr("order");
      std::vector<int64_t> sorted = order;
      std::sort(sorted.begin(), sorted.end());
      for (size_t i = 0; i < sorted.size(); ++i)
        if (sorted[i] != static_cast<int64_t>(i))
          failAt(opSpan, "order is not a permutation");
    }
  }

  void parseOp(Region &region) {
    std::vector<std::pair<std::string, SourceSpan>> resultNames;
    if (peek("%")) {
      do {
        SourceSpan span = here();
        resultNames.emplace_back(valueName(), span);
      } while (consume(","));
      expect("=");
    }
    skipWs();
    SourceSpan opSpan = here();
    std::string name = opName();
    auto kind = parseOpKind(name);
    if (!kind)
      failAt(opSpan, "unknown op '" + name + "'");
    Op op;
    op.kind = *kind;
    std::vector<Type> types;

    switch (op.kind) {
    case OpKind::Constant: {
      Attr value;
      if (consumeWord("true"))
        value = int64_t{1};
      else if (consumeWord("false"))
        value = int64_t{0};
      else {
        auto [num, isInt] = number();
        value = isInt ? Attr(static_cast<int64_t>(num)) : Attr(num);
      }
      expect(":");
      types.push_back(parseType());
      const TensorType *t = std::get_if<TensorType>(&types.back());
      if (!t)
        failAt(opSpan, "arith.constant needs a tensor or scalar type");
      if (isFloat(t->elem) && std::holds_alternative<int64_t>(value))
        value = static_cast<double>(std::get<int64_t>(value));
      if (!isFloat(t->elem) && std::holds_alternative<double>(value))
        failAt(opSpan, "integer constant expected");
      op.attrs["value"] = value;
      break;
    }
    case OpKind::MakeTensorPtr: {
      op.operands.push_back(useValue());
      for (int g = 0; g < 3; ++g) {
        expect(",");
        std::vector<Value> group = bracketValues();
        op.operands.insert(op.operands.end(), group.begin(), group.end());
      }
      parseAttrDict(op, opSpan);
      expect(":");
      types.push_back(parseType());
      break;
    }
    case OpKind::Advance: {
      op.operands.push_back(useValue());
      expect(",");
      std::vector<Value> deltas = bracketValues();
      op.operands.insert(op.operands.end(), deltas.begin(), deltas.end());
      expect(":");
      types.push_back(parseType());
      break;
    }
    case OpKind::For:
      return parseFor(region, op, resultNames);
    case OpKind::If: {
      if (!resultNames.empty())
        failAt(opSpan, "scf.if has no results");
      op.operands.push_back(useValue());
      op.regions.emplace_back();
      auto saved = scope;
      parseRegionBody(op.regions.back());
      scope = std::move(saved);
      region.ops.push_back(std::move(op));
      return;
    }
    default: {
      if (peekInline('%')) {
        do
          op.operands.push_back(useValue());
        while (consume(","));
      }
      parseAttrDict(op, opSpan);
      if (consume(":")) {
        do
          types.push_back(parseType());
        while (consume(","));
      }
      break;
    }
    }

    if (types.size() != resultNames.size())
      failAt(opSpan, name + " declares " + std::to_string(types.size()) +
                         " result types for " +
                         std::to_string(resultNames.size()) + " results");
    for (size_t i = 0; i < types.size(); ++i)
      op.results.push_back(
          defineValue(resultNames[i].first, resultNames[i].second, types[i]));
    region.ops.push_back(std::move(op));
  }

  void parseFor(Region &region, Op &op,
                const std::vector<std::pair<std::string, SourceSpan>> &names) {
    SourceSpan ivSpan = here();
    std::string ivName = valueName();
    expect("=");
    op.operands.push_back(useValue());
    if (!consumeWord("to"))
      fail("expected 'to'");
    op.operands.push_back(useValue());
    if (!consumeWord("step"))
      fail("expected 'step'");
    op.operands.push_back(useValue());
    std::vector<std::pair<std::string, SourceSpan>> argNames;
    if (consumeWord("iter_args")) {
      expect("(");
      do {
        SourceSpan span = here();
        argNames.emplace_back(valueName(), span);
        expect("=");
        op.operands.push_back(useValue());
      } while (consume(","));
      expect(")");
    }
    std::vector<Type> types;
    if (consume("->")) {
      expect("(");
      do
        types.push_back(parseType());
      while (consume(","));
      expect(")");
    }
    if (types.size() != argNames.size() || names.size() != argNames.size())
      failAt(ivSpan, "scf.for needs one type and one result per iter_arg");

    auto saved = scope;
    Region body;
    body.args.push_back(defineValue(ivName, ivSpan, scalarType(ElemType::I32)));
    for (size_t i = 0; i < argNames.size(); ++i)
      body.args.push_back(
          defineValue(argNames[i].first, argNames[i].second, types[i]));
    parseRegionBody(body);
    scope = std::move(saved);
    op.regions.push_back(std::move(body));
    for (size_t i = 0; i < types.size(); ++i)
      op.results.push_back(
          defineValue(names[i].first, names[i].second, types[i]));
    region.ops.push_back(std::move(op));
  }

  std::string_view src;
  std::string_view file;
  size_t pos = 0;
  int line = 1;
  int col = 1;
  std::map<std::string, LayoutEncoding> aliases;
  std::unordered_map<std::string, Value> scope;
  KernelFn *fn = nullptr;
};

} // namespace

KernelModule parseModule(std::string_view text, std::string_view fileName) {
  return Parser(text, fileName).run();
}

std::string printModule(const KernelModule &module) {
  return Printer(module).run();
}

std::string printFunction(const KernelFn &fn) {
  KernelModule module;
  module.functions.push_back(fn);
  return printModule(module);
}

} // namespace tilec
