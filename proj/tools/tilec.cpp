//===- tilec.cpp - Compiler and simulator driver --------------------------===//
//
// Part of the tilec project, under the Apache License v2.0 with LLVM
// Exceptions. See https://llvm.org/LICENSE.txt for license information.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//
//
// Verbs: compile, run, check, stats. Exit codes: 0 success, 1 compile
// diagnostics, 2 run or check failure, 3 usage error.
//
//===----------------------------------------------------------------------===//

#include "tilec/Oracle.h"
#include "tilec/Passes.h"
#include "tilec/Sim.h"
#include "tilec/Suite.h"
#include "tilec/TextIO.h"
#include "tilec/VISA.h"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace tilec;
namespace fs = std::filesystem;

namespace {

enum ExitCode { kOk = 0, kCompileError = 1, kCheckFailure = 2, kUsage = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string kernel;
  std::string manifest;
  std::string targetPath;
  std::string level = "visa";
  std::string dumpAfter;
  std::string outDir;
  std::string grid;
  int64_t numWarps = 0;
  uint64_t seed = 7;
  bool seedGiven = false;
  std::vector<std::string> hints;
  std::vector<std::string> inputs;
  std::vector<std::string> params;
  std::string style;
  std::string output;
  bool zeros = false;
};

const std::vector<std::string> kLevels = {"workgroup", "warp", "intrinsic",
                                          "visa"};

std::string readFile(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw UsageError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void writeFile(const fs::path &path, const std::string &text) {
  std::ofstream out(path);
  if (!out)
    throw UsageError("cannot write " + path.string());
  out << text;
}

std::vector<int64_t> parseInts(const std::string &text, char sep) {
  std::vector<int64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    try {
      size_t used = 0;
      out.push_back(std::stoll(item, &used));
      if (used != item.size())
        throw std::invalid_argument(item);
    } catch (const std::exception &) {
      throw UsageError("expected integers separated by '" +
                       std::string(1, sep) + "', got '" + text + "'");
    }
  }
  return out;
}

std::pair<std::string, std::string> splitKeyValue(const std::string &text) {
  size_t eq = text.find('=');
  if (eq == std::string::npos || eq == 0)
    throw UsageError("expected key=value, got '" + text + "'");
  return {text.substr(0, eq), text.substr(eq + 1)};
}

TargetConfig loadTarget(const Options &o) {
  TargetConfig t = TargetConfig::pvc();
  if (!o.targetPath.empty()) {
    try {
      t = parseTargetConfig(readFile(o.targetPath));
    } catch (const UsageError &) {
      throw;
    } catch (const std::exception &e) {
      throw UsageError(o.targetPath + ": " + e.what());
    }
  }
  if (o.style == "simt")
    t.style = CodegenStyle::Simt;
  else if (o.style == "simd")
    t.style = CodegenStyle::Simd;
  else if (!o.style.empty())
    throw UsageError("--style must be simt or simd");
  return t;
}

/// The fixture registered for `kernel` (a fixture name or .ttir path).
std::optional<KernelFixture> findFixture(const Options &o) {
  fs::path manifest = o.manifest;
  if (manifest.empty()) {
    fs::path k(o.kernel);
    manifest = (k.has_extension() ? k.parent_path() : fs::path("kernels")) /
               "manifest.json";
  }
  if (!fs::exists(manifest))
    return std::nullopt;
  std::vector<KernelFixture> suite = loadSuite(manifest.string());
  for (KernelFixture &f : suite) {
    bool byPath = fs::exists(o.kernel) &&
                  fs::equivalent(fs::path(f.path), fs::path(o.kernel));
    if (f.name == o.kernel || byPath)
      return f;
  }
  return std::nullopt;
}

struct Loaded {
  KernelFn fn;
  std::string stem;
  std::optional<KernelFixture> fixture;
};

Loaded loadInput(const Options &o) {
  Loaded l;
  l.fixture = findFixture(o);
  std::string path = o.kernel;
  if (!fs::exists(path)) {
    if (!l.fixture)
      throw UsageError("no kernel file or fixture named '" + o.kernel + "'");
    path = l.fixture->path;
  }
  KernelModule m = parseModule(readFile(path), path);
  if (m.functions.size() != 1)
    throw CompileError({path + ": expected exactly one function"});
  l.fn = std::move(m.functions.front());
  l.stem = fs::path(path).stem().string();
  if (o.numWarps > 0) {
    if (l.fn.warpLevel && o.numWarps != l.fn.numWarps)
      throw UsageError("--num-warps cannot change a warp-level kernel");
    l.fn.numWarps = o.numWarps;
  }
  std::map<int64_t, TilingHint> hints;
  for (const std::string &h : o.hints) {
    auto [key, value] = splitKeyValue(h);
    if (key.rfind("dot", 0) != 0)
      throw UsageError("--hint expects dotN=tiling, got '" + h + "'");
    std::vector<int64_t> idx = parseInts(key.substr(3), ',');
    std::optional<TilingHint> hint = parseHintName(value);
    if (idx.size() != 1 || !hint)
      throw UsageError("--hint expects dotN=square|horizontal|vertical, "
                       "got '" +
                       h + "'");
    hints[idx[0]] = *hint;
  }
  if (!hints.empty())
    applyHints(l.fn, hints);
  return l;
}

fs::path dumpDir(const Options &o) {
  if (!o.outDir.empty())
    return o.outDir;
  if (const char *env = std::getenv("TILEC_DUMP_DIR"))
    return env;
  return ".";
}

size_t levelIndex(const std::string &level) {
  for (size_t i = 0; i < kLevels.size(); ++i)
    if (kLevels[i] == level)
      return i;
  throw UsageError("--level must be one of workgroup, warp, intrinsic, visa");
}

/// Compiled forms up to the requested level.
struct Compiled {
  KernelFn fn;
  std::optional<VProgram> prog;
};

Compiled compile(const Options &o, const Loaded &in, const TargetConfig &t,
                 const PassManager::DumpHook &dump) {
  static const char *lastPass[] = {nullptr, kDistributeToWarps,
                                   kMatchTargetSize, kMatchTargetSize};
  size_t level = levelIndex(o.level);
  Compiled c{in.fn, std::nullopt};
  if (level > 0) {
    PassManager pm = buildPipeline(t, lastPass[level]);
    if (dump)
      pm.setDumpHook(dump);
    c.fn = pm.run(in.fn);
  }
  if (level == 3)
    c.prog = lower(c.fn, t);
  return c;
}

int cmdCompile(const Options &o) {
  Loaded in = loadInput(o);
  TargetConfig t = loadTarget(o);
  std::set<std::string> wanted;
  static const std::vector<std::string> all = {
      kAssignLayouts, kDistributeToWarps, kMatchTargetSize, kLowerToVisa};
  if (o.dumpAfter == "all")
    wanted.insert(all.begin(), all.end());
  else if (!o.dumpAfter.empty()) {
    std::stringstream ss(o.dumpAfter);
    std::string item;
    while (std::getline(ss, item, ','))
      if (std::find(all.begin(), all.end(), item) == all.end())
        throw UsageError("unknown pass '" + item + "' for --dump-after");
      else
        wanted.insert(item);
  }
  fs::path dir = dumpDir(o);
  fs::create_directories(dir);
  auto hook = [&](const std::string &pass, const KernelFn &fn) {
    if (!wanted.count(pass))
      return;
    fs::path p = dir / (in.stem + "." + pass + ".ttir");
    writeFile(p, printFunction(fn));
    std::cout << p.string() << "\n";
  };
  Compiled c = compile(o, in, t, hook);
  if (c.prog && (wanted.count(kLowerToVisa) || wanted.empty())) {
    fs::path p = dir / (in.stem + "." + kLowerToVisa + ".vasm");
    writeFile(p, disassemble(*c.prog));
    std::cout << p.string() << "\n";
  } else if (!c.prog && wanted.empty()) {
    fs::path p = dir / (in.stem + "." + o.level + ".ttir");
    writeFile(p, printFunction(c.fn));
    std::cout << p.string() << "\n";
  }
  return kOk;
}

Problem prepareProblem(const Options &o, const Loaded &in) {
  if (!in.fixture)
    throw UsageError("'" + o.kernel +
                     "' has no registered problem; add it to the manifest");
  KernelFixture f = *in.fixture;
  for (const std::string &p : o.params) {
    auto [key, value] = splitKeyValue(p);
    std::vector<int64_t> v = parseInts(value, ',');
    if (v.size() != 1)
      throw UsageError("--param expects KEY=integer");
    f.params[key] = v[0];
  }
  if (o.seedGiven && !o.inputs.empty())
    throw UsageError("--seed and --input are mutually exclusive");
  Problem prob =
      makeProblem(f, o.seed, o.zeros ? InputFill::Zeros : InputFill::Random);
  for (const std::string &spec : o.inputs) {
    auto [name, path] = splitKeyValue(spec);
    auto it = prob.buffers.find(name);
    if (it == prob.buffers.end())
      throw UsageError("kernel has no buffer argument '" + name + "'");
    Buffer b = loadTensor(path);
    const Buffer &cur = prob.mem[it->second];
    if (b.elem != cur.elem || b.dims != cur.dims)
      throw UsageError(path + ": expected " + std::string(elemName(cur.elem)) +
                       " tensor of shape " + shapeStr(cur.dims));
    prob.mem[it->second] = std::move(b);
  }
  if (!o.grid.empty()) {
    std::vector<int64_t> g = parseInts(o.grid, ',');
    if (g.empty() || g.size() > 3)
      throw UsageError("--grid expects gx[,gy[,gz]]");
    prob.launch.grid = {1, 1, 1};
    for (size_t i = 0; i < g.size(); ++i)
      prob.launch.grid[i] = g[i];
  }
  prob.launch.numWarps = in.fn.numWarps;
  return prob;
}

void execute(const Compiled &c, Problem &prob, const TargetConfig &t) {
  prob.launch.target = t;
  if (c.prog)
    run(*c.prog, prob.launch, prob.mem, prob.args);
  else
    run(c.fn, prob.launch, prob.mem, prob.args);
}

int cmdRun(const Options &o) {
  Loaded in = loadInput(o);
  TargetConfig t = loadTarget(o);
  Problem prob = prepareProblem(o, in);
  Compiled c = compile(o, in, t, nullptr);
  execute(c, prob, t);
  fs::path out = o.output.empty()
                     ? dumpDir(o) / (in.stem + "." + o.level + ".out.tlct")
                     : fs::path(o.output);
  if (!out.parent_path().empty())
    fs::create_directories(out.parent_path());
  saveTensor(out.string(), prob.mem[prob.output]);
  std::cout << "wrote " << out.string() << "\n";
  return kOk;
}

int cmdCheck(const Options &o) {
  Loaded in = loadInput(o);
  if (!in.fixture) {
    std::cerr << "error: no oracle registered for '" << o.kernel << "'\n";
    return kCheckFailure;
  }
  TargetConfig t = loadTarget(o);
  Problem prob = prepareProblem(o, in);
  Reference ref = reference(*in.fixture, prob);
  Compiled c = compile(o, in, t, nullptr);
  execute(c, prob, t);
  double err = maxRelativeError(prob.mem[prob.output].data, ref.values);
  bool pass = err <= in.fixture->tolerance;
  std::cout << (pass ? "PASS " : "FAIL ") << in.fixture->name
            << " level=" << o.level << " max_rel_err=" << err
            << " tolerance=" << in.fixture->tolerance;
  if (ref.selfCheck)
    std::cout << " oracle_self_check=" << *ref.selfCheck;
  std::cout << "\n";
  return pass ? kOk : kCheckFailure;
}

int cmdStats(const Options &o) {
  Loaded in = loadInput(o);
  TargetConfig t = loadTarget(o);
  Options full = o;
  full.level = "visa";
  Compiled c = compile(full, in, t, nullptr);
  std::map<std::string, int64_t> scalars;
  if (in.fixture)
    scalars = makeProblem(*in.fixture, o.seed, InputFill::Zeros).scalarArgs;
  std::cout << formatStats(countStats(*c.prog, scalars));
  return kOk;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"tilec: tile-kernel compiler and virtual GPU simulator"};
  app.require_subcommand(1);
  Options o;
  auto addCommon = [&](CLI::App *cmd) {
    cmd->add_option("kernel", o.kernel, "Kernel .ttir file or fixture name")
        ->required();
    cmd->add_option("--manifest", o.manifest, "Fixture manifest (json)");
    cmd->add_option("--target", o.targetPath, "Target config file");
    cmd->add_option("--style", o.style, "simt or simd");
    cmd->add_option("--num-warps", o.numWarps, "Override num_warps");
    cmd->add_option("--hint", o.hints, "dotN=square|horizontal|vertical");
    cmd->add_option("--out-dir", o.outDir, "Artifact directory");
  };
  auto addRun = [&](CLI::App *cmd) {
    cmd->add_option("--level", o.level,
                    "workgroup, warp, intrinsic or visa (default visa)");
    cmd->add_option("--grid", o.grid, "gx[,gy[,gz]]");
    cmd->add_option("--seed", o.seed, "Input RNG seed")
        ->each([&](const std::string &) { o.seedGiven = true; });
    cmd->add_option("--input", o.inputs, "name=path.tlct input override");
    cmd->add_option("--param", o.params, "KEY=VALUE problem parameter");
    cmd->add_flag("--zeros", o.zeros, "Zero-filled inputs");
  };
  CLI::App *compileCmd = app.add_subcommand("compile", "Compile and dump");
  addCommon(compileCmd);
  compileCmd->add_option("--level", o.level, "Stop after this level");
  compileCmd->add_option("--dump-after", o.dumpAfter,
                         "Pass name(s), comma separated, or 'all'");
  CLI::App *runCmd = app.add_subcommand("run", "Run on the simulator");
  addCommon(runCmd);
  addRun(runCmd);
  runCmd->add_option("--output", o.output, "Output tensor path");
  CLI::App *checkCmd = app.add_subcommand("check", "Compare with the oracle");
  addCommon(checkCmd);
  addRun(checkCmd);
  CLI::App *statsCmd = app.add_subcommand("stats", "Instruction counts");
  addCommon(statsCmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  try {
    if (compileCmd->parsed())
      return cmdCompile(o);
    if (runCmd->parsed())
      return cmdRun(o);
    if (checkCmd->parsed())
      return cmdCheck(o);
    return cmdStats(o);
  } catch (const UsageError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ParseError &e) {
    std::cerr << e.what() << "\n";
    return kCompileError;
  } catch (const CompileError &e) {
    for (const std::string &d : e.diagnostics())
      std::cerr << "error: " << d << "\n";
    return kCompileError;
  } catch (const SimError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kCheckFailure;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kCheckFailure;
  }
}
