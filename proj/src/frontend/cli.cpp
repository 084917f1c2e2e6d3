#include <filesystem>
#include <sstream>

#include <CLI11.hpp>

#include "uhat/derive.hpp"
#include "uhat/frontend.hpp"
#include "uhat/harness.hpp"

namespace uhat {

namespace {

struct SynthFlags {
  std::string configFile;
  std::optional<int> unrollBound, maxCandidates, starBound;
  std::optional<double> timeout;
  std::optional<std::string> domain;
  std::optional<uint64_t> seed;

  void attach(CLI::App* app) {
    app->add_option("--config", configFile, "key=value configuration file");
    app->add_option("--unroll-bound", unrollBound, "recursion unrolling bound");
    app->add_option("--max-candidates", maxCandidates, "finished candidates to keep");
    app->add_option("--timeout", timeout, "synthesis wall-clock limit in seconds");
    app->add_option("--star-bound", starBound, "star expansion bound");
    app->add_option("--domain", domain, "integer domain LO..HI");
    app->add_option("--seed", seed, "seed");
  }

  Config resolve(const SpecFile* spec) const {
    Config cfg;
    if (spec)
      for (auto& [k, v] : spec->config) applyConfig(cfg, k, v);
    if (!configFile.empty()) applyConfigFile(cfg, configFile);
    if (unrollBound) cfg.unrollBound = *unrollBound;
    if (maxCandidates) cfg.maxCandidates = *maxCandidates;
    if (starBound) cfg.starBound = *starBound;
    if (timeout) cfg.timeoutSec = *timeout;
    if (domain) applyConfig(cfg, "domain", *domain);
    if (seed) cfg.seed = *seed;
    return cfg;
  }
};

std::string sidecar(const GeneratorProgram& g) {
  std::ostringstream os;
  std::set<std::string> scope = g.gamma.names();
  os << "origin: " << g.origin << "\n";
  os << "context:";
  for (auto& [x, t] : g.gamma.binds) os << " " << x << ":" << printType(t);
  os << "\nfacts:";
  for (auto& f : g.facts) os << " " << printFormula(f) << ";";
  os << "\ntype: " << printRegex(g.claimed->H, scope) << " | " << printType(g.claimed->a) << " | "
     << printRegex(g.claimed->F, scope) << "\n";
  os << "source: " << printAbstractTrace(g.source, scope) << "\n";
  os << "recursive: " << (g.recursive ? "yes" : "no") << "\n";
  return os.str();
}

int doSynth(const std::string& specPath, const std::string& prop, const std::string& outDir, const SynthFlags& fl,
            std::ostream& out) {
  SpecFile spec = loadSpec(specPath);
  Config cfg = fl.resolve(&spec);
  const PropertyDecl& p = lookupProperty(spec, prop);
  SynthResult r = synthesize(spec.delta, propertyVars(p), p.sre, cfg);
  std::filesystem::create_directories(outDir);
  auto emit = [&](const std::string& stem, const GeneratorProgram& g) {
    std::string base = (std::filesystem::path(outDir) / stem).string();
    writeFile(base + ".gen", printExpr(g.expr) + "\n");
    writeFile(base + ".type", sidecar(g));
    out << "wrote " << base << ".gen\n";
  };
  emit(prop, r.combined);
  for (size_t k = 0; k < r.programs.size(); ++k) emit(prop + "." + std::to_string(k + 1), r.programs[k]);
  out << "candidates: " << r.finished.size() << "\nrefinement steps: " << r.stats.steps << "\n";
  return 0;
}

OpTable opsFor(const std::string& specPath, const std::string& handler) {
  if (!specPath.empty()) return loadSpec(specPath).delta.ops;
  return familyOps(lookupHandler(handler).family);
}

int doRun(const std::string& genPath, const std::string& handler, uint64_t seed, int maxRuns,
          const std::string& specPath, const std::string& traceOut, bool expectViolation, const SynthFlags& fl,
          std::ostream& out) {
  Config cfg = fl.resolve(nullptr);
  OpTable ops = opsFor(specPath, handler);
  Expr g = parseExpr(readFile(genPath), ops);
  typecheckBasic(g, ops);
  const HandlerSpec& hs = lookupHandler(handler);
  auto sut = hs.make();
  auto ref = makeHandler(hs.reference);
  TraceMonitor monitor = familyMonitor(hs.family);
  RunOutcome last;
  int runs = 0;
  bool found = false;
  for (int i = 0; i < maxRuns && !found; ++i) {
    last = run(g, ops, *sut, runSeed(seed, static_cast<uint64_t>(i)), cfg);
    ++runs;
    found = isViolation(last, *ref, monitor);
  }
  out << "runs: " << runs << "\n";
  out << "outcome: " << outcomeName(last.kind) << "\n";
  out << "violation: " << (found ? "yes" : "no") << "\n";
  if (last.failed) out << "failed: " << printFormula(last.failed) << "\n";
  if (!last.message.empty()) out << "fault: " << last.message << "\n";
  std::string trace = formatTrace(last.trace);
  if (traceOut.empty()) {
    out << "trace:\n" << trace;
  } else {
    writeFile(traceOut, trace);
    out << "trace: " << traceOut << "\n";
  }
  return expectViolation && !found ? 1 : 0;
}

int doCheck(const std::string& tracePath, const std::string& prop, const std::string& specPath,
            const SynthFlags& fl, std::ostream& out) {
  SpecFile spec = loadSpec(specPath);
  Config cfg = fl.resolve(&spec);
  Trace t = parseTrace(readFile(tracePath));
  checkWellFormed(eraseGhost(t), spec.delta.ops);
  bool ok = traceSatisfies(t, lookupProperty(spec, prop), cfg);
  out << (ok ? "accepted" : "rejected") << "\n";
  return ok ? 0 : 1;
}

int doBench(const std::string& specPath, const std::string& prop, const std::string& handler, int runs,
            const std::string& baseline, int jobs, int maxLen, const SynthFlags& fl, std::ostream& out) {
  SpecFile spec = loadSpec(specPath);
  Config cfg = fl.resolve(&spec);
  const PropertyDecl& p = lookupProperty(spec, prop);
  SynthResult r = synthesize(spec.delta, propertyVars(p), p.sre, cfg);
  CampaignOptions opt;
  opt.runs = runs;
  opt.seed = cfg.seed;
  opt.jobs = jobs;
  out << benchHeader() << "\n";
  out << benchRow(runCampaign(Strategy{"synth", r.combined.expr}, handler, spec.delta.ops, opt, cfg)) << "\n";
  if (baseline == "random") {
    Expr b = randomBaseline(spec.delta.ops, maxLen);
    out << benchRow(runCampaign(Strategy{"random", b}, handler, spec.delta.ops, opt, cfg)) << "\n";
  } else if (!baseline.empty() && baseline != "none") {
    throw SemanticError("unknown baseline " + baseline);
  }
  return 0;
}

}  // namespace

int cliMain(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"uhatgen: synthesize, run and benchmark effectful test generators"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(UHAT_VERSION));

  SynthFlags fl;
  std::string specPath, prop, outDir, genPath, handler, tracePath, traceOut, baseline = "random";
  uint64_t runSeedFlag = 0;
  int maxRuns = 1, runs = 10000, jobs = 1, maxLen = 10;
  bool expectViolation = false;

  CLI::App* synth = app.add_subcommand("synth", "synthesize generators for a property");
  synth->add_option("--spec", specPath, "spec file")->required();
  synth->add_option("--property", prop, "property name")->required();
  synth->add_option("--out", outDir, "output directory")->required();
  fl.attach(synth);

  CLI::App* runCmd = app.add_subcommand("run", "run a generator against a handler");
  runCmd->add_option("--gen", genPath, "generator file")->required();
  runCmd->add_option("--handler", handler, "handler name")->required();
  runCmd->add_option("--seed", runSeedFlag, "campaign seed");
  runCmd->add_option("--max-runs", maxRuns, "stop after this many runs");
  runCmd->add_option("--spec", specPath, "spec file supplying the operator table");
  runCmd->add_option("--trace-out", traceOut, "write the last trace here");
  runCmd->add_flag("--expect-violation", expectViolation, "exit 1 unless a violation is found");
  runCmd->add_option("--config", fl.configFile, "key=value configuration file");

  CLI::App* check = app.add_subcommand("check", "test a trace against a property");
  check->add_option("--trace", tracePath, "trace file")->required();
  check->add_option("--property", prop, "property name")->required();
  check->add_option("--spec", specPath, "spec file")->required();
  check->add_option("--config", fl.configFile, "key=value configuration file");

  CLI::App* bench = app.add_subcommand("bench", "executions-to-violation table");
  bench->add_option("--spec", specPath, "spec file")->required();
  bench->add_option("--property", prop, "property name")->required();
  bench->add_option("--handler", handler, "handler name")->required();
  bench->add_option("--runs", runs, "executions per strategy");
  bench->add_option("--baseline", baseline, "baseline strategy (random or none)");
  bench->add_option("--jobs", jobs, "worker threads");
  bench->add_option("--max-len", maxLen, "random baseline length bound");
  fl.attach(bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion& e) {
    out << UHAT_VERSION << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return 2;
  }

  try {
    if (synth->parsed()) return doSynth(specPath, prop, outDir, fl, out);
    if (runCmd->parsed())
      return doRun(genPath, handler, runSeedFlag, maxRuns, specPath, traceOut, expectViolation, fl, out);
    if (check->parsed()) return doCheck(tracePath, prop, specPath, fl, out);
    if (bench->parsed()) return doBench(specPath, prop, handler, runs, baseline, jobs, maxLen, fl, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace uhat
