// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <unistd.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "gen.hpp"
#include "oracle.hpp"
#include "uhat/derive.hpp"
#include "uhat/frontend.hpp"
#include "uhat/harness.hpp"

using namespace uhat;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string specsDir;
std::string cliPath;

SpecFile spec(const std::string& name) { return loadSpec((fs::path(specsDir) / (name + ".uhat")).string()); }

// 1. Normalized abstract traces denote exactly the source SRE on short traces.
Verdict normalizationSoundness() {
  Config cfg;
  cfg.domain = {0, 3};
  gen::SreGen g(1, gen::twoOps(), 0, 3);
  auto letters = oracle::alphabet(g.ops(), cfg.domain);
  int checked = 0, traces = 0;
  for (int i = 0; i < 300; ++i) {
    Regex src = g.linear(3);
    std::vector<AbstractTrace> plan = normPlan(src, g.ops(), cfg);
    oracle::Derivatives d(letters, {}, cfg.domain);
    std::vector<int> parts;
    for (auto& pi : plan) parts.push_back(d.compile(traceRegex(pi)));
    int lhs = d.compile(src), rhs = d.unite(parts);
    if (auto t = d.disagreement(lhs, rhs, 5))
      return {false, "instance " + std::to_string(i) + " " + printRegex(src) + " differs on " +
                         std::to_string(t->size()) + "-event trace"};
    ++checked;
    traces += static_cast<int>(plan.size());
  }
  return {true, std::to_string(checked) + " SREs, " + std::to_string(traces) + " abstract traces"};
}

// 2. isEmpty and includes against exhaustive derivative exploration.
Verdict oracleEquivalence() {
  Config cfg;
  cfg.domain = {0, 3};
  gen::SreGen g(2, gen::twoOps(), 0, 3);
  auto letters = oracle::alphabet(g.ops(), cfg.domain);
  std::array<int, 2> emptyCounts{}, inclCounts{};
  for (int i = 0; i < 200; ++i) {
    Regex r = i % 2 ? reAnd(g.full(2), g.full(2)) : g.full(3);
    oracle::Derivatives d(letters, {}, cfg.domain);
    auto expect = d.empty(d.compile(r));
    if (!expect) return {false, "oracle state cap hit on " + printRegex(r)};
    if (isEmpty(r, {}, g.ops(), cfg) != *expect)
      return {false, "isEmpty disagrees on " + printRegex(r)};
    ++emptyCounts[*expect];
  }
  for (int i = 0; i < 200; ++i) {
    Regex a = g.full(2);
    Regex b = i % 3 == 0 ? reOr(a, g.full(1)) : g.full(2);
    oracle::Derivatives d(letters, {}, cfg.domain);
    auto expect = d.empty(d.intersect(d.compile(a), d.complement(d.compile(b))));
    if (!expect) return {false, "oracle state cap hit"};
    if (includes({}, a, b, g.ops(), cfg) != *expect)
      return {false, "includes disagrees on " + printRegex(a) + " <= " + printRegex(b)};
    ++inclCounts[*expect];
  }
  std::ostringstream os;
  os << "isEmpty " << emptyCounts[1] << " empty/" << emptyCounts[0] << " inhabited; includes " << inclCounts[1]
     << " yes/" << inclCounts[0] << " no";
  return {true, os.str()};
}

// 3. The push/pop application typing chain with its intermediate types.
Verdict typingWalkthrough() {
  OpTable ops;
  auto op = [&](const std::string& n, OpKind k, std::vector<Sort> ps, Sort r) {
    OpInfo o;
    o.name = n;
    o.kind = k;
    o.params = std::move(ps);
    o.ret = r;
    for (size_t i = 0; i < o.params.size(); ++i) o.paramNames.push_back("p" + std::to_string(i));
    ops[n] = o;
  };
  Sort I = Sort::integer(), U = Sort::unit();
  op("push", OpKind::Effect, {I}, U);
  op("pop", OpKind::Effect, {}, I);
  op("pushI", OpKind::Ghost, {I, I}, U);
  op("popI", OpKind::Ghost, {I, I}, U);
  auto same = [&](const TypePtr& got, const std::string& want, const TypeContext& ctx) {
    return printType(got) == printType(parseType(want, ops, ctx.scope()));
  };
  TypeContext empty;
  std::vector<std::string> failed;

  TypePtr push = parseType(
      "n:int ~> y:int ~> x:{int | y < nu} -> [LAST(<~pushI n y>)] unit [<push x> . <~pushI (n + 1) x>]", ops);
  TypePtr pop = parseType(
      "n:int ~> m:int ~> [LAST(<~popI m _>) & LAST(<~pushI n _>) & (any* . <~pushI (n - m) x | n > m> . any*)] "
      "x:int [<pop x> . <~popI (m + 1) x>]",
      ops);
  if (!wellFormedType(empty, push, ops) || !wellFormedType(empty, pop, ops)) failed.push_back("signatures");

  // push: SubG then TOpHis.
  TypePtr push1 = instantiateGhost(push, std::map<std::string, Formula>{{"n", mkInt(0)}, {"y", mkInt(0)}});
  if (!same(push1, "x:{int | 0 < nu} -> [LAST(<~pushI 0 0>)] unit [<push x> . <~pushI 1 x>]", empty))
    failed.push_back("push SubG");
  Regex h0 = parseRegex("<~pushI 0 0> . <~popI 0 0>", ops);
  TypePtr push2 = specializeHistory(empty, push1, h0, ops);
  if (!same(push2, "x:{int | 0 < nu} -> [<~pushI 0 0> . <~popI 0 0>] unit [<push x> . <~pushI 1 x>]", empty))
    failed.push_back("push TOpHis");

  // pop: steps 1 to 4.
  if (!same(pop,
             "n:int ~> m:int ~> [LAST(<~popI m _>) & LAST(<~pushI n _>) & (any* . <~pushI (n - m) x | n > m> . "
             "any*)] x:int [<pop x> . <~popI (m + 1) x>]",
             empty))
    failed.push_back("step 1");
  TypePtr pop2 = instantiateGhost(pop, std::map<std::string, Formula>{{"n", mkInt(1)}, {"m", mkInt(0)}});
  if (!same(pop2,
            "[LAST(<~popI 0 _>) & LAST(<~pushI 1 _>) & (any* . <~pushI 1 x> . any*)] x:int [<pop x> . <~popI 1 x>]",
            empty))
    failed.push_back("step 2 (SubG)");
  TypePtr pop3 = parseType(
      "[LAST(<~popI 0 _>) & LAST(<~pushI 1 _>) & (any* . <~pushI 1 x> . any*)] x:{int | 0 < nu} "
      "[<pop x> . <~popI 1 x>]",
      ops);
  if (!subUHat(empty, pop2, pop3, ops)) failed.push_back("step 3 (SubHF)");
  TypeContext ctx = empty.extend("x", tBase(I, parseFormula("0 < nu")));
  Regex h1 = parseRegex("<~pushI 0 0> . <~popI 0 0> . <push x> . <~pushI 1 x>", ops, ctx.scope());
  TypePtr pop4 = specializeHistory(ctx, pop3, h1, ops);
  if (!same(pop4,
            "[<~pushI 0 0> . <~popI 0 0> . <push x> . <~pushI 1 x>] x:{int | 0 < nu} [<pop x> . <~popI 1 x>]", ctx))
    failed.push_back("step 4 (TOpHis)");

  if (!failed.empty()) {
    std::string d;
    for (auto& f : failed) d += f + "; ";
    return {false, "mismatch at " + d};
  }
  return {true, "steps 1-4 and both push steps match"};
}

// 4. Every child produced by refine is realizable.
Verdict realizability() {
  int children = 0, calls = 0;
  for (const char* name : {"stack", "kv"}) {
    SpecFile s = spec(name);
    Config cfg;
    for (auto& prop : s.propertyOrder) {
      const PropertyDecl& p = s.properties.at(prop);
      FreshNames names;
      std::deque<Candidate> work;
      for (auto& c : initialCandidates(s.delta, propertyVars(p), p.sre, cfg)) work.push_back(c);
      int budget = 100;
      while (!work.empty() && budget-- > 0) {
        Candidate c = work.front();
        work.pop_front();
        auto t = leftmostUnresolved(c.pi);
        if (!t) continue;
        ++calls;
        for (auto& child : refine(s.delta, c, *t, names, cfg)) {
          ++children;
          if (!candidateRealizable(s.delta, child, cfg))
            return {false, std::string(name) + "/" + prop + ": unrealizable " + printCandidate(child)};
          work.push_back(std::move(child));
        }
      }
    }
  }
  return {children > 0, std::to_string(calls) + " refine calls, " + std::to_string(children) + " children"};
}

// 5. The stack straightline generator reaches every trace its claimed future admits.
Verdict futureCoverage() {
  SpecFile s = spec("stack");
  const PropertyDecl& p = lookupProperty(s, "pop_any");
  Config cfg;
  cfg.domain = {0, 4};
  SynthResult r = synthesize(s.delta, propertyVars(p), p.sre, cfg);
  const Candidate& c = r.finished.front();
  Expr prog = deriveTrace(c.gamma, c.pi);
  std::vector<Formula> facts = traceFacts(c.gamma, c.pi);

  std::vector<SymEvent> future;
  for (auto& seg : c.pi)
    if (!seg.star && !seg.alts[0].ev.ghost) future.push_back(seg.alts[0].ev);
  OpTable visible;
  for (auto& [n, o] : s.delta.ops)
    if (o.kind == OpKind::Effect) visible[n] = o;
  auto letters = oracle::alphabet(visible, cfg.domain);

  // Membership in F under some assignment of the context satisfying the facts.
  auto inFuture = [&](const Trace& t) {
    if (t.size() != future.size()) return false;
    std::vector<Formula> conj = facts;
    for (size_t i = 0; i < t.size(); ++i) {
      if (t[i].op != future[i].op) return false;
      Model payload;
      for (size_t k = 0; k < t[i].args.size(); ++k) payload[payloadName(k)] = t[i].args[k];
      payload[payloadName(t[i].args.size())] = t[i].ret;
      conj.push_back(substValues(future[i].phi, payload));
    }
    return isSat(conj, cfg.domain);
  };

  auto handler = makeHandler("stack_ok");
  int targets = 0, maxSeed = 0;
  for (auto& t : oracle::allTraces(letters, 4)) {
    if (!inFuture(t)) continue;
    ++targets;
    bool hit = false;
    for (int seed = 0; seed < 200 && !hit; ++seed) {
      RunOutcome o = run(prog, s.delta.ops, *handler, static_cast<uint64_t>(seed), cfg);
      if (o.kind == Outcome::Completed && eraseGhost(o.trace) == t) {
        hit = true;
        maxSeed = std::max(maxSeed, seed);
      }
    }
    if (!hit) return {false, "unreached trace: " + formatTrace(t)};
  }
  return {targets > 0, std::to_string(targets) + " F-traces reached, worst seed " + std::to_string(maxSeed)};
}

// 6. Recursion template gate on the stack trace.
Verdict recursionGate() {
  SpecFile s = spec("stack");
  const PropertyDecl& p = lookupProperty(s, "pop_any");
  SynthResult r = synthesize(s.delta, propertyVars(p), p.sre, Config{});
  const AbstractTrace& pi = r.finished.front().pi;
  // Locate push . pushI . star . pop . popI.
  std::optional<size_t> push;
  for (size_t i = 0; i + 4 < pi.size(); ++i)
    if (!pi[i].star && pi[i].alts[0].ev.op == "push" && pi[i + 2].star && pi[i + 3].alts[0].ev.op == "pop")
      push = i;
  if (!push) return {false, "unexpected trace shape " + printAbstractTrace(pi)};
  size_t a = *push, star = a + 2, b = star + 3;
  Matching valid{a, star, b};
  Matching popsOnly{star, star, b};
  bool validOk = matchingSurvives(s.delta, pi, valid, 2);
  bool invalidOneFold = matchingSurvives(s.delta, pi, popsOnly, 1);
  bool invalidTwoFold = matchingSurvives(s.delta, pi, popsOnly, 2);
  std::ostringstream os;
  os << "valid " << (validOk ? "accepted" : "rejected") << ", pops-only " << (invalidOneFold ? "accepted" : "rejected")
     << " at 1 and " << (invalidTwoFold ? "accepted" : "rejected") << " at 2";
  return {validOk && !invalidTwoFold, os.str()};
}

// 7. Executions to violation against the buggy handlers.
Verdict bugFinding() {
  struct Case {
    const char* spec;
    const char* property;
    const char* handler;
    double bound;
  };
  std::ostringstream os;
  bool ok = true;
  for (Case k : {Case{"stack", "three_push_pop", "stack_buggy", 3}, Case{"kv", "interleaved", "kv_ra_buggy", 5}}) {
    SpecFile s = spec(k.spec);
    Config cfg;
    const PropertyDecl& p = lookupProperty(s, k.property);
    SynthResult r = synthesize(s.delta, propertyVars(p), p.sre, cfg);
    CampaignOptions opt;
    opt.runs = 10000;
    CampaignReport syn = runCampaign(Strategy{"synth", r.combined.expr}, k.handler, s.delta.ops, opt, cfg);
    CampaignReport rnd =
        runCampaign(Strategy{"random", randomBaseline(s.delta.ops, 10)}, k.handler, s.delta.ops, opt, cfg);
    bool good = syn.median() <= k.bound && rnd.median() >= 10 * syn.median();
    ok = ok && good;
    os << k.handler << " synth " << formatNumber(syn.median()) << " random " << formatNumber(rnd.median()) << "; ";
  }
  return {ok, os.str()};
}

std::string capture(const std::string& cmd, int& status) {
  std::string out;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) {
    status = -1;
    return out;
  }
  std::array<char, 4096> buf;
  size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), n);
  status = pclose(p);
  return out;
}

std::string dirContents(const fs::path& dir) {
  std::vector<fs::path> files;
  for (auto& e : fs::directory_iterator(dir)) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::string all;
  for (auto& f : files) all += f.filename().string() + "\n" + readFile(f.string());
  return all;
}

// 8. synth and bench outputs are byte-identical across invocations.
Verdict determinism() {
  fs::path tmp = fs::temp_directory_path() / ("uhat-accept-" + std::to_string(::getpid()));
  fs::remove_all(tmp);
  std::string specs[] = {(fs::path(specsDir) / "stack.uhat").string(), (fs::path(specsDir) / "kv.uhat").string()};
  std::string synthOut[2], files[2], benchOut[2];
  for (int round = 0; round < 2; ++round) {
    fs::path out = tmp / std::to_string(round);
    int st = 0;
    synthOut[round] = capture(cliPath + " synth --spec " + specs[1] + " --property interleaved --seed 7 --out " +
                                  out.string() + " 2>&1",
                              st);
    if (st != 0) return {false, "synth failed: " + synthOut[round]};
    files[round] = dirContents(out);
    benchOut[round] = capture(cliPath + " bench --spec " + specs[0] +
                                  " --property three_push_pop --handler stack_buggy --runs 300 --seed 7 2>&1",
                              st);
    if (st != 0) return {false, "bench failed: " + benchOut[round]};
  }
  fs::remove_all(tmp);
  // Output directories differ in name only.
  bool synthSame = files[0] == files[1];
  bool benchSame = benchOut[0] == benchOut[1];
  std::string d = std::string("generator files ") + (synthSame ? "identical" : "differ") + ", bench " +
                  (benchSame ? "identical" : "differs");
  return {synthSame && benchSame, d};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> only;
  app.add_option("--specs", specsDir, "directory with stack.uhat and kv.uhat")->required();
  app.add_option("--cli", cliPath, "uhatgen executable")->required();
  app.add_option("--only", only, "run only these criteria");
  CLI11_PARSE(app, argc, argv);

  struct Criterion {
    int id;
    const char* name;
    double limitSec;
    std::function<Verdict()> fn;
  };
  std::vector<Criterion> all{
      {1, "normalization soundness", 60, normalizationSoundness},
      {2, "inclusion/emptiness oracle", 60, oracleEquivalence},
      {3, "typing walkthrough", 5, typingWalkthrough},
      {4, "refinement realizability", 30, realizability},
      {5, "future coverage", 120, futureCoverage},
      {6, "recursion template gate", 10, recursionGate},
      {7, "end-to-end bug finding", 300, bugFinding},
      {8, "determinism", 300, determinism},
  };
  int failures = 0;
  for (auto& c : all) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    auto t0 = Clock::now();
    Verdict v;
    try {
      v = c.fn();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    double sec = since(t0);
    if (sec > c.limitSec) {
      v.pass = false;
      v.detail += " (over the " + formatNumber(c.limitSec) + " s limit)";
    }
    failures += !v.pass;
    std::printf("[%s] %d %s (%.1f s): %s\n", v.pass ? "PASS" : "FAIL", c.id, c.name, sec, v.detail.c_str());
    std::fflush(stdout);
  }
  return failures ? 1 : 0;
}
