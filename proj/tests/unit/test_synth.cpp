#include <catch_amalgamated.hpp>

#include "gen.hpp"
#include "oracle.hpp"
#include "uhat/derive.hpp"
#include "uhat/frontend.hpp"

using namespace uhat;

namespace {

SynthResult synthProperty(const SpecFile& s, const std::string& name, const Config& cfg = {}) {
  const PropertyDecl& p = lookupProperty(s, name);
  return synthesize(s.delta, propertyVars(p), p.sre, cfg);
}

}  // namespace

TEST_CASE("normalization is exact on class-starred SREs", "[synth][property]") {
  Config cfg;
  cfg.domain = {0, 3};
  gen::SreGen g(21, gen::twoOps(), 0, 3);
  auto letters = oracle::alphabet(g.ops(), cfg.domain);
  for (int i = 0; i < 100; ++i) {
    Regex src = g.linear(3);
    oracle::Derivatives d(letters, {}, cfg.domain);
    std::vector<int> parts;
    for (auto& pi : normPlan(src, g.ops(), cfg)) {
      CHECK(unresolvedCount(pi) == concreteLength(pi));
      parts.push_back(d.compile(traceRegex(pi)));
    }
    INFO(printRegex(src));
    CHECK_FALSE(d.disagreement(d.compile(src), d.unite(parts), 5));
  }
}

TEST_CASE("ghost padding admits interleaved ghost events", "[synth]") {
  SpecFile s = loadSpec("specs/stack.uhat");
  Regex A = parseRegex("<push> . <pop>", s.delta.ops);
  Trace t{{"push", {Value::integer(1)}, Value::unit(), false},
          {"pushI", {Value::integer(1), Value::integer(1)}, Value::unit(), true},
          {"pop", {}, Value::integer(1), false},
          {"popI", {Value::integer(1), Value::integer(1)}, Value::unit(), true}};
  CHECK_FALSE(member(t, A, {}));
  CHECK(member(t, padGhosts(A, s.delta.ops), {}));
  CHECK(member(eraseGhost(t), padGhosts(A, s.delta.ops), {}));
}

TEST_CASE("finished candidates are resolved and realizable", "[synth]") {
  for (auto [file, prop] : {std::pair{"specs/stack.uhat", "pop_any"}, {"specs/stack.uhat", "three_push_pop"},
                            {"specs/kv.uhat", "interleaved"}, {"specs/set.uhat", "three_then_mem"}}) {
    SpecFile s = loadSpec(file);
    SynthResult r = synthProperty(s, prop);
    INFO(prop);
    REQUIRE_FALSE(r.finished.empty());
    CHECK(r.programs.size() == r.finished.size());
    for (auto& c : r.finished) {
      CHECK(unresolvedCount(c.pi) == 0);
      CHECK(candidateRealizable(s.delta, c));
    }
  }
}

TEST_CASE("synthesis is deterministic", "[synth]") {
  SpecFile s = loadSpec("specs/kv.uhat");
  SynthResult a = synthProperty(s, "interleaved"), b = synthProperty(s, "interleaved");
  CHECK(printExpr(a.combined.expr) == printExpr(b.combined.expr));
  CHECK(a.stats.steps == b.stats.steps);
}

TEST_CASE("infeasible properties fail to synthesize", "[synth]") {
  SpecFile s = loadSpec("specs/stack.uhat");
  Config cfg;
  cfg.maxRefineSteps = 50;
  Regex contradictory = parseRegex("any* . <push x | x < x> . any*", s.delta.ops);
  CHECK_THROWS_AS(synthesize(s.delta, {}, contradictory, cfg), SynthesisFailed);
  // A pop on an empty stack has no realizable history.
  Regex lonePop = parseRegex("<pop>", s.delta.ops);
  CHECK_THROWS_AS(synthesize(s.delta, {}, lonePop, cfg), SynthesisFailed);
}

TEST_CASE("fresh names skip taken ones", "[synth]") {
  FreshNames n;
  CHECK(n.fresh("x", {"x1"}) == "x2");
  CHECK(n.fresh("x", {}) == "x3");
  CHECK(n.fresh("y", {}) == "y1");
}
