#include <catch_amalgamated.hpp>

#include "uhat/derive.hpp"
#include "uhat/frontend.hpp"
#include "uhat/harness.hpp"

using namespace uhat;

namespace {

struct Fixture {
  SpecFile spec;
  SynthResult result;
  Fixture(const char* file, const char* prop) : spec(loadSpec(file)) {
    const PropertyDecl& p = lookupProperty(spec, prop);
    result = synthesize(spec.delta, propertyVars(p), p.sre);
  }
};

}  // namespace

TEST_CASE("the empty trace derives unit", "[derive]") {
  CHECK(printExpr(deriveTrace(TypeContext{}, AbstractTrace{})) == "()");
}

TEST_CASE("derived programs are well typed", "[derive]") {
  for (auto [file, prop] : {std::pair{"specs/stack.uhat", "pop_any"}, {"specs/stack.uhat", "three_push_pop"},
                            {"specs/kv.uhat", "atomic"}, {"specs/kv.uhat", "interleaved"},
                            {"specs/set.uhat", "member"}}) {
    Fixture f(file, prop);
    INFO(prop);
    for (auto& g : f.result.programs) CHECK(typecheckBasic(g.expr, f.spec.delta.ops) == Sort::unit());
    CHECK(typecheckBasic(f.result.combined.expr, f.spec.delta.ops) == Sort::unit());
    for (auto& c : f.result.finished) {
      Expr e = deriveTrace(c.gamma, c.pi);
      CHECK(printExpr(parseExpr(printExpr(e), f.spec.delta.ops)) == printExpr(e));
    }
  }
}

TEST_CASE("the stack generator pairs its push with its pop", "[derive]") {
  Fixture f("specs/stack.uhat", "pop_any");
  const Candidate& c = f.result.finished.front();
  auto h = makeHandler("stack_ok");
  Expr e = deriveTrace(c.gamma, c.pi);
  for (uint64_t seed = 0; seed < 50; ++seed) {
    RunOutcome o = run(e, f.spec.delta.ops, *h, seed);
    REQUIRE(o.kind == Outcome::Completed);
    Trace t = eraseGhost(o.trace);
    REQUIRE(t.size() == 2);
    CHECK(t[0].op == "push");
    CHECK(t[1].ret == t[0].args[0]);
  }
}

TEST_CASE("unroll bound zero accepts every matching", "[derive]") {
  Fixture f("specs/stack.uhat", "pop_any");
  const AbstractTrace& pi = f.result.finished.front().pi;
  auto ms = enumerateMatchings(pi);
  REQUIRE_FALSE(ms.empty());
  for (auto& m : ms) CHECK(matchingSurvives(f.spec.delta, pi, m, 0));
}

TEST_CASE("survival is monotone in the unroll bound", "[derive][property]") {
  Fixture f("specs/stack.uhat", "three_push_pop");
  for (auto& c : f.result.finished) {
    for (auto& m : enumerateMatchings(c.pi)) {
      bool prev = true;
      for (int k = 0; k <= 3; ++k) {
        bool now = matchingSurvives(f.spec.delta, c.pi, m, k);
        CHECK((prev || !now));
        prev = now;
      }
    }
  }
}

TEST_CASE("unrolling repeats the loop bodies", "[derive]") {
  Fixture f("specs/stack.uhat", "pop_any");
  const AbstractTrace& pi = f.result.finished.front().pi;
  Matching m{};
  for (auto& x : enumerateMatchings(pi))
    if (matchingSurvives(f.spec.delta, pi, x, 2)) m = x;
  size_t base = unrolledTrace(pi, m, 0).size();
  size_t once = unrolledTrace(pi, m, 1).size();
  size_t twice = unrolledTrace(pi, m, 2).size();
  CHECK(once > base);
  CHECK(twice - once == once - base);
  Matching bad{pi.size(), 0, 0};
  CHECK_THROWS_AS(matchingSurvives(f.spec.delta, pi, bad, 1), InternalError);
}

TEST_CASE("recursive stack generator keeps pushes and pops balanced", "[derive]") {
  Fixture f("specs/stack.uhat", "pop_any");
  const Candidate& c = f.result.finished.front();
  auto rec = synRecursion(f.spec.delta, c.gamma, c.pi, 2);
  REQUIRE(rec);
  CHECK(printExpr(*rec).find("fix") != std::string::npos);
  auto h = makeHandler("stack_ok");
  bool sawLong = false;
  for (uint64_t seed = 0; seed < 200; ++seed) {
    RunOutcome o = run(*rec, f.spec.delta.ops, *h, seed);
    if (o.kind == Outcome::Diverged || o.kind == Outcome::AssumeExhausted) continue;
    REQUIRE(o.kind == Outcome::Completed);
    Trace t = eraseGhost(o.trace);
    int depth = 0;
    for (auto& e : t) depth += e.op == "push" ? 1 : -1;
    CHECK(depth == 0);
    sawLong = sawLong || t.size() > 2;
  }
  CHECK(sawLong);
}

TEST_CASE("empty candidate lists are rejected", "[derive]") {
  CHECK_THROWS_AS(termDerive(OperatorContext{}, {}), SynthesisFailed);
}
