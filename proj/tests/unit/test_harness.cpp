#include <catch_amalgamated.hpp>

#include <set>

#include "uhat/frontend.hpp"
#include "uhat/harness.hpp"

using namespace uhat;

namespace {

struct Driver {
  std::unique_ptr<Handler> h;
  Trace trace;
  explicit Driver(const std::string& name) : h(makeHandler(name)) { h->reset(); }
  Value call(const std::string& op, std::vector<Value> args = {}) {
    Value r = h->handle(trace, op, args);
    trace.push_back({op, std::move(args), r, false});
    return r;
  }
};

Value I(int64_t v) { return Value::integer(v); }

}  // namespace

TEST_CASE("stack handlers on a full stack", "[harness]") {
  for (auto [name, want] : {std::pair{"stack_ok", 3}, {"stack_buggy", 2}, {"stack_buggy_overwrite", 3}}) {
    Driver d(name);
    d.call("push", {I(1)});
    d.call("push", {I(2)});
    d.call("push", {I(3)});
    CHECK(d.call("pop") == I(want));
  }
  Driver d("stack_buggy");
  d.call("push", {I(1)});
  d.call("push", {I(2)});
  d.call("push", {I(3)});
  d.call("pop");
  d.call("pop");
  CHECK_THROWS_AS(d.call("pop"), SUTFault);
}

TEST_CASE("kv handlers replay the read-atomicity trace", "[harness]") {
  for (auto [name, second] : {std::pair{"kv_ra_buggy", 4}, {"kv_ra_ok", 3}}) {
    Driver d(name);
    d.call("write", {I(3)});
    Value t1 = d.call("readReq");
    CHECK(d.call("readRsp", {t1}) == I(3));
    Value t2 = d.call("readReq");
    CHECK(t2 != t1);
    d.call("write", {I(4)});
    CHECK(d.call("readRsp", {t2}) == I(second));
    CHECK(readAtomic(d.trace) == (second == 3));
  }
  Driver d("kv_ra_ok");
  CHECK_THROWS_AS(d.call("readRsp", {I(99)}), SUTFault);
}

TEST_CASE("set handlers", "[harness]") {
  Driver ok("set_ok"), bad("set_buggy");
  for (int v : {1, 2, 3}) {
    ok.call("insert", {I(v)});
    bad.call("insert", {I(v)});
  }
  CHECK(ok.call("mem", {I(3)}) == Value::boolean(true));
  CHECK(bad.call("mem", {I(3)}) == Value::boolean(false));
  CHECK_THROWS_AS(lookupHandler("nope"), SemanticError);
}

TEST_CASE("faults the reference also raises are not violations", "[harness]") {
  OpTable ops = familyOps("stack");
  Expr e = parseExpr("let z = pop() in ()", ops);
  auto sut = makeHandler("stack_buggy");
  auto ref = makeHandler("stack_ok");
  RunOutcome o = run(e, ops, *sut, 0);
  REQUIRE(o.kind == Outcome::SUTFault);
  CHECK_FALSE(isViolation(o, *ref, {}));

  Expr lost = parseExpr("push(1); push(2); push(3); let a = pop() in let b = pop() in let c = pop() in ()", ops);
  RunOutcome o2 = run(lost, ops, *sut, 0);
  REQUIRE(o2.kind == Outcome::SUTFault);
  CHECK(isViolation(o2, *ref, {}));
}

TEST_CASE("random baseline covers every length and operator", "[harness][property]") {
  OpTable ops = familyOps("stack");
  Expr b = randomBaseline(ops, 3);
  CHECK(typecheckBasic(b, ops) == Sort::unit());
  auto h = makeHandler("stack_ok");
  std::set<size_t> lengths;
  std::set<std::string> opsSeen;
  for (uint64_t seed = 0; seed < 400; ++seed) {
    RunOutcome o = run(b, ops, *h, seed);
    lengths.insert(o.trace.size() + (o.kind == Outcome::SUTFault ? 1 : 0));
    for (auto& e : o.trace) opsSeen.insert(e.op);
  }
  CHECK(lengths == std::set<size_t>{0, 1, 2, 3});
  CHECK(opsSeen == std::set<std::string>{"pop", "push"});
}

TEST_CASE("campaign statistics", "[harness]") {
  CampaignReport r;
  CHECK(formatNumber(r.median()) == "inf");
  r.gaps = {1, 3, 8};
  CHECK(r.median() == 3);
  CHECK(r.mean() == 4);
  r.gaps = {1, 2};
  CHECK(formatNumber(r.median()) == "1.5");
  CHECK(runSeed(0, 1) == runSeed(0, 1));
  CHECK(runSeed(0, 1) != runSeed(0, 2));
  CHECK(runSeed(0, 1, 0) != runSeed(0, 1, 1));
}

TEST_CASE("campaigns are independent of the worker count", "[harness]") {
  OpTable ops = familyOps("stack");
  Expr b = randomBaseline(ops, 6);
  CampaignOptions one, three;
  one.runs = three.runs = 600;
  three.jobs = 3;
  CampaignReport a = runCampaign({"random", b}, "stack_buggy", ops, one);
  CampaignReport c = runCampaign({"random", b}, "stack_buggy", ops, three);
  CHECK(a.gaps == c.gaps);
  CHECK(a.violations > 0);
}

TEST_CASE("synthesized generators never flag conforming handlers", "[harness][property]") {
  struct Case {
    const char* spec;
    const char* property;
    const char* handler;
  };
  for (Case k : {Case{"specs/stack.uhat", "pop_any", "stack_ok"}, Case{"specs/stack.uhat", "three_push_pop", "stack_ok"},
                 Case{"specs/kv.uhat", "atomic", "kv_ra_ok"}, Case{"specs/kv.uhat", "interleaved", "kv_ra_ok"},
                 Case{"specs/set.uhat", "member", "set_ok"}}) {
    SpecFile s = loadSpec(k.spec);
    const PropertyDecl& p = lookupProperty(s, k.property);
    SynthResult r = synthesize(s.delta, propertyVars(p), p.sre);
    CampaignOptions opt;
    opt.runs = 1500;
    CampaignReport rep = runCampaign({"synth", r.combined.expr}, k.handler, s.delta.ops, opt);
    INFO(k.property);
    CHECK(rep.violations == 0);
    CHECK(rep.asserts == 0);
    CHECK(rep.completed + rep.diverged > 0);
  }
}
