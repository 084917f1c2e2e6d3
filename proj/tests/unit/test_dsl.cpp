#include <catch_amalgamated.hpp>

#include <set>

#include "uhat/dsl.hpp"

using namespace uhat;

namespace {

OpTable stackOps() {
  OpTable ops;
  ops["push"] = OpInfo{"push", OpKind::Effect, {"x"}, {Sort::integer()}, Sort::unit()};
  ops["pop"] = OpInfo{"pop", OpKind::Effect, {}, {}, Sort::integer()};
  return ops;
}

struct Stack : Handler {
  std::vector<Value> items;
  void reset() override { items.clear(); }
  Value handle(const Trace&, const std::string& op, const std::vector<Value>& args) override {
    if (op == "push") {
      items.push_back(args[0]);
      return Value::unit();
    }
    if (items.empty()) throw SUTFault("empty");
    Value v = items.back();
    items.pop_back();
    return v;
  }
};

}  // namespace

TEST_CASE("programs print and parse back", "[dsl]") {
  OpTable ops = stackOps();
  for (const char* src : {"assume x:int. 0 < x in push(x); let z = pop() in assert x == z",
                          "let f = fix f(u:unit):unit = (() (+) (push(1); f(); let z = pop() in ())) in f()",
                          "push(1) (+) push(2)", "()"}) {
    Expr e = parseExpr(src, ops);
    CHECK(printExpr(parseExpr(printExpr(e), ops)) == printExpr(e));
  }
}

TEST_CASE("basic typing names the failing rule", "[dsl]") {
  OpTable ops = stackOps();
  CHECK(typecheckBasic(parseExpr("let z = pop() in push(z)", ops), ops) == Sort::unit());
  CHECK_THROWS_AS(typecheckBasic(eAssert(mkInt(3)), ops), BasicTypeError);
  CHECK_THROWS_AS(typecheckBasic(parseExpr("push(())", ops), ops), BasicTypeError);
  CHECK_THROWS_AS(typecheckBasic(parseExpr("peek()", ops), ops), BasicTypeError);
}

TEST_CASE("run outcomes", "[dsl]") {
  OpTable ops = stackOps();
  Stack h;
  RunOutcome ok = run(parseExpr("assume x:int. 0 < x in push(x); let z = pop() in assert x == z", ops), ops, h, 7);
  CHECK(ok.kind == Outcome::Completed);
  REQUIRE(ok.trace.size() == 2);
  CHECK(ok.trace[0].args[0] == ok.trace[1].ret);
  CHECK(ok.trace[0].args[0].i > 0);

  CHECK(run(parseExpr("push(1); let z = pop() in assert z == 2", ops), ops, h, 1).kind == Outcome::AssertViolated);
  CHECK(run(parseExpr("assume x:int. x < x in push(x)", ops), ops, h, 1).kind == Outcome::AssumeExhausted);
  RunOutcome fault = run(parseExpr("let z = pop() in ()", ops), ops, h, 1);
  CHECK(fault.kind == Outcome::SUTFault);
  REQUIRE(fault.faultCall);
  CHECK(fault.faultCall->op == "pop");
  Config small;
  small.stepBudget = 200;
  CHECK(run(parseExpr("let f = fix f(u:unit):unit = f() in f()", ops), ops, h, 1, small).kind == Outcome::Diverged);
}

TEST_CASE("runs are reproducible by seed and choices cover both branches", "[dsl][property]") {
  OpTable ops = stackOps();
  Stack h;
  Expr e = parseExpr("assume x:int. true in push(x) (+) (push(2); push(3))", ops);
  std::set<size_t> lengths;
  for (uint64_t seed = 0; seed < 40; ++seed) {
    RunOutcome a = run(e, ops, h, seed), b = run(e, ops, h, seed);
    CHECK(a.trace == b.trace);
    lengths.insert(a.trace.size());
  }
  CHECK(lengths == std::set<size_t>{1, 2});
}

TEST_CASE("assume draws stay in the configured domain", "[dsl][property]") {
  OpTable ops = stackOps();
  Stack h;
  Config cfg;
  cfg.domain = {2, 5};
  Expr e = parseExpr("assume x:int. true in push(x)", ops);
  std::set<int64_t> seen;
  for (uint64_t seed = 0; seed < 200; ++seed) seen.insert(run(e, ops, h, seed, cfg).trace.at(0).args[0].i);
  CHECK(seen == std::set<int64_t>{2, 3, 4, 5});
}
