#include <catch_amalgamated.hpp>

#include "uhat/trace.hpp"

using namespace uhat;

namespace {

OpTable stackOps() {
  OpTable ops;
  ops["push"] = OpInfo{"push", OpKind::Effect, {"x"}, {Sort::integer()}, Sort::unit()};
  ops["pop"] = OpInfo{"pop", OpKind::Effect, {}, {}, Sort::integer()};
  ops["pushI"] = OpInfo{"pushI", OpKind::Ghost, {"i", "x"}, {Sort::integer(), Sort::integer()}, Sort::unit()};
  return ops;
}

}  // namespace

TEST_CASE("trace text round trip", "[trace]") {
  Trace t{{"push", {Value::integer(-3)}, Value::unit(), false},
          {"pushI", {Value::integer(1), Value::integer(-3)}, Value::unit(), true},
          {"pop", {}, Value::integer(-3), false}};
  CHECK(parseTrace(formatTrace(t)) == t);
  CHECK(formatEvent(t[0]) == "op=push args=[-3] ret=() ghost=0");
}

TEST_CASE("ghost erasure keeps visible events in order", "[trace]") {
  Trace t{{"pushI", {Value::integer(0), Value::integer(0)}, Value::unit(), true},
          {"push", {Value::integer(1)}, Value::unit(), false},
          {"pop", {}, Value::integer(1), false}};
  Trace e = eraseGhost(t);
  REQUIRE(e.size() == 2);
  CHECK(e[0].op == "push");
  CHECK(eraseGhost(e) == e);
}

TEST_CASE("well-formedness checks arity and sorts", "[trace]") {
  OpTable ops = stackOps();
  CHECK(wellFormed({{"push", {Value::integer(1)}, Value::unit(), false}}, ops));
  CHECK_FALSE(wellFormed({{"push", {}, Value::unit(), false}}, ops));
  CHECK_FALSE(wellFormed({{"pop", {}, Value::boolean(true), false}}, ops));
  CHECK_FALSE(wellFormed({{"peek", {}, Value::integer(0), false}}, ops));
  CHECK_THROWS(checkWellFormed({{"peek", {}, Value::integer(0), false}}, ops));
}

TEST_CASE("malformed trace lines are parse errors", "[trace]") {
  CHECK_THROWS_AS(parseTrace("op=push args=[x] ret=() ghost=0\n"), ParseError);
  CHECK_THROWS_AS(parseTrace("args=[] ret=()\n"), ParseError);
  CHECK(parseTrace("").empty());
}
