#include <catch_amalgamated.hpp>

#include "uhat/types.hpp"

using namespace uhat;

namespace {

OpTable stackOps() {
  OpTable ops;
  ops["push"] = OpInfo{"push", OpKind::Effect, {"x"}, {Sort::integer()}, Sort::unit()};
  ops["pop"] = OpInfo{"pop", OpKind::Effect, {}, {}, Sort::integer()};
  ops["pushI"] = OpInfo{"pushI", OpKind::Ghost, {"i", "x"}, {Sort::integer(), Sort::integer()}, Sort::unit()};
  ops["popI"] = OpInfo{"popI", OpKind::Ghost, {"i", "x"}, {Sort::integer(), Sort::integer()}, Sort::unit()};
  return ops;
}

const char* kPush =
    "n:int ~> y:int ~> x:{int | y < nu} -> [LAST(<~pushI n y>)] unit [<push x> . <~pushI (n + 1) x>]";

}  // namespace

TEST_CASE("types print and parse back", "[types]") {
  OpTable ops = stackOps();
  TypePtr t = parseType(kPush, ops);
  CHECK(printType(parseType(printType(t), ops)) == printType(t));
  CHECK(wellFormedType({}, t, ops));
  CHECK(erase(parseType("x:int -> [any*] unit [<push x>]", ops)) == Sort::arrow(Sort::integer(), Sort::unit()));
}

TEST_CASE("pure subtyping follows qualifier entailment", "[types]") {
  TypePtr pos = tBase(Sort::integer(), parseFormula("0 < nu"));
  TypePtr nonneg = tBase(Sort::integer(), parseFormula("0 <= nu"));
  CHECK(subPure({}, pos, nonneg) != subPure({}, nonneg, pos));
}

TEST_CASE("ghost instantiation substitutes and strips binders", "[types]") {
  OpTable ops = stackOps();
  TypePtr t = instantiateGhost(parseType(kPush, ops), std::map<std::string, Formula>{{"n", mkInt(2)}, {"y", mkInt(5)}});
  CHECK(printType(t) == printType(parseType(
                            "x:{int | 5 < nu} -> [LAST(<~pushI 2 5>)] unit [<push x> . <~pushI 3 x>]", ops)));
}

TEST_CASE("history specialization rejects empty intersections", "[types]") {
  OpTable ops = stackOps();
  TypePtr t = instantiateGhost(parseType(kPush, ops), std::map<std::string, Formula>{{"n", mkInt(0)}, {"y", mkInt(0)}});
  CHECK_THROWS_AS(specializeHistory({}, t, reEmpty(), ops), SpecializationRejected);
  CHECK_THROWS_AS(specializeHistory({}, t, parseRegex("<~pushI 1 1>", ops), ops), SpecializationRejected);
  CHECK_NOTHROW(specializeHistory({}, t, parseRegex("<~pushI 0 0>", ops), ops));
}

TEST_CASE("ill-formed types are reported", "[types]") {
  OpTable ops = stackOps();
  CHECK_FALSE(wellFormedType({}, parseType("[<push z>] unit [<pop>]", ops,
                                           [](const std::string& n) -> std::optional<Sort> {
                                             if (n == "z") return Sort::integer();
                                             return std::nullopt;
                                           }),
                             ops));
}

TEST_CASE("an event without a history is not realizable", "[types]") {
  OpTable ops = stackOps();
  OperatorContext d{ops, {{"push", parseType(kPush, ops)}}};
  CHECK_FALSE(realizableEvent({}, reEps(), makeEvent(ops.at("push"), mkTrue()), reEps(), d));
}
