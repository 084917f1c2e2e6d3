#include <catch_amalgamated.hpp>

#include <random>

#include "uhat/logic.hpp"

using namespace uhat;

namespace {

SortScope ints(std::initializer_list<const char*> names) {
  std::set<std::string> s(names.begin(), names.end());
  return [s](const std::string& n) -> std::optional<Sort> {
    if (s.count(n)) return Sort::integer();
    return std::nullopt;
  };
}

// Truth of f under every assignment of its variables over dom, by enumeration.
bool bruteSat(const Formula& f, const Domain& dom) {
  VarSorts vs = freeVars(f);
  std::vector<std::string> names;
  for (auto& [n, s] : vs) names.push_back(n);
  Model m;
  std::function<bool(size_t)> go = [&](size_t i) {
    if (i == names.size()) return eval(f, m, dom).asBool();
    for (int64_t v = dom.lo; v <= dom.hi; ++v) {
      m[names[i]] = Value::integer(v);
      if (go(i + 1)) return true;
    }
    return false;
  };
  return go(0);
}

}  // namespace

TEST_CASE("formulas print and parse back", "[logic]") {
  auto sc = ints({"x", "y", "z"});
  for (const char* src : {"x < y + 1", "x == 3 && !(y == x)", "x <= y || z < 0", "x + 2 == y - z",
                          "forall w:int. w < x || x <= w", "exists w:int. w + 1 == x"}) {
    Formula f = parseFormula(src, sc);
    Formula g = parseFormula(printFormula(f), sc);
    CHECK(sameFormula(f, g));
  }
}

TEST_CASE("sat and validity over a bounded domain", "[logic]") {
  Domain d{-2, 2};
  auto sc = ints({"x", "y"});
  CHECK(isSat(parseFormula("x < y && y < 2", sc), d));
  CHECK_FALSE(isSat(parseFormula("x < y && y < x", sc), d));
  CHECK_FALSE(isSat(parseFormula("2 < x", sc), d));
  CHECK(isValid(parseFormula("x < y || y <= x", sc), d));
  CHECK(entails({parseFormula("x == 1", sc), parseFormula("y == x + 1", sc)}, parseFormula("y == 2", sc), d));
  CHECK_FALSE(entails({parseFormula("x < 1", sc)}, parseFormula("x == 0", sc), d));
}

TEST_CASE("witnesses satisfy their constraints", "[logic]") {
  Domain d{-3, 3};
  auto sc = ints({"x", "y"});
  std::vector<Formula> conj{parseFormula("x + y == 2", sc), parseFormula("x < y", sc)};
  auto w = findWitness(conj, d);
  REQUIRE(w);
  for (auto& f : conj) CHECK(eval(f, *w, d).asBool());
  auto all = enumerateModels(conj, 100, d);
  // x + y == 2 and x < y over [-3,3]: (-1,3) (0,2)
  CHECK(all.size() == 2);
}

TEST_CASE("solver agrees with enumeration on random formulas", "[logic][property]") {
  std::mt19937_64 rng(11);
  Domain d{-2, 2};
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  const char* vars[] = {"x", "y", "z"};
  std::function<Formula(int)> term = [&](int depth) -> Formula {
    if (depth == 0 || pick(3) == 0)
      return pick(2) ? mkVar(vars[pick(3)]) : mkInt(pick(5) - 2);
    return pick(2) ? mkAdd(term(depth - 1), term(depth - 1)) : mkSub(term(depth - 1), term(depth - 1));
  };
  std::function<Formula(int)> form = [&](int depth) -> Formula {
    if (depth == 0) return pick(2) ? mkEq(term(1), term(1)) : mkLt(term(1), term(1));
    switch (pick(4)) {
      case 0: return mkAnd(form(depth - 1), form(depth - 1));
      case 1: return mkOr(form(depth - 1), form(depth - 1));
      case 2: return mkNot(form(depth - 1));
      default: return mkLe(term(2), term(2));
    }
  };
  for (int i = 0; i < 300; ++i) {
    Formula f = form(2);
    INFO(printFormula(f));
    CHECK(isSat(f, d) == bruteSat(f, d));
  }
}

TEST_CASE("substitution replaces free occurrences only", "[logic]") {
  auto sc = ints({"x", "y"});
  Formula f = parseFormula("x < y && (forall x:int. x == x)", sc);
  Formula g = substitute(f, {{"x", mkInt(4)}});
  CHECK(printFormula(g).find("4 < y") != std::string::npos);
  CHECK(mentions(g, "y"));
  CHECK_FALSE(freeVars(g).count("x"));
}

TEST_CASE("ill-sorted formulas are rejected", "[logic]") {
  CHECK_THROWS_AS(sortOf(mkAdd(mkBool(true), mkInt(1))), SortError);
  CHECK_THROWS_AS(parseFormula("x <"), ParseError);
}
