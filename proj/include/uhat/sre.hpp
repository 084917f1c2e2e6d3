#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "uhat/config.hpp"
#include "uhat/logic.hpp"
#include "uhat/trace.hpp"

namespace uhat {

// Payload variables of an event are positional: _0.._{k-1} for arguments, _k for the result.
std::string payloadName(size_t i);
bool isPayloadName(const std::string& n);

struct SymEvent {
  std::string op;
  bool ghost = false;
  std::vector<Sort> payload;  // argument sorts then the return sort
  Formula phi;

  size_t arity() const { return payload.empty() ? 0 : payload.size() - 1; }
  Formula var(size_t i) const { return mkVar(payloadName(i), payload[i]); }
};

SymEvent makeEvent(const OpInfo& op, const Formula& phi);

enum class RK { Empty, Eps, Event, Any, Or, And, Concat, Star, Not };

struct RNode;
using Regex = const RNode*;

struct RNode {
  RK k;
  SymEvent ev;
  std::vector<Regex> kids;
  uint32_t id;
  bool nullable;
};

Regex reEmpty();
Regex reEps();
Regex reAny();
Regex reEvent(const SymEvent& e);
Regex reEvent(const OpInfo& op, const Formula& phi);
Regex reOr(const std::vector<Regex>& xs);
Regex reOr(Regex a, Regex b);
Regex reAnd(const std::vector<Regex>& xs);
Regex reAnd(Regex a, Regex b);
Regex reConcat(const std::vector<Regex>& xs);
Regex reConcat(Regex a, Regex b);
Regex reStar(Regex a);
Regex reNot(Regex a);
Regex reDiff(Regex a, Regex b);
Regex reUniverse();  // any*
// LAST(e) = any* . e . (any \ <op>)*
Regex reLast(const SymEvent& e, const OpTable& ops);
// (any \ <op1> \ <op2> ...) as a single-event class.
Regex reAnyExcept(const std::vector<std::string>& excluded, const OpTable& ops);

bool hasBooleanOps(Regex r);
VarSorts regexFreeVars(Regex r);
Regex substRegex(Regex r, const std::map<std::string, Formula>& m);
Regex mapEvents(Regex r, const std::function<SymEvent(const SymEvent&)>& f);

// Identifiers listed in `scope` print bare inside event positions; others print parenthesized.
std::string printEvent(const SymEvent& e, const std::set<std::string>& scope = {});
std::string printRegex(Regex r, const std::set<std::string>& scope = {});

// Parses the SRE surface syntax. Identifiers for which `scope` returns a sort are ambient.
Regex parseRegex(TokenStream& ts, const OpTable& ops, const SortScope& scope);
Regex parseRegex(const std::string& src, const OpTable& ops, const SortScope& scope = {});

// Concrete denotation. sigma must close every free ambient variable.
bool member(const Trace& t, Regex r, const Model& sigma, const Domain& dom = {});
bool eventMatches(const Event& e, const SymEvent& s, const Model& sigma, const Domain& dom = {});

// --- linear normal form: sequences of single-event classes and starred classes ---

// Per-operator qualifiers; an event matches the class if it matches its operator's entry.
struct CharClass {
  std::map<std::string, SymEvent> byOp;
  bool empty() const { return byOp.empty(); }
};

struct Seg {
  bool star = false;
  CharClass cc;
  int srcA = -1;  // index of the contributing segment in the left product operand
  int srcB = -1;
};

using Lin = std::vector<Seg>;

CharClass classOf(const SymEvent& e);
CharClass anyClass(const OpTable& ops);
CharClass classAnd(const CharClass& a, const CharClass& b, const Domain& dom);
CharClass classOr(const CharClass& a, const CharClass& b);
CharClass classMinus(const CharClass& a, const CharClass& b, const OpTable& ops, const Domain& dom);
bool classSubset(const CharClass& a, const CharClass& b, const Domain& dom);

// Returns nullopt when r is outside the linear fragment.
std::optional<std::vector<Lin>> linearize(Regex r, const OpTable& ops, const Config& cfg);
std::vector<Lin> productLin(const Lin& a, const Lin& b, const Config& cfg);
std::vector<Lin> productLins(const std::vector<Lin>& as, const std::vector<Lin>& bs, const Config& cfg);
// Splits multi-operator event classes into one sequence per operator.
std::vector<Lin> splitEvents(const std::vector<Lin>& ls, const Config& cfg);
Regex linToRegex(const Lin& l);
Regex linsToRegex(const std::vector<Lin>& ls);
std::string printLin(const Lin& l);
// True if some instantiation of the star-free skeleton is satisfiable with ctx.
bool linFeasible(const Lin& l, const std::vector<Formula>& ctx, const Domain& dom);

Regex normalizeBooleanOps(Regex r, const OpTable& ops, const Config& cfg = {});
bool isEmpty(Regex r, const std::vector<Formula>& ctx, const OpTable& ops, const Config& cfg = {});
// For every sigma satisfying ctx, the language of a is contained in that of b.
bool includes(const std::vector<Formula>& ctx, Regex a, Regex b, const OpTable& ops, const Config& cfg = {});
bool equivalent(const std::vector<Formula>& ctx, Regex a, Regex b, const OpTable& ops, const Config& cfg = {});

// Number of states of the minterm DFA for r (diagnostics and tests).
size_t dfaSize(Regex r, const std::vector<Formula>& ctx, const OpTable& ops, const Config& cfg = {});

}  // namespace uhat
