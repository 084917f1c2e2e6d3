#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "uhat/config.hpp"
#include "uhat/errors.hpp"

namespace uhat {

// Base sorts plus arrows. Named sorts (e.g. "id") are integers under a label.
struct Sort {
  enum class K { Unit, Bool, Int, Arrow };
  K k = K::Unit;
  std::string label;
  std::shared_ptr<const Sort> dom, cod;

  static Sort unit() { return Sort{K::Unit, {}, {}, {}}; }
  static Sort boolean() { return Sort{K::Bool, {}, {}, {}}; }
  static Sort integer() { return Sort{K::Int, {}, {}, {}}; }
  static Sort named(const std::string& n) { return Sort{K::Int, n, {}, {}}; }
  static Sort arrow(const Sort& a, const Sort& b);

  bool isBase() const { return k != K::Arrow; }
  bool isInt() const { return k == K::Int; }
  std::string str() const;
  bool operator==(const Sort& o) const;
  bool operator!=(const Sort& o) const { return !(*this == o); }
};

struct Value {
  enum class K { Unit, Bool, Int };
  K k = K::Unit;
  int64_t i = 0;

  static Value unit() { return Value{K::Unit, 0}; }
  static Value boolean(bool b) { return Value{K::Bool, b ? 1 : 0}; }
  static Value integer(int64_t v) { return Value{K::Int, v}; }
  bool asBool() const { return i != 0; }
  std::string str() const;
  bool operator==(const Value& o) const { return k == o.k && i == o.i; }
  bool operator!=(const Value& o) const { return !(*this == o); }
  bool operator<(const Value& o) const { return k != o.k ? k < o.k : i < o.i; }
};

enum class FK { Const, Var, Add, Sub, Eq, Lt, Le, Not, And, Or, Imp, Forall };

struct FNode;
using Formula = std::shared_ptr<const FNode>;

struct FNode {
  FK k;
  Value c;
  std::string name;  // variable name, or the bound variable of Forall
  Sort sort;         // variable sort, or the bound sort of Forall
  std::vector<Formula> kids;
  std::string key;   // canonical printed form
};

using Model = std::map<std::string, Value>;
using VarSorts = std::map<std::string, Sort>;

Formula mkConst(const Value& v);
Formula mkInt(int64_t v);
Formula mkBool(bool b);
Formula mkUnit();
Formula mkTrue();
Formula mkFalse();
Formula mkVar(const std::string& name, const Sort& s = Sort::integer());
Formula mkAdd(const Formula& a, const Formula& b);
Formula mkSub(const Formula& a, const Formula& b);
Formula mkEq(const Formula& a, const Formula& b);
Formula mkLt(const Formula& a, const Formula& b);
Formula mkLe(const Formula& a, const Formula& b);
Formula mkNot(const Formula& a);
Formula mkAnd(const std::vector<Formula>& xs);
Formula mkAnd(const Formula& a, const Formula& b);
Formula mkOr(const std::vector<Formula>& xs);
Formula mkOr(const Formula& a, const Formula& b);
Formula mkImp(const Formula& a, const Formula& b);
Formula mkForall(const std::string& x, const Sort& s, const Formula& body);
Formula mkExists(const std::string& x, const Sort& s, const Formula& body);

inline const std::string& keyOf(const Formula& f) { return f->key; }
inline bool sameFormula(const Formula& a, const Formula& b) { return a->key == b->key; }
bool isTrue(const Formula& f);
bool isFalse(const Formula& f);

// Sort of a term; throws SortError on ill-sorted input.
Sort sortOf(const Formula& f);
void collectFreeVars(const Formula& f, VarSorts& out);
VarSorts freeVars(const Formula& f);
bool mentions(const Formula& f, const std::string& x);
std::vector<Formula> conjuncts(const Formula& f);

Formula substitute(const Formula& f, const std::map<std::string, Formula>& m);
Formula renameVars(const Formula& f, const std::map<std::string, std::string>& m);
Formula substValues(const Formula& f, const Model& m);

Value eval(const Formula& f, const Model& env, const Domain& dom = {});
std::string printFormula(const Formula& f);

// --- lexing and parsing shared by every surface syntax ---

struct Token {
  enum class T { Ident, Int, Sym, End };
  T t = T::End;
  std::string text;
  int64_t num = 0;
  int line = 1;
  int col = 1;
};

std::vector<Token> tokenize(const std::string& src);

class TokenStream {
 public:
  explicit TokenStream(std::vector<Token> toks) : toks_(std::move(toks)) {}
  const Token& peek(size_t ahead = 0) const;
  Token next();
  bool atSym(const std::string& s, size_t ahead = 0) const;
  bool atIdent(const std::string& s, size_t ahead = 0) const;
  bool acceptSym(const std::string& s);
  bool acceptIdent(const std::string& s);
  void expectSym(const std::string& s);
  std::string expectIdent();
  int64_t expectInt();
  bool atEnd() const { return peek().t == Token::T::End; }
  [[noreturn]] void fail(const std::string& msg) const;
  size_t pos() const { return pos_; }
  void seek(size_t p) { pos_ = p; }

 private:
  std::vector<Token> toks_;
  size_t pos_ = 0;
};

// Resolves identifiers to sorts; nullopt means "unknown", which defaults to int.
using SortScope = std::function<std::optional<Sort>(const std::string&)>;

Sort parseSort(TokenStream& ts);
Formula parseFormula(TokenStream& ts, const SortScope& scope);
Formula parseTerm(TokenStream& ts, const SortScope& scope);  // arithmetic level
Formula parseAtomTerm(TokenStream& ts, const SortScope& scope);
Formula parseFormula(const std::string& src, const SortScope& scope = {});

// --- bounded-domain satisfiability ---

bool isSat(const std::vector<Formula>& conj, const Domain& dom = {});
bool isSat(const Formula& f, const Domain& dom = {});
bool entails(const std::vector<Formula>& hyps, const Formula& c, const Domain& dom = {});
bool isValid(const Formula& f, const Domain& dom = {});
// Smallest model in variable-name order.
std::optional<Model> findWitness(const std::vector<Formula>& conj, const Domain& dom = {});
// The first `limit` models in variable-name lexicographic order.
std::vector<Model> enumerateModels(const std::vector<Formula>& conj, size_t limit,
                                   const Domain& dom = {});
// Models per independent variable component, each list in lexicographic order.
std::optional<std::vector<std::vector<Model>>> enumerateByComponent(const std::vector<Formula>& conj,
                                                                    size_t limit, const Domain& dom = {});
void clearSolverCache();

struct SolverStats {
  uint64_t queries = 0;
  uint64_t cacheHits = 0;
};
SolverStats solverStats();

}  // namespace uhat
