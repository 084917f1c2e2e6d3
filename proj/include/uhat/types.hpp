#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "uhat/sre.hpp"

namespace uhat {

enum class TK { Base, Arrow, GhostVar, GhostEvent, Hoare, Inter };

struct Type;
using TypePtr = std::shared_ptr<const Type>;

struct Type {
  TK k = TK::Base;
  std::string x;   // ghost variable, arrow parameter, return binder, or ghost event name
  Sort sort;       // Base and GhostVar sort
  Formula phi;     // Base qualifier over nu
  TypePtr a;       // Arrow parameter type; Hoare return type
  TypePtr b;       // Arrow/GhostVar/GhostEvent body
  Regex H = nullptr;
  Regex F = nullptr;
  std::vector<TypePtr> parts;
};

extern const char* const kNu;

TypePtr tBase(const Sort& s, const Formula& phi);
TypePtr tTop(const Sort& s);
TypePtr tArrow(const std::string& x, TypePtr dom, TypePtr cod);
TypePtr tGhost(const std::string& x, const Sort& s, TypePtr body);
TypePtr tGhostEvent(const std::string& op, TypePtr body);
TypePtr tHoare(Regex H, const std::string& x, TypePtr ret, Regex F);
TypePtr tInter(std::vector<TypePtr> parts);

// Components of an intersection (a single-element list otherwise).
std::vector<TypePtr> components(const TypePtr& t);

// Ordered pure-type bindings.
class TypeContext {
 public:
  std::vector<std::pair<std::string, TypePtr>> binds;

  TypeContext extend(const std::string& x, TypePtr t) const;
  bool has(const std::string& x) const;
  TypePtr lookup(const std::string& x) const;
  std::vector<Formula> qualifiers() const;
  VarSorts sorts() const;
  std::set<std::string> names() const;
  SortScope scope() const;
};

struct OperatorContext {
  OpTable ops;
  std::map<std::string, TypePtr> sigs;
};

Sort erase(const TypePtr& t);
TypePtr substType(const TypePtr& t, const std::map<std::string, Formula>& m);
// Qualifier of a base type applied to a term.
Formula qualifierAt(const TypePtr& base, const Formula& term);

std::string printType(const TypePtr& t);
TypePtr parseType(TokenStream& ts, const OpTable& ops, const SortScope& scope);
TypePtr parseType(const std::string& src, const OpTable& ops, const SortScope& scope = {});

void checkWellFormedType(const TypeContext& ctx, const TypePtr& t, const OpTable& ops, const Config& cfg = {});
bool wellFormedType(const TypeContext& ctx, const TypePtr& t, const OpTable& ops, const Config& cfg = {});

bool subPure(const TypeContext& ctx, const TypePtr& t1, const TypePtr& t2, const Config& cfg = {});
bool subUHat(const TypeContext& ctx, const TypePtr& t1, const TypePtr& t2, const OpTable& ops,
             const Config& cfg = {});

// Strips the leading ghost binders named in `bindings` and substitutes their values.
TypePtr instantiateGhost(const TypePtr& sig, const std::map<std::string, Formula>& bindings);
TypePtr instantiateGhost(const TypePtr& sig, const Model& bindings);
TypePtr specializeHistory(const TypeContext& ctx, const TypePtr& sig, Regex Hnew, const OpTable& ops,
                          const Config& cfg = {});

// Ghost binders, parameters and the Hoare core of one signature component.
struct Unfolded {
  std::vector<std::pair<std::string, Sort>> ghosts;
  std::vector<std::pair<std::string, TypePtr>> params;
  TypePtr hoare;
};
Unfolded unfold(const TypePtr& component);
// Substitutes into a Hoare type including its own return binder (renaming it to a term).
TypePtr instantiateHoare(const TypePtr& hoare, const std::map<std::string, Formula>& m);

// How a resolved event was produced: signature component plus binder instantiation.
struct Instantiation {
  size_t component = 0;
  std::map<std::string, Formula> subst;  // ghost, parameter and return binders to terms
};

bool realizableEvent(const std::vector<Formula>& ctx, Regex historyPrefix, const SymEvent& ev, Regex suffix,
                     const OperatorContext& delta, const std::optional<Instantiation>& inst = std::nullopt,
                     const Config& cfg = {});

}  // namespace uhat
