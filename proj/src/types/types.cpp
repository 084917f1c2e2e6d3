#include <algorithm>

#include "uhat/types.hpp"

namespace uhat {

const char* const kNu = "nu";

TypePtr tBase(const Sort& s, const Formula& phi) {
  auto t = std::make_shared<Type>();
  t->k = TK::Base;
  t->sort = s;
  t->phi = phi;
  return t;
}

TypePtr tTop(const Sort& s) { return tBase(s, mkTrue()); }

TypePtr tArrow(const std::string& x, TypePtr dom, TypePtr cod) {
  auto t = std::make_shared<Type>();
  t->k = TK::Arrow;
  t->x = x;
  t->a = std::move(dom);
  t->b = std::move(cod);
  return t;
}

TypePtr tGhost(const std::string& x, const Sort& s, TypePtr body) {
  auto t = std::make_shared<Type>();
  t->k = TK::GhostVar;
  t->x = x;
  t->sort = s;
  t->b = std::move(body);
  return t;
}

TypePtr tGhostEvent(const std::string& op, TypePtr body) {
  auto t = std::make_shared<Type>();
  t->k = TK::GhostEvent;
  t->x = op;
  t->b = std::move(body);
  return t;
}

TypePtr tHoare(Regex H, const std::string& x, TypePtr ret, Regex F) {
  auto t = std::make_shared<Type>();
  t->k = TK::Hoare;
  t->H = H;
  t->x = x;
  t->a = std::move(ret);
  t->F = F;
  return t;
}

TypePtr tInter(std::vector<TypePtr> parts) {
  std::vector<TypePtr> flat;
  for (auto& p : parts) {
    if (p->k == TK::Inter) flat.insert(flat.end(), p->parts.begin(), p->parts.end());
    else flat.push_back(p);
  }
  if (flat.size() == 1) return flat[0];
  auto t = std::make_shared<Type>();
  t->k = TK::Inter;
  t->parts = std::move(flat);
  return t;
}

std::vector<TypePtr> components(const TypePtr& t) {
  if (t->k == TK::Inter) return t->parts;
  return {t};
}

TypeContext TypeContext::extend(const std::string& x, TypePtr t) const {
  TypeContext c = *this;
  c.binds.emplace_back(x, std::move(t));
  return c;
}

bool TypeContext::has(const std::string& x) const { return lookup(x) != nullptr; }

TypePtr TypeContext::lookup(const std::string& x) const {
  for (auto it = binds.rbegin(); it != binds.rend(); ++it)
    if (it->first == x) return it->second;
  return nullptr;
}

std::vector<Formula> TypeContext::qualifiers() const {
  std::vector<Formula> out;
  for (auto& [x, t] : binds)
    if (t->k == TK::Base && !isTrue(t->phi)) out.push_back(qualifierAt(t, mkVar(x, t->sort)));
  return out;
}

VarSorts TypeContext::sorts() const {
  VarSorts out;
  for (auto& [x, t] : binds) out[x] = erase(t);
  return out;
}

std::set<std::string> TypeContext::names() const {
  std::set<std::string> out;
  for (auto& [x, t] : binds) out.insert(x);
  return out;
}

SortScope TypeContext::scope() const {
  VarSorts s = sorts();
  return [s](const std::string& n) -> std::optional<Sort> {
    auto it = s.find(n);
    if (it == s.end()) return std::nullopt;
    return it->second;
  };
}

Sort erase(const TypePtr& t) {
  switch (t->k) {
    case TK::Base: return t->sort;
    case TK::Arrow: return Sort::arrow(erase(t->a), erase(t->b));
    case TK::GhostVar:
    case TK::GhostEvent: return erase(t->b);
    case TK::Hoare: return erase(t->a);
    case TK::Inter: return erase(t->parts[0]);
  }
  return Sort::unit();
}

Formula qualifierAt(const TypePtr& base, const Formula& term) {
  return substitute(base->phi, {{kNu, term}});
}

TypePtr substType(const TypePtr& t, const std::map<std::string, Formula>& m) {
  if (m.empty()) return t;
  auto without = [&](const std::string& x) {
    auto inner = m;
    inner.erase(x);
    return inner;
  };
  switch (t->k) {
    case TK::Base: {
      auto inner = without(kNu);
      return tBase(t->sort, substitute(t->phi, inner));
    }
    case TK::Arrow: return tArrow(t->x, substType(t->a, m), substType(t->b, without(t->x)));
    case TK::GhostVar: return tGhost(t->x, t->sort, substType(t->b, without(t->x)));
    case TK::GhostEvent: return tGhostEvent(t->x, substType(t->b, m));
    case TK::Hoare: {
      auto inner = without(t->x);
      return tHoare(substRegex(t->H, inner), t->x, substType(t->a, m), substRegex(t->F, inner));
    }
    case TK::Inter: {
      std::vector<TypePtr> ps;
      for (auto& p : t->parts) ps.push_back(substType(p, m));
      return tInter(ps);
    }
  }
  return t;
}

// --- printing ---

namespace {

std::string printBase(const TypePtr& t) {
  if (t->k != TK::Base) return "(" + printType(t) + ")";
  if (isTrue(t->phi)) return t->sort.str();
  return "{" + t->sort.str() + " | " + t->phi->key + "}";
}

std::string printComp(const TypePtr& t, std::set<std::string> scope) {
  switch (t->k) {
    case TK::Base: return printBase(t);
    case TK::Arrow: {
      scope.insert(t->x);
      return t->x + ":" + printBase(t->a) + " -> " + printComp(t->b, scope);
    }
    case TK::GhostVar: {
      scope.insert(t->x);
      return t->x + ":" + t->sort.str() + " ~> " + printComp(t->b, scope);
    }
    case TK::GhostEvent: return "~" + t->x + " ~> " + printComp(t->b, scope);
    case TK::Hoare: {
      std::string ret = t->x.empty() ? printBase(t->a) : t->x + ":" + printBase(t->a);
      if (!t->x.empty()) scope.insert(t->x);
      std::string h = "[" + printRegex(t->H, scope) + "] ";
      return h + ret + " [" + printRegex(t->F, scope) + "]";
    }
    case TK::Inter: {
      std::string s;
      for (size_t i = 0; i < t->parts.size(); ++i) s += (i ? " /\\ " : "") + printComp(t->parts[i], scope);
      return s;
    }
  }
  return "?";
}

}  // namespace

std::string printType(const TypePtr& t) { return printComp(t, {}); }

// --- parsing ---

namespace {

struct TypeParser {
  TokenStream& ts;
  const OpTable& ops;

  static SortScope extend(const SortScope& outer, const std::string& x, const Sort& s) {
    return [outer, x, s](const std::string& n) -> std::optional<Sort> {
      if (n == x) return s;
      return outer ? outer(n) : std::nullopt;
    };
  }

  Sort baseSort() {
    std::string n = ts.expectIdent();
    if (n == "int") return Sort::integer();
    if (n == "bool") return Sort::boolean();
    if (n == "unit") return Sort::unit();
    return Sort::named(n);
  }

  TypePtr baseType(const SortScope& scope) {
    if (ts.acceptSym("{")) {
      Sort s = baseSort();
      ts.expectSym("|");
      Formula phi = parseFormula(ts, extend(scope, kNu, s));
      ts.expectSym("}");
      return tBase(s, phi);
    }
    if (ts.acceptSym("(")) {
      TypePtr t = comp(scope);
      ts.expectSym(")");
      return t;
    }
    return tTop(baseSort());
  }

  TypePtr hoare(const SortScope& scope) {
    ts.expectSym("[");
    // The return binder scopes over the history too, so read it first.
    size_t hStart = ts.pos();
    for (int depth = 1; depth > 0;) {
      if (ts.atEnd()) ts.fail("unterminated history");
      Token t = ts.next();
      if (t.t == Token::T::Sym && t.text == "[") ++depth;
      if (t.t == Token::T::Sym && t.text == "]") --depth;
    }
    std::string x;
    if (ts.peek().t == Token::T::Ident && ts.atSym(":", 1)) {
      x = ts.next().text;
      ts.next();
    }
    TypePtr ret = baseType(scope);
    SortScope inner = x.empty() ? scope : extend(scope, x, ret->sort);
    size_t fStart = ts.pos();
    ts.seek(hStart);
    Regex H = parseRegex(ts, ops, inner);
    ts.expectSym("]");
    ts.seek(fStart);
    ts.expectSym("[");
    Regex F = parseRegex(ts, ops, inner);
    ts.expectSym("]");
    return tHoare(H, x, ret, F);
  }

  TypePtr comp(const SortScope& scope) {
    if (ts.atSym("[")) return hoare(scope);
    if (ts.peek().t == Token::T::Ident && ts.atSym(":", 1)) {
      std::string x = ts.next().text;
      ts.next();
      TypePtr dom = baseType(scope);
      if (ts.acceptSym("~>")) {
        if (dom->k != TK::Base || !isTrue(dom->phi)) ts.fail("ghost binders take a plain sort");
        return tGhost(x, dom->sort, comp(extend(scope, x, dom->sort)));
      }
      ts.expectSym("->");
      return tArrow(x, dom, comp(extend(scope, x, erase(dom))));
    }
    return baseType(scope);
  }

  TypePtr type(const SortScope& scope) {
    std::vector<TypePtr> parts{comp(scope)};
    while (ts.acceptSym("/\\")) parts.push_back(comp(scope));
    return tInter(parts);
  }
};

}  // namespace

TypePtr parseType(TokenStream& ts, const OpTable& ops, const SortScope& scope) {
  TypeParser p{ts, ops};
  return p.type(scope);
}

TypePtr parseType(const std::string& src, const OpTable& ops, const SortScope& scope) {
  TokenStream ts(tokenize(src));
  TypePtr t = parseType(ts, ops, scope);
  if (!ts.atEnd()) ts.fail("trailing input");
  return t;
}

// --- well-formedness ---

namespace {

void requireClosed(const std::string& rule, const VarSorts& fv, const TypeContext& ctx,
                   const std::set<std::string>& extra, const std::string& what) {
  VarSorts known = ctx.sorts();
  for (auto& [n, s] : fv) {
    if (extra.count(n)) continue;
    auto it = known.find(n);
    if (it == known.end()) throw WellFormednessError(rule, "unbound variable " + n + " in " + what);
    if (it->second != s) throw WellFormednessError(rule, "sort mismatch for " + n + " in " + what);
  }
}

}  // namespace

void checkWellFormedType(const TypeContext& ctx, const TypePtr& t, const OpTable& ops, const Config& cfg) {
  switch (t->k) {
    case TK::Base: {
      try {
        if (sortOf(t->phi).k != Sort::K::Bool) throw WellFormednessError("WfPBase", "qualifier not boolean");
        VarSorts fv = freeVars(t->phi);
        auto nu = fv.find(kNu);
        if (nu != fv.end() && nu->second != t->sort)
          throw WellFormednessError("WfPBase", "nu used at the wrong sort");
        requireClosed("WfPBase", fv, ctx, {kNu}, t->phi->key);
      } catch (const SortError& e) {
        throw WellFormednessError("WfPBase", e.what());
      }
      return;
    }
    case TK::Arrow:
      checkWellFormedType(ctx, t->a, ops, cfg);
      checkWellFormedType(ctx.extend(t->x, t->a->k == TK::Base ? t->a : tTop(erase(t->a))), t->b, ops, cfg);
      return;
    case TK::GhostVar: checkWellFormedType(ctx.extend(t->x, tTop(t->sort)), t->b, ops, cfg); return;
    case TK::GhostEvent:
      if (!ops.count(t->x)) throw WellFormednessError("WfGEvent", "unknown operator " + t->x);
      checkWellFormedType(ctx, t->b, ops, cfg);
      return;
    case TK::Hoare: {
      checkWellFormedType(ctx, t->a, ops, cfg);
      std::set<std::string> extra;
      if (!t->x.empty()) extra.insert(t->x);
      try {
        requireClosed("WfHF", regexFreeVars(t->H), ctx, extra, "history");
        requireClosed("WfHF", regexFreeVars(t->F), ctx, extra, "future");
      } catch (const SortError& e) {
        throw WellFormednessError("WfEvent", e.what());
      }
      std::vector<Formula> q = t->x.empty() ? ctx.qualifiers() : ctx.extend(t->x, t->a).qualifiers();
      if (isEmpty(t->H, q, ops, cfg)) throw WellFormednessError("WfHF", "history is empty");
      return;
    }
    case TK::Inter: {
      Sort s = erase(t->parts[0]);
      for (auto& p : t->parts) {
        if (erase(p) != s) throw WellFormednessError("WFInter", "components erase differently");
        checkWellFormedType(ctx, p, ops, cfg);
      }
      return;
    }
  }
}

bool wellFormedType(const TypeContext& ctx, const TypePtr& t, const OpTable& ops, const Config& cfg) {
  try {
    checkWellFormedType(ctx, t, ops, cfg);
    return true;
  } catch (const WellFormednessError&) {
    return false;
  }
}

// --- subtyping ---

namespace {

std::string freshName(const std::string& base, const std::set<std::string>& taken) {
  for (int i = 0;; ++i) {
    std::string n = base + "'" + std::to_string(i);
    if (!taken.count(n)) return n;
  }
}

}  // namespace

bool subPure(const TypeContext& ctx, const TypePtr& t1, const TypePtr& t2, const Config& cfg) {
  if (erase(t1) != erase(t2)) throw ErasureMismatch(printType(t1) + " vs " + printType(t2));
  if (t1->k == TK::Base && t2->k == TK::Base) {
    std::vector<Formula> hyps = ctx.qualifiers();
    hyps.push_back(t2->phi);
    return entails(hyps, t1->phi, cfg.domain);
  }
  if (t1->k == TK::Arrow && t2->k == TK::Arrow) {
    if (!subPure(ctx, t2->a, t1->a, cfg)) return false;
    std::string x = t2->x;
    TypePtr cod1 = substType(t1->b, {{t1->x, mkVar(x, erase(t1->a))}});
    TypeContext inner = ctx.extend(x, t2->a->k == TK::Base ? t2->a : tTop(erase(t2->a)));
    if (cod1->k == TK::Base && t2->b->k == TK::Base) return subPure(inner, cod1, t2->b, cfg);
    return false;
  }
  if (t1->k == TK::GhostVar && t2->k == TK::GhostVar) {
    if (t1->sort != t2->sort) return false;
    TypePtr b1 = substType(t1->b, {{t1->x, mkVar(t2->x, t2->sort)}});
    return subPure(ctx.extend(t2->x, tTop(t2->sort)), b1, t2->b, cfg);
  }
  return false;
}

bool subUHat(const TypeContext& ctx, const TypePtr& t1, const TypePtr& t2, const OpTable& ops, const Config& cfg) {
  if (t2->k == TK::Inter) {
    for (auto& p : t2->parts)
      if (!subUHat(ctx, t1, p, ops, cfg)) return false;
    return true;
  }
  if (t1->k == TK::Inter) {
    for (auto& p : t1->parts)
      if (subUHat(ctx, p, t2, ops, cfg)) return true;
    return false;
  }
  if (t1->k == TK::Hoare && t2->k == TK::Hoare) {
    if (!subPure(ctx, t1->a, t2->a, cfg)) return false;
    std::string x = t1->x;
    Regex F1 = t1->F, F2 = t2->F;
    if (x.empty()) x = t2->x;
    if (x.empty()) x = freshName("r", ctx.names());
    const Sort rs = erase(t1->a);
    Regex H1 = t1->H, H2 = t2->H;
    if (!t1->x.empty() && t1->x != x) {
      F1 = substRegex(F1, {{t1->x, mkVar(x, rs)}});
      H1 = substRegex(H1, {{t1->x, mkVar(x, rs)}});
    }
    if (!t2->x.empty() && t2->x != x) {
      F2 = substRegex(F2, {{t2->x, mkVar(x, rs)}});
      H2 = substRegex(H2, {{t2->x, mkVar(x, rs)}});
    }
    TypeContext inner = ctx.extend(x, t1->a);
    std::vector<Formula> q = inner.qualifiers();
    return includes(q, F2, F1, ops, cfg) && includes(q, H1, H2, ops, cfg);
  }
  if (t1->k == TK::Arrow && t2->k == TK::Arrow) {
    if (!subPure(ctx, t2->a, t1->a, cfg)) return false;
    TypePtr cod1 = substType(t1->b, {{t1->x, mkVar(t2->x, erase(t1->a))}});
    return subUHat(ctx.extend(t2->x, t2->a), cod1, t2->b, ops, cfg);
  }
  if (t1->k == TK::GhostVar && t2->k == TK::GhostVar) {
    if (t1->sort != t2->sort) return false;
    TypePtr b1 = substType(t1->b, {{t1->x, mkVar(t2->x, t2->sort)}});
    return subUHat(ctx.extend(t2->x, tTop(t2->sort)), b1, t2->b, ops, cfg);
  }
  return subPure(ctx, t1, t2, cfg);
}

TypePtr instantiateGhost(const TypePtr& sig, const std::map<std::string, Formula>& bindings) {
  if (sig->k == TK::Inter) {
    std::vector<TypePtr> ps;
    for (auto& p : sig->parts) ps.push_back(instantiateGhost(p, bindings));
    return tInter(ps);
  }
  std::map<std::string, Formula> sub;
  TypePtr t = sig;
  while (t->k == TK::GhostVar && bindings.count(t->x)) {
    sub[t->x] = bindings.at(t->x);
    t = t->b;
  }
  return substType(t, sub);
}

TypePtr instantiateGhost(const TypePtr& sig, const Model& bindings) {
  std::map<std::string, Formula> m;
  for (auto& [k, v] : bindings) m[k] = mkConst(v);
  return instantiateGhost(sig, m);
}

TypePtr specializeHistory(const TypeContext& ctx, const TypePtr& sig, Regex Hnew, const OpTable& ops,
                          const Config& cfg) {
  if (sig->k == TK::Arrow)
    return tArrow(sig->x, sig->a, specializeHistory(ctx.extend(sig->x, sig->a), sig->b, Hnew, ops, cfg));
  if (sig->k != TK::Hoare) throw SpecializationRejected("shape", "expected a Hoare type");
  std::vector<Formula> q = sig->x.empty() ? ctx.qualifiers() : ctx.extend(sig->x, sig->a).qualifiers();
  if (!includes(q, Hnew, sig->H, ops, cfg))
    throw SpecializationRejected("inclusion", "new history is not contained in " + printRegex(sig->H));
  if (isEmpty(Hnew, q, ops, cfg)) throw SpecializationRejected("non-emptiness", "new history is empty");
  return tHoare(Hnew, sig->x, sig->a, sig->F);
}

Unfolded unfold(const TypePtr& component) {
  Unfolded u;
  TypePtr t = component;
  for (;;) {
    if (t->k == TK::GhostVar) {
      u.ghosts.emplace_back(t->x, t->sort);
      t = t->b;
    } else if (t->k == TK::Arrow) {
      u.params.emplace_back(t->x, t->a);
      t = t->b;
    } else if (t->k == TK::GhostEvent) {
      t = t->b;
    } else {
      break;
    }
  }
  if (t->k != TK::Hoare) throw WellFormednessError("WfEfArr", "signature does not end in a Hoare type");
  u.hoare = t;
  return u;
}

TypePtr instantiateHoare(const TypePtr& hoare, const std::map<std::string, Formula>& m) {
  return tHoare(substRegex(hoare->H, m), hoare->x, substType(hoare->a, m), substRegex(hoare->F, m));
}

namespace {

bool replay(const std::vector<Formula>& ctx, Regex prefix, const SymEvent& ev, Regex suffix, const TypePtr& hoare,
            const OpTable& ops, const Config& cfg) {
  if (!includes(ctx, prefix, hoare->H, ops, cfg)) return false;
  if (isEmpty(reConcat({prefix, reEvent(ev), suffix}), ctx, ops, cfg)) return false;
  return includes(ctx, reConcat(reEvent(ev), suffix), reConcat(hoare->F, reUniverse()), ops, cfg);
}

}  // namespace

bool realizableEvent(const std::vector<Formula>& ctx, Regex historyPrefix, const SymEvent& ev, Regex suffix,
                     const OperatorContext& delta, const std::optional<Instantiation>& inst, const Config& cfg) {
  if (ev.ghost) return true;
  auto sit = delta.sigs.find(ev.op);
  if (sit == delta.sigs.end()) throw UnknownOp(ev.op);
  std::vector<TypePtr> comps = components(sit->second);
  if (inst) {
    if (inst->component >= comps.size()) return false;
    Unfolded u = unfold(comps[inst->component]);
    TypePtr h = instantiateHoare(u.hoare, inst->subst);
    return replay(ctx, historyPrefix, ev, suffix, h, delta.ops, cfg);
  }
  for (auto& comp : comps) {
    Unfolded u = unfold(comp);
    std::map<std::string, Formula> sub;
    std::vector<Formula> q = ctx;
    std::map<std::string, std::string> payloadRen;
    for (size_t i = 0; i < u.params.size(); ++i) {
      std::string p = "$p" + std::to_string(i);
      Formula v = mkVar(p, erase(u.params[i].second));
      sub[u.params[i].first] = v;
      payloadRen[payloadName(i)] = p;
      if (u.params[i].second->k == TK::Base) q.push_back(qualifierAt(u.params[i].second, v));
    }
    std::string r = "$r";
    payloadRen[payloadName(u.params.size())] = r;
    if (!u.hoare->x.empty()) sub[u.hoare->x] = mkVar(r, erase(u.hoare->a));
    q.push_back(qualifierAt(u.hoare->a, mkVar(r, erase(u.hoare->a))));
    q.push_back(renameVars(ev.phi, payloadRen));
    if (u.ghosts.size() > 3) throw UnsupportedTheory("too many ghost binders to enumerate");
    std::vector<int64_t> vals(u.ghosts.size(), cfg.domain.lo);
    for (;;) {
      auto s2 = sub;
      for (size_t g = 0; g < u.ghosts.size(); ++g) {
        const Sort& gs = u.ghosts[g].second;
        Value v = gs.k == Sort::K::Bool ? Value::boolean(vals[g] & 1)
                  : gs.k == Sort::K::Unit ? Value::unit()
                                          : Value::integer(vals[g]);
        s2[u.ghosts[g].first] = mkConst(v);
      }
      // Parameter qualifiers may mention ghosts.
      std::vector<Formula> q2;
      for (auto& f : q) q2.push_back(substitute(f, s2));
      if (isSat(q2, cfg.domain) && replay(q2, historyPrefix, ev, suffix, instantiateHoare(u.hoare, s2), delta.ops, cfg))
        return true;
      size_t g = 0;
      while (g < vals.size() && ++vals[g] > cfg.domain.hi) vals[g++] = cfg.domain.lo;
      if (g == vals.size()) break;
    }
  }
  return false;
}

}  // namespace uhat
