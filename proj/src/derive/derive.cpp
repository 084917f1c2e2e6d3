#include <functional>

#include "uhat/derive.hpp"

namespace uhat {

namespace {

struct Step {
  std::string op;
  std::vector<Formula> args;
  Formula ret;
  Sort retSort;
};

struct Prepared {
  std::vector<std::optional<Step>> steps;          // per segment; empty for stars and ghosts
  std::vector<std::vector<Formula>> factsAt;       // per segment
  VarSorts sorts;
  std::set<std::string> taken;
  std::map<std::string, Formula> aliases;  // merged variable to its representative
};

bool trivial(const Formula& f) {
  if (isTrue(f)) return true;
  return f->k == FK::Eq && sameFormula(f->kids[0], f->kids[1]);
}

bool payloadFree(const Formula& f) {
  for (auto& [n, s] : freeVars(f))
    if (isPayloadName(n)) return false;
  return true;
}

std::map<std::string, Formula> payloadBindings(const std::vector<Formula>& cs) {
  std::map<std::string, Formula> sub;
  for (auto& c : cs) {
    if (c->k != FK::Eq) continue;
    for (int side = 0; side < 2; ++side) {
      const Formula& l = c->kids[side];
      const Formula& r = c->kids[1 - side];
      if (l->k == FK::Var && isPayloadName(l->name) && !sub.count(l->name) && payloadFree(r)) sub[l->name] = r;
    }
  }
  return sub;
}

std::set<std::string> allNames(const TypeContext& gamma, const AbstractTrace& pi) {
  std::set<std::string> out = gamma.names();
  for (auto& g : pi)
    for (auto& a : g.alts)
      for (auto& [n, s] : freeVars(a.ev.phi)) out.insert(n);
  return out;
}

std::string freshName(FreshNames& names, const std::string& base, std::set<std::string>& taken) {
  std::string n = names.fresh(base, taken);
  taken.insert(n);
  return n;
}

std::set<std::string> namesIn(const Formula& f);

// Collapses variables equated by a fact onto one representative, preferring the earliest
// operator argument or result, so a late-bound result never leaves a stale sampled alias behind.
void mergeAliases(Prepared& p, const TypeContext& gamma) {
  std::map<std::string, std::string> parent;
  std::function<std::string(const std::string&)> find = [&](const std::string& x) -> std::string {
    auto it = parent.find(x);
    if (it == parent.end() || it->second == x) return x;
    return it->second = find(it->second);
  };
  std::map<std::string, size_t> rank;
  auto note = [&](const std::string& n) { rank.emplace(n, rank.size()); };
  for (auto& st : p.steps) {
    if (!st) continue;
    for (auto& a : st->args)
      for (auto& n : namesIn(a)) note(n);
    for (auto& n : namesIn(st->ret)) note(n);
  }
  for (auto& [x, t] : gamma.binds) note(x);
  for (auto& fs : p.factsAt)
    for (auto& f : fs)
      for (auto& n : namesIn(f)) note(n);
  for (auto& fs : p.factsAt)
    for (auto& f : fs) {
      if (f->k != FK::Eq || f->kids[0]->k != FK::Var || f->kids[1]->k != FK::Var) continue;
      if (f->kids[0]->sort != f->kids[1]->sort) continue;
      std::string a = find(f->kids[0]->name), b = find(f->kids[1]->name);
      if (a == b) continue;
      if (rank.at(b) < rank.at(a)) std::swap(a, b);
      parent[b] = a;
    }
  std::map<std::string, Formula> sub;
  for (auto& [x, r] : rank) {
    std::string rep = find(x);
    if (rep != x) sub[x] = mkVar(rep, p.sorts.count(rep) ? p.sorts.at(rep) : Sort::integer());
  }
  if (sub.empty()) return;
  for (auto& fs : p.factsAt) {
    std::vector<Formula> kept;
    for (auto& f : fs) {
      Formula g = substitute(f, sub);
      if (!trivial(g)) kept.push_back(g);
    }
    fs = std::move(kept);
  }
  for (auto& st : p.steps) {
    if (!st) continue;
    for (auto& a : st->args) a = substitute(a, sub);
    st->ret = substitute(st->ret, sub);
  }
  p.aliases = std::move(sub);
}

Prepared prepare(const TypeContext& gamma, const AbstractTrace& pi, FreshNames& names) {
  Prepared p;
  p.taken = allNames(gamma, pi);
  p.sorts = gamma.sorts();
  p.steps.resize(pi.size());
  p.factsAt.resize(pi.size());
  for (size_t i = 0; i < pi.size(); ++i) {
    if (pi[i].star) continue;
    const SymEvent& ev = pi[i].alts[0].ev;
    std::vector<Formula> cs = conjuncts(ev.phi);
    std::map<std::string, Formula> sub = payloadBindings(cs);
    for (size_t k = 0; k < ev.payload.size(); ++k) {
      std::string pn = payloadName(k);
      if (sub.count(pn)) continue;
      if (ev.payload[k].k == Sort::K::Unit) {
        sub[pn] = mkUnit();
        continue;
      }
      std::string w = freshName(names, "w", p.taken);
      p.sorts[w] = ev.payload[k];
      sub[pn] = mkVar(w, ev.payload[k]);
    }
    for (auto& c : cs) {
      Formula f = substitute(c, sub);
      if (payloadFree(f) && !trivial(f)) p.factsAt[i].push_back(f);
    }
    for (auto& f : p.factsAt[i])
      for (auto& [n, s] : freeVars(f)) p.sorts.emplace(n, s);
    if (ev.ghost) continue;
    Step st{ev.op, {}, sub.at(payloadName(ev.arity())), ev.payload.back()};
    for (size_t k = 0; k < ev.arity(); ++k) {
      Formula t = sub.at(payloadName(k));
      if (t->k != FK::Var && t->k != FK::Const) {
        std::string w = freshName(names, "w", p.taken);
        p.sorts[w] = ev.payload[k];
        Formula wv = mkVar(w, ev.payload[k]);
        p.factsAt[i].push_back(mkEq(wv, t));
        t = wv;
      }
      st.args.push_back(t);
    }
    for (auto& [n, s] : freeVars(st.ret)) p.sorts.emplace(n, s);
    p.steps[i] = std::move(st);
  }
  mergeAliases(p, gamma);
  return p;
}

Expr termExpr(const Formula& t) {
  if (t->k == FK::Var) return eVar(t->name);
  if (t->k == FK::Const) return eConst(t->c);
  throw InternalError("argument term is not atomic: " + printFormula(t));
}

std::set<std::string> namesIn(const Formula& f) {
  std::set<std::string> out;
  for (auto& [n, s] : freeVars(f)) out.insert(n);
  return out;
}

// Straightline block: assume over every fact, operator calls in order, late-bound returns checked by assert.
// `mid` is spliced in before steps[midAt].
Expr emitBlock(const std::vector<Step>& steps, const std::vector<Formula>& facts, const std::vector<std::string>& order,
               const VarSorts& sorts, std::set<std::string>& taken, FreshNames& names, size_t midAt = SIZE_MAX,
               const Expr& mid = nullptr) {
  std::set<std::string> used;
  std::map<std::string, size_t> lateAt;
  std::map<std::string, Formula> rename;
  std::vector<std::string> retName(steps.size());
  for (size_t i = 0; i < steps.size(); ++i) {
    const Step& st = steps[i];
    for (auto& a : st.args)
      for (auto& n : namesIn(a)) used.insert(n);
    if (st.retSort.k == Sort::K::Unit) continue;
    if (st.ret->k == FK::Var && !used.count(st.ret->name) && !lateAt.count(st.ret->name)) {
      lateAt[st.ret->name] = i;
      retName[i] = freshName(names, st.ret->name, taken);
      rename[st.ret->name] = mkVar(retName[i], st.retSort);
    } else {
      retName[i] = freshName(names, "r", taken);
    }
    for (auto& n : namesIn(st.ret)) used.insert(n);
  }

  std::vector<std::vector<Formula>> checks(steps.size());
  for (size_t i = 0; i < steps.size(); ++i)
    if (!retName[i].empty() && !(steps[i].ret->k == FK::Var && lateAt.count(steps[i].ret->name) &&
                                 lateAt.at(steps[i].ret->name) == i))
      checks[i].push_back(mkEq(mkVar(retName[i], steps[i].retSort), substitute(steps[i].ret, rename)));
  for (auto& f : facts) {
    std::optional<size_t> at;
    for (auto& n : namesIn(f)) {
      auto it = lateAt.find(n);
      if (it != lateAt.end() && (!at || it->second > *at)) at = it->second;
    }
    if (at) checks[*at].push_back(substitute(f, rename));
  }

  std::vector<std::pair<std::string, Expr>> items;
  for (size_t i = 0; i <= steps.size(); ++i) {
    if (i == midAt && mid) items.emplace_back("_", mid);
    if (i == steps.size()) break;
    const Step& st = steps[i];
    std::vector<Expr> args;
    for (auto& a : st.args) {
      auto it = a->k == FK::Var ? lateAt.find(a->name) : lateAt.end();
      args.push_back(it != lateAt.end() && it->second < i ? eVar(rename.at(a->name)->name) : termExpr(a));
    }
    Expr call = eEffOp(st.op, std::move(args));
    items.emplace_back(retName[i].empty() ? "_" : retName[i], call);
    if (!checks[i].empty()) items.emplace_back("_", eAssert(mkAnd(checks[i])));
  }

  Expr body;
  if (items.empty() || items.back().first != "_") {
    body = eUnit();
  } else {
    body = items.back().second;
    items.pop_back();
  }
  for (auto it = items.rbegin(); it != items.rend(); ++it) body = eLet(it->first, it->second, body);

  std::set<std::string> mentioned;
  for (auto& f : facts)
    for (auto& n : namesIn(f)) mentioned.insert(n);
  for (auto& st : steps) {
    for (auto& a : st.args)
      for (auto& n : namesIn(a)) mentioned.insert(n);
    for (auto& n : namesIn(st.ret)) mentioned.insert(n);
  }
  std::vector<std::pair<std::string, Sort>> binders;
  std::set<std::string> done;
  auto add = [&](const std::string& n) {
    if (!mentioned.count(n) || !done.insert(n).second) return;
    binders.emplace_back(n, sorts.count(n) ? sorts.at(n) : Sort::integer());
  };
  for (auto& n : order) add(n);
  for (auto& n : mentioned) add(n);
  if (binders.empty() && facts.empty()) return body;
  return eAssume(std::move(binders), mkAnd(facts), body);
}

std::vector<std::string> gammaOrder(const TypeContext& gamma) {
  std::vector<std::string> out;
  for (auto& [x, t] : gamma.binds) out.push_back(x);
  return out;
}

std::vector<Formula> allFacts(const TypeContext& gamma, const Prepared& p) {
  std::vector<Formula> out;
  for (auto& q : gamma.qualifiers()) {
    Formula f = substitute(q, p.aliases);
    if (!trivial(f)) out.push_back(f);
  }
  for (auto& fs : p.factsAt) out.insert(out.end(), fs.begin(), fs.end());
  return out;
}

std::vector<Step> stepsIn(const Prepared& p, size_t lo, size_t hi) {
  std::vector<Step> out;
  for (size_t i = lo; i < hi; ++i)
    if (p.steps[i]) out.push_back(*p.steps[i]);
  return out;
}

std::vector<Formula> localFacts(const std::vector<Formula>& facts, const std::vector<Step>& steps) {
  std::set<std::string> local;
  for (auto& st : steps) {
    for (auto& a : st.args)
      for (auto& n : namesIn(a)) local.insert(n);
    for (auto& n : namesIn(st.ret)) local.insert(n);
  }
  std::vector<Formula> out;
  for (auto& f : facts) {
    bool ok = true;
    for (auto& n : namesIn(f))
      if (!local.count(n)) ok = false;
    if (ok) out.push_back(f);
  }
  return out;
}

bool hasConcrete(const AbstractTrace& pi, size_t lo, size_t hi) {
  for (size_t i = lo; i < hi; ++i)
    if (!pi[i].star && !pi[i].alts[0].ev.ghost) return true;
  return false;
}

void appendErased(AbstractTrace& out, const AbstractTrace& pi, size_t lo, size_t hi) {
  for (size_t i = lo; i < hi; ++i) {
    if (pi[i].star) continue;
    SymEvent e = pi[i].alts[0].ev;
    e.phi = mkTrue();
    out.push_back(ASeg{false, {ATEvent{e, false, {}}}});
  }
}

}  // namespace

Expr deriveTrace(const TypeContext& gamma, const AbstractTrace& pi) {
  FreshNames names;
  Prepared p = prepare(gamma, pi, names);
  return emitBlock(stepsIn(p, 0, pi.size()), allFacts(gamma, p), gammaOrder(gamma), p.sorts, p.taken, names);
}

AbstractTrace unrolledTrace(const AbstractTrace& pi, const Matching& m, int folds) {
  AbstractTrace out;
  appendErased(out, pi, 0, m.a);
  for (int k = 0; k < folds; ++k) appendErased(out, pi, m.a, m.s);
  for (int k = 0; k < folds; ++k) appendErased(out, pi, m.s + 1, m.b);
  appendErased(out, pi, m.b, pi.size());
  return out;
}

bool matchingSurvives(const OperatorContext& delta, const AbstractTrace& pi, const Matching& m, int unrollBound,
                      const Config& cfg) {
  if (m.a > m.s || m.s >= pi.size() || m.b < m.s + 1 || m.b > pi.size() || !pi[m.s].star)
    throw InternalError("malformed matching");
  if (unrollBound <= 0) return true;
  for (int k = 0; k <= unrollBound; ++k) {
    FreshNames names;
    Candidate c{TypeContext{}, unrolledTrace(pi, m, k), "unroll", 0, 0};
    if (searchCandidates(delta, {c}, names, cfg, 1, cfg.maxRefineSteps).empty()) return false;
  }
  return true;
}

Expr instantiateTemplate(const TypeContext& gamma, const AbstractTrace& pi, const Matching& m) {
  FreshNames names;
  Prepared p = prepare(gamma, pi, names);
  std::vector<Formula> facts = allFacts(gamma, p);
  std::vector<std::string> order = gammaOrder(gamma);
  std::string f = freshName(names, "f", p.taken);
  std::string u = freshName(names, "u", p.taken);
  Expr rec = eApp(eVar(f), eUnit());

  std::vector<Step> e1 = stepsIn(p, m.a, m.s), e2 = stepsIn(p, m.s + 1, m.b);
  std::vector<Step> loop = e1;
  loop.insert(loop.end(), e2.begin(), e2.end());
  Expr body = emitBlock(loop, localFacts(facts, loop), order, p.sorts, p.taken, names, e1.size(), rec);

  std::vector<Step> e3 = stepsIn(p, 0, m.a), e4 = stepsIn(p, m.b, pi.size());
  std::vector<Step> outer = e3;
  outer.insert(outer.end(), e4.begin(), e4.end());
  Expr main = emitBlock(outer, localFacts(facts, outer), order, p.sorts, p.taken, names, e3.size(), rec);

  Expr fix = eFix(f, u, Sort::unit(), Sort::unit(), eChoice(eUnit(), body));
  return eLet(f, fix, main);
}

std::vector<Matching> enumerateMatchings(const AbstractTrace& pi) {
  std::vector<Matching> out;
  const size_t n = pi.size();
  for (size_t s = 0; s < n; ++s) {
    if (!pi[s].star) continue;
    for (size_t a = 0; a < s; ++a) {
      if (!hasConcrete(pi, a, s)) break;
      for (size_t b = n; b > s + 1; --b) {
        if (!hasConcrete(pi, s + 1, b)) break;
        out.push_back(Matching{a, s, b});
      }
    }
  }
  return out;
}

std::optional<Expr> synRecursion(const OperatorContext& delta, const TypeContext& gamma, const AbstractTrace& pi,
                                 int unrollBound, const Config& cfg) {
  size_t tried = 0;
  for (auto& m : enumerateMatchings(pi)) {
    if (tried++ >= static_cast<size_t>(cfg.maxBranches)) break;
    if (matchingSurvives(delta, pi, m, unrollBound, cfg)) return instantiateTemplate(gamma, pi, m);
  }
  return std::nullopt;
}

Regex claimedFuture(const AbstractTrace& pi) {
  std::vector<Regex> evs;
  for (auto& g : pi)
    if (!g.star && !g.alts[0].ev.ghost) evs.push_back(reEvent(g.alts[0].ev));
  return reConcat(evs);
}

std::vector<Formula> traceFacts(const TypeContext& gamma, const AbstractTrace& pi) {
  std::vector<Formula> out;
  for (auto& q : gamma.qualifiers())
    if (!trivial(q)) out.push_back(q);
  for (auto& g : pi) {
    if (g.star) continue;
    std::vector<Formula> cs = conjuncts(g.alts[0].ev.phi);
    std::map<std::string, Formula> sub = payloadBindings(cs);
    for (auto& c : cs) {
      Formula f = substitute(c, sub);
      if (payloadFree(f) && !trivial(f)) out.push_back(f);
    }
  }
  return out;
}

GeneratorProgram termDerive(const OperatorContext& delta, const std::vector<Candidate>& candidates,
                            const Config& cfg) {
  if (candidates.empty()) throw SynthesisFailed("no candidates to derive from");
  std::vector<Expr> branches;
  std::vector<Regex> futures;
  GeneratorProgram g;
  for (auto& c : candidates) {
    branches.push_back(deriveTrace(c.gamma, c.pi));
    futures.push_back(claimedFuture(c.pi));
    bool starred = false;
    for (auto& s : c.pi) starred = starred || s.star;
    if (starred) {
      if (auto r = synRecursion(delta, c.gamma, c.pi, cfg.unrollBound, cfg)) {
        branches.push_back(*r);
        g.recursive = true;
      }
    }
  }
  g.expr = eChoice(branches);
  g.claimed = tHoare(reEps(), "", tTop(Sort::unit()), reOr(futures));
  g.gamma = candidates[0].gamma;
  g.facts = traceFacts(candidates[0].gamma, candidates[0].pi);
  g.source = candidates[0].pi;
  g.origin = candidates.size() == 1 ? candidates[0].origin : "choice of " + std::to_string(candidates.size());
  return g;
}

}  // namespace uhat
