#include <functional>
#include <queue>
#include <unordered_set>

#include "uhat/synth.hpp"

namespace uhat {

namespace {

std::vector<Lin> linesOf(Regex r, const OpTable& ops, const Config& cfg) {
  if (auto l = linearize(r, ops, cfg)) return *l;
  if (auto l = linearize(normalizeBooleanOps(r, ops, cfg), ops, cfg)) return *l;
  throw CapacityExceeded("regex outside the linear fragment: " + printRegex(r));
}

// Rebuilds tagged segments from a product whose left operand was `src`.
void appendTagged(AbstractTrace& out, const Lin& l, const AbstractTrace& src) {
  for (auto& s : l) {
    ASeg g;
    g.star = s.star;
    for (auto& [op, e] : s.cc.byOp) {
      ATEvent a{e, false, {}};
      if (!s.star && s.srcA >= 0 && !src[static_cast<size_t>(s.srcA)].star) {
        const ATEvent& orig = src[static_cast<size_t>(s.srcA)].alts[0];
        a.resolved = orig.resolved;
        a.inst = orig.inst;
      }
      g.alts.push_back(std::move(a));
    }
    out.push_back(std::move(g));
  }
}

// Payload-free consequences of an event qualifier, after substituting payload equalities.
std::vector<Formula> payloadFreeFacts(const SymEvent& e) {
  std::vector<Formula> cs = conjuncts(e.phi);
  std::map<std::string, Formula> sub;
  for (auto& c : cs) {
    if (c->k != FK::Eq) continue;
    for (int side = 0; side < 2; ++side) {
      const Formula& l = c->kids[side];
      const Formula& r = c->kids[1 - side];
      if (l->k != FK::Var || !isPayloadName(l->name) || sub.count(l->name)) continue;
      bool clean = true;
      for (auto& [n, s] : freeVars(r))
        if (isPayloadName(n)) clean = false;
      if (clean) sub[l->name] = r;
    }
  }
  std::vector<Formula> out;
  for (auto& c : cs) {
    Formula f = substitute(c, sub);
    bool clean = true;
    for (auto& [n, s] : freeVars(f))
      if (isPayloadName(n)) clean = false;
    if (clean && !isTrue(f)) out.push_back(f);
  }
  return out;
}

void pinConstants(TypeContext& gamma, const std::vector<std::string>& fresh, const SymEvent& ev, const Domain& dom) {
  std::vector<Formula> facts = gamma.qualifiers();
  for (auto& f : payloadFreeFacts(ev)) facts.push_back(f);
  auto w = findWitness(facts, dom);
  if (!w) return;
  for (auto& v : fresh) {
    auto it = w->find(v);
    if (it == w->end()) continue;
    TypePtr t = gamma.lookup(v);
    if (!t || t->k != TK::Base || !t->sort.isInt()) continue;
    Formula eq = mkEq(mkVar(v, t->sort), mkConst(it->second));
    if (!entails(facts, eq, dom)) continue;
    for (auto& [x, bt] : gamma.binds)
      if (x == v) bt = tBase(t->sort, mkEq(mkVar(kNu, t->sort), mkConst(it->second)));
  }
}

}  // namespace

std::vector<Candidate> refine(const OperatorContext& delta, const Candidate& c, size_t target, FreshNames& names,
                              const Config& cfg) {
  if (target >= c.pi.size() || c.pi[target].star) throw InternalError("refine target is not an event");
  const ATEvent& tev = c.pi[target].alts[0];
  auto sit = delta.sigs.find(tev.ev.op);
  if (sit == delta.sigs.end()) throw UnknownOp(tev.ev.op);

  AbstractTrace piH(c.pi.begin(), c.pi.begin() + static_cast<long>(target));
  AbstractTrace piF(c.pi.begin() + static_cast<long>(target) + 1, c.pi.end());
  const Lin linH = toLin(piH), linF = toLin(piF);

  std::vector<Candidate> out;
  std::unordered_set<std::string> seen;
  std::vector<TypePtr> comps = components(sit->second);
  for (size_t ci = 0; ci < comps.size(); ++ci) {
    Unfolded u = unfold(comps[ci]);
    std::set<std::string> taken = c.gamma.names();
    std::map<std::string, Formula> subst;
    TypeContext gamma = c.gamma;
    std::vector<std::string> fresh;
    auto bind = [&](const std::string& x, const TypePtr& t) {
      std::string n = names.fresh(x, taken);
      taken.insert(n);
      fresh.push_back(n);
      TypePtr ti = substType(t, subst);
      subst[x] = mkVar(n, erase(ti));
      gamma = gamma.extend(n, ti);
    };
    for (auto& [g, s] : u.ghosts) bind(g, tTop(s));
    for (auto& [p, t] : u.params) bind(p, t->k == TK::Base ? t : tTop(erase(t)));
    if (!u.hoare->x.empty()) bind(u.hoare->x, u.hoare->a);
    TypePtr hoare = instantiateHoare(u.hoare, subst);

    Regex F = hoare->F, head = nullptr, rest = reEps();
    if (F->k == RK::Event) {
      head = F;
    } else if (F->k == RK::Concat && F->kids[0]->k == RK::Event) {
      head = F->kids[0];
      rest = reConcat(std::vector<Regex>(F->kids.begin() + 1, F->kids.end()));
    }
    if (!head || head->ev.op != tev.ev.op) continue;

    SymEvent ev = tev.ev;
    ev.phi = mkAnd(ev.phi, head->ev.phi);
    std::vector<Formula> quals = gamma.qualifiers();
    if (!linFeasible(Lin{Seg{false, classOf(ev), -1, -1}}, quals, cfg.domain)) continue;

    std::vector<Lin> hs, fs;
    for (auto& h : linesOf(hoare->H, delta.ops, cfg))
      for (auto& l : productLin(linH, h, cfg)) hs.push_back(std::move(l));
    if (hs.empty()) continue;
    for (auto& f : linesOf(reConcat(rest, reUniverse()), delta.ops, cfg))
      for (auto& l : productLin(linF, f, cfg)) fs.push_back(std::move(l));
    if (fs.empty()) continue;
    hs = splitEvents(hs, cfg);
    fs = splitEvents(fs, cfg);
    if (hs.size() * fs.size() > static_cast<size_t>(cfg.maxBranches) * 64)
      throw CapacityExceeded("refinement produced too many traces");

    Instantiation inst{ci, subst};
    for (auto& h : hs) {
      for (auto& f : fs) {
        AbstractTrace pi;
        appendTagged(pi, h, piH);
        pi.push_back(ASeg{false, {ATEvent{ev, true, inst}}});
        appendTagged(pi, f, piF);
        if (!linFeasible(toLin(pi), quals, cfg.domain)) continue;
        Candidate child{gamma, std::move(pi), c.origin, c.depth + 1, 0};
        pinConstants(child.gamma, fresh, ev, cfg.domain);
        if (seen.insert(printCandidate(child)).second) out.push_back(std::move(child));
      }
    }
  }
  return out;
}

bool candidateRealizable(const OperatorContext& delta, const Candidate& c, const Config& cfg) {
  std::vector<Formula> quals = c.gamma.qualifiers();
  for (size_t i = 0; i < c.pi.size(); ++i) {
    if (c.pi[i].star) continue;
    const ATEvent& e = c.pi[i].alts[0];
    if (e.ev.ghost || !e.resolved) continue;
    AbstractTrace pre(c.pi.begin(), c.pi.begin() + static_cast<long>(i));
    AbstractTrace post(c.pi.begin() + static_cast<long>(i) + 1, c.pi.end());
    if (!realizableEvent(quals, traceRegex(pre), e.ev, traceRegex(post), delta, e.inst, cfg)) return false;
  }
  return true;
}

Regex padGhosts(Regex A, const OpTable& ops) {
  std::vector<Regex> ghosts;
  for (auto& [name, info] : ops)
    if (info.ghost()) ghosts.push_back(reEvent(info, mkTrue()));
  if (ghosts.empty()) return A;
  Regex G = reStar(reOr(ghosts));
  std::function<Regex(Regex)> go = [&](Regex r) -> Regex {
    std::vector<Regex> kids;
    for (Regex k : r->kids) kids.push_back(go(k));
    switch (r->k) {
      case RK::Event: return r->ev.ghost ? r : reConcat(r, G);
      case RK::Or: return reOr(kids);
      case RK::And: return reAnd(kids);
      case RK::Concat: return reConcat(kids);
      case RK::Star: return reStar(kids[0]);
      case RK::Not: return reNot(kids[0]);
      default: return r;
    }
  };
  return reConcat(G, go(A));
}

std::vector<Candidate> initialCandidates(const OperatorContext& delta, const VarSorts& vars, Regex A,
                                         const Config& cfg) {
  A = padGhosts(A, delta.ops);
  TypeContext gamma;
  for (auto& [x, s] : vars) gamma = gamma.extend(x, tTop(s));
  std::vector<Candidate> out;
  for (auto& pi : normPlan(A, delta.ops, cfg)) {
    if (!linFeasible(toLin(pi), gamma.qualifiers(), cfg.domain)) continue;
    out.push_back(Candidate{gamma, std::move(pi), "property", 0, 0});
  }
  return out;
}

std::vector<Candidate> searchCandidates(const OperatorContext& delta, std::vector<Candidate> initial,
                                        FreshNames& names, const Config& cfg, size_t maxFinished,
                                        int stepBudget, SearchStats* stats,
                                        std::optional<std::chrono::steady_clock::time_point> deadline) {
  SearchStats local;
  SearchStats& st = stats ? *stats : local;
  struct Entry {
    size_t unresolved, length;
    uint64_t serial;
    Candidate c;
  };
  auto worse = [](const Entry& a, const Entry& b) {
    if (a.unresolved != b.unresolved) return a.unresolved > b.unresolved;
    if (a.length != b.length) return a.length > b.length;
    return a.serial > b.serial;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> queue(worse);
  std::unordered_set<std::string> seen;
  uint64_t serial = 0;
  auto push = [&](Candidate c) {
    if (!seen.insert(printCandidate(c)).second) return;
    c.serial = serial++;
    size_t u = unresolvedCount(c.pi), l = concreteLength(c.pi);
    queue.push(Entry{u, l, c.serial, std::move(c)});
  };
  for (auto& c : initial) push(std::move(c));

  std::vector<Candidate> finished;
  while (!queue.empty() && finished.size() < maxFinished) {
    Entry e = queue.top();
    queue.pop();
    auto t = leftmostUnresolved(e.c.pi);
    if (!t) {
      finished.push_back(std::move(e.c));
      continue;
    }
    if (st.steps >= stepBudget) break;
    if (deadline && std::chrono::steady_clock::now() > *deadline) {
      st.timedOut = true;
      break;
    }
    ++st.steps;
    std::vector<Candidate> kids;
    try {
      kids = refine(delta, e.c, *t, names, cfg);
    } catch (const CapacityExceeded& ex) {
      st.lastFailure = ex.what();
    }
    if (kids.empty()) {
      ++st.discarded;
      if (st.lastFailure.empty() || kids.empty())
        st.lastFailure = "no signature component of " + e.c.pi[*t].alts[0].ev.op +
                         " admits a non-empty refinement of " + printAbstractTrace(e.c.pi, e.c.gamma.names());
      continue;
    }
    ++st.expanded;
    for (auto& k : kids) push(std::move(k));
  }
  return finished;
}

}  // namespace uhat
