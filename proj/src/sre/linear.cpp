#include <algorithm>
#include <unordered_set>

#include "uhat/sre.hpp"

namespace uhat {

// Defined in automaton.cpp.
Regex dfaNormalize(Regex r, const OpTable& ops, const Config& cfg);
bool dfaEmpty(Regex r, const std::vector<Formula>& ctx, const OpTable& ops, const Config& cfg);

CharClass classOf(const SymEvent& e) {
  CharClass c;
  if (!isFalse(e.phi)) c.byOp.emplace(e.op, e);
  return c;
}

CharClass anyClass(const OpTable& ops) {
  CharClass c;
  for (auto& [name, info] : ops)
    if (info.kind != OpKind::Pure) c.byOp.emplace(name, makeEvent(info, mkTrue()));
  return c;
}

CharClass classAnd(const CharClass& a, const CharClass& b, const Domain& dom) {
  CharClass c;
  for (auto& [op, ea] : a.byOp) {
    auto it = b.byOp.find(op);
    if (it == b.byOp.end()) continue;
    SymEvent e = ea;
    e.phi = mkAnd(ea.phi, it->second.phi);
    if (isSat(e.phi, dom)) c.byOp.emplace(op, e);
  }
  return c;
}

CharClass classOr(const CharClass& a, const CharClass& b) {
  CharClass c = a;
  for (auto& [op, eb] : b.byOp) {
    auto it = c.byOp.find(op);
    if (it == c.byOp.end()) c.byOp.emplace(op, eb);
    else it->second.phi = mkOr(it->second.phi, eb.phi);
  }
  return c;
}

CharClass classMinus(const CharClass& a, const CharClass& b, const OpTable&, const Domain& dom) {
  CharClass c;
  for (auto& [op, ea] : a.byOp) {
    auto it = b.byOp.find(op);
    SymEvent e = ea;
    if (it != b.byOp.end()) e.phi = mkAnd(ea.phi, mkNot(it->second.phi));
    if (isSat(e.phi, dom)) c.byOp.emplace(op, e);
  }
  return c;
}

bool classSubset(const CharClass& a, const CharClass& b, const Domain& dom) {
  for (auto& [op, ea] : a.byOp) {
    auto it = b.byOp.find(op);
    if (it == b.byOp.end()) return false;
    if (ea.phi->key == it->second.phi->key || isTrue(it->second.phi)) continue;
    if (!isValid(mkImp(ea.phi, it->second.phi), dom)) return false;
  }
  return true;
}

namespace {

std::string classKey(const CharClass& c) {
  std::string s;
  for (auto& [op, e] : c.byOp) s += op + "{" + e.phi->key + "}";
  return s;
}

std::string linKey(const Lin& l) {
  std::string s;
  for (auto& g : l) s += (g.star ? "*[" : "[") + classKey(g.cc) + "]";
  return s;
}

// Drops empty star blocks and merges adjacent star blocks related by inclusion.
Lin simplify(Lin l, const Domain& dom) {
  Lin out;
  for (auto& g : l) {
    if (g.star && g.cc.empty()) continue;
    if (g.star && !out.empty() && out.back().star) {
      if (classSubset(g.cc, out.back().cc, dom)) continue;
      if (classSubset(out.back().cc, g.cc, dom)) {
        out.back() = g;
        continue;
      }
    }
    out.push_back(g);
  }
  return out;
}

void addUnique(std::vector<Lin>& out, std::unordered_set<std::string>& seen, Lin l) {
  if (seen.insert(linKey(l)).second) out.push_back(std::move(l));
}

void enforceCap(size_t n, const Config& cfg, const char* what) {
  if (n > static_cast<size_t>(cfg.maxBranches))
    throw CapacityExceeded(std::string(what) + ": " + std::to_string(n) + " branches exceed cap of " +
                           std::to_string(cfg.maxBranches));
}

Seg evSeg(CharClass c) {
  Seg g;
  g.cc = std::move(c);
  return g;
}

Seg starSeg(CharClass c) {
  Seg g;
  g.star = true;
  g.cc = std::move(c);
  return g;
}

std::optional<std::vector<Lin>> complementLin(Regex x, const OpTable& ops, const Config& cfg);

std::optional<std::vector<Lin>> lin(Regex r, const OpTable& ops, const Config& cfg) {
  const Domain& dom = cfg.domain;
  switch (r->k) {
    case RK::Empty: return std::vector<Lin>{};
    case RK::Eps: return std::vector<Lin>{Lin{}};
    case RK::Event: {
      if (!isSat(r->ev.phi, dom)) return std::vector<Lin>{};
      return std::vector<Lin>{Lin{evSeg(classOf(r->ev))}};
    }
    case RK::Any: return std::vector<Lin>{Lin{evSeg(anyClass(ops))}};
    case RK::Or: {
      std::vector<Lin> out;
      std::unordered_set<std::string> seen;
      for (Regex k : r->kids) {
        auto lk = lin(k, ops, cfg);
        if (!lk) return std::nullopt;
        for (auto& l : *lk) addUnique(out, seen, l);
      }
      enforceCap(out.size(), cfg, "union");
      return out;
    }
    case RK::Concat: {
      std::vector<Lin> acc{Lin{}};
      for (Regex k : r->kids) {
        auto lk = lin(k, ops, cfg);
        if (!lk) return std::nullopt;
        std::vector<Lin> next;
        std::unordered_set<std::string> seen;
        for (auto& a : acc)
          for (auto& b : *lk) {
            Lin c = a;
            c.insert(c.end(), b.begin(), b.end());
            addUnique(next, seen, simplify(std::move(c), dom));
          }
        enforceCap(next.size(), cfg, "concatenation");
        acc = std::move(next);
      }
      return acc;
    }
    case RK::Star: {
      auto lk = lin(r->kids[0], ops, cfg);
      if (!lk) return std::nullopt;
      CharClass cc;
      for (auto& l : *lk) {
        if (l.empty()) continue;
        if (l.size() != 1) return std::nullopt;
        cc = classOr(cc, l[0].cc);
      }
      if (cc.empty()) return std::vector<Lin>{Lin{}};
      return std::vector<Lin>{Lin{starSeg(cc)}};
    }
    case RK::And: {
      std::optional<std::vector<Lin>> acc;
      std::vector<Regex> order;
      for (Regex k : r->kids)
        if (k->k != RK::Not) order.push_back(k);
      for (Regex k : r->kids)
        if (k->k == RK::Not) order.push_back(k);
      for (Regex k : order) {
        auto lk = lin(k, ops, cfg);
        if (!lk) return std::nullopt;
        acc = acc ? productLins(*acc, *lk, cfg) : *lk;
      }
      return acc;
    }
    case RK::Not: return complementLin(r->kids[0], ops, cfg);
  }
  return std::nullopt;
}

std::optional<std::vector<Lin>> complementLin(Regex x, const OpTable& ops, const Config& cfg) {
  auto lx = lin(x, ops, cfg);
  if (!lx) return std::nullopt;
  const CharClass any = anyClass(ops);
  if (lx->empty()) return std::vector<Lin>{Lin{starSeg(any)}};
  bool single = std::all_of(lx->begin(), lx->end(), [](const Lin& l) {
    return l.empty() || (l.size() == 1 && !l[0].star);
  });
  if (single) {
    CharClass cc;
    bool nullable = false;
    for (auto& l : *lx) {
      if (l.empty()) nullable = true;
      else cc = classOr(cc, l[0].cc);
    }
    std::vector<Lin> out;
    if (!nullable) out.push_back(Lin{});
    CharClass rest = classMinus(any, cc, ops, cfg.domain);
    if (!rest.empty()) out.push_back(Lin{evSeg(rest)});
    out.push_back(Lin{evSeg(any), evSeg(any), starSeg(any)});
    return out;
  }
  if (lx->size() == 1 && (*lx)[0].size() == 1 && (*lx)[0][0].star) {
    const CharClass& c = (*lx)[0][0].cc;
    CharClass rest = classMinus(any, c, ops, cfg.domain);
    if (rest.empty()) return std::vector<Lin>{};
    return std::vector<Lin>{Lin{starSeg(c), evSeg(rest), starSeg(any)}};
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::vector<Lin>> linearize(Regex r, const OpTable& ops, const Config& cfg) {
  return lin(r, ops, cfg);
}

std::vector<Lin> productLin(const Lin& a, const Lin& b, const Config& cfg) {
  const Domain& dom = cfg.domain;
  const size_t na = a.size(), nb = b.size();
  const size_t rawCap = static_cast<size_t>(cfg.maxBranches) * 256;
  std::vector<Lin> raw;
  Lin cur;
  std::function<void(size_t, size_t)> dfs = [&](size_t i, size_t j) {
    const size_t mark = cur.size();
    if (i < na && j < nb && a[i].star && b[j].star) {
      CharClass cc = classAnd(a[i].cc, b[j].cc, dom);
      if (!cc.empty()) {
        Seg g = starSeg(std::move(cc));
        g.srcA = static_cast<int>(i);
        g.srcB = static_cast<int>(j);
        cur.push_back(std::move(g));
      }
    }
    if (i == na && j == nb) {
      raw.push_back(cur);
      if (raw.size() > rawCap) throw CapacityExceeded("intersection produced too many paths");
    } else {
      if (i < na && a[i].star) dfs(i + 1, j);
      if (j < nb && b[j].star) dfs(i, j + 1);
      if (i < na && j < nb) {
        CharClass cc = classAnd(a[i].cc, b[j].cc, dom);
        if (!cc.empty()) {
          const size_t ni = a[i].star ? i : i + 1;
          const size_t nj = b[j].star ? j : j + 1;
          if (ni != i || nj != j) {
            Seg g = evSeg(cc);
            g.srcA = static_cast<int>(i);
            g.srcB = static_cast<int>(j);
            cur.push_back(std::move(g));
            dfs(ni, nj);
            cur.pop_back();
          }
        }
      }
    }
    cur.resize(mark);
  };
  dfs(0, 0);
  std::vector<Lin> out;
  std::unordered_set<std::string> seen;
  for (auto& l : raw) {
    Lin s = simplify(std::move(l), dom);
    if (!linFeasible(s, {}, dom)) continue;
    addUnique(out, seen, std::move(s));
  }
  return out;
}

std::vector<Lin> productLins(const std::vector<Lin>& as, const std::vector<Lin>& bs, const Config& cfg) {
  std::vector<Lin> out;
  std::unordered_set<std::string> seen;
  for (auto& a : as)
    for (auto& b : bs)
      for (auto& l : productLin(a, b, cfg)) addUnique(out, seen, std::move(l));
  enforceCap(out.size(), cfg, "intersection");
  return out;
}

std::vector<Lin> splitEvents(const std::vector<Lin>& ls, const Config& cfg) {
  std::vector<Lin> out;
  std::unordered_set<std::string> seen;
  for (auto& l : ls) {
    std::vector<Lin> acc{Lin{}};
    for (auto& g : l) {
      if (g.star || g.cc.byOp.size() <= 1) {
        for (auto& a : acc) a.push_back(g);
        continue;
      }
      std::vector<Lin> next;
      for (auto& a : acc)
        for (auto& [op, e] : g.cc.byOp) {
          Lin c = a;
          Seg s = g;
          s.cc = classOf(e);
          c.push_back(std::move(s));
          next.push_back(std::move(c));
        }
      acc = std::move(next);
      enforceCap(acc.size(), cfg, "event split");
    }
    for (auto& a : acc) addUnique(out, seen, std::move(a));
  }
  enforceCap(out.size(), cfg, "event split");
  return out;
}

namespace {

Regex classRegex(const CharClass& c) {
  std::vector<Regex> alts;
  for (auto& [op, e] : c.byOp) alts.push_back(reEvent(e));
  return reOr(alts);
}

}  // namespace

Regex linToRegex(const Lin& l) {
  std::vector<Regex> parts;
  for (auto& g : l) parts.push_back(g.star ? reStar(classRegex(g.cc)) : classRegex(g.cc));
  return reConcat(parts);
}

Regex linsToRegex(const std::vector<Lin>& ls) {
  std::vector<Regex> alts;
  for (auto& l : ls) alts.push_back(linToRegex(l));
  return reOr(alts);
}

std::string printLin(const Lin& l) { return printRegex(linToRegex(l)); }

bool linFeasible(const Lin& l, const std::vector<Formula>& ctx, const Domain& dom) {
  std::vector<Formula> q = ctx;
  for (size_t p = 0; p < l.size(); ++p) {
    if (l[p].star) continue;
    std::vector<Formula> alts;
    for (auto& [op, e] : l[p].cc.byOp) {
      std::map<std::string, std::string> ren;
      for (size_t k = 0; k < e.payload.size(); ++k)
        ren[payloadName(k)] = "_" + std::to_string(k) + "@" + std::to_string(p) + "@" + op;
      alts.push_back(renameVars(e.phi, ren));
    }
    Formula f = mkOr(alts);
    if (isFalse(f)) return false;
    q.push_back(f);
  }
  return isSat(q, dom);
}

Regex normalizeBooleanOps(Regex r, const OpTable& ops, const Config& cfg) {
  if (!hasBooleanOps(r)) return r;
  if (auto l = linearize(r, ops, cfg)) return linsToRegex(*l);
  switch (r->k) {
    case RK::Or: {
      std::vector<Regex> kids;
      for (Regex k : r->kids) kids.push_back(normalizeBooleanOps(k, ops, cfg));
      return reOr(kids);
    }
    case RK::Concat: {
      std::vector<Regex> kids;
      for (Regex k : r->kids) kids.push_back(normalizeBooleanOps(k, ops, cfg));
      return reConcat(kids);
    }
    case RK::Star: return reStar(normalizeBooleanOps(r->kids[0], ops, cfg));
    default: return dfaNormalize(r, ops, cfg);
  }
}

bool isEmpty(Regex r, const std::vector<Formula>& ctx, const OpTable& ops, const Config& cfg) {
  std::optional<std::vector<Lin>> l;
  try {
    l = linearize(r, ops, cfg);
  } catch (const CapacityExceeded&) {
    l.reset();
  }
  if (l) {
    for (auto& x : *l)
      if (linFeasible(x, ctx, cfg.domain)) return false;
    return true;
  }
  return dfaEmpty(r, ctx, ops, cfg);
}

}  // namespace uhat
