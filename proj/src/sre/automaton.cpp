#include <algorithm>
#include <deque>
#include <unordered_map>
#include <unordered_set>

#include "uhat/sre.hpp"

namespace uhat {

namespace {

constexpr size_t kMaxMinterms = 4096;
constexpr size_t kMaxStates = 20000;

struct Minterm {
  SymEvent ev;                 // op plus the minterm formula
  std::vector<char> bits;      // truth of each predicate of ev.op
};

struct Alphabet {
  std::vector<Minterm> ms;
  std::map<std::string, std::map<std::string, size_t>> predIndex;  // op -> phi key -> index
};

void collectPredicates(Regex r, std::map<std::string, std::vector<Formula>>& preds,
                       std::unordered_set<uint32_t>& seen) {
  if (!seen.insert(r->id).second) return;
  if (r->k == RK::Event) {
    auto& v = preds[r->ev.op];
    if (!isTrue(r->ev.phi) &&
        std::none_of(v.begin(), v.end(), [&](const Formula& f) { return f->key == r->ev.phi->key; }))
      v.push_back(r->ev.phi);
  }
  for (Regex k : r->kids) collectPredicates(k, preds, seen);
}

Alphabet buildAlphabet(Regex r, const std::vector<Formula>& ctx, const OpTable& ops, const Domain& dom) {
  std::map<std::string, std::vector<Formula>> preds;
  std::unordered_set<uint32_t> seen;
  collectPredicates(r, preds, seen);
  Alphabet a;
  for (auto& [name, info] : ops) {
    if (info.kind == OpKind::Pure) continue;
    const auto& ps = preds[name];
    auto& idx = a.predIndex[name];
    for (size_t i = 0; i < ps.size(); ++i) idx[ps[i]->key] = i;
    struct Part {
      Formula phi;
      std::vector<char> bits;
    };
    std::vector<Part> parts{{mkTrue(), {}}};
    for (auto& p : ps) {
      std::vector<Part> next;
      for (auto& part : parts) {
        for (int pol = 1; pol >= 0; --pol) {
          Formula f = mkAnd(part.phi, pol ? p : mkNot(p));
          std::vector<Formula> q = ctx;
          q.push_back(f);
          if (!isSat(q, dom)) continue;
          Part np{f, part.bits};
          np.bits.push_back(static_cast<char>(pol));
          next.push_back(std::move(np));
        }
      }
      parts = std::move(next);
      if (parts.size() > kMaxMinterms) throw CapacityExceeded("too many minterms");
    }
    for (auto& part : parts) {
      std::vector<Formula> q = ctx;
      q.push_back(part.phi);
      if (!isSat(q, dom)) continue;
      a.ms.push_back({makeEvent(info, part.phi), part.bits});
    }
    if (a.ms.size() > kMaxMinterms) throw CapacityExceeded("too many minterms");
  }
  return a;
}

class Deriver {
 public:
  explicit Deriver(const Alphabet& a) : a_(a) {}

  Regex d(Regex r, size_t mi) {
    uint64_t key = (static_cast<uint64_t>(r->id) << 20) | mi;
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    Regex out = compute(r, mi);
    memo_.emplace(key, out);
    return out;
  }

 private:
  Regex compute(Regex r, size_t mi) {
    const Minterm& m = a_.ms[mi];
    switch (r->k) {
      case RK::Empty:
      case RK::Eps: return reEmpty();
      case RK::Any: return reEps();
      case RK::Event: {
        if (r->ev.op != m.ev.op) return reEmpty();
        if (isTrue(r->ev.phi)) return reEps();
        const auto& idx = a_.predIndex.at(m.ev.op);
        return m.bits[idx.at(r->ev.phi->key)] ? reEps() : reEmpty();
      }
      case RK::Or: {
        std::vector<Regex> ks;
        for (Regex k : r->kids) ks.push_back(d(k, mi));
        return reOr(ks);
      }
      case RK::And: {
        std::vector<Regex> ks;
        for (Regex k : r->kids) ks.push_back(d(k, mi));
        return reAnd(ks);
      }
      case RK::Not: return reNot(d(r->kids[0], mi));
      case RK::Concat: {
        Regex first = r->kids[0];
        Regex rest = reConcat(std::vector<Regex>(r->kids.begin() + 1, r->kids.end()));
        Regex out = reConcat(d(first, mi), rest);
        if (first->nullable) out = reOr(out, d(rest, mi));
        return out;
      }
      case RK::Star: return reConcat(d(r->kids[0], mi), r);
    }
    return reEmpty();
  }

  const Alphabet& a_;
  std::unordered_map<uint64_t, Regex> memo_;
};

struct Dfa {
  Alphabet alpha;
  std::vector<Regex> states;
  std::vector<std::vector<int>> delta;  // -1 for the dead state
  std::vector<char> accepting;
};

Dfa buildDfa(Regex r, const std::vector<Formula>& ctx, const OpTable& ops, const Domain& dom) {
  Dfa dfa;
  dfa.alpha = buildAlphabet(r, ctx, ops, dom);
  Deriver der(dfa.alpha);
  std::unordered_map<uint32_t, int> index;
  std::deque<int> work;
  auto add = [&](Regex s) -> int {
    if (s->k == RK::Empty) return -1;
    auto it = index.find(s->id);
    if (it != index.end()) return it->second;
    int id = static_cast<int>(dfa.states.size());
    if (dfa.states.size() >= kMaxStates) throw CapacityExceeded("automaton too large");
    dfa.states.push_back(s);
    dfa.accepting.push_back(s->nullable);
    dfa.delta.emplace_back();
    index.emplace(s->id, id);
    work.push_back(id);
    return id;
  };
  add(r);
  while (!work.empty()) {
    int s = work.front();
    work.pop_front();
    std::vector<int> row(dfa.alpha.ms.size(), -1);
    for (size_t m = 0; m < dfa.alpha.ms.size(); ++m) row[m] = add(der.d(dfa.states[s], m));
    dfa.delta[s] = std::move(row);
  }
  return dfa;
}

std::vector<char> coreachable(const Dfa& dfa) {
  const size_t n = dfa.states.size();
  std::vector<std::vector<int>> rev(n);
  for (size_t s = 0; s < n; ++s)
    for (int t : dfa.delta[s])
      if (t >= 0) rev[t].push_back(static_cast<int>(s));
  std::vector<char> co(n, 0);
  std::deque<int> work;
  for (size_t s = 0; s < n; ++s)
    if (dfa.accepting[s]) {
      co[s] = 1;
      work.push_back(static_cast<int>(s));
    }
  while (!work.empty()) {
    int s = work.front();
    work.pop_front();
    for (int p : rev[s])
      if (!co[p]) {
        co[p] = 1;
        work.push_back(p);
      }
  }
  return co;
}

Formula renamedMinterm(const Minterm& m, size_t mi) {
  std::map<std::string, std::string> ren;
  for (size_t k = 0; k < m.ev.payload.size(); ++k)
    ren[payloadName(k)] = "_" + std::to_string(k) + "#" + std::to_string(mi);
  return renameVars(m.ev.phi, ren);
}

}  // namespace

bool dfaEmpty(Regex r, const std::vector<Formula>& ctx, const OpTable& ops, const Config& cfg) {
  const Domain& dom = cfg.domain;
  if (!isSat(ctx, dom)) return true;
  Dfa dfa = buildDfa(r, ctx, ops, dom);
  if (dfa.states.empty()) return true;
  std::vector<char> co = coreachable(dfa);
  if (!co[0]) return true;
  const size_t nm = dfa.alpha.ms.size();
  std::vector<char> used(nm, 0);
  std::vector<Formula> conj = ctx;
  std::set<std::pair<int, std::string>> visited;
  std::function<bool(int)> dfs = [&](int s) -> bool {
    if (dfa.accepting[s]) return true;
    std::string usedKey(used.begin(), used.end());
    if (!visited.emplace(s, usedKey).second) return false;
    for (size_t m = 0; m < nm; ++m) {
      int t = dfa.delta[s][m];
      if (t < 0 || !co[t]) continue;
      if (used[m]) {
        if (dfs(t)) return true;
        continue;
      }
      conj.push_back(renamedMinterm(dfa.alpha.ms[m], m));
      if (isSat(conj, dom)) {
        used[m] = 1;
        bool ok = dfs(t);
        used[m] = 0;
        if (ok) {
          conj.pop_back();
          return true;
        }
      }
      conj.pop_back();
    }
    return false;
  };
  return !dfs(0);
}

bool includes(const std::vector<Formula>& ctx, Regex a, Regex b, const OpTable& ops, const Config& cfg) {
  if (a == b || b == reUniverse() || a->k == RK::Empty) return true;
  return dfaEmpty(reAnd(a, reNot(b)), ctx, ops, cfg);
}

bool equivalent(const std::vector<Formula>& ctx, Regex a, Regex b, const OpTable& ops, const Config& cfg) {
  return includes(ctx, a, b, ops, cfg) && includes(ctx, b, a, ops, cfg);
}

size_t dfaSize(Regex r, const std::vector<Formula>& ctx, const OpTable& ops, const Config& cfg) {
  return buildDfa(r, ctx, ops, cfg.domain).states.size();
}

namespace {

Regex edgeRegex(const Dfa& dfa, const std::vector<size_t>& ms) {
  std::map<std::string, SymEvent> byOp;
  for (size_t m : ms) {
    const SymEvent& e = dfa.alpha.ms[m].ev;
    auto it = byOp.find(e.op);
    if (it == byOp.end()) byOp.emplace(e.op, e);
    else it->second.phi = mkOr(it->second.phi, e.phi);
  }
  std::vector<Regex> alts;
  for (auto& [op, e] : byOp) alts.push_back(reEvent(e));
  return reOr(alts);
}

}  // namespace

Regex dfaNormalize(Regex r, const OpTable& ops, const Config& cfg) {
  Dfa dfa = buildDfa(r, {}, ops, cfg.domain);
  if (dfa.states.empty()) return reEmpty();
  std::vector<char> co = coreachable(dfa);
  if (!co[0]) return reEmpty();
  const int n = static_cast<int>(dfa.states.size());
  // Edge labels between live states.
  std::map<std::pair<int, int>, std::vector<size_t>> edges;
  for (int s = 0; s < n; ++s) {
    if (!co[s]) continue;
    for (size_t m = 0; m < dfa.alpha.ms.size(); ++m) {
      int t = dfa.delta[s][m];
      if (t >= 0 && co[t]) edges[{s, t}].push_back(m);
    }
  }
  // Partially ordered automata (only self-loops) become unions of linear sequences.
  std::vector<std::vector<int>> succ(n);
  for (auto& [st, ms] : edges)
    if (st.first != st.second) succ[st.first].push_back(st.second);
  std::vector<int> color(n, 0);
  bool cyclic = false;
  std::function<void(int)> visit = [&](int s) {
    color[s] = 1;
    for (int t : succ[s]) {
      if (color[t] == 1) cyclic = true;
      else if (color[t] == 0) visit(t);
    }
    color[s] = 2;
  };
  visit(0);
  if (!cyclic) {
    std::vector<Regex> alts;
    std::vector<Regex> cur;
    const size_t cap = static_cast<size_t>(cfg.maxBranches) * 16;
    std::function<void(int)> walk = [&](int s) {
      size_t mark = cur.size();
      auto self = edges.find({s, s});
      if (self != edges.end()) cur.push_back(reStar(edgeRegex(dfa, self->second)));
      if (dfa.accepting[s]) {
        alts.push_back(reConcat(cur));
        if (alts.size() > cap) throw CapacityExceeded("too many automaton paths");
      }
      for (int t : succ[s]) {
        cur.push_back(edgeRegex(dfa, edges[{s, t}]));
        walk(t);
        cur.pop_back();
      }
      cur.resize(mark);
    };
    walk(0);
    return reOr(alts);
  }
  // General state elimination with a fresh start (n) and final (n + 1) state.
  std::map<std::pair<int, int>, Regex> R;
  auto get = [&](int a, int b) {
    auto it = R.find({a, b});
    return it == R.end() ? reEmpty() : it->second;
  };
  for (auto& [st, ms] : edges) R[st] = edgeRegex(dfa, ms);
  R[{n, 0}] = reEps();
  for (int s = 0; s < n; ++s)
    if (co[s] && dfa.accepting[s]) R[{s, n + 1}] = reEps();
  for (int k = 0; k < n; ++k) {
    if (!co[k]) continue;
    Regex loop = reStar(get(k, k));
    std::vector<int> ins, outs;
    for (auto& [st, re] : R) {
      if (st.second == k && st.first != k && re->k != RK::Empty) ins.push_back(st.first);
      if (st.first == k && st.second != k && re->k != RK::Empty) outs.push_back(st.second);
    }
    for (int p : ins)
      for (int q : outs) R[{p, q}] = reOr(get(p, q), reConcat({get(p, k), loop, get(k, q)}));
    for (auto it = R.begin(); it != R.end();) {
      if (it->first.first == k || it->first.second == k) it = R.erase(it);
      else ++it;
    }
  }
  return get(n, n + 1);
}

}  // namespace uhat
