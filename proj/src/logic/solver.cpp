#include <algorithm>
#include <mutex>
#include <numeric>
#include <unordered_map>

#include "uhat/logic.hpp"

namespace uhat {

namespace {

struct Iv {
  int64_t lo, hi;
};

struct CN {
  FK k;
  int64_t c = 0;
  int slot = -1;
  std::vector<int> kids;
};

struct Problem {
  std::vector<CN> nodes;
  std::vector<int> roots;
  std::vector<Sort::K> slotKind;
  std::vector<std::string> slotName;
  std::vector<std::vector<int>> rootVars;  // free slots per root
  int nfree = 0;
};

class Compiler {
 public:
  explicit Compiler(Problem& p) : p_(p) {}

  int freeSlot(const std::string& n, Sort::K k) {
    auto it = free_.find(n);
    if (it != free_.end()) return it->second;
    int s = static_cast<int>(p_.slotKind.size());
    p_.slotKind.push_back(k);
    p_.slotName.push_back(n);
    free_.emplace(n, s);
    return s;
  }

  int compile(const Formula& f, std::map<std::string, int>& bound, std::set<int>& vars) {
    CN n;
    n.k = f->k;
    switch (f->k) {
      case FK::Const: n.c = f->c.i; break;
      case FK::Var: {
        auto it = bound.find(f->name);
        if (it != bound.end()) {
          n.slot = it->second;
        } else {
          if (f->sort.k == Sort::K::Arrow) throw UnsupportedTheory("variable of arrow sort: " + f->name);
          n.slot = freeSlot(f->name, f->sort.k);
          vars.insert(n.slot);
        }
        break;
      }
      case FK::Forall: {
        if (f->sort.k == Sort::K::Arrow) throw UnsupportedTheory("quantifier over arrow sort");
        int s = static_cast<int>(p_.slotKind.size());
        p_.slotKind.push_back(f->sort.k);
        p_.slotName.push_back(f->name);
        auto prev = bound.find(f->name);
        const bool shadows = prev != bound.end();
        const int saved = shadows ? prev->second : -1;
        bound[f->name] = s;
        n.slot = s;
        n.kids.push_back(compile(f->kids[0], bound, vars));
        if (shadows) bound[f->name] = saved;
        else bound.erase(f->name);
        break;
      }
      default:
        for (auto& c : f->kids) n.kids.push_back(compile(c, bound, vars));
    }
    p_.nodes.push_back(std::move(n));
    return static_cast<int>(p_.nodes.size()) - 1;
  }

 private:
  Problem& p_;
  std::map<std::string, int> free_;
};

class Evaluator {
 public:
  Evaluator(const Problem& p, const Domain& d) : p_(p), dom_(d) {
    assigned_.assign(p.slotKind.size(), 0);
    val_.assign(p.slotKind.size(), 0);
  }

  Iv range(int slot) const {
    switch (p_.slotKind[slot]) {
      case Sort::K::Unit: return {0, 0};
      case Sort::K::Bool: return {0, 1};
      default: return {dom_.lo, dom_.hi};
    }
  }

  Iv ev(int id) {
    const CN& n = p_.nodes[id];
    switch (n.k) {
      case FK::Const: return {n.c, n.c};
      case FK::Var:
        if (assigned_[n.slot]) return {val_[n.slot], val_[n.slot]};
        return range(n.slot);
      case FK::Add: {
        Iv a = ev(n.kids[0]), b = ev(n.kids[1]);
        return {a.lo + b.lo, a.hi + b.hi};
      }
      case FK::Sub: {
        Iv a = ev(n.kids[0]), b = ev(n.kids[1]);
        return {a.lo - b.hi, a.hi - b.lo};
      }
      case FK::Eq: {
        Iv a = ev(n.kids[0]), b = ev(n.kids[1]);
        if (a.lo == a.hi && b.lo == b.hi && a.lo == b.lo) return {1, 1};
        if (a.hi < b.lo || b.hi < a.lo) return {0, 0};
        return {0, 1};
      }
      case FK::Lt: {
        Iv a = ev(n.kids[0]), b = ev(n.kids[1]);
        if (a.hi < b.lo) return {1, 1};
        if (a.lo >= b.hi) return {0, 0};
        return {0, 1};
      }
      case FK::Le: {
        Iv a = ev(n.kids[0]), b = ev(n.kids[1]);
        if (a.hi <= b.lo) return {1, 1};
        if (a.lo > b.hi) return {0, 0};
        return {0, 1};
      }
      case FK::Not: {
        Iv a = ev(n.kids[0]);
        return {1 - a.hi, 1 - a.lo};
      }
      case FK::And: {
        Iv r{1, 1};
        for (int k : n.kids) {
          Iv a = ev(k);
          r.lo = std::min(r.lo, a.lo);
          r.hi = std::min(r.hi, a.hi);
          if (r.hi == 0) break;
        }
        return r;
      }
      case FK::Or: {
        Iv r{0, 0};
        for (int k : n.kids) {
          Iv a = ev(k);
          r.lo = std::max(r.lo, a.lo);
          r.hi = std::max(r.hi, a.hi);
          if (r.lo == 1) break;
        }
        return r;
      }
      case FK::Imp: {
        Iv a = ev(n.kids[0]);
        if (a.hi == 0) return {1, 1};
        Iv b = ev(n.kids[1]);
        return {std::max<int64_t>(1 - a.hi, b.lo), std::max<int64_t>(1 - a.lo, b.hi)};
      }
      case FK::Forall: {
        Iv r{1, 1};
        Iv dom = range(n.slot);
        assigned_[n.slot] = 1;
        for (int64_t v = dom.lo; v <= dom.hi; ++v) {
          val_[n.slot] = v;
          Iv a = ev(n.kids[0]);
          r.lo = std::min(r.lo, a.lo);
          r.hi = std::min(r.hi, a.hi);
          if (r.hi == 0) break;
        }
        assigned_[n.slot] = 0;
        return r;
      }
    }
    return {0, 1};
  }

  std::vector<char> assigned_;
  std::vector<int64_t> val_;

 private:
  const Problem& p_;
  Domain dom_;
};

// Backtracking over one component of free slots.
class Search {
 public:
  Search(const Problem& p, const Domain& d, std::vector<int> order, const std::vector<int>& roots)
      : p_(p), ev_(p, d), order_(std::move(order)) {
    watch_.resize(p.slotKind.size());
    defs_.resize(p.slotKind.size());
    for (int r : roots) {
      for (int s : p.rootVars[r]) watch_[s].push_back(r);
      const CN& n = p.nodes[p.roots[r]];
      if (n.k == FK::Eq) {
        for (int side = 0; side < 2; ++side) {
          const CN& v = p.nodes[n.kids[side]];
          if (v.k == FK::Var && v.slot < p.nfree) defs_[v.slot].push_back(n.kids[1 - side]);
        }
      }
    }
  }

  // Calls `emit` for each model in order; stops when it returns false.
  template <class F>
  void run(F&& emit) {
    stop_ = false;
    dfs(0, emit);
  }

  const std::vector<int64_t>& values() const { return ev_.val_; }

 private:
  template <class F>
  void dfs(size_t depth, F& emit) {
    if (stop_) return;
    if (depth == order_.size()) {
      if (!emit(ev_.val_)) stop_ = true;
      return;
    }
    int s = order_[depth];
    Iv r = ev_.range(s);
    std::optional<int64_t> forced;
    for (int t : defs_[s]) {
      if (containsSlot(t, s)) continue;
      Iv v = ev_.ev(t);
      if (v.lo == v.hi) {
        forced = v.lo;
        break;
      }
    }
    if (forced) {
      if (*forced < r.lo || *forced > r.hi) return;
      r = {*forced, *forced};
    }
    ev_.assigned_[s] = 1;
    for (int64_t v = r.lo; v <= r.hi && !stop_; ++v) {
      ev_.val_[s] = v;
      bool ok = true;
      for (int root : watch_[s]) {
        if (ev_.ev(p_.roots[root]).hi == 0) {
          ok = false;
          break;
        }
      }
      if (ok) dfs(depth + 1, emit);
    }
    ev_.assigned_[s] = 0;
  }

  bool containsSlot(int node, int slot) const {
    const CN& n = p_.nodes[node];
    if (n.k == FK::Var) return n.slot == slot;
    for (int k : n.kids)
      if (containsSlot(k, slot)) return true;
    return false;
  }

  const Problem& p_;
  Evaluator ev_;
  std::vector<int> order_;
  std::vector<std::vector<int>> watch_;
  std::vector<std::vector<int>> defs_;
  bool stop_ = false;
};

std::mutex gMu;
std::unordered_map<std::string, bool> gSat;
std::unordered_map<std::string, std::shared_ptr<const std::vector<std::vector<Model>>>> gEnum;
SolverStats gStats;

std::string cacheKey(const std::vector<Formula>& conj, const Domain& d, const std::string& tag) {
  std::vector<const std::string*> ks;
  for (auto& f : conj) ks.push_back(&f->key);
  std::sort(ks.begin(), ks.end(), [](auto a, auto b) { return *a < *b; });
  std::string k = tag + std::to_string(d.lo) + "," + std::to_string(d.hi);
  for (auto* s : ks) {
    k += '\x01';
    k += *s;
  }
  return k;
}

// Flattens, sort-checks and drops trivial conjuncts. Returns false if trivially unsat.
bool prepare(const std::vector<Formula>& in, std::vector<Formula>& out) {
  VarSorts vs;
  for (auto& f : in) {
    if (sortOf(f).k != Sort::K::Bool) throw SortError("non-boolean conjunct: " + f->key);
    collectFreeVars(f, vs);
    for (auto& c : conjuncts(f)) {
      if (isFalse(c)) return false;
      out.push_back(c);
    }
  }
  return true;
}

// Eliminates x == t conjuncts by substitution, adding range constraints for t.
bool eliminateEqualities(std::vector<Formula>& cs, const Domain& d) {
  for (bool progress = true; progress;) {
    progress = false;
    for (size_t i = 0; i < cs.size(); ++i) {
      const Formula& c = cs[i];
      if (c->k != FK::Eq) continue;
      for (int side = 0; side < 2; ++side) {
        const Formula& v = c->kids[side];
        const Formula& t = c->kids[1 - side];
        if (v->k != FK::Var || mentions(t, v->name)) continue;
        std::string x = v->name;
        Sort xs = v->sort;
        std::vector<Formula> next;
        std::map<std::string, Formula> sub{{x, t}};
        for (size_t j = 0; j < cs.size(); ++j) {
          if (j == i) continue;
          Formula g = substitute(cs[j], sub);
          for (auto& gc : conjuncts(g)) {
            if (isFalse(gc)) return false;
            next.push_back(gc);
          }
        }
        if (xs.isInt() && t->k != FK::Var) {
          for (auto& b : {mkLe(mkInt(d.lo), t), mkLe(t, mkInt(d.hi))}) {
            if (isFalse(b)) return false;
            if (!isTrue(b)) next.push_back(b);
          }
        }
        cs = std::move(next);
        progress = true;
        break;
      }
      if (progress) break;
    }
  }
  return true;
}

Problem compileAll(const std::vector<Formula>& cs) {
  Problem p;
  Compiler comp(p);
  // Register free variables first, in name order, so they occupy the low slots.
  VarSorts vs;
  for (auto& c : cs) collectFreeVars(c, vs);
  for (auto& [n, s] : vs) {
    if (s.k == Sort::K::Arrow) throw UnsupportedTheory("variable of arrow sort: " + n);
    comp.freeSlot(n, s.k);
  }
  p.nfree = static_cast<int>(vs.size());
  for (auto& c : cs) {
    std::map<std::string, int> bound;
    std::set<int> vars;
    p.roots.push_back(comp.compile(c, bound, vars));
    p.rootVars.emplace_back(vars.begin(), vars.end());
  }
  return p;
}

struct Components {
  std::vector<std::vector<int>> slots;  // free slots per component, ascending
  std::vector<std::vector<int>> roots;
  std::vector<int> closedRoots;
};

Components split(const Problem& p) {
  std::vector<int> parent(p.nfree);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  for (auto& vs : p.rootVars)
    for (size_t i = 1; i < vs.size(); ++i) parent[find(vs[i])] = find(vs[0]);
  std::map<int, int> compOf;
  Components c;
  for (int s = 0; s < p.nfree; ++s) {
    int r = find(s);
    auto it = compOf.find(r);
    if (it == compOf.end()) {
      it = compOf.emplace(r, static_cast<int>(c.slots.size())).first;
      c.slots.emplace_back();
      c.roots.emplace_back();
    }
    c.slots[it->second].push_back(s);
  }
  for (size_t r = 0; r < p.roots.size(); ++r) {
    if (p.rootVars[r].empty()) c.closedRoots.push_back(static_cast<int>(r));
    else c.roots[compOf[find(p.rootVars[r][0])]].push_back(static_cast<int>(r));
  }
  return c;
}

// Greedy order: prefer variables most connected to those already chosen.
std::vector<int> feasibilityOrder(const Problem& p, const std::vector<int>& slots, const std::vector<int>& roots) {
  std::map<int, int> degree;
  for (int r : roots)
    for (int s : p.rootVars[r]) degree[s]++;
  std::vector<int> order;
  std::set<int> chosen;
  while (order.size() < slots.size()) {
    int best = -1;
    std::pair<int, int> bestScore{-1, -1};
    for (int s : slots) {
      if (chosen.count(s)) continue;
      int link = 0;
      for (int r : roots) {
        const auto& vs = p.rootVars[r];
        if (std::find(vs.begin(), vs.end(), s) == vs.end()) continue;
        for (int o : vs)
          if (chosen.count(o)) {
            ++link;
            break;
          }
      }
      std::pair<int, int> score{link, degree[s]};
      if (score > bestScore) {
        bestScore = score;
        best = s;
      }
    }
    chosen.insert(best);
    order.push_back(best);
  }
  return order;
}

bool closedRootsHold(const Problem& p, const Domain& d, const std::vector<int>& closed) {
  Evaluator ev(p, d);
  for (int r : closed)
    if (ev.ev(p.roots[r]).lo != 1) return false;
  return true;
}

bool solveSat(std::vector<Formula> cs, const Domain& d) {
  if (!eliminateEqualities(cs, d)) return false;
  Problem p = compileAll(cs);
  Components comps = split(p);
  if (!closedRootsHold(p, d, comps.closedRoots)) return false;
  for (size_t i = 0; i < comps.slots.size(); ++i) {
    Search s(p, d, feasibilityOrder(p, comps.slots[i], comps.roots[i]), comps.roots[i]);
    bool found = false;
    s.run([&](const std::vector<int64_t>&) {
      found = true;
      return false;
    });
    if (!found) return false;
  }
  return true;
}

Value toValue(Sort::K k, int64_t v) {
  switch (k) {
    case Sort::K::Unit: return Value::unit();
    case Sort::K::Bool: return Value::boolean(v != 0);
    default: return Value::integer(v);
  }
}

std::optional<std::vector<std::vector<Model>>> solveEnum(const std::vector<Formula>& cs, size_t limit,
                                                         const Domain& d, bool splitComponents) {
  Problem p = compileAll(cs);
  Components comps = split(p);
  if (!closedRootsHold(p, d, comps.closedRoots)) return std::nullopt;
  if (!splitComponents && comps.slots.size() > 1) {
    std::vector<int> all, roots;
    for (auto& s : comps.slots) all.insert(all.end(), s.begin(), s.end());
    for (auto& r : comps.roots) roots.insert(roots.end(), r.begin(), r.end());
    std::sort(all.begin(), all.end());
    comps.slots = {all};
    comps.roots = {roots};
  }
  std::vector<std::vector<Model>> out;
  for (size_t i = 0; i < comps.slots.size(); ++i) {
    const auto& order = comps.slots[i];  // slots are allocated in name order
    Search s(p, d, order, comps.roots[i]);
    std::vector<Model> models;
    s.run([&](const std::vector<int64_t>& vals) {
      Model m;
      for (int slot : order) m.emplace(p.slotName[slot], toValue(p.slotKind[slot], vals[slot]));
      models.push_back(std::move(m));
      return models.size() < limit;
    });
    if (models.empty()) return std::nullopt;
    out.push_back(std::move(models));
  }
  return out;
}

void trimCaches() {
  if (gSat.size() > 2000000) gSat.clear();
  if (gEnum.size() > 200000) gEnum.clear();
}

}  // namespace

bool isSat(const std::vector<Formula>& conj, const Domain& dom) {
  std::vector<Formula> cs;
  if (!prepare(conj, cs)) return false;
  if (cs.empty()) return true;
  std::string key = cacheKey(cs, dom, "s");
  {
    std::lock_guard<std::mutex> lk(gMu);
    gStats.queries++;
    auto it = gSat.find(key);
    if (it != gSat.end()) {
      gStats.cacheHits++;
      return it->second;
    }
  }
  bool r = solveSat(cs, dom);
  std::lock_guard<std::mutex> lk(gMu);
  trimCaches();
  gSat.emplace(std::move(key), r);
  return r;
}

bool isSat(const Formula& f, const Domain& dom) { return isSat(std::vector<Formula>{f}, dom); }

bool entails(const std::vector<Formula>& hyps, const Formula& c, const Domain& dom) {
  std::vector<Formula> q = hyps;
  q.push_back(mkNot(c));
  return !isSat(q, dom);
}

bool isValid(const Formula& f, const Domain& dom) { return !isSat(mkNot(f), dom); }

namespace {

std::shared_ptr<const std::vector<std::vector<Model>>> cachedEnum(const std::vector<Formula>& conj, size_t limit,
                                                                  const Domain& dom, bool byComponent) {
  std::vector<Formula> cs;
  if (!prepare(conj, cs)) return nullptr;
  std::string key = cacheKey(cs, dom, (byComponent ? "c" : "e") + std::to_string(limit) + ":");
  {
    std::lock_guard<std::mutex> lk(gMu);
    gStats.queries++;
    auto it = gEnum.find(key);
    if (it != gEnum.end()) {
      gStats.cacheHits++;
      return it->second;
    }
  }
  auto r = solveEnum(cs, limit, dom, byComponent);
  std::shared_ptr<const std::vector<std::vector<Model>>> val;
  if (r) val = std::make_shared<const std::vector<std::vector<Model>>>(std::move(*r));
  std::lock_guard<std::mutex> lk(gMu);
  trimCaches();
  gEnum.emplace(std::move(key), val);
  return val;
}

}  // namespace

std::optional<Model> findWitness(const std::vector<Formula>& conj, const Domain& dom) {
  auto r = cachedEnum(conj, 1, dom, true);
  if (!r) return std::nullopt;
  Model m;
  for (auto& comp : *r) m.insert(comp[0].begin(), comp[0].end());
  return m;
}

std::vector<Model> enumerateModels(const std::vector<Formula>& conj, size_t limit, const Domain& dom) {
  auto r = cachedEnum(conj, limit, dom, false);
  if (!r) return {};
  if (r->empty()) return {Model{}};
  return (*r)[0];
}

std::optional<std::vector<std::vector<Model>>> enumerateByComponent(const std::vector<Formula>& conj, size_t limit,
                                                                    const Domain& dom) {
  auto r = cachedEnum(conj, limit, dom, true);
  if (!r) return std::nullopt;
  return *r;
}

void clearSolverCache() {
  std::lock_guard<std::mutex> lk(gMu);
  gSat.clear();
  gEnum.clear();
}

SolverStats solverStats() {
  std::lock_guard<std::mutex> lk(gMu);
  return gStats;
}

}  // namespace uhat
