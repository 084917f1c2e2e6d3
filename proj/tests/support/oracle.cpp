#include "oracle.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace oracle {

using namespace uhat;

namespace {

std::vector<Value> valuesOf(const Sort& s, const Domain& dom) {
  std::vector<Value> out;
  switch (s.k) {
    case Sort::K::Unit: out.push_back(Value::unit()); break;
    case Sort::K::Bool:
      out.push_back(Value::boolean(false));
      out.push_back(Value::boolean(true));
      break;
    case Sort::K::Int:
      for (int64_t v = dom.lo; v <= dom.hi; ++v) out.push_back(Value::integer(v));
      break;
    case Sort::K::Arrow: break;
  }
  return out;
}

}  // namespace

std::vector<Event> alphabet(const OpTable& ops, const Domain& dom) {
  std::vector<Event> out;
  for (auto& [name, op] : ops) {
    if (op.kind == OpKind::Pure) continue;
    std::vector<std::vector<Value>> tuples{{}};
    for (size_t i = 0; i < op.payloadSize(); ++i) {
      std::vector<std::vector<Value>> next;
      for (auto& t : tuples)
        for (auto& v : valuesOf(op.payloadSort(i), dom)) {
          next.push_back(t);
          next.back().push_back(v);
        }
      tuples = std::move(next);
    }
    for (auto& t : tuples) {
      Event e;
      e.op = name;
      e.ghost = op.ghost();
      e.args.assign(t.begin(), t.end() - 1);
      e.ret = t.back();
      out.push_back(e);
    }
  }
  return out;
}

Derivatives::Derivatives(std::vector<Event> letters, Model sigma, Domain dom)
    : letters_(std::move(letters)), sigma_(std::move(sigma)), dom_(dom) {
  empty_ = intern(Node{K::Empty, {}, {}, false});
  eps_ = intern(Node{K::Eps, {}, {}, true});
}

int Derivatives::intern(Node n) {
  std::string key = std::to_string(static_cast<int>(n.k)) + ":";
  for (int k : n.kids) key += std::to_string(k) + ",";
  for (bool b : n.set) key += b ? '1' : '0';
  auto it = index_.find(key);
  if (it != index_.end()) return it->second;
  switch (n.k) {
    case K::Empty:
    case K::Letters: n.nullable = false; break;
    case K::Eps:
    case K::Star: n.nullable = true; break;
    case K::Or:
      n.nullable = std::any_of(n.kids.begin(), n.kids.end(), [&](int k) { return nodes_[k].nullable; });
      break;
    case K::And:
    case K::Concat:
      n.nullable = std::all_of(n.kids.begin(), n.kids.end(), [&](int k) { return nodes_[k].nullable; });
      break;
    case K::Not: n.nullable = !nodes_[n.kids[0]].nullable; break;
  }
  nodes_.push_back(std::move(n));
  int id = static_cast<int>(nodes_.size() - 1);
  index_.emplace(key, id);
  return id;
}

int Derivatives::letters(std::vector<bool> set) {
  if (std::none_of(set.begin(), set.end(), [](bool b) { return b; })) return empty_;
  return intern(Node{K::Letters, {}, std::move(set), false});
}

int Derivatives::mkOr(std::vector<int> xs) {
  std::set<int> flat;
  for (int x : xs) {
    if (nodes_[x].k == K::Or) flat.insert(nodes_[x].kids.begin(), nodes_[x].kids.end());
    else if (x != empty_) flat.insert(x);
  }
  if (flat.empty()) return empty_;
  if (flat.size() == 1) return *flat.begin();
  return intern(Node{K::Or, {flat.begin(), flat.end()}, {}, false});
}

int Derivatives::mkAnd(std::vector<int> xs) {
  std::set<int> flat;
  for (int x : xs) {
    if (x == empty_) return empty_;
    if (nodes_[x].k == K::And) flat.insert(nodes_[x].kids.begin(), nodes_[x].kids.end());
    else flat.insert(x);
  }
  if (flat.size() == 1) return *flat.begin();
  return intern(Node{K::And, {flat.begin(), flat.end()}, {}, false});
}

int Derivatives::mkConcat(std::vector<int> xs) {
  std::vector<int> flat;
  for (int x : xs) {
    if (x == empty_) return empty_;
    if (x == eps_) continue;
    if (nodes_[x].k == K::Concat) flat.insert(flat.end(), nodes_[x].kids.begin(), nodes_[x].kids.end());
    else flat.push_back(x);
  }
  if (flat.empty()) return eps_;
  if (flat.size() == 1) return flat[0];
  return intern(Node{K::Concat, std::move(flat), {}, false});
}

int Derivatives::mkStar(int x) {
  if (x == empty_ || x == eps_) return eps_;
  if (nodes_[x].k == K::Star) return x;
  return intern(Node{K::Star, {x}, {}, true});
}

int Derivatives::mkNot(int x) {
  if (nodes_[x].k == K::Not) return nodes_[x].kids[0];
  return intern(Node{K::Not, {x}, {}, false});
}

bool Derivatives::letterMatches(const Event& e, const SymEvent& s) const {
  if (e.op != s.op || e.args.size() != s.arity()) return false;
  Model m = sigma_;
  for (size_t i = 0; i < e.args.size(); ++i) m["_" + std::to_string(i)] = e.args[i];
  m["_" + std::to_string(e.args.size())] = e.ret;
  return eval(s.phi, m, dom_).asBool();
}

int Derivatives::compile(Regex r) {
  std::vector<int> kids;
  for (Regex k : r->kids) kids.push_back(compile(k));
  switch (r->k) {
    case RK::Empty: return empty_;
    case RK::Eps: return eps_;
    case RK::Any: return letters(std::vector<bool>(letters_.size(), true));
    case RK::Event: {
      std::vector<bool> set(letters_.size());
      for (size_t i = 0; i < letters_.size(); ++i) set[i] = letterMatches(letters_[i], r->ev);
      return letters(std::move(set));
    }
    case RK::Or: return mkOr(kids);
    case RK::And: return mkAnd(kids);
    case RK::Concat: return mkConcat(kids);
    case RK::Star: return mkStar(kids[0]);
    case RK::Not: return mkNot(kids[0]);
  }
  return empty_;
}

int Derivatives::derive(int state, size_t letter) {
  auto key = std::make_pair(state, letter);
  auto it = memo_.find(key);
  if (it != memo_.end()) return it->second;
  Node n = nodes_[state];
  int out = empty_;
  switch (n.k) {
    case K::Empty:
    case K::Eps: out = empty_; break;
    case K::Letters: out = n.set[letter] ? eps_ : empty_; break;
    case K::Or:
    case K::And: {
      std::vector<int> ds;
      for (int k : n.kids) ds.push_back(derive(k, letter));
      out = n.k == K::Or ? mkOr(ds) : mkAnd(ds);
      break;
    }
    case K::Concat: {
      std::vector<int> alts;
      for (size_t i = 0; i < n.kids.size(); ++i) {
        std::vector<int> rest{derive(n.kids[i], letter)};
        rest.insert(rest.end(), n.kids.begin() + static_cast<long>(i) + 1, n.kids.end());
        alts.push_back(mkConcat(rest));
        if (!nodes_[n.kids[i]].nullable) break;
      }
      out = mkOr(alts);
      break;
    }
    case K::Star: out = mkConcat({derive(n.kids[0], letter), state}); break;
    case K::Not: out = mkNot(derive(n.kids[0], letter)); break;
  }
  memo_.emplace(key, out);
  return out;
}

bool Derivatives::accepts(int state, const Trace& t) {
  for (auto& e : t) {
    auto it = std::find(letters_.begin(), letters_.end(), e);
    if (it == letters_.end()) return false;
    state = derive(state, static_cast<size_t>(it - letters_.begin()));
  }
  return nullable(state);
}

std::optional<bool> Derivatives::empty(int state, size_t cap) {
  std::set<int> seen{state};
  std::deque<int> work{state};
  while (!work.empty()) {
    int s = work.front();
    work.pop_front();
    if (nullable(s)) return false;
    for (size_t l = 0; l < letters_.size(); ++l) {
      int d = derive(s, l);
      if (seen.insert(d).second) {
        if (seen.size() > cap) return std::nullopt;
        work.push_back(d);
      }
    }
  }
  return true;
}

std::optional<Trace> Derivatives::disagreement(int a, int b, int maxLen) {
  struct Item {
    int a, b;
    Trace t;
  };
  std::set<std::pair<int, int>> seen{{a, b}};
  std::deque<Item> work{{a, b, {}}};
  while (!work.empty()) {
    Item it = work.front();
    work.pop_front();
    if (nullable(it.a) != nullable(it.b)) return it.t;
    if (static_cast<int>(it.t.size()) == maxLen) continue;
    for (size_t l = 0; l < letters_.size(); ++l) {
      int da = derive(it.a, l), db = derive(it.b, l);
      if (!seen.insert({da, db}).second) continue;
      Trace t = it.t;
      t.push_back(letters_[l]);
      work.push_back({da, db, std::move(t)});
    }
  }
  return std::nullopt;
}

std::vector<Trace> allTraces(const std::vector<Event>& letters, int maxLen) {
  std::vector<Trace> out{{}};
  size_t lo = 0;
  for (int len = 1; len <= maxLen; ++len) {
    size_t hi = out.size();
    for (size_t i = lo; i < hi; ++i)
      for (auto& e : letters) {
        Trace t = out[i];
        t.push_back(e);
        out.push_back(std::move(t));
      }
    lo = hi;
  }
  return out;
}

}  // namespace oracle
