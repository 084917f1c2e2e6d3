#include <algorithm>
#include <mutex>
#include <unordered_map>

#include "uhat/sre.hpp"

namespace uhat {

std::string payloadName(size_t i) { return "_" + std::to_string(i); }

bool isPayloadName(const std::string& n) {
  if (n.size() < 2 || n[0] != '_') return false;
  return std::all_of(n.begin() + 1, n.end(), [](char c) { return c >= '0' && c <= '9'; });
}

SymEvent makeEvent(const OpInfo& op, const Formula& phi) {
  SymEvent e;
  e.op = op.name;
  e.ghost = op.ghost();
  e.payload = op.params;
  e.payload.push_back(op.ret);
  e.phi = phi;
  return e;
}

namespace {

struct Table {
  std::mutex mu;
  std::unordered_map<std::string, std::unique_ptr<RNode>> nodes;
  uint32_t next = 0;
};

Table& table() {
  static Table t;
  return t;
}

bool computeNullable(RK k, const std::vector<Regex>& kids) {
  switch (k) {
    case RK::Empty:
    case RK::Event:
    case RK::Any: return false;
    case RK::Eps:
    case RK::Star: return true;
    case RK::Or: return std::any_of(kids.begin(), kids.end(), [](Regex r) { return r->nullable; });
    case RK::And:
    case RK::Concat: return std::all_of(kids.begin(), kids.end(), [](Regex r) { return r->nullable; });
    case RK::Not: return !kids[0]->nullable;
  }
  return false;
}

Regex intern(RK k, const SymEvent* ev, std::vector<Regex> kids) {
  std::string key(1, static_cast<char>('A' + static_cast<int>(k)));
  if (ev) {
    key += ev->op;
    key += '\x02';
    key += ev->phi->key;
  }
  for (Regex r : kids) {
    key += '\x03';
    key += std::to_string(r->id);
  }
  Table& t = table();
  std::lock_guard<std::mutex> lk(t.mu);
  auto it = t.nodes.find(key);
  if (it != t.nodes.end()) return it->second.get();
  auto n = std::make_unique<RNode>();
  n->k = k;
  if (ev) n->ev = *ev;
  n->nullable = computeNullable(k, kids);
  n->kids = std::move(kids);
  n->id = t.next++;
  Regex out = n.get();
  t.nodes.emplace(std::move(key), std::move(n));
  return out;
}

void sortUnique(std::vector<Regex>& xs) {
  std::sort(xs.begin(), xs.end(), [](Regex a, Regex b) { return a->id < b->id; });
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
}

}  // namespace

Regex reEmpty() {
  static Regex r = intern(RK::Empty, nullptr, {});
  return r;
}

Regex reEps() {
  static Regex r = intern(RK::Eps, nullptr, {});
  return r;
}

Regex reAny() {
  static Regex r = intern(RK::Any, nullptr, {});
  return r;
}

Regex reUniverse() {
  static Regex r = intern(RK::Star, nullptr, {reAny()});
  return r;
}

Regex reEvent(const SymEvent& e) {
  if (isFalse(e.phi)) return reEmpty();
  return intern(RK::Event, &e, {});
}

Regex reEvent(const OpInfo& op, const Formula& phi) { return reEvent(makeEvent(op, phi)); }

Regex reOr(const std::vector<Regex>& xs) {
  std::vector<Regex> flat;
  for (Regex x : xs) {
    if (x->k == RK::Or) flat.insert(flat.end(), x->kids.begin(), x->kids.end());
    else if (x->k != RK::Empty) flat.push_back(x);
  }
  for (Regex x : flat)
    if (x == reUniverse()) return x;
  sortUnique(flat);
  if (flat.empty()) return reEmpty();
  if (flat.size() == 1) return flat[0];
  return intern(RK::Or, nullptr, std::move(flat));
}

Regex reOr(Regex a, Regex b) { return reOr(std::vector<Regex>{a, b}); }

Regex reAnd(const std::vector<Regex>& xs) {
  std::vector<Regex> flat;
  for (Regex x : xs) {
    if (x->k == RK::And) flat.insert(flat.end(), x->kids.begin(), x->kids.end());
    else if (x != reUniverse()) flat.push_back(x);
  }
  for (Regex x : flat)
    if (x->k == RK::Empty) return x;
  sortUnique(flat);
  for (Regex x : flat)
    if (x->k == RK::Not && std::binary_search(flat.begin(), flat.end(), x->kids[0],
                                               [](Regex a, Regex b) { return a->id < b->id; }))
      return reEmpty();
  if (flat.empty()) return reUniverse();
  if (flat.size() == 1) return flat[0];
  return intern(RK::And, nullptr, std::move(flat));
}

Regex reAnd(Regex a, Regex b) { return reAnd(std::vector<Regex>{a, b}); }

Regex reConcat(const std::vector<Regex>& xs) {
  std::vector<Regex> flat;
  for (Regex x : xs) {
    if (x->k == RK::Empty) return x;
    if (x->k == RK::Eps) continue;
    const std::vector<Regex> one{x};
    const auto& parts = x->k == RK::Concat ? x->kids : one;
    for (Regex p : parts) {
      if (!flat.empty() && p->k == RK::Star && flat.back() == p) continue;
      flat.push_back(p);
    }
  }
  if (flat.empty()) return reEps();
  if (flat.size() == 1) return flat[0];
  return intern(RK::Concat, nullptr, std::move(flat));
}

Regex reConcat(Regex a, Regex b) { return reConcat(std::vector<Regex>{a, b}); }

Regex reStar(Regex a) {
  if (a->k == RK::Star) return a;
  if (a->k == RK::Eps || a->k == RK::Empty) return reEps();
  return intern(RK::Star, nullptr, {a});
}

Regex reNot(Regex a) {
  if (a->k == RK::Not) return a->kids[0];
  if (a->k == RK::Empty) return reUniverse();
  if (a == reUniverse()) return reEmpty();
  return intern(RK::Not, nullptr, {a});
}

Regex reDiff(Regex a, Regex b) { return reAnd(a, reNot(b)); }

Regex reAnyExcept(const std::vector<std::string>& excluded, const OpTable& ops) {
  std::vector<Regex> alts;
  for (auto& [name, info] : ops) {
    if (info.kind == OpKind::Pure) continue;
    if (std::find(excluded.begin(), excluded.end(), name) != excluded.end()) continue;
    alts.push_back(reEvent(info, mkTrue()));
  }
  return reOr(alts);
}

Regex reLast(const SymEvent& e, const OpTable& ops) {
  return reConcat({reUniverse(), reEvent(e), reStar(reAnyExcept({e.op}, ops))});
}

bool hasBooleanOps(Regex r) {
  if (r->k == RK::And || r->k == RK::Not) return true;
  for (Regex k : r->kids)
    if (hasBooleanOps(k)) return true;
  return false;
}

VarSorts regexFreeVars(Regex r) {
  VarSorts out;
  std::function<void(Regex)> go = [&](Regex x) {
    if (x->k == RK::Event) {
      for (auto& [n, s] : freeVars(x->ev.phi)) {
        if (isPayloadName(n)) continue;
        auto it = out.find(n);
        if (it == out.end()) out.emplace(n, s);
        else if (it->second != s) throw SortError("variable " + n + " used at two sorts");
      }
    }
    for (Regex k : x->kids) go(k);
  };
  go(r);
  return out;
}

Regex mapEvents(Regex r, const std::function<SymEvent(const SymEvent&)>& f) {
  switch (r->k) {
    case RK::Event: return reEvent(f(r->ev));
    case RK::Empty:
    case RK::Eps:
    case RK::Any: return r;
    case RK::Or:
    case RK::And:
    case RK::Concat: {
      std::vector<Regex> kids;
      for (Regex k : r->kids) kids.push_back(mapEvents(k, f));
      if (r->k == RK::Or) return reOr(kids);
      if (r->k == RK::And) return reAnd(kids);
      return reConcat(kids);
    }
    case RK::Star: return reStar(mapEvents(r->kids[0], f));
    case RK::Not: return reNot(mapEvents(r->kids[0], f));
  }
  return r;
}

Regex substRegex(Regex r, const std::map<std::string, Formula>& m) {
  if (m.empty()) return r;
  return mapEvents(r, [&](const SymEvent& e) {
    SymEvent out = e;
    out.phi = substitute(e.phi, m);
    return out;
  });
}

// --- printing ---

std::string printEvent(const SymEvent& e, const std::set<std::string>& scope) {
  std::vector<Formula> rest = conjuncts(e.phi);
  const size_t n = e.payload.size();
  std::vector<std::string> pos(n, "_");
  for (size_t k = 0; k < n; ++k) {
    const std::string pk = payloadName(k);
    for (size_t i = 0; i < rest.size(); ++i) {
      const Formula& c = rest[i];
      if (c->k != FK::Eq) continue;
      for (int side = 0; side < 2; ++side) {
        const Formula& v = c->kids[side];
        const Formula& t = c->kids[1 - side];
        if (v->k != FK::Var || v->name != pk) continue;
        bool payloadFree = true;
        for (auto& [fv, s] : freeVars(t))
          if (isPayloadName(fv)) payloadFree = false;
        if (!payloadFree) continue;
        if (t->k == FK::Var && !scope.count(t->name)) pos[k] = "(" + t->key + ")";
        else if (t->k == FK::Var || (t->k == FK::Const && t->c.i >= 0)) pos[k] = t->key;
        else pos[k] = "(" + t->key + ")";
        rest.erase(rest.begin() + static_cast<long>(i));
        goto next;
      }
    }
    next:;
  }
  Formula remaining = mkAnd(rest);
  for (size_t k = 0; k < n; ++k)
    if (pos[k] == "_" && mentions(remaining, payloadName(k))) pos[k] = payloadName(k);
  size_t shown = n;
  if (n > 0 && pos[n - 1] == "_") {
    shown = n - 1;
    if (std::all_of(pos.begin(), pos.begin() + static_cast<long>(shown), [](auto& s) { return s == "_"; }))
      shown = 0;
  }
  std::string out = "<";
  if (e.ghost) out += "~";
  out += e.op;
  for (size_t k = 0; k < shown; ++k) out += " " + pos[k];
  if (!isTrue(remaining)) out += " | " + remaining->key;
  out += ">";
  return out;
}

namespace {

int reLevel(Regex r) {
  switch (r->k) {
    case RK::Or: return 0;
    case RK::And:
    case RK::Not: return 1;
    case RK::Concat: return 2;
    case RK::Star: return 3;
    default: return 4;
  }
}

std::string pr(Regex r, int ctx, const std::set<std::string>& scope) {
  std::string s;
  switch (r->k) {
    case RK::Empty: s = "empty"; break;
    case RK::Eps: s = "eps"; break;
    case RK::Any: s = "any"; break;
    case RK::Event: s = printEvent(r->ev, scope); break;
    case RK::Or:
      for (size_t i = 0; i < r->kids.size(); ++i) s += (i ? " | " : "") + pr(r->kids[i], 1, scope);
      break;
    case RK::And:
    case RK::Not: {
      std::vector<Regex> pos, neg;
      if (r->k == RK::Not) {
        neg.push_back(r->kids[0]);
      } else {
        for (Regex k : r->kids) (k->k == RK::Not ? neg : pos).push_back(k->k == RK::Not ? k->kids[0] : k);
      }
      if (pos.empty()) s = "any*";
      for (size_t i = 0; i < pos.size(); ++i) s += (i ? " & " : "") + pr(pos[i], 2, scope);
      for (Regex n : neg) s += " \\ " + pr(n, 3, scope);
      break;
    }
    case RK::Concat:
      for (size_t i = 0; i < r->kids.size(); ++i) s += (i ? " . " : "") + pr(r->kids[i], 3, scope);
      break;
    case RK::Star: s = pr(r->kids[0], 4, scope) + "*"; break;
  }
  return reLevel(r) < ctx ? "(" + s + ")" : s;
}

}  // namespace

std::string printRegex(Regex r, const std::set<std::string>& scope) { return pr(r, 0, scope); }

// --- parsing ---

namespace {

struct ReParser {
  TokenStream& ts;
  const OpTable& ops;
  SortScope scope;

  [[noreturn]] void semantic(const Token& at, const std::string& msg) {
    throw SemanticError(std::to_string(at.line) + ":" + std::to_string(at.col) + ": " + msg);
  }

  const OpInfo& lookupOp(const Token& at, const std::string& name) {
    auto it = ops.find(name);
    if (it == ops.end() || it->second.kind == OpKind::Pure) semantic(at, "unknown operator " + name);
    return it->second;
  }

  SymEvent event() {
    ts.expectSym("<");
    bool tilde = ts.acceptSym("~");
    Token opTok = ts.peek();
    const OpInfo& op = lookupOp(opTok, ts.expectIdent());
    if (tilde && !op.ghost()) semantic(opTok, op.name + " is not a ghost operator");
    struct Pos {
      enum { Anon, Binder, Term } kind;
      std::string name;
      Formula term;
    };
    std::vector<Pos> items;
    while (!ts.atSym("|") && !ts.atSym(">")) {
      const Token& t = ts.peek();
      if (t.t == Token::T::Ident && t.text == "_") {
        ts.next();
        items.push_back({Pos::Anon, "", nullptr});
      } else if (t.t == Token::T::Ident && t.text != "true" && t.text != "false" &&
                 !(scope && scope(t.text))) {
        items.push_back({Pos::Binder, ts.next().text, nullptr});
      } else {
        items.push_back({Pos::Term, "", parseAtomTerm(ts, scope)});
      }
    }
    const size_t n = op.payloadSize();
    if (items.size() == n - 1) items.push_back({Pos::Anon, "", nullptr});
    else if (items.empty()) items.assign(n, {Pos::Anon, "", nullptr});
    if (items.size() != n)
      semantic(opTok, "operator " + op.name + " takes " + std::to_string(op.arity()) + " arguments");
    SymEvent ev = makeEvent(op, mkTrue());
    std::map<std::string, size_t> binders;
    std::vector<Formula> conj;
    for (size_t k = 0; k < n; ++k) {
      if (items[k].kind == Pos::Binder) {
        if (!binders.emplace(items[k].name, k).second) {
          // a repeated binder forces equal payloads
          conj.push_back(mkEq(ev.var(binders[items[k].name]), ev.var(k)));
        }
      } else if (items[k].kind == Pos::Term) {
        Sort ts_ = sortOf(items[k].term);
        if (ts_ != ev.payload[k]) semantic(opTok, "payload sort mismatch in " + op.name);
        conj.push_back(mkEq(ev.var(k), items[k].term));
      }
    }
    if (ts.acceptSym("|")) {
      SortScope inner = [&](const std::string& name) -> std::optional<Sort> {
        auto it = binders.find(name);
        if (it != binders.end()) return ev.payload[it->second];
        return scope ? scope(name) : std::nullopt;
      };
      Formula phi = parseFormula(ts, inner);
      try {
        if (sortOf(phi).k != Sort::K::Bool) semantic(opTok, "qualifier must be boolean");
      } catch (const SortError& e) {
        semantic(opTok, e.what());
      }
      std::map<std::string, std::string> ren;
      for (auto& [name, k] : binders) ren[name] = payloadName(k);
      conj.push_back(renameVars(phi, ren));
    }
    ts.expectSym(">");
    ev.phi = mkAnd(conj);
    return ev;
  }

  Regex atom() {
    if (ts.acceptIdent("empty")) return reEmpty();
    if (ts.acceptIdent("eps")) return reEps();
    if (ts.acceptIdent("any")) return reAny();
    if (ts.atIdent("LAST")) {
      ts.next();
      ts.expectSym("(");
      SymEvent e = event();
      ts.expectSym(")");
      return reLast(e, ops);
    }
    if (ts.atSym("<")) return reEvent(event());
    if (ts.acceptSym("(")) {
      Regex r = alt();
      ts.expectSym(")");
      return r;
    }
    ts.fail("expected regex");
  }

  Regex postfix() {
    Regex r = atom();
    while (ts.acceptSym("*")) r = reStar(r);
    return r;
  }

  Regex concat() {
    std::vector<Regex> xs{postfix()};
    while (ts.acceptSym(".")) xs.push_back(postfix());
    return reConcat(xs);
  }

  Regex diff() {
    Regex r = concat();
    while (ts.acceptSym("\\")) r = reDiff(r, concat());
    return r;
  }

  Regex inter() {
    std::vector<Regex> xs{diff()};
    while (ts.acceptSym("&")) xs.push_back(diff());
    return reAnd(xs);
  }

  Regex alt() {
    std::vector<Regex> xs{inter()};
    while (ts.acceptSym("|")) xs.push_back(inter());
    return reOr(xs);
  }
};

}  // namespace

Regex parseRegex(TokenStream& ts, const OpTable& ops, const SortScope& scope) {
  ReParser p{ts, ops, scope};
  return p.alt();
}

Regex parseRegex(const std::string& src, const OpTable& ops, const SortScope& scope) {
  TokenStream ts(tokenize(src));
  Regex r = parseRegex(ts, ops, scope);
  if (!ts.atEnd()) ts.fail("trailing input");
  return r;
}

// --- concrete denotation ---

bool eventMatches(const Event& e, const SymEvent& s, const Model& sigma, const Domain& dom) {
  if (e.op != s.op || e.args.size() != s.arity()) return false;
  Model m = sigma;
  for (size_t i = 0; i < e.args.size(); ++i) m[payloadName(i)] = e.args[i];
  m[payloadName(e.args.size())] = e.ret;
  return eval(s.phi, m, dom).asBool();
}

namespace {

using Rel = std::vector<std::vector<char>>;

Rel compose(const Rel& a, const Rel& b) {
  size_t n = a.size();
  Rel c(n, std::vector<char>(n, 0));
  for (size_t i = 0; i < n; ++i)
    for (size_t k = i; k < n; ++k)
      if (a[i][k])
        for (size_t j = k; j < n; ++j)
          if (b[k][j]) c[i][j] = 1;
  return c;
}

struct Spans {
  const Trace& t;
  const Model& sigma;
  const Domain& dom;
  std::unordered_map<uint32_t, Rel> memo;

  Rel get(Regex r) {
    auto it = memo.find(r->id);
    if (it != memo.end()) return it->second;
    size_t n = t.size() + 1;
    Rel s(n, std::vector<char>(n, 0));
    switch (r->k) {
      case RK::Empty: break;
      case RK::Eps:
        for (size_t i = 0; i < n; ++i) s[i][i] = 1;
        break;
      case RK::Any:
        for (size_t i = 0; i + 1 < n; ++i) s[i][i + 1] = 1;
        break;
      case RK::Event:
        for (size_t i = 0; i + 1 < n; ++i) s[i][i + 1] = eventMatches(t[i], r->ev, sigma, dom);
        break;
      case RK::Or:
        for (Regex k : r->kids) {
          Rel a = get(k);
          for (size_t i = 0; i < n; ++i)
            for (size_t j = i; j < n; ++j) s[i][j] |= a[i][j];
        }
        break;
      case RK::And:
        for (size_t i = 0; i < n; ++i)
          for (size_t j = i; j < n; ++j) s[i][j] = 1;
        for (Regex k : r->kids) {
          Rel a = get(k);
          for (size_t i = 0; i < n; ++i)
            for (size_t j = i; j < n; ++j) s[i][j] &= a[i][j];
        }
        break;
      case RK::Not: {
        Rel a = get(r->kids[0]);
        for (size_t i = 0; i < n; ++i)
          for (size_t j = i; j < n; ++j) s[i][j] = !a[i][j];
        break;
      }
      case RK::Concat: {
        s = get(r->kids[0]);
        for (size_t k = 1; k < r->kids.size(); ++k) s = compose(s, get(r->kids[k]));
        break;
      }
      case RK::Star: {
        Rel a = get(r->kids[0]);
        for (size_t i = 0; i < n; ++i) s[i][i] = 1;
        for (bool changed = true; changed;) {
          changed = false;
          Rel c = compose(s, a);
          for (size_t i = 0; i < n; ++i)
            for (size_t j = i; j < n; ++j)
              if (c[i][j] && !s[i][j]) s[i][j] = changed = true;
        }
        break;
      }
    }
    memo.emplace(r->id, s);
    return s;
  }
};

}  // namespace

bool member(const Trace& t, Regex r, const Model& sigma, const Domain& dom) {
  for (auto& [n, s] : regexFreeVars(r))
    if (!sigma.count(n)) throw SortError("open variable " + n);
  Spans sp{t, sigma, dom, {}};
  return sp.get(r)[0][t.size()];
}

}  // namespace uhat
