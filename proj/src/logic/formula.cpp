#include <algorithm>
#include <set>
#include <unordered_set>

#include "uhat/logic.hpp"

namespace uhat {

Sort Sort::arrow(const Sort& a, const Sort& b) {
  Sort s;
  s.k = K::Arrow;
  s.dom = std::make_shared<const Sort>(a);
  s.cod = std::make_shared<const Sort>(b);
  return s;
}

std::string Sort::str() const {
  switch (k) {
    case K::Unit: return "unit";
    case K::Bool: return "bool";
    case K::Int: return label.empty() ? "int" : label;
    case K::Arrow: {
      std::string d = dom->str();
      if (dom->k == K::Arrow) d = "(" + d + ")";
      return d + " -> " + cod->str();
    }
  }
  return "?";
}

bool Sort::operator==(const Sort& o) const {
  if (k != o.k) return false;
  if (k != K::Arrow) return true;
  return *dom == *o.dom && *cod == *o.cod;
}

std::string Value::str() const {
  switch (k) {
    case K::Unit: return "()";
    case K::Bool: return i ? "true" : "false";
    case K::Int: return std::to_string(i);
  }
  return "?";
}

namespace {

int level(const FNode& n) {
  switch (n.k) {
    case FK::Forall: return 0;
    case FK::Imp: return 1;
    case FK::Or: return 2;
    case FK::And: return 3;
    case FK::Not: return 4;
    case FK::Eq:
    case FK::Lt:
    case FK::Le: return 5;
    case FK::Add:
    case FK::Sub: return 6;
    case FK::Const: return n.c.k == Value::K::Int && n.c.i < 0 ? 6 : 7;
    case FK::Var: return 7;
  }
  return 7;
}

std::string wrap(const Formula& f, int atLeast) {
  return level(*f) < atLeast ? "(" + f->key + ")" : f->key;
}

std::string computeKey(const FNode& n) {
  switch (n.k) {
    case FK::Const: return n.c.str();
    case FK::Var: return n.name;
    case FK::Add: return wrap(n.kids[0], 6) + " + " + wrap(n.kids[1], 7);
    case FK::Sub: return wrap(n.kids[0], 6) + " - " + wrap(n.kids[1], 7);
    case FK::Eq: return wrap(n.kids[0], 6) + " == " + wrap(n.kids[1], 6);
    case FK::Lt: return wrap(n.kids[0], 6) + " < " + wrap(n.kids[1], 6);
    case FK::Le: return wrap(n.kids[0], 6) + " <= " + wrap(n.kids[1], 6);
    case FK::Not: return "!" + wrap(n.kids[0], 7);
    case FK::And:
    case FK::Or: {
      std::string out;
      const char* sep = n.k == FK::And ? " && " : " || ";
      for (size_t i = 0; i < n.kids.size(); ++i) {
        if (i) out += sep;
        out += wrap(n.kids[i], n.k == FK::And ? 4 : 3);
      }
      return out;
    }
    case FK::Imp: return wrap(n.kids[0], 2) + " => " + wrap(n.kids[1], 1);
    case FK::Forall: return "forall " + n.name + ":" + n.sort.str() + ". " + n.kids[0]->key;
  }
  return "?";
}

Formula make(FK k, std::vector<Formula> kids, Value c = Value::unit(), std::string name = {},
             Sort sort = Sort::unit()) {
  auto n = std::make_shared<FNode>();
  n->k = k;
  n->c = c;
  n->name = std::move(name);
  n->sort = std::move(sort);
  n->kids = std::move(kids);
  n->key = computeKey(*n);
  return n;
}

bool isConst(const Formula& f) { return f->k == FK::Const; }
bool isIntConst(const Formula& f, int64_t v) {
  return f->k == FK::Const && f->c.k == Value::K::Int && f->c.i == v;
}

}  // namespace

Formula mkConst(const Value& v) { return make(FK::Const, {}, v); }
Formula mkInt(int64_t v) { return mkConst(Value::integer(v)); }
Formula mkBool(bool b) { return mkConst(Value::boolean(b)); }
Formula mkUnit() { return mkConst(Value::unit()); }
Formula mkTrue() {
  static const Formula t = mkBool(true);
  return t;
}
Formula mkFalse() {
  static const Formula f = mkBool(false);
  return f;
}
Formula mkVar(const std::string& name, const Sort& s) { return make(FK::Var, {}, Value::unit(), name, s); }

bool isTrue(const Formula& f) { return f->k == FK::Const && f->c.k == Value::K::Bool && f->c.i; }
bool isFalse(const Formula& f) { return f->k == FK::Const && f->c.k == Value::K::Bool && !f->c.i; }

static bool isIntLit(const Formula& f) { return isConst(f) && f->c.k == Value::K::Int; }

Formula mkAdd(const Formula& a, const Formula& b) {
  if (isIntLit(a) && isIntLit(b)) return mkInt(a->c.i + b->c.i);
  if (isIntConst(b, 0)) return a;
  if (isIntConst(a, 0)) return b;
  return make(FK::Add, {a, b});
}

Formula mkSub(const Formula& a, const Formula& b) {
  if (isIntLit(a) && isIntLit(b)) return mkInt(a->c.i - b->c.i);
  if (isIntConst(b, 0)) return a;
  if (a->key == b->key) return mkInt(0);
  return make(FK::Sub, {a, b});
}

Formula mkEq(const Formula& a, const Formula& b) {
  if (isConst(a) && isConst(b)) return mkBool(a->c == b->c);
  if (a->key == b->key) return mkTrue();
  return make(FK::Eq, {a, b});
}

Formula mkLt(const Formula& a, const Formula& b) {
  if (isConst(a) && isConst(b)) return mkBool(a->c.i < b->c.i);
  if (a->key == b->key) return mkFalse();
  return make(FK::Lt, {a, b});
}

Formula mkLe(const Formula& a, const Formula& b) {
  if (isConst(a) && isConst(b)) return mkBool(a->c.i <= b->c.i);
  if (a->key == b->key) return mkTrue();
  return make(FK::Le, {a, b});
}

Formula mkNot(const Formula& a) {
  if (a->k == FK::Const) return mkBool(!a->c.asBool());
  if (a->k == FK::Not) return a->kids[0];
  return make(FK::Not, {a});
}

namespace {

Formula mkJunction(FK k, const std::vector<Formula>& xs) {
  const bool isAnd = k == FK::And;
  std::vector<Formula> flat;
  std::unordered_set<std::string> seen;
  std::function<bool(const Formula&)> add = [&](const Formula& f) -> bool {
    if (f->k == k) {
      for (auto& c : f->kids)
        if (!add(c)) return false;
      return true;
    }
    if (f->k == FK::Const) return f->c.asBool() == isAnd;  // unit for the junction
    if (seen.insert(f->key).second) flat.push_back(f);
    return true;
  };
  for (auto& x : xs)
    if (!add(x)) return mkBool(!isAnd);
  for (auto& f : flat) {
    std::string neg = f->k == FK::Not ? f->kids[0]->key : mkNot(f)->key;
    if (seen.count(neg)) return mkBool(!isAnd);
  }
  if (flat.empty()) return mkBool(isAnd);
  if (flat.size() == 1) return flat[0];
  return make(k, std::move(flat));
}

}  // namespace

Formula mkAnd(const std::vector<Formula>& xs) { return mkJunction(FK::And, xs); }
Formula mkAnd(const Formula& a, const Formula& b) { return mkAnd(std::vector<Formula>{a, b}); }
Formula mkOr(const std::vector<Formula>& xs) { return mkJunction(FK::Or, xs); }
Formula mkOr(const Formula& a, const Formula& b) { return mkOr(std::vector<Formula>{a, b}); }

Formula mkImp(const Formula& a, const Formula& b) {
  if (isTrue(a)) return b;
  if (isFalse(a) || isTrue(b)) return mkTrue();
  if (isFalse(b)) return mkNot(a);
  if (a->key == b->key) return mkTrue();
  return make(FK::Imp, {a, b});
}

Formula mkForall(const std::string& x, const Sort& s, const Formula& body) {
  if (body->k == FK::Const || !mentions(body, x)) return body;
  return make(FK::Forall, {body}, Value::unit(), x, s);
}

Formula mkExists(const std::string& x, const Sort& s, const Formula& body) {
  return mkNot(mkForall(x, s, mkNot(body)));
}

Sort sortOf(const Formula& f) {
  auto requireInt = [](const Sort& s, const FNode& n) {
    if (!s.isInt()) throw SortError("expected int operand in " + n.key);
  };
  auto requireBool = [](const Sort& s, const FNode& n) {
    if (s.k != Sort::K::Bool) throw SortError("expected bool operand in " + n.key);
  };
  switch (f->k) {
    case FK::Const:
      switch (f->c.k) {
        case Value::K::Unit: return Sort::unit();
        case Value::K::Bool: return Sort::boolean();
        case Value::K::Int: return Sort::integer();
      }
      break;
    case FK::Var: return f->sort;
    case FK::Add:
    case FK::Sub:
      requireInt(sortOf(f->kids[0]), *f);
      requireInt(sortOf(f->kids[1]), *f);
      return Sort::integer();
    case FK::Eq: {
      Sort a = sortOf(f->kids[0]), b = sortOf(f->kids[1]);
      if (a != b || !a.isBase()) throw SortError("mismatched equality in " + f->key);
      return Sort::boolean();
    }
    case FK::Lt:
    case FK::Le:
      requireInt(sortOf(f->kids[0]), *f);
      requireInt(sortOf(f->kids[1]), *f);
      return Sort::boolean();
    case FK::Not:
    case FK::And:
    case FK::Or:
    case FK::Imp:
    case FK::Forall:
      for (auto& c : f->kids) requireBool(sortOf(c), *f);
      return Sort::boolean();
  }
  throw SortError("bad formula");
}

void collectFreeVars(const Formula& f, VarSorts& out) {
  std::function<void(const Formula&, std::set<std::string>&)> go = [&](const Formula& g,
                                                                       std::set<std::string>& bound) {
    if (g->k == FK::Var) {
      if (bound.count(g->name)) return;
      auto it = out.find(g->name);
      if (it == out.end()) {
        out.emplace(g->name, g->sort);
      } else if (it->second != g->sort) {
        throw SortError("variable " + g->name + " used at sorts " + it->second.str() + " and " +
                        g->sort.str());
      }
      return;
    }
    if (g->k == FK::Forall) {
      bool fresh = bound.insert(g->name).second;
      go(g->kids[0], bound);
      if (fresh) bound.erase(g->name);
      return;
    }
    for (auto& c : g->kids) go(c, bound);
  };
  std::set<std::string> bound;
  go(f, bound);
}

VarSorts freeVars(const Formula& f) {
  VarSorts out;
  collectFreeVars(f, out);
  return out;
}

bool mentions(const Formula& f, const std::string& x) {
  if (f->k == FK::Var) return f->name == x;
  if (f->k == FK::Forall && f->name == x) return false;
  for (auto& c : f->kids)
    if (mentions(c, x)) return true;
  return false;
}

std::vector<Formula> conjuncts(const Formula& f) {
  if (f->k == FK::And) return f->kids;
  if (isTrue(f)) return {};
  return {f};
}

namespace {

Formula rebuild(const Formula& f, std::vector<Formula> kids) {
  switch (f->k) {
    case FK::Add: return mkAdd(kids[0], kids[1]);
    case FK::Sub: return mkSub(kids[0], kids[1]);
    case FK::Eq: return mkEq(kids[0], kids[1]);
    case FK::Lt: return mkLt(kids[0], kids[1]);
    case FK::Le: return mkLe(kids[0], kids[1]);
    case FK::Not: return mkNot(kids[0]);
    case FK::And: return mkAnd(kids);
    case FK::Or: return mkOr(kids);
    case FK::Imp: return mkImp(kids[0], kids[1]);
    default: return f;
  }
}

}  // namespace

Formula substitute(const Formula& f, const std::map<std::string, Formula>& m) {
  if (m.empty()) return f;
  switch (f->k) {
    case FK::Const: return f;
    case FK::Var: {
      auto it = m.find(f->name);
      return it == m.end() ? f : it->second;
    }
    case FK::Forall: {
      auto inner = m;
      inner.erase(f->name);
      std::string x = f->name;
      Formula body = f->kids[0];
      bool capture = false;
      for (auto& [k, v] : inner)
        if (mentions(body, k) && mentions(v, x)) capture = true;
      if (capture) {
        int i = 0;
        std::string y;
        do {
          y = x + "'" + std::to_string(i++);
        } while (mentions(body, y) || std::any_of(inner.begin(), inner.end(), [&](auto& kv) {
                   return mentions(kv.second, y);
                 }));
        body = substitute(body, {{x, mkVar(y, f->sort)}});
        x = y;
      }
      return mkForall(x, f->sort, substitute(body, inner));
    }
    default: {
      std::vector<Formula> kids;
      kids.reserve(f->kids.size());
      bool changed = false;
      for (auto& c : f->kids) {
        kids.push_back(substitute(c, m));
        changed |= kids.back() != c;
      }
      return changed ? rebuild(f, std::move(kids)) : f;
    }
  }
}

Formula renameVars(const Formula& f, const std::map<std::string, std::string>& m) {
  if (m.empty()) return f;
  std::map<std::string, Formula> sub;
  VarSorts fv = freeVars(f);
  for (auto& [from, to] : m) {
    auto it = fv.find(from);
    if (it != fv.end()) sub.emplace(from, mkVar(to, it->second));
  }
  return substitute(f, sub);
}

Formula substValues(const Formula& f, const Model& m) {
  std::map<std::string, Formula> sub;
  for (auto& [k, v] : m) sub.emplace(k, mkConst(v));
  return substitute(f, sub);
}

Value eval(const Formula& f, const Model& env, const Domain& dom) {
  switch (f->k) {
    case FK::Const: return f->c;
    case FK::Var: {
      auto it = env.find(f->name);
      if (it == env.end()) throw SortError("unbound variable " + f->name);
      return it->second;
    }
    case FK::Add: return Value::integer(eval(f->kids[0], env, dom).i + eval(f->kids[1], env, dom).i);
    case FK::Sub: return Value::integer(eval(f->kids[0], env, dom).i - eval(f->kids[1], env, dom).i);
    case FK::Eq: return Value::boolean(eval(f->kids[0], env, dom) == eval(f->kids[1], env, dom));
    case FK::Lt: return Value::boolean(eval(f->kids[0], env, dom).i < eval(f->kids[1], env, dom).i);
    case FK::Le: return Value::boolean(eval(f->kids[0], env, dom).i <= eval(f->kids[1], env, dom).i);
    case FK::Not: return Value::boolean(!eval(f->kids[0], env, dom).asBool());
    case FK::And:
      for (auto& c : f->kids)
        if (!eval(c, env, dom).asBool()) return Value::boolean(false);
      return Value::boolean(true);
    case FK::Or:
      for (auto& c : f->kids)
        if (eval(c, env, dom).asBool()) return Value::boolean(true);
      return Value::boolean(false);
    case FK::Imp:
      return Value::boolean(!eval(f->kids[0], env, dom).asBool() || eval(f->kids[1], env, dom).asBool());
    case FK::Forall: {
      Model inner = env;
      std::vector<Value> vals;
      switch (f->sort.k) {
        case Sort::K::Unit: vals = {Value::unit()}; break;
        case Sort::K::Bool: vals = {Value::boolean(false), Value::boolean(true)}; break;
        case Sort::K::Int:
          for (int64_t v = dom.lo; v <= dom.hi; ++v) vals.push_back(Value::integer(v));
          break;
        case Sort::K::Arrow: throw UnsupportedTheory("quantifier over arrow sort");
      }
      for (auto& v : vals) {
        inner[f->name] = v;
        if (!eval(f->kids[0], inner, dom).asBool()) return Value::boolean(false);
      }
      return Value::boolean(true);
    }
  }
  throw InternalError("eval");
}

std::string printFormula(const Formula& f) { return f->key; }

}  // namespace uhat
