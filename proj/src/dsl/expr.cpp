#include <sstream>

#include "uhat/dsl.hpp"

namespace uhat {

namespace {

std::shared_ptr<ENode> node(EK k) {
  auto n = std::make_shared<ENode>();
  n->k = k;
  return n;
}

}  // namespace

Expr eConst(const Value& v) {
  auto n = node(EK::Const);
  n->c = v;
  return n;
}

Expr eUnit() { return eConst(Value::unit()); }

Expr eVar(const std::string& x) {
  auto n = node(EK::Var);
  n->name = x;
  return n;
}

Expr eLam(const std::string& x, const Sort& s, Expr body) {
  auto n = node(EK::Lam);
  n->param = x;
  n->sort = s;
  n->kids = {std::move(body)};
  return n;
}

Expr eFix(const std::string& f, const std::string& x, const Sort& s, const Sort& ret, Expr body) {
  auto n = node(EK::Fix);
  n->name = f;
  n->param = x;
  n->sort = s;
  n->retSort = ret;
  n->kids = {std::move(body)};
  return n;
}

Expr eChoice(Expr a, Expr b) {
  auto n = node(EK::Choice);
  n->kids = {std::move(a), std::move(b)};
  return n;
}

Expr eChoice(const std::vector<Expr>& branches) {
  if (branches.empty()) throw InternalError("empty choice");
  Expr acc = branches[0];
  for (size_t i = 1; i < branches.size(); ++i) acc = eChoice(acc, branches[i]);
  return acc;
}

Expr eApp(Expr fn, Expr arg) {
  auto n = node(EK::App);
  n->kids = {std::move(fn), std::move(arg)};
  return n;
}

Expr ePureOp(const std::string& op, Expr a, Expr b) {
  auto n = node(EK::PureOp);
  n->name = op;
  n->kids = {std::move(a), std::move(b)};
  return n;
}

Expr eEffOp(const std::string& op, std::vector<Expr> args) {
  auto n = node(EK::EffOp);
  n->name = op;
  n->kids = std::move(args);
  return n;
}

Expr eLet(const std::string& x, Expr bound, Expr body) {
  auto n = node(EK::Let);
  n->name = x;
  n->kids = {std::move(bound), std::move(body)};
  return n;
}

Expr eSeq(Expr a, Expr b) { return eLet("_", std::move(a), std::move(b)); }

Expr eAssume(std::vector<std::pair<std::string, Sort>> binders, const Formula& phi, Expr body) {
  auto n = node(EK::Assume);
  n->binders = std::move(binders);
  n->phi = phi;
  n->kids = {std::move(body)};
  return n;
}

Expr eAssert(const Formula& phi) {
  auto n = node(EK::Assert);
  n->phi = phi;
  return n;
}

bool isValue(const Expr& e) {
  return e->k == EK::Const || e->k == EK::Var || e->k == EK::Lam || e->k == EK::Fix;
}

namespace {

Formula substFormula(const Formula& f, const std::string& x, const Expr& v) {
  if (!mentions(f, x)) return f;
  if (v->k == EK::Const) return substitute(f, {{x, mkConst(v->c)}});
  if (v->k == EK::Var) return renameVars(f, {{x, v->name}});
  throw SortError("function value " + x + " used inside a qualifier");
}

}  // namespace

Expr substExpr(const Expr& e, const std::string& x, const Expr& v) {
  switch (e->k) {
    case EK::Const: return e;
    case EK::Var: return e->name == x ? v : e;
    case EK::Lam:
      if (e->param == x) return e;
      return eLam(e->param, e->sort, substExpr(e->kids[0], x, v));
    case EK::Fix:
      if (e->param == x || e->name == x) return e;
      return eFix(e->name, e->param, e->sort, e->retSort, substExpr(e->kids[0], x, v));
    case EK::Let: {
      Expr b = substExpr(e->kids[0], x, v);
      Expr body = e->name == x ? e->kids[1] : substExpr(e->kids[1], x, v);
      return eLet(e->name, b, body);
    }
    case EK::Assume: {
      for (auto& [n, s] : e->binders)
        if (n == x) return e;
      return eAssume(e->binders, substFormula(e->phi, x, v), substExpr(e->kids[0], x, v));
    }
    case EK::Assert: return eAssert(substFormula(e->phi, x, v));
    default: {
      auto n = std::make_shared<ENode>(*e);
      for (auto& k : n->kids) k = substExpr(k, x, v);
      return n;
    }
  }
}

namespace {

void freeVarsRec(const Expr& e, std::set<std::string> bound, std::set<std::string>& out) {
  auto formulaVars = [&](const Formula& f) {
    for (auto& [n, s] : freeVars(f))
      if (!bound.count(n)) out.insert(n);
  };
  switch (e->k) {
    case EK::Const: return;
    case EK::Var:
      if (!bound.count(e->name)) out.insert(e->name);
      return;
    case EK::Lam:
      bound.insert(e->param);
      freeVarsRec(e->kids[0], bound, out);
      return;
    case EK::Fix:
      bound.insert(e->param);
      bound.insert(e->name);
      freeVarsRec(e->kids[0], bound, out);
      return;
    case EK::Let:
      freeVarsRec(e->kids[0], bound, out);
      bound.insert(e->name);
      freeVarsRec(e->kids[1], bound, out);
      return;
    case EK::Assume:
      for (auto& [n, s] : e->binders) bound.insert(n);
      formulaVars(e->phi);
      freeVarsRec(e->kids[0], bound, out);
      return;
    case EK::Assert: formulaVars(e->phi); return;
    default:
      for (auto& k : e->kids) freeVarsRec(k, bound, out);
  }
}

void opsRec(const Expr& e, std::set<std::string>& out) {
  if (e->k == EK::EffOp) out.insert(e->name);
  for (auto& k : e->kids) opsRec(k, out);
}

}  // namespace

std::set<std::string> exprFreeVars(const Expr& e) {
  std::set<std::string> out;
  freeVarsRec(e, {}, out);
  out.erase("_");
  return out;
}

std::set<std::string> opsUsed(const Expr& e) {
  std::set<std::string> out;
  opsRec(e, out);
  return out;
}

// --- printing ---

namespace {

struct Printer {
  std::ostringstream os;

  void nl(int ind) { os << "\n" << std::string(ind * 2, ' '); }

  static bool atomic(const Expr& e) {
    return e->k == EK::Const || e->k == EK::Var || e->k == EK::App || e->k == EK::EffOp || e->k == EK::Assert;
  }

  void atom(const Expr& e, int ind) {
    if (atomic(e)) {
      expr(e, ind);
    } else {
      os << "(";
      expr(e, ind + 1);
      os << ")";
    }
  }

  void expr(const Expr& e, int ind) {
    switch (e->k) {
      case EK::Const: os << e->c.str(); return;
      case EK::Var: os << e->name; return;
      case EK::Lam:
        os << "fun (" << e->param << ":" << e->sort.str() << ") ->";
        nl(ind + 1);
        expr(e->kids[0], ind + 1);
        return;
      case EK::Fix:
        os << "fix " << e->name << "(" << e->param << ":" << e->sort.str() << "):" << e->retSort.str() << " =";
        nl(ind + 1);
        expr(e->kids[0], ind + 1);
        return;
      case EK::Choice:
        if (e->kids[0]->k == EK::Choice) expr(e->kids[0], ind);
        else atom(e->kids[0], ind);
        nl(ind);
        os << "(+) ";
        atom(e->kids[1], ind);
        return;
      case EK::App:
        if (e->kids[0]->k == EK::Var) os << e->kids[0]->name;
        else atom(e->kids[0], ind);
        os << "(";
        if (!(e->kids[1]->k == EK::Const && e->kids[1]->c.k == Value::K::Unit)) atom(e->kids[1], ind);
        os << ")";
        return;
      case EK::PureOp:
        atom(e->kids[0], ind);
        os << " " << e->name << " ";
        atom(e->kids[1], ind);
        return;
      case EK::EffOp:
        os << e->name << "(";
        for (size_t i = 0; i < e->kids.size(); ++i) {
          if (i) os << ", ";
          atom(e->kids[i], ind);
        }
        os << ")";
        return;
      case EK::Let: {
        const Expr& b = e->kids[0];
        if (e->name == "_") {
          bool wrap = b->k == EK::Let || b->k == EK::Assume || b->k == EK::Choice || b->k == EK::Lam ||
                      b->k == EK::Fix;
          if (wrap) atom(b, ind);
          else expr(b, ind);
          os << ";";
        } else {
          os << "let " << e->name << " = ";
          if (b->k == EK::Let || b->k == EK::Assume) atom(b, ind);
          else expr(b, ind + 1);
          os << " in";
        }
        nl(ind);
        expr(e->kids[1], ind);
        return;
      }
      case EK::Assume:
        os << "assume ";
        for (size_t i = 0; i < e->binders.size(); ++i)
          os << (i ? ", " : "") << e->binders[i].first << ":" << e->binders[i].second.str();
        if (!e->binders.empty()) os << ". ";
        os << printFormula(e->phi) << " in";
        nl(ind);
        expr(e->kids[0], ind);
        return;
      case EK::Assert: os << "assert " << printFormula(e->phi); return;
    }
  }
};

}  // namespace

std::string printExpr(const Expr& e) {
  Printer p;
  p.expr(e, 0);
  return p.os.str();
}

// --- parsing ---

namespace {

struct ExprParser {
  TokenStream& ts;
  const OpTable& ops;
  std::vector<std::pair<std::string, Sort>> scope;

  SortScope sortScope() const {
    auto copy = scope;
    return [copy](const std::string& n) -> std::optional<Sort> {
      for (auto it = copy.rbegin(); it != copy.rend(); ++it)
        if (it->first == n) return it->second;
      return std::nullopt;
    };
  }

  struct Bind {
    ExprParser& p;
    size_t mark;
    Bind(ExprParser& p, const std::string& x, const Sort& s) : p(p), mark(p.scope.size()) {
      p.scope.emplace_back(x, s);
    }
    ~Bind() { p.scope.resize(mark); }
  };

  static bool keyword(const std::string& s) {
    return s == "let" || s == "in" || s == "assume" || s == "assert" || s == "fun" || s == "fix" ||
           s == "true" || s == "false";
  }

  Expr expr() {
    Expr a = choice();
    if (ts.acceptSym(";")) return eSeq(a, expr());
    return a;
  }

  Expr choice() {
    Expr a = unary();
    while (ts.acceptSym("(+)")) a = eChoice(a, unary());
    return a;
  }

  Sort guessSort(const Expr& b) {
    if (b->k == EK::Const) {
      switch (b->c.k) {
        case Value::K::Unit: return Sort::unit();
        case Value::K::Bool: return Sort::boolean();
        case Value::K::Int: return Sort::integer();
      }
    }
    if (b->k == EK::EffOp) {
      auto it = ops.find(b->name);
      if (it != ops.end()) return it->second.ret;
    }
    if (b->k == EK::PureOp && b->name != "+" && b->name != "-") return Sort::boolean();
    if (b->k == EK::Var) {
      if (auto s = sortScope()(b->name)) return *s;
    }
    return Sort::integer();
  }

  Expr unary() {
    if (ts.acceptIdent("let")) {
      std::string x = ts.expectIdent();
      ts.expectSym("=");
      Expr b = expr();
      if (!ts.acceptIdent("in")) ts.fail("expected 'in'");
      Bind bind(*this, x, guessSort(b));
      return eLet(x, b, expr());
    }
    if (ts.acceptIdent("assume")) {
      std::vector<std::pair<std::string, Sort>> binders;
      if (ts.peek().t == Token::T::Ident && ts.atSym(":", 1)) {
        do {
          std::string x = ts.expectIdent();
          ts.expectSym(":");
          binders.emplace_back(x, parseSort(ts));
        } while (ts.acceptSym(","));
        ts.expectSym(".");
      }
      size_t mark = scope.size();
      for (auto& b : binders) scope.push_back(b);
      Formula phi = parseFormula(ts, sortScope());
      if (!ts.acceptIdent("in")) ts.fail("expected 'in'");
      Expr body = expr();
      scope.resize(mark);
      return eAssume(binders, phi, body);
    }
    if (ts.acceptIdent("assert")) return eAssert(parseFormula(ts, sortScope()));
    if (ts.acceptIdent("fun")) {
      ts.expectSym("(");
      std::string x = ts.expectIdent();
      ts.expectSym(":");
      Sort s = parseSort(ts);
      ts.expectSym(")");
      ts.expectSym("->");
      Bind bind(*this, x, s);
      return eLam(x, s, expr());
    }
    if (ts.acceptIdent("fix")) {
      std::string f = ts.expectIdent();
      ts.expectSym("(");
      std::string x = ts.expectIdent();
      ts.expectSym(":");
      Sort s = parseSort(ts);
      ts.expectSym(")");
      ts.expectSym(":");
      Sort r = parseSort(ts);
      ts.expectSym("=");
      Bind bf(*this, f, Sort::arrow(s, r));
      Bind bx(*this, x, s);
      return eFix(f, x, s, r, expr());
    }
    Expr a = app();
    for (const char* op : {"+", "-", "==", "<=", "<"}) {
      if (ts.atSym(op) && !(std::string(op) == "<" && ts.atSym("=", 1))) {
        ts.next();
        return ePureOp(op, a, app());
      }
    }
    return a;
  }

  Expr app() {
    if (ts.peek().t == Token::T::Ident && !keyword(ts.peek().text) && ts.atSym("(", 1)) {
      std::string f = ts.next().text;
      ts.expectSym("(");
      std::vector<Expr> args;
      if (!ts.atSym(")")) {
        do args.push_back(choice());
        while (ts.acceptSym(","));
      }
      ts.expectSym(")");
      if (ops.count(f)) return eEffOp(f, args);
      if (args.size() > 1) ts.fail("functions take a single argument");
      return eApp(eVar(f), args.empty() ? eUnit() : args[0]);
    }
    return atom();
  }

  Expr atom() {
    const Token& t = ts.peek();
    if (t.t == Token::T::Int) return eConst(Value::integer(ts.expectInt()));
    if (ts.atSym("-") && ts.peek(1).t == Token::T::Int) {
      ts.next();
      return eConst(Value::integer(-ts.expectInt()));
    }
    if (ts.acceptIdent("true")) return eConst(Value::boolean(true));
    if (ts.acceptIdent("false")) return eConst(Value::boolean(false));
    if (ts.acceptSym("(")) {
      if (ts.acceptSym(")")) return eUnit();
      Expr e = expr();
      ts.expectSym(")");
      return e;
    }
    if (t.t == Token::T::Ident && !keyword(t.text)) return eVar(ts.next().text);
    ts.fail("expected an expression");
  }
};

}  // namespace

Expr parseExpr(TokenStream& ts, const OpTable& ops) {
  ExprParser p{ts, ops, {}};
  return p.expr();
}

Expr parseExpr(const std::string& src, const OpTable& ops) {
  TokenStream ts(tokenize(src));
  Expr e = parseExpr(ts, ops);
  if (!ts.atEnd()) ts.fail("trailing input");
  return e;
}

}  // namespace uhat
