#include "uhat/dsl.hpp"

namespace uhat {

namespace {

void checkQualifier(const std::string& rule, const Formula& phi, const BasicEnv& env) {
  Sort s;
  try {
    s = sortOf(phi);
  } catch (const SortError& e) {
    throw BasicTypeError(rule, e.what());
  }
  if (s.k != Sort::K::Bool) throw BasicTypeError(rule, "qualifier " + phi->key + " is not boolean");
  for (auto& [n, vs] : freeVars(phi)) {
    auto it = env.find(n);
    if (it == env.end()) throw BasicTypeError(rule, "unbound variable " + n);
    if (it->second != vs) throw BasicTypeError(rule, "variable " + n + " used at sort " + vs.str());
  }
}

Sort check(const Expr& e, const OpTable& ops, const BasicEnv& env) {
  switch (e->k) {
    case EK::Const:
      switch (e->c.k) {
        case Value::K::Unit: return Sort::unit();
        case Value::K::Bool: return Sort::boolean();
        case Value::K::Int: return Sort::integer();
      }
      break;
    case EK::Var: {
      auto it = env.find(e->name);
      if (it == env.end()) throw BasicTypeError("BtVar", "unbound variable " + e->name);
      return it->second;
    }
    case EK::Lam: {
      BasicEnv inner = env;
      inner[e->param] = e->sort;
      return Sort::arrow(e->sort, check(e->kids[0], ops, inner));
    }
    case EK::Fix: {
      BasicEnv inner = env;
      Sort fs = Sort::arrow(e->sort, e->retSort);
      inner[e->name] = fs;
      inner[e->param] = e->sort;
      Sort body = check(e->kids[0], ops, inner);
      if (body != e->retSort) throw BasicTypeError("BtFix", "body has sort " + body.str());
      return fs;
    }
    case EK::Choice: {
      Sort a = check(e->kids[0], ops, env);
      Sort b = check(e->kids[1], ops, env);
      if (a != b) throw BasicTypeError("BtChoice", "branches have sorts " + a.str() + " and " + b.str());
      return a;
    }
    case EK::App: {
      Sort f = check(e->kids[0], ops, env);
      Sort a = check(e->kids[1], ops, env);
      if (f.k != Sort::K::Arrow) throw BasicTypeError("BtApp", "applying a non-function");
      if (*f.dom != a) throw BasicTypeError("BtApp", "argument has sort " + a.str());
      return *f.cod;
    }
    case EK::PureOp: {
      Sort a = check(e->kids[0], ops, env);
      Sort b = check(e->kids[1], ops, env);
      if (e->name == "+" || e->name == "-") {
        if (!a.isInt() || !b.isInt()) throw BasicTypeError("BtOpApp", "arithmetic on non-integers");
        return Sort::integer();
      }
      if (e->name == "==") {
        if (a != b) throw BasicTypeError("BtOpApp", "comparing different sorts");
        return Sort::boolean();
      }
      if (!a.isInt() || !b.isInt()) throw BasicTypeError("BtOpApp", "ordering on non-integers");
      return Sort::boolean();
    }
    case EK::EffOp: {
      auto it = ops.find(e->name);
      if (it == ops.end()) throw BasicTypeError("BtEfOpApp", "unknown operator " + e->name);
      const OpInfo& op = it->second;
      if (op.ghost()) throw BasicTypeError("BtEfOpApp", "ghost operator " + e->name + " in a program");
      if (e->kids.size() != op.arity())
        throw BasicTypeError("BtEfOpApp", e->name + " expects " + std::to_string(op.arity()) + " arguments");
      for (size_t i = 0; i < e->kids.size(); ++i) {
        Sort s = check(e->kids[i], ops, env);
        if (s != op.params[i]) throw BasicTypeError("BtEfOpApp", "argument " + std::to_string(i) + " of " + e->name);
      }
      return op.ret;
    }
    case EK::Let: {
      Sort b = check(e->kids[0], ops, env);
      BasicEnv inner = env;
      if (e->name != "_") inner[e->name] = b;
      return check(e->kids[1], ops, inner);
    }
    case EK::Assume: {
      BasicEnv inner = env;
      for (auto& [n, s] : e->binders) inner[n] = s;
      checkQualifier("BtAssume", e->phi, inner);
      return check(e->kids[0], ops, inner);
    }
    case EK::Assert: checkQualifier("BtAssert", e->phi, env); return Sort::unit();
  }
  throw InternalError("unhandled expression");
}

}  // namespace

Sort typecheckBasic(const Expr& e, const OpTable& ops, const BasicEnv& env) { return check(e, ops, env); }

}  // namespace uhat
