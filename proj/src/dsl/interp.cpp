#include "uhat/dsl.hpp"

namespace uhat {

const char* outcomeName(Outcome o) {
  switch (o) {
    case Outcome::Completed: return "Completed";
    case Outcome::AssertViolated: return "AssertViolated";
    case Outcome::AssumeExhausted: return "AssumeExhausted";
    case Outcome::Diverged: return "Diverged";
    case Outcome::SUTFault: return "SUTFault";
  }
  return "?";
}

namespace {

Value randomValue(const Sort& s, Rng& rng, const Domain& dom) {
  switch (s.k) {
    case Sort::K::Unit: return Value::unit();
    case Sort::K::Bool: return Value::boolean(std::uniform_int_distribution<int>(0, 1)(rng));
    default: return Value::integer(std::uniform_int_distribution<int64_t>(dom.lo, dom.hi)(rng));
  }
}

Value pureOp(const std::string& op, const Value& a, const Value& b) {
  if (op == "+") return Value::integer(a.i + b.i);
  if (op == "-") return Value::integer(a.i - b.i);
  if (op == "==") return Value::boolean(a == b);
  if (op == "<") return Value::boolean(a.i < b.i);
  if (op == "<=") return Value::boolean(a.i <= b.i);
  throw StuckError("unknown pure operator " + op);
}

Model solveAssume(Machine& m, const Expr& e) {
  VarSorts fv = freeVars(e->phi);
  std::set<std::string> bound;
  for (auto& [n, s] : e->binders) bound.insert(n);
  for (auto& [n, s] : fv)
    if (!bound.count(n)) throw StuckError("assume mentions unbound variable " + n);
  Model out;
  if (e->binders.empty()) {
    if (!eval(e->phi, {}, m.cfg.domain).asBool()) throw AssumeFailure(0);
    return out;
  }
  std::optional<std::vector<std::vector<Model>>> comps;
  bool fragment = true;
  try {
    comps = enumerateByComponent(conjuncts(e->phi), static_cast<size_t>(m.cfg.witnessPool), m.cfg.domain);
  } catch (const UnsupportedTheory&) {
    fragment = false;
  }
  if (fragment) {
    if (!comps) throw AssumeFailure(0);
    for (auto& models : *comps) {
      if (models.empty()) throw AssumeFailure(0);
      std::vector<std::pair<std::string, Sort>> group;
      for (auto& [n, v] : models[0]) group.emplace_back(n, fv.count(n) ? fv.at(n) : Sort::integer());
      size_t pick = m.picker ? m.picker(group, models, m.trace, m.rng)
                             : std::uniform_int_distribution<size_t>(0, models.size() - 1)(m.rng);
      if (pick >= models.size()) throw AssumeFailure(0);
      for (auto& [n, v] : models[pick]) out[n] = v;
    }
    for (auto& [n, s] : e->binders)
      if (!out.count(n)) out[n] = randomValue(s, m.rng, m.cfg.domain);
    return out;
  }
  for (int attempt = 0; attempt < m.cfg.assumeRetries; ++attempt) {
    out.clear();
    for (auto& [n, s] : e->binders) out[n] = randomValue(s, m.rng, m.cfg.domain);
    ++m.assumeRetries;
    if (eval(e->phi, out, m.cfg.domain).asBool()) return out;
  }
  throw AssumeFailure(m.cfg.assumeRetries);
}

}  // namespace

StepResult step(Machine& m, const Expr& e) {
  switch (e->k) {
    case EK::Const:
    case EK::Var:
    case EK::Lam:
    case EK::Fix: throw StuckError("cannot step a value");
    case EK::Let: {
      if (isValue(e->kids[0])) return {{}, e->name == "_" ? e->kids[1] : substExpr(e->kids[1], e->name, e->kids[0])};
      StepResult r = step(m, e->kids[0]);
      return {std::move(r.delta), eLet(e->name, r.next, e->kids[1])};
    }
    case EK::Choice: {
      int b = std::uniform_int_distribution<int>(0, 1)(m.rng);
      return {{}, e->kids[b]};
    }
    case EK::App: {
      for (int i = 0; i < 2; ++i) {
        if (!isValue(e->kids[i])) {
          StepResult r = step(m, e->kids[i]);
          auto n = std::make_shared<ENode>(*e);
          n->kids[i] = r.next;
          return {std::move(r.delta), n};
        }
      }
      const Expr& fn = e->kids[0];
      const Expr& arg = e->kids[1];
      if (fn->k == EK::Lam) return {{}, substExpr(fn->kids[0], fn->param, arg)};
      if (fn->k == EK::Fix) return {{}, substExpr(substExpr(fn->kids[0], fn->param, arg), fn->name, fn)};
      throw StuckError("applying a non-function");
    }
    case EK::PureOp: {
      const Expr& a = e->kids[0];
      const Expr& b = e->kids[1];
      if (a->k != EK::Const || b->k != EK::Const) throw StuckError("pure operator on open arguments");
      return {{}, eConst(pureOp(e->name, a->c, b->c))};
    }
    case EK::EffOp: {
      auto it = m.ops.find(e->name);
      if (it == m.ops.end()) throw UnknownOp(e->name);
      std::vector<Value> args;
      for (auto& k : e->kids) {
        if (k->k != EK::Const) throw StuckError("effect operator on open arguments");
        args.push_back(k->c);
      }
      m.pendingCall = Event{e->name, args, Value::unit(), false};
      Value ret = m.handler.handle(m.trace, e->name, args);
      m.pendingCall.reset();
      if (ret.k != Value::K::Int || !it->second.ret.isInt()) {
        bool ok = (ret.k == Value::K::Unit && it->second.ret.k == Sort::K::Unit) ||
                  (ret.k == Value::K::Bool && it->second.ret.k == Sort::K::Bool);
        if (!ok) throw InternalError("handler returned a value of the wrong sort for " + e->name);
      }
      Event ev{e->name, args, ret, false};
      return {{ev}, eConst(ret)};
    }
    case EK::Assume: {
      Model sol = solveAssume(m, e);
      Expr body = e->kids[0];
      for (auto& [n, s] : e->binders) body = substExpr(body, n, eConst(sol.at(n)));
      return {{}, body};
    }
    case EK::Assert: {
      if (!freeVars(e->phi).empty()) throw StuckError("assert on open qualifier " + e->phi->key);
      if (!eval(e->phi, {}, m.cfg.domain).asBool()) throw AssertFailure(e->phi);
      return {{}, eUnit()};
    }
  }
  throw InternalError("unhandled expression");
}

RunOutcome run(const Expr& e, const OpTable& ops, Handler& handler, uint64_t seed, const Config& cfg,
               const AssumePicker& picker) {
  handler.reset();
  Machine m{ops, handler, Rng(seed), cfg, picker, {}, 0, 0, {}};
  RunOutcome out;
  Expr cur = e;
  try {
    while (!isValue(cur)) {
      if (m.steps >= cfg.stepBudget) {
        out.kind = Outcome::Diverged;
        out.steps = m.steps;
        out.trace = m.trace;
        return out;
      }
      StepResult r = step(m, cur);
      ++m.steps;
      m.trace.insert(m.trace.end(), r.delta.begin(), r.delta.end());
      cur = r.next;
    }
    out.kind = Outcome::Completed;
    out.value = cur;
  } catch (const AssertFailure& f) {
    out.kind = Outcome::AssertViolated;
    out.failed = f.phi;
  } catch (const AssumeFailure& f) {
    out.kind = Outcome::AssumeExhausted;
    out.retries = f.tries;
  } catch (const SUTFault& f) {
    out.kind = Outcome::SUTFault;
    out.message = f.what();
    out.faultCall = m.pendingCall;
  }
  out.steps = m.steps;
  out.trace = m.trace;
  return out;
}

}  // namespace uhat
