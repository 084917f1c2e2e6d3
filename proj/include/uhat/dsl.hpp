#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "uhat/logic.hpp"
#include "uhat/trace.hpp"

namespace uhat {

enum class EK { Const, Var, Lam, Fix, Choice, App, PureOp, EffOp, Let, Assume, Assert };

struct ENode;
using Expr = std::shared_ptr<const ENode>;

struct ENode {
  EK k = EK::Const;
  Value c;
  std::string name;   // variable, binder, function name (Fix), or operator
  std::string param;  // Lam/Fix parameter
  Sort sort;          // Lam/Fix parameter sort; Var sort hint
  Sort retSort;       // Fix result sort
  std::vector<std::pair<std::string, Sort>> binders;  // Assume
  Formula phi;        // Assume/Assert
  std::vector<Expr> kids;
};

Expr eConst(const Value& v);
Expr eUnit();
Expr eVar(const std::string& x);
Expr eLam(const std::string& x, const Sort& s, Expr body);
Expr eFix(const std::string& f, const std::string& x, const Sort& s, const Sort& ret, Expr body);
Expr eChoice(Expr a, Expr b);
Expr eChoice(const std::vector<Expr>& branches);
Expr eApp(Expr fn, Expr arg);
Expr ePureOp(const std::string& op, Expr a, Expr b);
Expr eEffOp(const std::string& op, std::vector<Expr> args);
Expr eLet(const std::string& x, Expr bound, Expr body);
Expr eSeq(Expr a, Expr b);
Expr eAssume(std::vector<std::pair<std::string, Sort>> binders, const Formula& phi, Expr body);
Expr eAssert(const Formula& phi);

bool isValue(const Expr& e);
Expr substExpr(const Expr& e, const std::string& x, const Expr& v);
std::set<std::string> exprFreeVars(const Expr& e);
std::set<std::string> opsUsed(const Expr& e);

std::string printExpr(const Expr& e);
Expr parseExpr(const std::string& src, const OpTable& ops);
Expr parseExpr(TokenStream& ts, const OpTable& ops);

using BasicEnv = std::map<std::string, Sort>;
// Throws BasicTypeError naming the failed rule.
Sort typecheckBasic(const Expr& e, const OpTable& ops, const BasicEnv& env = {});

// Raised by handlers when the system under test fails on its own.
struct SUTFault : Error {
  explicit SUTFault(const std::string& msg) : Error(msg) {}
};

class Handler {
 public:
  virtual ~Handler() = default;
  virtual void reset() = 0;
  // Response to op(args) after trace alpha; throws SUTFault or UnknownOp.
  virtual Value handle(const Trace& alpha, const std::string& op, const std::vector<Value>& args) = 0;
};

using Rng = std::mt19937_64;

// Chooses among candidate models of an assume group; default picks uniformly.
using AssumePicker = std::function<size_t(const std::vector<std::pair<std::string, Sort>>& binders,
                                          const std::vector<Model>& models, const Trace& alpha, Rng& rng)>;

struct Machine {
  const OpTable& ops;
  Handler& handler;
  Rng rng;
  Config cfg;
  AssumePicker picker;
  Trace trace;
  int64_t steps = 0;
  int assumeRetries = 0;
  std::optional<Event> pendingCall;  // operator call in flight when the handler faulted
};

struct StepResult {
  Trace delta;
  Expr next;
};

// Terminal signals raised inside step.
struct AssertFailure : Error {
  AssertFailure(Formula phi) : Error("assertion failed: " + phi->key), phi(std::move(phi)) {}
  Formula phi;
};
struct AssumeFailure : Error {
  explicit AssumeFailure(int tries) : Error("assume exhausted"), tries(tries) {}
  int tries;
};

StepResult step(Machine& m, const Expr& e);

enum class Outcome { Completed, AssertViolated, AssumeExhausted, Diverged, SUTFault };
const char* outcomeName(Outcome o);

struct RunOutcome {
  Outcome kind = Outcome::Completed;
  Expr value;
  Trace trace;
  Formula failed;       // AssertViolated
  int retries = 0;      // AssumeExhausted
  int64_t steps = 0;    // Diverged
  std::string message;  // SUTFault
  std::optional<Event> faultCall;  // SUTFault: the call the handler rejected
};

RunOutcome run(const Expr& e, const OpTable& ops, Handler& handler, uint64_t seed, const Config& cfg = {},
               const AssumePicker& picker = {});

}  // namespace uhat
