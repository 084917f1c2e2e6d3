#pragma once

#include <map>
#include <string>
#include <vector>

#include "uhat/logic.hpp"

namespace uhat {

enum class OpKind { Pure, Effect, Ghost };

// Basic-type view of an operator: parameter sorts and return sort.
struct OpInfo {
  std::string name;
  OpKind kind = OpKind::Effect;
  std::vector<std::string> paramNames;
  std::vector<Sort> params;
  Sort ret = Sort::unit();

  bool ghost() const { return kind == OpKind::Ghost; }
  size_t arity() const { return params.size(); }
  // Payload positions: parameters, then the return value.
  size_t payloadSize() const { return params.size() + 1; }
  Sort payloadSort(size_t i) const { return i < params.size() ? params[i] : ret; }
};

using OpTable = std::map<std::string, OpInfo>;

struct Event {
  std::string op;
  std::vector<Value> args;
  Value ret;
  bool ghost = false;

  bool operator==(const Event& o) const {
    return op == o.op && args == o.args && ret == o.ret && ghost == o.ghost;
  }
};

using Trace = std::vector<Event>;

Trace eraseGhost(const Trace& t);
// Throws UnknownOp or SortError.
void checkWellFormed(const Trace& t, const OpTable& ops);
bool wellFormed(const Trace& t, const OpTable& ops);

std::string formatEvent(const Event& e);
std::string formatTrace(const Trace& t);
Event parseEventLine(const std::string& line, int lineNo = 1);
Trace parseTrace(const std::string& text);

}  // namespace uhat
