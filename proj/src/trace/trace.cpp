#include <sstream>

#include "uhat/trace.hpp"

namespace uhat {

Trace eraseGhost(const Trace& t) {
  Trace out;
  for (auto& e : t)
    if (!e.ghost) out.push_back(e);
  return out;
}

namespace {

bool fits(const Value& v, const Sort& s) {
  switch (s.k) {
    case Sort::K::Unit: return v.k == Value::K::Unit;
    case Sort::K::Bool: return v.k == Value::K::Bool;
    case Sort::K::Int: return v.k == Value::K::Int;
    case Sort::K::Arrow: return false;
  }
  return false;
}

}  // namespace

void checkWellFormed(const Trace& t, const OpTable& ops) {
  for (auto& e : t) {
    auto it = ops.find(e.op);
    if (it == ops.end() || it->second.kind == OpKind::Pure) throw UnknownOp(e.op);
    const OpInfo& info = it->second;
    if (info.ghost() != e.ghost) throw SortError("ghost flag mismatch for " + e.op);
    if (e.args.size() != info.arity()) throw SortError("arity mismatch for " + e.op);
    for (size_t i = 0; i < e.args.size(); ++i)
      if (!fits(e.args[i], info.params[i])) throw SortError("argument sort mismatch for " + e.op);
    if (!fits(e.ret, info.ret)) throw SortError("return sort mismatch for " + e.op);
  }
}

bool wellFormed(const Trace& t, const OpTable& ops) {
  try {
    checkWellFormed(t, ops);
    return true;
  } catch (const SortError&) {
    return false;
  } catch (const UnknownOp&) {
    return false;
  }
}

std::string formatEvent(const Event& e) {
  std::string s = "op=" + e.op + " args=[";
  for (size_t i = 0; i < e.args.size(); ++i) {
    if (i) s += ",";
    s += e.args[i].str();
  }
  s += "] ret=" + e.ret.str() + " ghost=" + (e.ghost ? "1" : "0");
  return s;
}

std::string formatTrace(const Trace& t) {
  std::string s;
  for (auto& e : t) s += formatEvent(e) + "\n";
  return s;
}

namespace {

Value parseValue(const std::string& s, int lineNo) {
  if (s == "()") return Value::unit();
  if (s == "true") return Value::boolean(true);
  if (s == "false") return Value::boolean(false);
  try {
    size_t used = 0;
    long long v = std::stoll(s, &used);
    if (used == s.size()) return Value::integer(v);
  } catch (const std::exception&) {
  }
  throw ParseError(lineNo, 1, "bad value '" + s + "'");
}

}  // namespace

Event parseEventLine(const std::string& line, int lineNo) {
  Event e;
  bool haveOp = false;
  std::istringstream in(line);
  std::string field;
  while (in >> field) {
    auto eq = field.find('=');
    if (eq == std::string::npos) throw ParseError(lineNo, 1, "expected key=value, got '" + field + "'");
    std::string key = field.substr(0, eq), val = field.substr(eq + 1);
    if (key == "op") {
      e.op = val;
      haveOp = true;
    } else if (key == "args") {
      if (val.size() < 2 || val.front() != '[' || val.back() != ']')
        throw ParseError(lineNo, 1, "args must be bracketed");
      std::string body = val.substr(1, val.size() - 2);
      std::istringstream parts(body);
      std::string p;
      while (std::getline(parts, p, ','))
        if (!p.empty()) e.args.push_back(parseValue(p, lineNo));
    } else if (key == "ret") {
      e.ret = parseValue(val, lineNo);
    } else if (key == "ghost") {
      e.ghost = val == "1" || val == "true";
    } else {
      throw ParseError(lineNo, 1, "unknown field '" + key + "'");
    }
  }
  if (!haveOp) throw ParseError(lineNo, 1, "missing op");
  return e;
}

Trace parseTrace(const std::string& text) {
  Trace t;
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    t.push_back(parseEventLine(line, n));
  }
  return t;
}

}  // namespace uhat
