#include <unordered_set>

#include "uhat/synth.hpp"

namespace uhat {

namespace {

std::string printATEvent(const ATEvent& e, const std::set<std::string>& scope) {
  return printEvent(e.ev, scope) + (e.resolved ? "^T" : "^F");
}

}  // namespace

std::string printAbstractTrace(const AbstractTrace& pi, const std::set<std::string>& scope) {
  if (pi.empty()) return "eps";
  std::string s;
  for (size_t i = 0; i < pi.size(); ++i) {
    if (i) s += " . ";
    const ASeg& g = pi[i];
    if (!g.star) {
      s += printATEvent(g.alts[0], scope);
      continue;
    }
    s += "[";
    for (size_t j = 0; j < g.alts.size(); ++j) s += (j ? " | " : "") + printEvent(g.alts[j].ev, scope);
    s += "]*";
  }
  return s;
}

std::string printCandidate(const Candidate& c) {
  std::string s = "(";
  for (size_t i = 0; i < c.gamma.binds.size(); ++i) {
    auto& [x, t] = c.gamma.binds[i];
    s += (i ? ", " : "") + x + ":" + printType(t);
  }
  return s + ") |- " + printAbstractTrace(c.pi, c.gamma.names());
}

Lin toLin(const AbstractTrace& pi) {
  Lin l;
  for (auto& g : pi) {
    Seg s;
    s.star = g.star;
    for (auto& a : g.alts) s.cc = classOr(s.cc, classOf(a.ev));
    l.push_back(std::move(s));
  }
  return l;
}

Regex traceRegex(const AbstractTrace& pi) { return linToRegex(toLin(pi)); }

size_t unresolvedCount(const AbstractTrace& pi) {
  size_t n = 0;
  for (auto& g : pi)
    if (!g.star && !g.alts[0].resolved) ++n;
  return n;
}

size_t concreteLength(const AbstractTrace& pi) {
  size_t n = 0;
  for (auto& g : pi)
    if (!g.star) ++n;
  return n;
}

std::optional<size_t> leftmostUnresolved(const AbstractTrace& pi) {
  for (size_t i = 0; i < pi.size(); ++i)
    if (!pi[i].star && !pi[i].alts[0].resolved) return i;
  return std::nullopt;
}

// --- normalization into abstract traces ---

namespace {

using Plan = std::vector<AbstractTrace>;

void addPlan(Plan& out, std::unordered_set<std::string>& seen, AbstractTrace t) {
  if (seen.insert(printAbstractTrace(t)).second) out.push_back(std::move(t));
}

struct Planner {
  const OpTable& ops;
  const Config& cfg;

  void cap(size_t n) const {
    if (n > static_cast<size_t>(cfg.maxBranches) * 16) throw CapacityExceeded("too many abstract traces");
  }

  static AbstractTrace single(const SymEvent& e) { return {ASeg{false, {ATEvent{e, false, {}}}}}; }

  Plan concat(const Plan& a, const Plan& b) const {
    Plan out;
    std::unordered_set<std::string> seen;
    for (auto& x : a)
      for (auto& y : b) {
        AbstractTrace t = x;
        t.insert(t.end(), y.begin(), y.end());
        addPlan(out, seen, std::move(t));
      }
    cap(out.size());
    return out;
  }

  Plan plan(Regex r) const {
    switch (r->k) {
      case RK::Empty: return {};
      case RK::Eps: return {AbstractTrace{}};
      case RK::Event: return {single(r->ev)};
      case RK::Any: {
        Plan out;
        for (auto& [name, info] : ops)
          if (info.kind != OpKind::Pure) out.push_back(single(makeEvent(info, mkTrue())));
        return out;
      }
      case RK::Or: {
        Plan out;
        std::unordered_set<std::string> seen;
        for (Regex k : r->kids)
          for (auto& t : plan(k)) addPlan(out, seen, t);
        cap(out.size());
        return out;
      }
      case RK::Concat: {
        Plan acc{AbstractTrace{}};
        for (Regex k : r->kids) acc = concat(acc, plan(k));
        return acc;
      }
      case RK::Star: {
        Plan body = plan(r->kids[0]);
        bool letters = true;
        for (auto& t : body)
          if (t.size() != 1 || t[0].star) letters = false;
        if (letters) {
          if (body.empty()) return {AbstractTrace{}};
          ASeg g{true, {}};
          for (auto& t : body) g.alts.push_back(t[0].alts[0]);
          return {AbstractTrace{g}};
        }
        Plan out{AbstractTrace{}};
        std::unordered_set<std::string> seen{printAbstractTrace({})};
        Plan power{AbstractTrace{}};
        for (int k = 1; k <= cfg.starBound; ++k) {
          power = concat(power, body);
          for (auto& t : power) addPlan(out, seen, t);
        }
        cap(out.size());
        return out;
      }
      case RK::And:
      case RK::Not: throw InternalError("boolean operator survived normalization");
    }
    return {};
  }
};

}  // namespace

std::vector<AbstractTrace> normPlan(Regex A, const OpTable& ops, const Config& cfg) {
  Regex n = normalizeBooleanOps(A, ops, cfg);
  return Planner{ops, cfg}.plan(n);
}

std::string FreshNames::fresh(const std::string& base, const std::set<std::string>& taken) {
  std::string b = base;
  while (!b.empty() && (b.back() == '\'' || std::isdigit(static_cast<unsigned char>(b.back())))) b.pop_back();
  if (b.empty() || b == "_") b = "v";
  for (;;) {
    std::string n = b + std::to_string(++next_[b]);
    if (!taken.count(n)) return n;
  }
}

}  // namespace uhat
