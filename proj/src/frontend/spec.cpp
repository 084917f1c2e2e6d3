#include <algorithm>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "uhat/frontend.hpp"

namespace uhat {

namespace {

const std::set<std::string> kKeywords = {"sort", "ghost", "pure", "op", "property", "config"};

bool isOpen(const Token& t) { return t.t == Token::T::Sym && (t.text == "(" || t.text == "[" || t.text == "{"); }
bool isClose(const Token& t) { return t.t == Token::T::Sym && (t.text == ")" || t.text == "]" || t.text == "}"); }

std::string where(const Token& t) { return std::to_string(t.line) + ":" + std::to_string(t.col) + ": "; }

using Toks = std::vector<Token>;

Toks withEnd(Toks body, const Token& after) {
  Token end;
  end.t = Token::T::End;
  end.line = after.line;
  end.col = after.col;
  body.push_back(end);
  return body;
}

std::vector<Toks> splitDecls(const Toks& toks) {
  std::vector<Toks> out;
  int depth = 0;
  for (size_t i = 0; i + 1 < toks.size(); ++i) {
    const Token& t = toks[i];
    bool starts = depth == 0 && t.t == Token::T::Ident && kKeywords.count(t.text) &&
                  !(i > 0 && toks[i - 1].t == Token::T::Ident && (toks[i - 1].text == "ghost" || toks[i - 1].text == "pure"));
    if (starts) {
      out.emplace_back();
    } else if (out.empty()) {
      throw ParseError(t.line, t.col, "expected a declaration");
    }
    if (isOpen(t)) ++depth;
    if (isClose(t) && depth > 0) --depth;
    out.back().push_back(t);
  }
  return out;
}

std::vector<Toks> splitTop(const Toks& toks, const std::string& sep) {
  std::vector<Toks> out(1);
  int depth = 0;
  for (auto& t : toks) {
    if (depth == 0 && t.t == Token::T::Sym && t.text == sep) {
      out.emplace_back();
      continue;
    }
    if (isOpen(t)) ++depth;
    if (isClose(t) && depth > 0) --depth;
    out.back().push_back(t);
  }
  return out;
}

Toks slice(TokenStream& ts, size_t from) {
  Toks out;
  size_t end = ts.pos();
  ts.seek(from);
  while (ts.pos() < end) out.push_back(ts.next());
  return out;
}

struct OpHeader {
  OpInfo info;
  std::vector<Toks> paramTypes;
  Toks body;
  Token at;
};

OpHeader parseHeader(const Toks& decl) {
  TokenStream ts(withEnd(decl, decl.back()));
  OpHeader h;
  h.at = ts.peek();
  h.info.kind = OpKind::Effect;
  if (ts.acceptIdent("ghost")) h.info.kind = OpKind::Ghost;
  else if (ts.acceptIdent("pure")) h.info.kind = OpKind::Pure;
  if (!ts.acceptIdent("op")) ts.fail("expected 'op'");
  h.info.name = ts.expectIdent();
  ts.expectSym("(");
  if (!ts.atSym(")")) {
    do {
      h.info.paramNames.push_back(ts.expectIdent());
      ts.expectSym(":");
      size_t from = ts.pos();
      if (ts.acceptSym("{")) {
        h.info.params.push_back(parseSort(ts));
        int depth = 1;
        while (depth > 0) {
          if (ts.atEnd()) ts.fail("unterminated refinement");
          Token t = ts.next();
          if (isOpen(t)) ++depth;
          if (isClose(t)) --depth;
        }
      } else {
        h.info.params.push_back(parseSort(ts));
      }
      h.paramTypes.push_back(slice(ts, from));
    } while (ts.acceptSym(","));
  }
  ts.expectSym(")");
  ts.expectSym("->");
  h.info.ret = parseSort(ts);
  if (ts.acceptSym("=")) {
    while (!ts.atEnd()) h.body.push_back(ts.next());
    if (h.body.empty()) ts.fail("expected a signature");
  }
  if (!ts.atEnd()) ts.fail("unexpected '" + ts.peek().text + "'");
  return h;
}

TypePtr parseSignature(const OpHeader& h, const OpTable& ops) {
  std::vector<TypePtr> comps;
  for (auto& comp : splitTop(h.body, "/\\")) {
    if (comp.empty()) throw ParseError(h.at.line, h.at.col, "empty signature component in " + h.info.name);
    size_t bracket = 0;
    int depth = 0;
    for (; bracket < comp.size(); ++bracket) {
      const Token& t = comp[bracket];
      if (depth == 0 && t.t == Token::T::Sym && t.text == "[") break;
      if (isOpen(t)) ++depth;
      if (isClose(t) && depth > 0) --depth;
    }
    Toks full(comp.begin(), comp.begin() + static_cast<long>(bracket));
    for (size_t k = 0; k < h.paramTypes.size(); ++k) {
      Token name = h.paramTypes[k].front();
      name.t = Token::T::Ident;
      name.text = h.info.paramNames[k];
      Token colon = name, arrow = name;
      colon.t = arrow.t = Token::T::Sym;
      colon.text = ":";
      arrow.text = "->";
      full.push_back(name);
      full.push_back(colon);
      full.insert(full.end(), h.paramTypes[k].begin(), h.paramTypes[k].end());
      full.push_back(arrow);
    }
    full.insert(full.end(), comp.begin() + static_cast<long>(bracket), comp.end());
    TokenStream ts(withEnd(full, comp.back()));
    TypePtr t = parseType(ts, ops, {});
    if (!ts.atEnd()) ts.fail("unexpected '" + ts.peek().text + "'");
    comps.push_back(t);
  }
  return comps.size() == 1 ? comps[0] : tInter(comps);
}

std::string joinTokens(const Toks& ts) {
  std::string s;
  for (auto& t : ts) s += t.text;
  return s;
}

template <class F>
auto located(const Token& at, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ParseError&) {
    throw;
  } catch (const SemanticError&) {
    throw;
  } catch (const Error& e) {
    throw SemanticError(where(at) + e.what());
  }
}

}  // namespace

SpecFile parseSpec(const std::string& text) {
  SpecFile spec;
  std::vector<Toks> decls = splitDecls(tokenize(text));
  std::vector<OpHeader> headers;
  for (auto& d : decls) {
    const Token& kw = d.front();
    if (kw.text == "sort") {
      if (d.size() != 2 || d[1].t != Token::T::Ident) throw ParseError(kw.line, kw.col, "expected 'sort NAME'");
      spec.sorts.push_back(d[1].text);
    } else if (kw.text == "ghost" || kw.text == "pure" || kw.text == "op") {
      OpHeader h = parseHeader(d);
      if (spec.delta.ops.count(h.info.name)) throw SemanticError(where(kw) + "duplicate operator " + h.info.name);
      auto checkSort = [&](const Sort& s) {
        if (!s.label.empty() && std::find(spec.sorts.begin(), spec.sorts.end(), s.label) == spec.sorts.end())
          throw SemanticError(where(kw) + "undeclared sort " + s.label);
      };
      for (auto& s : h.info.params) checkSort(s);
      checkSort(h.info.ret);
      spec.delta.ops[h.info.name] = h.info;
      spec.opOrder.push_back(h.info.name);
      headers.push_back(std::move(h));
    }
  }
  for (auto& h : headers) {
    if (h.body.empty()) continue;
    TypePtr sig = located(h.at, [&] { return parseSignature(h, spec.delta.ops); });
    located(h.at, [&] {
      checkWellFormedType(TypeContext{}, sig, spec.delta.ops);
      for (auto& c : components(sig))
        if (erase(unfold(c).hoare->a) != h.info.ret)
          throw SemanticError(where(h.at) + "signature of " + h.info.name + " returns " +
                              erase(unfold(c).hoare->a).str() + ", declared " + h.info.ret.str());
      return 0;
    });
    spec.delta.sigs[h.info.name] = sig;
  }
  for (auto& d : decls) {
    const Token& kw = d.front();
    if (kw.text == "property") {
      TokenStream ts(withEnd(d, d.back()));
      ts.next();
      PropertyDecl p;
      p.name = ts.expectIdent();
      if (ts.acceptSym("(")) {
        if (!ts.atSym(")")) {
          do {
            std::string x = ts.expectIdent();
            ts.expectSym(":");
            p.params.emplace_back(x, parseSort(ts));
          } while (ts.acceptSym(","));
        }
        ts.expectSym(")");
      }
      ts.expectSym("=");
      VarSorts vs = propertyVars(p);
      SortScope scope = [vs](const std::string& n) -> std::optional<Sort> {
        auto it = vs.find(n);
        if (it == vs.end()) return std::nullopt;
        return it->second;
      };
      p.sre = located(kw, [&] { return parseRegex(ts, spec.delta.ops, scope); });
      if (!ts.atEnd()) ts.fail("unexpected '" + ts.peek().text + "'");
      for (auto& [n, s] : regexFreeVars(p.sre))
        if (!vs.count(n)) throw SemanticError(where(kw) + "property " + p.name + " mentions undeclared variable " + n);
      if (spec.properties.count(p.name)) throw SemanticError(where(kw) + "duplicate property " + p.name);
      spec.propertyOrder.push_back(p.name);
      spec.properties[p.name] = std::move(p);
    } else if (kw.text == "config") {
      Toks rest(d.begin() + 1, d.end());
      auto parts = splitTop(rest, "=");
      if (parts.size() != 2 || parts[0].empty() || parts[1].empty())
        throw ParseError(kw.line, kw.col, "expected 'config KEY = VALUE'");
      std::string key = joinTokens(parts[0]), value = joinTokens(parts[1]);
      Config probe;
      located(kw, [&] {
        applyConfig(probe, key, value);
        return 0;
      });
      spec.config.emplace_back(key, value);
    }
  }
  return spec;
}

SpecFile loadSpec(const std::string& path) { return parseSpec(readFile(path)); }

std::string printSpec(const SpecFile& spec) {
  std::ostringstream os;
  for (auto& s : spec.sorts) os << "sort " << s << "\n";
  for (auto& name : spec.opOrder) {
    const OpInfo& op = spec.delta.ops.at(name);
    auto sit = spec.delta.sigs.find(name);
    std::vector<TypePtr> comps;
    if (sit != spec.delta.sigs.end()) comps = components(sit->second);
    if (op.kind == OpKind::Ghost) os << "ghost ";
    if (op.kind == OpKind::Pure) os << "pure ";
    os << "op " << name << "(";
    std::vector<Unfolded> us;
    for (auto& c : comps) us.push_back(unfold(c));
    for (size_t k = 0; k < op.params.size(); ++k) {
      os << (k ? ", " : "") << op.paramNames[k] << ":";
      os << (us.empty() ? op.params[k].str() : printType(us[0].params[k].second));
    }
    os << ") -> " << op.ret.str();
    for (size_t c = 0; c < us.size(); ++c) {
      os << (c ? "\n  /\\ " : " =\n     ");
      for (auto& [g, s] : us[c].ghosts) os << g << ":" << s.str() << " ~> ";
      os << printType(us[c].hoare);
    }
    os << "\n";
  }
  for (auto& name : spec.propertyOrder) {
    const PropertyDecl& p = spec.properties.at(name);
    os << "property " << name;
    std::set<std::string> scope;
    if (!p.params.empty()) {
      os << "(";
      for (size_t k = 0; k < p.params.size(); ++k) {
        os << (k ? ", " : "") << p.params[k].first << ":" << p.params[k].second.str();
        scope.insert(p.params[k].first);
      }
      os << ")";
    }
    os << " = " << printRegex(p.sre, scope) << "\n";
  }
  for (auto& [k, v] : spec.config) os << "config " << k << " = " << v << "\n";
  return os.str();
}

VarSorts propertyVars(const PropertyDecl& p) {
  VarSorts vs;
  for (auto& [n, s] : p.params) vs[n] = s;
  return vs;
}

const PropertyDecl& lookupProperty(const SpecFile& spec, const std::string& name) {
  auto it = spec.properties.find(name);
  if (it == spec.properties.end()) throw SemanticError("unknown property " + name);
  return it->second;
}

void applyConfig(Config& cfg, const std::string& key, const std::string& value) {
  auto asInt = [&](const std::string& v) -> int64_t {
    size_t used = 0;
    int64_t n = 0;
    try {
      n = std::stoll(v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != v.size()) throw SemanticError("config " + key + ": expected an integer, got '" + v + "'");
    return n;
  };
  if (key == "unroll-bound") cfg.unrollBound = static_cast<int>(asInt(value));
  else if (key == "max-candidates") cfg.maxCandidates = static_cast<int>(asInt(value));
  else if (key == "max-refine-steps") cfg.maxRefineSteps = static_cast<int>(asInt(value));
  else if (key == "star-bound") cfg.starBound = static_cast<int>(asInt(value));
  else if (key == "max-branches") cfg.maxBranches = static_cast<int>(asInt(value));
  else if (key == "witness-pool") cfg.witnessPool = static_cast<int>(asInt(value));
  else if (key == "assume-retries") cfg.assumeRetries = static_cast<int>(asInt(value));
  else if (key == "step-budget") cfg.stepBudget = asInt(value);
  else if (key == "seed") cfg.seed = static_cast<uint64_t>(asInt(value));
  else if (key == "timeout") {
    try {
      cfg.timeoutSec = std::stod(value);
    } catch (const std::exception&) {
      throw SemanticError("config timeout: expected seconds, got '" + value + "'");
    }
  } else if (key == "domain") {
    size_t dots = value.find("..", 1);
    if (dots == std::string::npos) throw SemanticError("config domain: expected LO..HI, got '" + value + "'");
    int64_t lo = asInt(value.substr(0, dots)), hi = asInt(value.substr(dots + 2));
    if (lo > hi) throw SemanticError("config domain: empty range " + value);
    cfg.domain = Domain{lo, hi};
  } else {
    throw SemanticError("unknown config key " + key);
  }
}

void applyConfigFile(Config& cfg, const std::string& path) {
  std::istringstream in(readFile(path));
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    auto trim = [](std::string s) {
      size_t a = s.find_first_not_of(" \t\r"), b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(n, 1, "expected key = value");
    applyConfig(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

bool traceSatisfies(const Trace& t, const PropertyDecl& p, const Config& cfg) {
  Trace erased = eraseGhost(t);
  Model sigma;
  std::function<bool(size_t)> go = [&](size_t k) -> bool {
    if (k == p.params.size()) return member(erased, p.sre, sigma, cfg.domain);
    const auto& [x, s] = p.params[k];
    std::vector<Value> vals;
    if (s.k == Sort::K::Unit) vals = {Value::unit()};
    else if (s.k == Sort::K::Bool) vals = {Value::boolean(false), Value::boolean(true)};
    else
      for (int64_t v = cfg.domain.lo; v <= cfg.domain.hi; ++v) vals.push_back(Value::integer(v));
    for (auto& v : vals) {
      sigma[x] = v;
      if (go(k + 1)) return true;
    }
    sigma.erase(x);
    return false;
  };
  return go(0);
}

std::string readFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SemanticError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void writeFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SemanticError("cannot write " + path);
  out << text;
}

}  // namespace uhat
