#include <cctype>

#include "uhat/logic.hpp"

namespace uhat {

std::vector<Token> tokenize(const std::string& src) {
  static const char* multi[] = {"(+)", "/\\", "==", "!=", "<=", ">=", "&&", "||", "=>", "->", "~>"};
  std::vector<Token> out;
  int line = 1, col = 1;
  size_t i = 0;
  auto advance = [&](size_t n) {
    for (size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '#' || (c == '/' && i + 1 < src.size() && src[i + 1] == '/')) {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.col = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_' || src[j] == '\''))
        ++j;
      t.t = Token::T::Ident;
      t.text = src.substr(i, j - i);
      advance(j - i);
      out.push_back(t);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      t.t = Token::T::Int;
      t.text = src.substr(i, j - i);
      try {
        t.num = std::stoll(t.text);
      } catch (const std::exception&) {
        throw ParseError(line, col, "integer literal out of range");
      }
      advance(j - i);
      out.push_back(t);
      continue;
    }
    t.t = Token::T::Sym;
    bool matched = false;
    for (const char* m : multi) {
      std::string ms(m);
      if (src.compare(i, ms.size(), ms) == 0) {
        t.text = ms;
        advance(ms.size());
        matched = true;
        break;
      }
    }
    if (!matched) {
      static const std::string singles = "()[]{}<>=!+-*.,:;|&\\~";
      if (singles.find(c) == std::string::npos)
        throw ParseError(line, col, std::string("unexpected character '") + c + "'");
      t.text = std::string(1, c);
      advance(1);
    }
    out.push_back(t);
  }
  Token end;
  end.t = Token::T::End;
  end.line = line;
  end.col = col;
  out.push_back(end);
  return out;
}

const Token& TokenStream::peek(size_t ahead) const {
  size_t p = std::min(pos_ + ahead, toks_.size() - 1);
  return toks_[p];
}

Token TokenStream::next() {
  Token t = peek();
  if (pos_ < toks_.size() - 1) ++pos_;
  return t;
}

bool TokenStream::atSym(const std::string& s, size_t ahead) const {
  const Token& t = peek(ahead);
  return t.t == Token::T::Sym && t.text == s;
}

bool TokenStream::atIdent(const std::string& s, size_t ahead) const {
  const Token& t = peek(ahead);
  return t.t == Token::T::Ident && t.text == s;
}

bool TokenStream::acceptSym(const std::string& s) {
  if (!atSym(s)) return false;
  next();
  return true;
}

bool TokenStream::acceptIdent(const std::string& s) {
  if (!atIdent(s)) return false;
  next();
  return true;
}

void TokenStream::expectSym(const std::string& s) {
  if (!acceptSym(s)) fail("expected '" + s + "'");
}

std::string TokenStream::expectIdent() {
  if (peek().t != Token::T::Ident) fail("expected identifier");
  return next().text;
}

int64_t TokenStream::expectInt() {
  bool neg = acceptSym("-");
  if (peek().t != Token::T::Int) fail("expected integer");
  int64_t v = next().num;
  return neg ? -v : v;
}

void TokenStream::fail(const std::string& msg) const {
  const Token& t = peek();
  std::string near = t.t == Token::T::End ? "end of input" : "'" + t.text + "'";
  throw ParseError(t.line, t.col, msg + " near " + near);
}

Sort parseSort(TokenStream& ts) {
  Sort base;
  if (ts.acceptSym("(")) {
    base = parseSort(ts);
    ts.expectSym(")");
  } else {
    std::string n = ts.expectIdent();
    if (n == "int") base = Sort::integer();
    else if (n == "bool") base = Sort::boolean();
    else if (n == "unit") base = Sort::unit();
    else base = Sort::named(n);
  }
  if (ts.acceptSym("->")) return Sort::arrow(base, parseSort(ts));
  return base;
}

namespace {

bool startsAtom(const Token& t) {
  if (t.t == Token::T::Int || t.t == Token::T::Ident) return true;
  return t.t == Token::T::Sym && (t.text == "(" || t.text == "-" || t.text == "!");
}

Formula parseImp(TokenStream& ts, const SortScope& scope);

Formula parseVarRef(TokenStream& ts, const SortScope& scope) {
  std::string n = ts.expectIdent();
  if (n == "true") return mkTrue();
  if (n == "false") return mkFalse();
  std::optional<Sort> s = scope ? scope(n) : std::nullopt;
  return mkVar(n, s ? *s : Sort::integer());
}

Formula parseCmp(TokenStream& ts, const SortScope& scope) {
  Formula a = parseTerm(ts, scope);
  const Token& t = ts.peek();
  if (t.t != Token::T::Sym) return a;
  const std::string op = t.text;
  if (op == ">" && !startsAtom(ts.peek(1))) return a;
  if (op != "==" && op != "!=" && op != "<" && op != "<=" && op != ">" && op != ">=") return a;
  ts.next();
  Formula b = parseTerm(ts, scope);
  if (op == "==") return mkEq(a, b);
  if (op == "!=") return mkNot(mkEq(a, b));
  if (op == "<") return mkLt(a, b);
  if (op == "<=") return mkLe(a, b);
  if (op == ">") return mkLt(b, a);
  return mkLe(b, a);
}

Formula parseUnary(TokenStream& ts, const SortScope& scope) {
  if (ts.acceptSym("!")) return mkNot(parseUnary(ts, scope));
  if (ts.atIdent("forall") || ts.atIdent("exists")) {
    bool all = ts.next().text == "forall";
    std::string x = ts.expectIdent();
    ts.expectSym(":");
    Sort s = parseSort(ts);
    ts.expectSym(".");
    SortScope inner = [&](const std::string& n) -> std::optional<Sort> {
      if (n == x) return s;
      return scope ? scope(n) : std::nullopt;
    };
    Formula body = parseImp(ts, inner);
    return all ? mkForall(x, s, body) : mkExists(x, s, body);
  }
  return parseCmp(ts, scope);
}

Formula parseAndF(TokenStream& ts, const SortScope& scope) {
  std::vector<Formula> xs{parseUnary(ts, scope)};
  while (ts.acceptSym("&&")) xs.push_back(parseUnary(ts, scope));
  return xs.size() == 1 ? xs[0] : mkAnd(xs);
}

Formula parseOrF(TokenStream& ts, const SortScope& scope) {
  std::vector<Formula> xs{parseAndF(ts, scope)};
  while (ts.acceptSym("||")) xs.push_back(parseAndF(ts, scope));
  return xs.size() == 1 ? xs[0] : mkOr(xs);
}

Formula parseImp(TokenStream& ts, const SortScope& scope) {
  Formula a = parseOrF(ts, scope);
  if (ts.acceptSym("=>")) return mkImp(a, parseImp(ts, scope));
  return a;
}

}  // namespace

Formula parseAtomTerm(TokenStream& ts, const SortScope& scope) {
  const Token& t = ts.peek();
  if (t.t == Token::T::Int) return mkInt(ts.next().num);
  if (ts.atSym("-") && ts.peek(1).t == Token::T::Int) {
    ts.next();
    return mkInt(-ts.next().num);
  }
  if (ts.atSym("(")) {
    if (ts.atSym(")", 1)) {
      ts.next();
      ts.next();
      return mkUnit();
    }
    ts.next();
    Formula f = parseImp(ts, scope);
    ts.expectSym(")");
    return f;
  }
  if (t.t == Token::T::Ident) return parseVarRef(ts, scope);
  ts.fail("expected term");
}

Formula parseTerm(TokenStream& ts, const SortScope& scope) {
  Formula a = parseAtomTerm(ts, scope);
  for (;;) {
    if (ts.atSym("+")) {
      ts.next();
      a = mkAdd(a, parseAtomTerm(ts, scope));
    } else if (ts.atSym("-")) {
      ts.next();
      a = mkSub(a, parseAtomTerm(ts, scope));
    } else {
      return a;
    }
  }
}

Formula parseFormula(TokenStream& ts, const SortScope& scope) { return parseImp(ts, scope); }

Formula parseFormula(const std::string& src, const SortScope& scope) {
  TokenStream ts(tokenize(src));
  Formula f = parseImp(ts, scope);
  if (!ts.atEnd()) ts.fail("trailing input");
  sortOf(f);
  return f;
}

}  // namespace uhat
