#include "mflar/tptp.hpp"

#include <cctype>
#include <optional>

#include "mflar/errors.hpp"

namespace mflar::tptp {

std::string_view role_name(Role r) { return r == Role::axiom ? "axiom" : "conjecture"; }

std::string format_term(const Term& t) {
  if (t.args().empty()) return t.name();
  std::string out = t.name() + "(";
  for (std::size_t i = 0; i < t.args().size(); ++i) {
    if (i) out += ",";
    out += format_term(t.args()[i]);
  }
  return out + ")";
}

namespace {

using K = Formula::Kind;

std::string format_rec(const Formula& f);

std::string join_vars(const std::vector<std::string>& vs) {
  std::string out;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (i) out += ",";
    out += vs[i];
  }
  return out;
}

// Operand of a binary connective or of negation.
std::string operand(const Formula& f) {
  if (f.is_binary() || f.is_quantifier()) return "(" + format_rec(f) + ")";
  return format_rec(f);
}

std::string format_rec(const Formula& f) {
  switch (f.kind()) {
    case K::verum:
      return "$true";
    case K::atom: {
      if (f.terms().empty()) return f.predicate();
      std::string out = f.predicate() + "(";
      for (std::size_t i = 0; i < f.terms().size(); ++i) {
        if (i) out += ",";
        out += format_term(f.terms()[i]);
      }
      return out + ")";
    }
    case K::equality:
      return format_term(f.terms()[0]) + " = " + format_term(f.terms()[1]);
    case K::negation:
      if (f.body().is(K::equality)) return "~ (" + format_rec(f.body()) + ")";
      return "~ " + operand(f.body());
    case K::conjunction:
    case K::disjunction: {
      std::string sep = f.is(K::conjunction) ? " & " : " | ";
      std::string out;
      for (std::size_t i = 0; i < f.children().size(); ++i) {
        if (i) out += sep;
        out += operand(f.children()[i]);
      }
      return out;
    }
    case K::implication:
      return operand(f.children()[0]) + " => " + operand(f.children()[1]);
    case K::equivalence:
      return operand(f.children()[0]) + " <=> " + operand(f.children()[1]);
    case K::universal:
    case K::existential: {
      std::string out = f.is(K::universal) ? "! [" : "? [";
      out += join_vars(f.vars()) + "] : ";
      const Formula& b = f.body();
      out += b.is_binary() ? "(" + format_rec(b) + ")" : format_rec(b);
      return out;
    }
  }
  return {};
}

}  // namespace

std::string format_formula(const Formula& f) { return format_rec(f); }

std::string serialize(const std::string& name, Role role, const Formula& f) {
  auto free = free_variables(f);
  if (!free.empty()) {
    std::string list;
    for (const auto& v : free) list += (list.empty() ? "" : ", ") + v;
    throw OpenFormulaError("formula '" + name + "' has free variables: " + list);
  }
  return "fof(" + name + ", " + std::string(role_name(role)) + ", " + format_rec(f) + ").";
}

namespace {

enum class Tok {
  lower,
  upper,
  dollar,
  lparen,
  rparen,
  lbracket,
  rbracket,
  comma,
  dot,
  colon,
  bang,
  question,
  tilde,
  amp,
  bar,
  implies,
  implied,
  iff,
  xor_,
  nor,
  nand,
  eq,
  neq,
  end
};

struct Token {
  Tok kind;
  std::string text;
  std::size_t line, col;
};

class Lexer {
 public:
  explicit Lexer(std::string_view s) : src_(s) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip();
      if (pos_ >= src_.size()) {
        out.push_back({Tok::end, "", line_, col_});
        return out;
      }
      out.push_back(next());
    }
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '%') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '*') {
        advance();
        advance();
        while (pos_ + 1 < src_.size() && !(src_[pos_] == '*' && src_[pos_ + 1] == '/')) advance();
        if (pos_ + 1 >= src_.size()) throw SyntaxError(line_, col_, "unterminated comment");
        advance();
        advance();
      } else {
        break;
      }
    }
  }

  bool starts(std::string_view s) const { return src_.substr(pos_, s.size()) == s; }

  Token take(Tok k, std::size_t n) {
    Token t{k, std::string(src_.substr(pos_, n)), line_, col_};
    for (std::size_t i = 0; i < n; ++i) advance();
    return t;
  }

  Token next() {
    char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '$') {
      std::size_t start = pos_, l = line_, col = col_;
      advance();
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        advance();
      std::string text(src_.substr(start, pos_ - start));
      Tok k = c == '$' ? Tok::dollar
              : std::isupper(static_cast<unsigned char>(c)) ? Tok::upper
                                                            : Tok::lower;
      return {k, text, l, col};
    }
    if (c == '\'') {
      std::size_t l = line_, col = col_;
      advance();
      std::string text;
      while (pos_ < src_.size() && src_[pos_] != '\'') {
        if (src_[pos_] == '\\' && pos_ + 1 < src_.size()) advance();
        text += src_[pos_];
        advance();
      }
      if (pos_ >= src_.size()) throw SyntaxError(l, col, "unterminated quoted atom");
      advance();
      return {Tok::lower, text, l, col};
    }
    if (starts("<=>")) return take(Tok::iff, 3);
    if (starts("<~>")) return take(Tok::xor_, 3);
    if (starts("=>")) return take(Tok::implies, 2);
    if (starts("<=")) return take(Tok::implied, 2);
    if (starts("~|")) return take(Tok::nor, 2);
    if (starts("~&")) return take(Tok::nand, 2);
    if (starts("!=")) return take(Tok::neq, 2);
    switch (c) {
      case '(': return take(Tok::lparen, 1);
      case ')': return take(Tok::rparen, 1);
      case '[': return take(Tok::lbracket, 1);
      case ']': return take(Tok::rbracket, 1);
      case ',': return take(Tok::comma, 1);
      case '.': return take(Tok::dot, 1);
      case ':': return take(Tok::colon, 1);
      case '!': return take(Tok::bang, 1);
      case '?': return take(Tok::question, 1);
      case '~': return take(Tok::tilde, 1);
      case '&': return take(Tok::amp, 1);
      case '|': return take(Tok::bar, 1);
      case '=': return take(Tok::eq, 1);
      default:
        throw SyntaxError(line_, col_, std::string("unexpected character '") + c + "'");
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0, line_ = 1, col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : toks_(Lexer(text).run()) {}

  std::vector<AnnotatedFormula> file() {
    std::vector<AnnotatedFormula> out;
    while (peek().kind != Tok::end) {
      const Token& head = expect(Tok::lower, "annotated formula");
      if (head.text == "include") fail(head, "include directives are not supported");
      if (head.text != "fof") fail(head, "only fof formulas are supported, got '" + head.text + "'");
      expect(Tok::lparen, "'('");
      std::string name = name_token();
      expect(Tok::comma, "','");
      std::string role = expect(Tok::lower, "formula role").text;
      expect(Tok::comma, "','");
      Formula f = formula();
      // Optional source/useful-info annotations are skipped.
      if (peek().kind == Tok::comma) skip_balanced_until_close();
      expect(Tok::rparen, "')'");
      expect(Tok::dot, "'.'");
      out.push_back({std::move(name), std::move(role), std::move(f)});
    }
    return out;
  }

  Formula single() {
    Formula f = formula();
    if (peek().kind != Tok::end) fail(peek(), "trailing input");
    return f;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& advance() { return toks_[pos_++]; }

  [[noreturn]] void fail(const Token& t, const std::string& msg) const {
    throw SyntaxError(t.line, t.col, msg);
  }

  const Token& expect(Tok k, const std::string& what) {
    if (peek().kind != k) fail(peek(), "expected " + what + ", got '" + peek().text + "'");
    return advance();
  }

  std::string name_token() {
    const Token& t = peek();
    if (t.kind == Tok::lower || t.kind == Tok::upper) return advance().text;
    // Integer names are allowed by TPTP but never produced here.
    fail(t, "expected formula name");
  }

  void skip_balanced_until_close() {
    int depth = 0;
    while (peek().kind != Tok::end) {
      Tok k = peek().kind;
      if (k == Tok::lparen || k == Tok::lbracket) ++depth;
      if (k == Tok::rparen || k == Tok::rbracket) {
        if (depth == 0) return;
        --depth;
      }
      advance();
    }
  }

  Formula formula() {
    Formula lhs = unitary();
    Tok k = peek().kind;
    if (k == Tok::amp || k == Tok::bar) {
      std::vector<Formula> ops{lhs};
      while (peek().kind == k) {
        advance();
        ops.push_back(unitary());
      }
      if (peek().kind == Tok::amp || peek().kind == Tok::bar)
        fail(peek(), "mixed '&' and '|' without parentheses");
      return k == Tok::amp ? Formula::conjunction(std::move(ops))
                           : Formula::disjunction(std::move(ops));
    }
    switch (k) {
      case Tok::implies: advance(); return Formula::implication(lhs, unitary());
      case Tok::implied: advance(); return Formula::implication(unitary(), lhs);
      case Tok::iff: advance(); return Formula::equivalence(lhs, unitary());
      case Tok::xor_: advance(); return Formula::negation(Formula::equivalence(lhs, unitary()));
      case Tok::nor:
        advance();
        return Formula::negation(Formula::disjunction({lhs, unitary()}));
      case Tok::nand:
        advance();
        return Formula::negation(Formula::conjunction({lhs, unitary()}));
      default:
        return lhs;
    }
  }

  Formula unitary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::lparen: {
        advance();
        Formula f = formula();
        expect(Tok::rparen, "')'");
        return f;
      }
      case Tok::tilde:
        advance();
        return Formula::negation(unitary());
      case Tok::bang:
      case Tok::question: {
        bool universal = t.kind == Tok::bang;
        advance();
        expect(Tok::lbracket, "'['");
        std::vector<std::string> vars;
        for (;;) {
          vars.push_back(expect(Tok::upper, "variable").text);
          if (peek().kind != Tok::comma) break;
          advance();
        }
        expect(Tok::rbracket, "']'");
        expect(Tok::colon, "':'");
        Formula body = unitary();
        return universal ? Formula::universal(std::move(vars), std::move(body))
                         : Formula::existential(std::move(vars), std::move(body));
      }
      default:
        return atomic();
    }
  }

  Formula atomic() {
    const Token& t = peek();
    if (t.kind == Tok::dollar) {
      advance();
      if (t.text == "$true") return Formula::verum();
      if (t.text == "$false") return Formula::negation(Formula::verum());
      fail(t, "unsupported defined symbol '" + t.text + "'");
    }
    Term lhs = term();
    if (peek().kind == Tok::eq || peek().kind == Tok::neq) {
      bool negated = advance().kind == Tok::neq;
      Formula eq = Formula::equality(lhs, term());
      return negated ? Formula::negation(eq) : eq;
    }
    if (lhs.is_variable()) fail(t, "variable '" + lhs.name() + "' used as a formula");
    return Formula::atom(lhs.name(), lhs.args());
  }

  Term term() {
    const Token& t = peek();
    if (t.kind == Tok::upper) {
      advance();
      return Term::variable(t.text);
    }
    if (t.kind != Tok::lower) fail(t, "expected term, got '" + t.text + "'");
    advance();
    if (peek().kind != Tok::lparen) return Term::constant(t.text);
    advance();
    std::vector<Term> args;
    for (;;) {
      args.push_back(term());
      if (peek().kind != Tok::comma) break;
      advance();
    }
    expect(Tok::rparen, "')'");
    return Term::application(t.text, std::move(args));
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<AnnotatedFormula> parse(std::string_view text) { return Parser(text).file(); }

Formula parse_formula(std::string_view text) { return Parser(text).single(); }

}  // namespace mflar::tptp
