#include <algorithm>
#include <cctype>
#include <map>
#include <regex>
#include <set>

#include "mflar/article.hpp"
#include "mflar/errors.hpp"

namespace mflar {

std::string_view token_role_name(TokenRole r) {
  switch (r) {
    case TokenRole::article: return "article";
    case TokenRole::variable: return "variable";
    case TokenRole::type: return "type";
    case TokenRole::functor: return "functor";
    case TokenRole::predicate: return "predicate";
    case TokenRole::label: return "label";
    case TokenRole::reference: return "reference";
  }
  return "variable";
}

bool looks_like_library_ref(std::string_view name) {
  static const std::regex re("[td][0-9]+_[a-z][a-z0-9_]*");
  return std::regex_match(name.begin(), name.end(), re);
}

bool is_reserved_symbol(std::string_view name) {
  return name.starts_with("skf_") || name.starts_with("skc_") ||
         name.find("__") != std::string_view::npos;
}

const std::string* Article::reserved_type(const std::string& var) const {
  for (const auto& r : reservations)
    if (r.variable == var) return &r.type;
  return nullptr;
}

const FunctorDecl* Article::functor(const std::string& n) const {
  for (const auto& f : functors)
    if (f.name == n) return &f;
  return nullptr;
}

const Item* Article::item_by_label(const std::string& label) const {
  for (const auto& i : items)
    if (i.label == label) return &i;
  return nullptr;
}

namespace {

const std::set<std::string, std::less<>> kKeywords = {
    "article", "reserve", "for",  "func", "definition", "theorem", "proof",   "end", "let",
    "assume",  "thus",    "by",   "holds", "ex",        "st",      "or",      "implies",
    "iff",     "not"};

enum class Tok { ident, keyword, semicolon, comma, colon, lparen, rparen, arrow, eq, amp, end };

struct Token {
  Tok kind;
  std::string text;
  std::size_t offset;
  SourcePos pos;
};

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0, line = 1, col = 1;
  auto bump = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      bump(1);
      continue;
    }
    if (c == ':' && i + 1 < src.size() && src[i + 1] == ':') {
      while (i < src.size() && src[i] != '\n') bump(1);
      continue;
    }
    SourcePos pos{line, col};
    std::size_t start = i;
    if (std::isalpha(static_cast<unsigned char>(c))) {
      while (i < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_'))
        bump(1);
      std::string text(src.substr(start, i - start));
      Tok k = kKeywords.contains(text) ? Tok::keyword : Tok::ident;
      out.push_back({k, std::move(text), start, pos});
      continue;
    }
    Tok k;
    std::size_t n = 1;
    switch (c) {
      case ';': k = Tok::semicolon; break;
      case ',': k = Tok::comma; break;
      case ':': k = Tok::colon; break;
      case '(': k = Tok::lparen; break;
      case ')': k = Tok::rparen; break;
      case '=': k = Tok::eq; break;
      case '&': k = Tok::amp; break;
      case '-':
        if (i + 1 < src.size() && src[i + 1] == '>') {
          k = Tok::arrow;
          n = 2;
          break;
        }
        [[fallthrough]];
      default:
        throw SyntaxError(line, col, std::string("unexpected character '") + c + "'");
    }
    bump(n);
    out.push_back({k, std::string(src.substr(start, n)), start, pos});
  }
  out.push_back({Tok::end, "", src.size(), {line, col}});
  return out;
}

class Parser {
 public:
  Parser(std::string_view src, SymbolTable& symbols, bool allow_free)
      : toks_(lex(src)), symbols_(symbols), allow_free_(allow_free) {}

  Article article() {
    Article a;
    expect_keyword("article");
    const Token& name = expect_ident("article name");
    static const std::regex article_re("[a-z][a-z0-9_]*");
    if (!std::regex_match(name.text, article_re) || name.text.find("__") != std::string::npos)
      fail(name, "invalid article name '" + name.text + "'");
    a.name = name.text;
    annotate(name, TokenRole::article, "#article");
    expect(Tok::semicolon, "';'");
    article_ = &a;

    int def_ord = 0, thm_ord = 0;
    while (peek().kind != Tok::end) {
      const Token& t = peek();
      if (is_keyword("reserve")) {
        reserve(a);
      } else if (is_keyword("func")) {
        func(a);
      } else if (is_keyword("definition") || is_keyword("theorem")) {
        bool is_def = t.text == "definition";
        Item item = this->item(a, is_def ? ItemKind::definition : ItemKind::theorem,
                               is_def ? ++def_ord : ++thm_ord);
        a.items.push_back(std::move(item));
      } else {
        fail(t, "expected 'reserve', 'func', 'definition' or 'theorem', got '" + t.text + "'");
      }
    }
    a.symbols = symbols_;
    a.identifiers = std::move(idents_);
    return a;
  }

  Formula standalone_formula() {
    Formula f = formula();
    if (peek().kind != Tok::end) fail(peek(), "trailing input after formula");
    return f;
  }

 private:
  struct LabelScope {
    std::map<std::string, Reference> labels;
    std::map<std::string, std::string> lets;  // let variable -> anchor
  };

  const Token& peek(std::size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  const Token& advance() { return toks_[pos_++]; }

  [[noreturn]] void fail(const Token& t, const std::string& msg) const {
    throw SyntaxError(t.pos.line, t.pos.column, msg);
  }

  bool is_keyword(std::string_view kw, std::size_t k = 0) const {
    return peek(k).kind == Tok::keyword && peek(k).text == kw;
  }

  const Token& expect(Tok k, const std::string& what) {
    if (peek().kind != k) {
      fail(peek(), "expected " + what + ", got '" + (peek().kind == Tok::end ? "end of input" : peek().text) + "'");
    }
    return advance();
  }

  void expect_keyword(std::string_view kw) {
    if (!is_keyword(kw)) {
      fail(peek(), "expected '" + std::string(kw) + "', got '" +
                       (peek().kind == Tok::end ? "end of input" : peek().text) + "'");
    }
    advance();
  }

  const Token& expect_ident(const std::string& what) { return expect(Tok::ident, what); }

  const Token& expect_variable() {
    const Token& t = expect_ident("variable");
    if (!is_variable_name(t.text)) fail(t, "'" + t.text + "' is not a variable name");
    return t;
  }

  const Token& expect_symbol(const std::string& what) {
    const Token& t = expect_ident(what);
    if (!is_symbol_name(t.text)) fail(t, "'" + t.text + "' is not a valid " + what);
    if (is_reserved_symbol(t.text)) fail(t, "'" + t.text + "' uses a reserved symbol name");
    return t;
  }

  void annotate(const Token& t, TokenRole role, std::string anchor) {
    idents_.push_back({t.offset, t.text.size(), t.pos, t.text, role, std::move(anchor)});
  }

  void record(const Token& t, SymbolKind kind, std::size_t arity) {
    try {
      symbols_.record(t.text, kind, arity);
    } catch (const ArityError& e) {
      throw ArityError(e.symbol(), "line " + std::to_string(t.pos.line) + ", column " +
                                       std::to_string(t.pos.column) + ": " + e.what());
    }
  }

  void reserve(Article& a) {
    advance();
    std::vector<const Token*> vars;
    for (;;) {
      vars.push_back(&expect_variable());
      if (peek().kind != Tok::comma) break;
      advance();
    }
    expect_keyword("for");
    const Token& type = expect_symbol("type name");
    record(type, SymbolKind::predicate, 1);
    expect(Tok::semicolon, "';'");
    for (const Token* v : vars) {
      if (a.reserved_type(v->text)) fail(*v, "variable '" + v->text + "' is already reserved");
      a.reservations.push_back({v->text, type.text});
      annotate(*v, TokenRole::variable, "#reserve-" + v->text);
    }
    annotate(type, TokenRole::type, "");
  }

  void func(Article& a) {
    const Token& kw = advance();
    const Token& name = expect_symbol("functor name");
    if (a.functor(name.text)) fail(name, "functor '" + name.text + "' declared twice");
    annotate(name, TokenRole::functor, "#func-" + name.text);
    FunctorDecl decl;
    decl.name = name.text;
    decl.pos = kw.pos;
    expect(Tok::lparen, "'('");
    if (peek().kind != Tok::rparen) {
      for (;;) {
        const Token& p = expect_variable();
        if (std::find(decl.params.begin(), decl.params.end(), p.text) != decl.params.end())
          fail(p, "duplicate parameter '" + p.text + "'");
        decl.params.push_back(p.text);
        annotate(p, TokenRole::variable,
                 a.reserved_type(p.text) ? "#reserve-" + p.text : "#func-" + name.text);
        if (peek().kind != Tok::comma) break;
        advance();
      }
    }
    expect(Tok::rparen, "')'");
    expect(Tok::arrow, "'->'");
    const Token& type = expect_symbol("type name");
    annotate(type, TokenRole::type, "");
    expect(Tok::semicolon, "';'");
    record(name, SymbolKind::functor, decl.params.size());
    record(type, SymbolKind::predicate, 1);
    decl.result_type = type.text;
    decl.ordinal = static_cast<int>(a.functors.size()) + 1;
    a.functors.push_back(std::move(decl));
  }

  Item item(Article& a, ItemKind kind, int ordinal) {
    const Token& kw = advance();
    Item it;
    it.kind = kind;
    it.ordinal = ordinal;
    it.position = static_cast<int>(a.items.size()) + 1;
    it.pos = kw.pos;
    const Token& label = expect_ident("label");
    if (item_labels_.contains(label.text)) fail(label, "duplicate label '" + label.text + "'");
    it.label = label.text;
    annotate(label, TokenRole::label, "#item-" + label.text);
    expect(Tok::colon, "':'");
    current_item_ = &it;
    step_counter_ = 0;
    scopes_.clear();
    it.formula = formula();
    if (is_keyword("proof")) {
      if (kind == ItemKind::definition) fail(peek(), "definitions take no proof");
      it.proof = proof();
    }
    expect(Tok::semicolon, "';'");
    Reference self;
    self.name = it.label;
    self.target = RefTarget::local_item;
    self.index = a.items.size();
    item_labels_.emplace(it.label, self);
    current_item_ = nullptr;
    return it;
  }

  // "proof" {step} "end"; the caller consumes the trailing ';'.
  Proof proof() {
    expect_keyword("proof");
    scopes_.emplace_back();
    Proof p;
    while (!is_keyword("end")) {
      if (peek().kind == Tok::end) fail(peek(), "unterminated proof");
      p.steps.push_back(step());
    }
    advance();
    scopes_.pop_back();
    return p;
  }

  std::string step_anchor(std::size_t index) const {
    return "#step-" + std::to_string(current_item_->position) + "-" + std::to_string(index);
  }

  void define_label(const Token& t, std::size_t step_index) {
    if (lookup_label(t.text)) fail(t, "duplicate label '" + t.text + "'");
    Reference r;
    r.name = t.text;
    r.target = RefTarget::local_step;
    r.index = step_index;
    scopes_.back().labels.emplace(t.text, r);
    annotate(t, TokenRole::label, step_anchor(step_index));
  }

  const Reference* lookup_label(const std::string& name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->labels.find(name);
      if (f != it->labels.end()) return &f->second;
    }
    auto f = item_labels_.find(name);
    return f == item_labels_.end() ? nullptr : &f->second;
  }

  ProofStep step() {
    ProofStep s;
    s.pos = peek().pos;
    s.index = ++step_counter_;
    if (is_keyword("let")) {
      advance();
      s.kind = StepKind::let;
      for (;;) {
        const Token& v = expect_variable();
        if (!article_->reserved_type(v.text))
          fail(v, "variable '" + v.text + "' has no reserved type");
        s.vars.push_back(v.text);
        std::string anchor = "#v" + std::to_string(v.offset);
        scopes_.back().lets[v.text] = anchor;
        annotate(v, TokenRole::variable, anchor);
        if (peek().kind != Tok::comma) break;
        advance();
      }
      expect(Tok::semicolon, "';'");
      return s;
    }
    if (is_keyword("assume")) {
      advance();
      s.kind = StepKind::assume;
      if (peek().kind == Tok::ident && peek(1).kind == Tok::colon) {
        const Token& l = advance();
        advance();
        define_label(l, s.index);
        s.label = l.text;
      }
      s.formula = formula();
      expect(Tok::semicolon, "';'");
      return s;
    }
    if (is_keyword("thus")) {
      advance();
      s.kind = StepKind::thus;
      s.formula = formula();
      s.just = justification();
      expect(Tok::semicolon, "';'");
      return s;
    }
    if (peek().kind == Tok::ident && peek(1).kind == Tok::colon) {
      const Token& l = advance();
      advance();
      s.kind = StepKind::aux;
      s.formula = formula();
      s.just = justification();
      // The label becomes visible after its own justification.
      define_label(l, s.index);
      s.label = l.text;
      expect(Tok::semicolon, "';'");
      return s;
    }
    fail(peek(), "expected proof step, got '" + peek().text + "'");
  }

  Justification justification() {
    Justification j;
    if (is_keyword("proof")) {
      j.kind = Justification::Kind::proof;
      j.proof = std::make_shared<const Proof>(proof());
      return j;
    }
    expect_keyword("by");
    j.kind = Justification::Kind::by;
    for (;;) {
      const Token& t = expect_ident("reference");
      Reference r;
      if (const Reference* local = lookup_label(t.text)) {
        r = *local;
      } else if (looks_like_library_ref(t.text)) {
        r.name = t.text;
        r.target = RefTarget::library;
      } else {
        throw ReferenceError(t.text, "line " + std::to_string(t.pos.line) + ", column " +
                                         std::to_string(t.pos.column) +
                                         ": unknown reference '" + t.text + "'");
      }
      r.pos = t.pos;
      std::string anchor =
          r.target == RefTarget::library  ? "/library/" + r.name
          : r.target == RefTarget::local_item ? "#item-" + r.name
                                              : step_anchor(r.index);
      annotate(t, TokenRole::reference, anchor);
      j.refs.push_back(std::move(r));
      if (peek().kind != Tok::comma) break;
      advance();
    }
    return j;
  }

  // ---- formulas ----

  Formula formula() {
    if (is_keyword("for") || is_keyword("ex")) return quantified();
    Formula lhs = implication();
    while (is_keyword("iff")) {
      advance();
      lhs = Formula::equivalence(lhs, implication());
    }
    return lhs;
  }

  Formula quantified() {
    bool universal = advance().text == "for";
    std::vector<std::string> vars;
    std::vector<const Token*> vtoks;
    for (;;) {
      const Token& v = expect_variable();
      vars.push_back(v.text);
      vtoks.push_back(&v);
      annotate(v, TokenRole::variable, "#v" + std::to_string(v.offset));
      if (peek().kind != Tok::comma) break;
      advance();
    }
    expect_keyword(universal ? "holds" : "st");
    for (const Token* v : vtoks) bound_.emplace_back(v->text, "#v" + std::to_string(v->offset));
    Formula body = formula();
    bound_.resize(bound_.size() - vtoks.size());
    return universal ? Formula::universal(std::move(vars), std::move(body))
                     : Formula::existential(std::move(vars), std::move(body));
  }

  Formula implication() {
    Formula lhs = disjunction();
    if (!is_keyword("implies")) return lhs;
    advance();
    Formula rhs = (is_keyword("for") || is_keyword("ex")) ? quantified() : implication();
    return Formula::implication(lhs, rhs);
  }

  Formula disjunction() {
    std::vector<Formula> ops{conjunction()};
    while (is_keyword("or")) {
      advance();
      ops.push_back(conjunction());
    }
    return ops.size() == 1 ? ops.front() : Formula::disjunction(std::move(ops));
  }

  Formula conjunction() {
    std::vector<Formula> ops{unary()};
    while (peek().kind == Tok::amp) {
      advance();
      ops.push_back(unary());
    }
    return ops.size() == 1 ? ops.front() : Formula::conjunction(std::move(ops));
  }

  Formula unary() {
    if (is_keyword("not")) {
      advance();
      return Formula::negation(unary());
    }
    if (is_keyword("for") || is_keyword("ex")) return quantified();
    if (peek().kind == Tok::lparen) {
      advance();
      Formula f = formula();
      expect(Tok::rparen, "')'");
      return f;
    }
    return atomic();
  }

  Formula atomic() {
    const Token& head = expect_ident("formula");
    if (is_variable_name(head.text)) {
      Term lhs = term_from(head);
      expect(Tok::eq, "'='");
      return Formula::equality(std::move(lhs), term());
    }
    if (!is_symbol_name(head.text)) fail(head, "invalid predicate name '" + head.text + "'");
    if (is_reserved_symbol(head.text)) fail(head, "'" + head.text + "' uses a reserved symbol name");
    std::size_t slot = idents_.size();
    annotate(head, TokenRole::predicate, "");
    std::vector<Term> args = arguments();
    if (peek().kind == Tok::eq) {
      idents_[slot].role = TokenRole::functor;
      record(head, SymbolKind::functor, args.size());
      advance();
      return Formula::equality(Term::application(head.text, std::move(args)), term());
    }
    record(head, SymbolKind::predicate, args.size());
    return Formula::atom(head.text, std::move(args));
  }

  std::vector<Term> arguments() {
    std::vector<Term> args;
    if (peek().kind != Tok::lparen) return args;
    advance();
    for (;;) {
      args.push_back(term());
      if (peek().kind != Tok::comma) break;
      advance();
    }
    expect(Tok::rparen, "')'");
    return args;
  }

  Term term() { return term_from(expect_ident("term")); }

  Term term_from(const Token& head) {
    if (is_variable_name(head.text)) {
      annotate(head, TokenRole::variable, variable_anchor(head));
      return Term::variable(head.text);
    }
    if (!is_symbol_name(head.text)) fail(head, "invalid term '" + head.text + "'");
    if (is_reserved_symbol(head.text)) fail(head, "'" + head.text + "' uses a reserved symbol name");
    annotate(head, TokenRole::functor, "");
    std::vector<Term> args = arguments();
    record(head, SymbolKind::functor, args.size());
    return Term::application(head.text, std::move(args));
  }

  std::string variable_anchor(const Token& v) {
    for (auto it = bound_.rbegin(); it != bound_.rend(); ++it)
      if (it->first == v.text) return it->second;
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->lets.find(v.text);
      if (f != it->lets.end()) return f->second;
    }
    if (!allow_free_) fail(v, "unbound variable '" + v.text + "'");
    return "";
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  SymbolTable& symbols_;
  bool allow_free_;
  Article* article_ = nullptr;
  Item* current_item_ = nullptr;
  std::size_t step_counter_ = 0;
  std::vector<LabelScope> scopes_;
  std::map<std::string, Reference> item_labels_;
  std::vector<std::pair<std::string, std::string>> bound_;
  std::vector<IdentToken> idents_;
};

}  // namespace

Article parse_article(std::string_view text) {
  SymbolTable symbols;
  return Parser(text, symbols, false).article();
}

Formula parse_formula(std::string_view text, SymbolTable& symbols) {
  return Parser(text, symbols, true).standalone_formula();
}

std::size_t count_by_justifications(const Article& a) {
  std::size_t n = 0;
  auto walk = [&](auto&& self, const Proof& p) -> void {
    for (const auto& s : p.steps) {
      if (!s.just) continue;
      if (s.just->kind == Justification::Kind::by) {
        ++n;
      } else {
        self(self, *s.just->proof);
      }
    }
  };
  for (const auto& it : a.items)
    if (it.proof) walk(walk, *it.proof);
  return n;
}

}  // namespace mflar
