#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "topos_forge/error.hpp"
#include "topos_forge/formula.hpp"
#include "topos_forge/signature.hpp"

namespace topos {

namespace detail {

enum class Tok { Ident, LParen, RParen, Comma, Colon, Dot, Equals, And, Or, Implies, Not, True, False, Forall, Exists, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t line;
  std::size_t column;
};

inline const char* token_name(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::Comma: return "','";
    case Tok::Colon: return "':'";
    case Tok::Dot: return "'.'";
    case Tok::Equals: return "'='";
    case Tok::And: return "'/\\'";
    case Tok::Or: return "'\\/'";
    case Tok::Implies: return "'->'";
    case Tok::Not: return "'~'";
    case Tok::True: return "'true'";
    case Tok::False: return "'false'";
    case Tok::Forall: return "'forall'";
    case Tok::Exists: return "'exists'";
    case Tok::End: return "end of input";
  }
  return "token";
}

/// Tokenizer with ASCII and Unicode spellings of every connective.
/// Columns count code points, starting at 1.
class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      std::size_t line = line_, col = col_;
      if (pos_ == src_.size()) {
        out.push_back({Tok::End, "", line, col});
        return out;
      }
      out.push_back(next(line, col));
    }
  }

 private:
  static bool ident_start(char ch) {
    return (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || ch == '_';
  }
  static bool ident_char(char ch) { return ident_start(ch) || (ch >= '0' && ch <= '9') || ch == '\''; }

  void advance(std::size_t n = 1) {
    for (std::size_t k = 0; k < n && pos_ < src_.size(); ++k) {
      unsigned char ch = static_cast<unsigned char>(src_[pos_++]);
      if (ch == '\n') {
        ++line_;
        col_ = 1;
      } else if ((ch & 0xC0) != 0x80) {
        ++col_;
      }
    }
  }

  bool starts(std::string_view s) const { return src_.substr(pos_, s.size()) == s; }

  void skip_space() {
    while (pos_ < src_.size()) {
      char ch = src_[pos_];
      if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') {
        advance();
      } else if (ch == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else {
        return;
      }
    }
  }

  Token next(std::size_t line, std::size_t col) {
    struct Spelling {
      std::string_view text;
      Tok kind;
    };
    static constexpr Spelling symbols[] = {
        {"/\\", Tok::And},      {"\\/", Tok::Or},       {"->", Tok::Implies},   {"=>", Tok::Implies},
        {"∧", Tok::And},   {"∨", Tok::Or},    {"→", Tok::Implies}, {"⇒", Tok::Implies},
        {"¬", Tok::Not},   {"∀", Tok::Forall}, {"∃", Tok::Exists}, {"⊤", Tok::True},
        {"⊥", Tok::False}, {"&", Tok::And},        {"|", Tok::Or},         {"~", Tok::Not},
        {"!", Tok::Not},        {"(", Tok::LParen},     {")", Tok::RParen},     {",", Tok::Comma},
        {":", Tok::Colon},      {".", Tok::Dot},        {"=", Tok::Equals},
    };
    for (const auto& s : symbols) {
      if (starts(s.text)) {
        advance(s.text.size());
        return {s.kind, std::string(s.text), line, col};
      }
    }
    if (ident_start(src_[pos_])) {
      std::size_t begin = pos_;
      while (pos_ < src_.size() && ident_char(src_[pos_])) advance();
      std::string word(src_.substr(begin, pos_ - begin));
      Tok kind = Tok::Ident;
      if (word == "true") kind = Tok::True;
      if (word == "false") kind = Tok::False;
      if (word == "forall") kind = Tok::Forall;
      if (word == "exists") kind = Tok::Exists;
      return {kind, std::move(word), line, col};
    }
    throw ParseError("unexpected character '" + std::string(1, src_[pos_]) + "'", line, col);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

/// Recursive descent: ¬ binds tightest, then ∧, ∨, →; ∧ and ∨ associate
/// left, → right; quantifier bodies extend as far right as possible.
class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(Lexer(src).run()) {}

  Formula formula() {
    Formula f = implication();
    expect(Tok::End);
    return f;
  }

  Term whole_term() {
    Term t = term();
    expect(Tok::End);
    return t;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  bool at(Tok t) const { return peek().kind == t; }
  Token take() { return toks_[pos_++]; }

  Token expect(Tok t) {
    if (!at(t)) {
      const Token& tok = peek();
      std::string got = tok.kind == Tok::End ? "end of input" : "'" + tok.text + "'";
      throw ParseError(std::string("expected ") + token_name(t) + ", found " + got, tok.line, tok.column);
    }
    return take();
  }

  Formula implication() {
    Formula lhs = disjunction();
    if (at(Tok::Implies)) {
      take();
      return Formula::implies(std::move(lhs), implication());
    }
    return lhs;
  }

  Formula disjunction() {
    Formula f = conjunction();
    while (at(Tok::Or)) {
      take();
      f = Formula::disj(std::move(f), conjunction());
    }
    return f;
  }

  Formula conjunction() {
    Formula f = unary();
    while (at(Tok::And)) {
      take();
      f = Formula::conj(std::move(f), unary());
    }
    return f;
  }

  Formula unary() {
    if (at(Tok::Not)) {
      take();
      return Formula::negation(unary());
    }
    if (at(Tok::Forall) || at(Tok::Exists)) {
      bool universal = take().kind == Tok::Forall;
      std::string v = expect(Tok::Ident).text;
      expect(Tok::Colon);
      std::string s = expect(Tok::Ident).text;
      expect(Tok::Dot);
      Formula body = implication();
      return universal ? Formula::forall(v, s, std::move(body)) : Formula::exists(v, s, std::move(body));
    }
    return primary();
  }

  Formula primary() {
    if (at(Tok::True)) {
      take();
      return Formula::top();
    }
    if (at(Tok::False)) {
      take();
      return Formula::bottom();
    }
    if (at(Tok::LParen)) {
      take();
      Formula f = implication();
      expect(Tok::RParen);
      return f;
    }
    const Token start = peek();
    Term t = term();
    if (at(Tok::Equals)) {
      take();
      return Formula::eq(std::move(t), term());
    }
    if (t.kind == Term::Kind::App) return Formula::rel(std::move(t.name), std::move(t.args));
    throw ParseError("expected '=' after term " + t.name, start.line, start.column);
  }

  Term term() {
    std::string name = expect(Tok::Ident).text;
    if (!at(Tok::LParen)) return Term::var(std::move(name));
    take();
    std::vector<Term> args;
    if (!at(Tok::RParen)) {
      args.push_back(term());
      while (at(Tok::Comma)) {
        take();
        args.push_back(term());
      }
    }
    expect(Tok::RParen);
    return Term::app(std::move(name), std::move(args));
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Syntax only: bare identifiers become variables.
inline Formula parse_formula(std::string_view text) { return detail::Parser(text).formula(); }

inline Term parse_term(std::string_view text) { return detail::Parser(text).whole_term(); }

/// Parses and resolves constant symbols, then checks symbols and arities.
inline Formula parse_formula(std::string_view text, const Signature& sig) {
  Formula f = resolve_constants(sig, parse_formula(text));
  check_symbols(sig, f);
  return f;
}

inline Term parse_term(std::string_view text, const Signature& sig) {
  return resolve_constants(sig, parse_term(text), {});
}

}  // namespace topos
