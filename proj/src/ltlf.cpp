#include "sabpi/ltlf.hpp"

#include <cctype>
#include <utility>

namespace sabpi {

LtlfFormula LtlfFormula::constant(bool v) {
  LtlfFormula f;
  f.op = v ? LtlfOp::True : LtlfOp::False;
  return f;
}

LtlfFormula LtlfFormula::make_atom(std::string name, int index) {
  LtlfFormula f;
  f.op = LtlfOp::Atom;
  f.atom = std::move(name);
  f.atom_index = index;
  return f;
}

LtlfFormula LtlfFormula::unary(LtlfOp op, LtlfFormula child) {
  LtlfFormula f;
  f.op = op;
  f.children.push_back(std::move(child));
  return f;
}

LtlfFormula LtlfFormula::binary(LtlfOp op, LtlfFormula lhs, LtlfFormula rhs) {
  LtlfFormula f;
  f.op = op;
  f.children.push_back(std::move(lhs));
  f.children.push_back(std::move(rhs));
  return f;
}

namespace {

struct Token {
  enum Kind { Atom, True, False, Not, And, Or, Implies, Next, Until, Even, Glob, LParen, RParen, End };
  Kind kind;
  std::string text;
  std::size_t offset;
};

std::vector<Token> lex(const std::string& text) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '(') {
      out.push_back({Token::LParen, "(", i});
      ++i;
    } else if (c == ')') {
      out.push_back({Token::RParen, ")", i});
      ++i;
    } else if (c == '!') {
      out.push_back({Token::Not, "!", i});
      ++i;
    } else if (c == '&') {
      out.push_back({Token::And, "&", i});
      ++i;
    } else if (c == '|') {
      out.push_back({Token::Or, "|", i});
      ++i;
    } else if (c == '-') {
      if (i + 1 >= text.size() || text[i + 1] != '>')
        throw LtlfParseError("expected '->'", i);
      out.push_back({Token::Implies, "->", i});
      i += 2;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = i;
      while (i < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_'))
        ++i;
      std::string word = text.substr(start, i - start);
      if (word == "U")
        out.push_back({Token::Until, word, start});
      else if (word == "X")
        out.push_back({Token::Next, word, start});
      else if (word == "F")
        out.push_back({Token::Even, word, start});
      else if (word == "G")
        out.push_back({Token::Glob, word, start});
      else if (word == "true")
        out.push_back({Token::True, word, start});
      else if (word == "false")
        out.push_back({Token::False, word, start});
      else
        out.push_back({Token::Atom, word, start});
    } else {
      throw LtlfParseError(std::string("unexpected character '") + c + "'", i);
    }
  }
  out.push_back({Token::End, "", text.size()});
  return out;
}

class Parser {
 public:
  Parser(std::vector<Token> tokens, const std::vector<std::string>& ap)
      : tokens_(std::move(tokens)), ap_(ap) {}

  LtlfFormula parse() {
    LtlfFormula f = implies();
    if (peek().kind != Token::End)
      throw LtlfParseError("unexpected token '" + peek().text + "'", peek().offset);
    for (const auto& [name, offset] : atom_offsets_) {
      bool found = false;
      for (const auto& p : ap_) found = found || p == name;
      if (!found) throw LtlfParseError("undeclared atom '" + name + "'", offset);
    }
    resolve_atoms(f);
    return f;
  }

  void resolve_atoms(LtlfFormula& f) const {
    if (f.op == LtlfOp::Atom)
      for (std::size_t i = 0; i < ap_.size(); ++i)
        if (ap_[i] == f.atom) f.atom_index = static_cast<int>(i);
    for (auto& c : f.children) resolve_atoms(c);
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  Token take() { return tokens_[pos_++]; }

  LtlfFormula implies() {
    LtlfFormula lhs = disj();
    if (peek().kind == Token::Implies) {
      take();
      return LtlfFormula::binary(LtlfOp::Implies, std::move(lhs), implies());
    }
    return lhs;
  }

  LtlfFormula disj() {
    LtlfFormula f = conj();
    while (peek().kind == Token::Or) {
      take();
      f = LtlfFormula::binary(LtlfOp::Or, std::move(f), conj());
    }
    return f;
  }

  LtlfFormula conj() {
    LtlfFormula f = until();
    while (peek().kind == Token::And) {
      take();
      f = LtlfFormula::binary(LtlfOp::And, std::move(f), until());
    }
    return f;
  }

  LtlfFormula until() {
    LtlfFormula lhs = unary();
    if (peek().kind == Token::Until) {
      take();
      return LtlfFormula::binary(LtlfOp::Until, std::move(lhs), until());
    }
    return lhs;
  }

  LtlfFormula unary() {
    switch (peek().kind) {
      case Token::Not:
        take();
        return LtlfFormula::unary(LtlfOp::Not, unary());
      case Token::Next:
        take();
        return LtlfFormula::unary(LtlfOp::Next, unary());
      case Token::Even:
        take();
        return LtlfFormula::unary(LtlfOp::Eventually, unary());
      case Token::Glob:
        take();
        return LtlfFormula::unary(LtlfOp::Globally, unary());
      default:
        return primary();
    }
  }

  LtlfFormula primary() {
    Token t = take();
    switch (t.kind) {
      case Token::LParen: {
        LtlfFormula f = implies();
        if (peek().kind != Token::RParen)
          throw LtlfParseError("expected ')'", peek().offset);
        take();
        return f;
      }
      case Token::True:
        return LtlfFormula::constant(true);
      case Token::False:
        return LtlfFormula::constant(false);
      case Token::Atom:
        // Declaration check happens after the whole text parses, so that
        // syntax errors take precedence.
        atom_offsets_.emplace_back(t.text, t.offset);
        return LtlfFormula::make_atom(t.text, -1);
      default:
        throw LtlfParseError("unexpected token '" + (t.kind == Token::End ? std::string("<end>") : t.text) + "'", t.offset);
    }
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  const std::vector<std::string>& ap_;
  std::vector<std::pair<std::string, std::size_t>> atom_offsets_;
};

}  // namespace

LtlfFormula parse_ltlf(const std::string& text, const std::vector<std::string>& ap) {
  return Parser(lex(text), ap).parse();
}

LtlfFormula normalize(const LtlfFormula& f) {
  switch (f.op) {
    case LtlfOp::True:
    case LtlfOp::Atom:
      return f;
    case LtlfOp::False:
      return LtlfFormula::unary(LtlfOp::Not, LtlfFormula::constant(true));
    case LtlfOp::Not:
      return LtlfFormula::unary(LtlfOp::Not, normalize(f.children[0]));
    case LtlfOp::Or:
      return LtlfFormula::binary(LtlfOp::Or, normalize(f.children[0]), normalize(f.children[1]));
    case LtlfOp::And:
      // a & b == !(!a | !b)
      return LtlfFormula::unary(
          LtlfOp::Not,
          LtlfFormula::binary(LtlfOp::Or,
                              LtlfFormula::unary(LtlfOp::Not, normalize(f.children[0])),
                              LtlfFormula::unary(LtlfOp::Not, normalize(f.children[1]))));
    case LtlfOp::Implies:
      return LtlfFormula::binary(LtlfOp::Or,
                                 LtlfFormula::unary(LtlfOp::Not, normalize(f.children[0])),
                                 normalize(f.children[1]));
    case LtlfOp::Next:
      return LtlfFormula::unary(LtlfOp::Next, normalize(f.children[0]));
    case LtlfOp::Until:
      return LtlfFormula::binary(LtlfOp::Until, normalize(f.children[0]), normalize(f.children[1]));
    case LtlfOp::Eventually:
      return LtlfFormula::binary(LtlfOp::Until, LtlfFormula::constant(true), normalize(f.children[0]));
    case LtlfOp::Globally:
      // G a == !(true U !a)
      return LtlfFormula::unary(
          LtlfOp::Not,
          LtlfFormula::binary(LtlfOp::Until, LtlfFormula::constant(true),
                              LtlfFormula::unary(LtlfOp::Not, normalize(f.children[0]))));
  }
  throw std::logic_error("unreachable");
}

bool evaluate_trace(const LtlfFormula& f, const Word& word, std::size_t pos) {
  if (word.empty())
    throw std::invalid_argument("evaluate_trace: empty word");
  switch (f.op) {
    case LtlfOp::True:
      return true;
    case LtlfOp::False:
      return false;
    case LtlfOp::Atom:
      return (word[pos] >> f.atom_index) & 1u;
    case LtlfOp::Not:
      return !evaluate_trace(f.children[0], word, pos);
    case LtlfOp::And:
      return evaluate_trace(f.children[0], word, pos) && evaluate_trace(f.children[1], word, pos);
    case LtlfOp::Or:
      return evaluate_trace(f.children[0], word, pos) || evaluate_trace(f.children[1], word, pos);
    case LtlfOp::Implies:
      return !evaluate_trace(f.children[0], word, pos) || evaluate_trace(f.children[1], word, pos);
    case LtlfOp::Next:
      return pos + 1 < word.size() && evaluate_trace(f.children[0], word, pos + 1);
    case LtlfOp::Until: {
      for (std::size_t j = pos; j < word.size(); ++j) {
        if (evaluate_trace(f.children[1], word, j)) return true;
        if (!evaluate_trace(f.children[0], word, j)) return false;
      }
      return false;
    }
    case LtlfOp::Eventually: {
      for (std::size_t j = pos; j < word.size(); ++j)
        if (evaluate_trace(f.children[0], word, j)) return true;
      return false;
    }
    case LtlfOp::Globally: {
      for (std::size_t j = pos; j < word.size(); ++j)
        if (!evaluate_trace(f.children[0], word, j)) return false;
      return true;
    }
  }
  throw std::logic_error("unreachable");
}

std::string to_string(const LtlfFormula& f) {
  switch (f.op) {
    case LtlfOp::True:
      return "true";
    case LtlfOp::False:
      return "false";
    case LtlfOp::Atom:
      return f.atom;
    case LtlfOp::Not:
      return "!(" + to_string(f.children[0]) + ")";
    case LtlfOp::And:
      return "(" + to_string(f.children[0]) + " & " + to_string(f.children[1]) + ")";
    case LtlfOp::Or:
      return "(" + to_string(f.children[0]) + " | " + to_string(f.children[1]) + ")";
    case LtlfOp::Implies:
      return "(" + to_string(f.children[0]) + " -> " + to_string(f.children[1]) + ")";
    case LtlfOp::Next:
      return "X(" + to_string(f.children[0]) + ")";
    case LtlfOp::Until:
      return "(" + to_string(f.children[0]) + " U " + to_string(f.children[1]) + ")";
    case LtlfOp::Eventually:
      return "F(" + to_string(f.children[0]) + ")";
    case LtlfOp::Globally:
      return "G(" + to_string(f.children[0]) + ")";
  }
  throw std::logic_error("unreachable");
}

std::string structural_key(const LtlfFormula& f) {
  std::string key(1, static_cast<char>('a' + static_cast<int>(f.op)));
  if (f.op == LtlfOp::Atom) key += std::to_string(f.atom_index);
  for (const auto& c : f.children) key += "(" + structural_key(c) + ")";
  return key;
}

}  // namespace sabpi
