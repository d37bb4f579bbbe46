#include <string>
#include <vector>

#include "habs/errors.hpp"
#include "habs/ltl.hpp"

namespace habs {

namespace {

enum class Tok { word, lparen, rparen, comma, bang, amp, pipe, arrow, end };

struct Token {
  Tok kind;
  std::string text;
  int line, column;
};

bool word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '+' || c == '-' ||
         c == '.' || c == '*';
}

std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> out;
  int line = 1, column = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t t = 0; t < n; ++t, ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
  };
  while (i < text.size()) {
    const char c = text[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    const int l = line, col = column;
    if (c == '(') {
      out.push_back({Tok::lparen, "(", l, col});
      advance(1);
    } else if (c == ')') {
      out.push_back({Tok::rparen, ")", l, col});
      advance(1);
    } else if (c == ',') {
      out.push_back({Tok::comma, ",", l, col});
      advance(1);
    } else if (c == '!') {
      out.push_back({Tok::bang, "!", l, col});
      advance(1);
    } else if (c == '&') {
      out.push_back({Tok::amp, "&", l, col});
      advance(1);
    } else if (c == '|') {
      out.push_back({Tok::pipe, "|", l, col});
      advance(1);
    } else if (c == '-' && i + 1 < text.size() && text[i + 1] == '>') {
      out.push_back({Tok::arrow, "->", l, col});
      advance(2);
    } else if (word_char(c)) {
      // '-' joins words except when it starts "->", handled above.
      std::size_t j = i;
      while (j < text.size() && word_char(text[j]) &&
             !(text[j] == '-' && j + 1 < text.size() && text[j + 1] == '>'))
        ++j;
      out.push_back({Tok::word, text.substr(i, j - i), l, col});
      advance(j - i);
    } else {
      throw ParseError(l, col, std::string("unexpected character '") + c + "'");
    }
  }
  out.push_back({Tok::end, "", line, column});
  return out;
}

class Parser {
 public:
  Parser(std::vector<Token> tokens, const Alphabet& alphabet)
      : tokens_(std::move(tokens)), alpha_(alphabet) {}

  LtlPtr run() {
    auto phi = parse_implies();
    expect_end();
    return phi;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    const auto i = std::min(pos_ + ahead, tokens_.size() - 1);
    return tokens_[i];
  }
  const Token& take() { return tokens_[std::min(pos_++, tokens_.size() - 1)]; }

  [[noreturn]] void fail(const Token& tok, const std::string& msg) {
    throw ParseError(tok.line, tok.column, msg);
  }

  void expect_end() {
    if (peek().kind != Tok::end) fail(peek(), "unexpected trailing input");
  }

  LtlPtr parse_implies() {
    auto lhs = parse_or();
    if (peek().kind == Tok::arrow) {
      take();
      auto rhs = parse_implies();
      return ltl_or(ltl_not(std::move(lhs)), std::move(rhs));
    }
    return lhs;
  }

  LtlPtr parse_or() {
    auto lhs = parse_and();
    while (peek().kind == Tok::pipe) {
      take();
      lhs = ltl_or(std::move(lhs), parse_and());
    }
    return lhs;
  }

  LtlPtr parse_and() {
    auto lhs = parse_until();
    while (peek().kind == Tok::amp) {
      take();
      // a & b == !(!a | !b): keeps the kernel on the primitive connectives.
      lhs = ltl_not(ltl_or(ltl_not(std::move(lhs)), ltl_not(parse_until())));
    }
    return lhs;
  }

  LtlPtr parse_until() {
    auto lhs = parse_unary();
    if (peek().kind == Tok::word && peek().text == "U") {
      take();
      return ltl_until(std::move(lhs), parse_until());
    }
    return lhs;
  }

  LtlPtr parse_unary() {
    const auto& tok = peek();
    if (tok.kind == Tok::bang) {
      take();
      return ltl_not(parse_unary());
    }
    if (tok.kind == Tok::word) {
      if (tok.text == "X") {
        take();
        return ltl_next(parse_unary());
      }
      if (tok.text == "F") {
        take();
        return ltl_until(ltl_true(), parse_unary());
      }
      if (tok.text == "G") {
        take();
        return ltl_not(ltl_until(ltl_true(), ltl_not(parse_unary())));
      }
    }
    return parse_primary();
  }

  LtlPtr parse_primary() {
    const auto& tok = peek();
    if (tok.kind == Tok::word) {
      if (tok.text == "true") {
        take();
        return ltl_true();
      }
      if (tok.text == "false") {
        take();
        return ltl_false();
      }
      if (tok.text == "U") fail(tok, "dangling operator 'U'");
      fail(tok, "unexpected word '" + tok.text + "'");
    }
    if (tok.kind != Tok::lparen) fail(tok, "expected a formula");
    // "(word , word)" is an atom; any other parenthesis groups a formula.
    if (peek(1).kind == Tok::word && peek(2).kind == Tok::comma) return parse_atom();
    take();
    auto phi = parse_implies();
    if (peek().kind != Tok::rparen) fail(peek(), "expected ')'");
    take();
    return phi;
  }

  LtlPtr parse_atom() {
    take();  // '('
    const Token mode_tok = take();
    take();  // ','
    const Token label_tok = take();
    if (label_tok.kind != Tok::word) fail(label_tok, "expected a label name");
    if (peek().kind != Tok::rparen) fail(peek(), "expected ')' after atom");
    take();

    const int mode = alpha_.mode_index(mode_tok.text);
    if (mode < 0) fail(mode_tok, "unknown mode '" + mode_tok.text + "'");
    if (label_tok.text == "*") {
      // Don't-care label: disjunction over the whole label set.
      LtlPtr any = ltl_atom(mode, 0);
      for (std::size_t l = 1; l < alpha_.labels.size(); ++l)
        any = ltl_or(std::move(any), ltl_atom(mode, static_cast<std::int32_t>(l)));
      return any;
    }
    const int label = alpha_.label_index(label_tok.text);
    if (label < 0) fail(label_tok, "unknown label '" + label_tok.text + "'");
    return ltl_atom(mode, label);
  }

  std::vector<Token> tokens_;
  const Alphabet& alpha_;
  std::size_t pos_ = 0;
};

}  // namespace

LtlPtr parse_ltl(const std::string& text, const Alphabet& alphabet) {
  if (alphabet.labels.empty() || alphabet.modes.empty())
    throw std::invalid_argument("alphabet must declare modes and labels");
  return Parser(tokenize(text), alphabet).run();
}

}  // namespace habs
