#include "nlcert/parser.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace nlcert {

namespace {

struct Token {
  enum Type { Ident, Number, Symbol, End } type;
  std::string text;
  Rational number;
  int line, col;
};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) { advance(); }

  const Token& peek() const { return tok_; }
  Token next() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    skip_ws();
    tok_.line = line_;
    tok_.col = col_;
    if (pos_ >= text_.size()) {
      tok_.type = Token::End;
      tok_.text.clear();
      return;
    }
    const char c = text_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        bump();
      tok_.type = Token::Ident;
      tok_.text = text_.substr(start, pos_ - start);
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && pos_ + 1 < text_.size() &&
         std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
      lex_number();
      return;
    }
    // multi-char: >=
    if (c == '>' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '=') {
      tok_.type = Token::Symbol;
      tok_.text = ">=";
      bump();
      bump();
      return;
    }
    tok_.type = Token::Symbol;
    tok_.text = std::string(1, c);
    bump();
  }

  void lex_number() {
    // exact decimal: digits [. digits] [e exponent]
    std::int64_t mantissa = 0;
    std::int64_t den = 1;
    bool overflow = false;
    auto push_digit = [&](char d) {
      if (mantissa > (std::numeric_limits<std::int64_t>::max() - 9) / 10) {
        overflow = true;
        return;
      }
      mantissa = mantissa * 10 + (d - '0');
    };
    size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      push_digit(text_[pos_]);
      bump();
    }
    if (pos_ < text_.size() && text_[pos_] == '.') {
      bump();
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        push_digit(text_[pos_]);
        if (den > std::numeric_limits<std::int64_t>::max() / 10) overflow = true;
        else den *= 10;
        bump();
      }
    }
    int exp10 = 0;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      size_t save = pos_;
      bump();
      bool negexp = false;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) {
        negexp = text_[pos_] == '-';
        bump();
      }
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        int e = 0;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
          e = e * 10 + (text_[pos_] - '0');
          bump();
        }
        exp10 = negexp ? -e : e;
      } else {
        pos_ = save;  // not an exponent after all
      }
    }
    tok_.type = Token::Number;
    tok_.text = text_.substr(start, pos_ - start);
    if (overflow) {
      const double v = std::strtod(tok_.text.c_str(), nullptr);
      tok_.number = Rational(static_cast<std::int64_t>(v * 1e9), 1000000000);
      return;
    }
    while (exp10 > 0 && mantissa < std::numeric_limits<std::int64_t>::max() / 10) {
      mantissa *= 10;
      --exp10;
    }
    while (exp10 < 0 && den < std::numeric_limits<std::int64_t>::max() / 10) {
      den *= 10;
      ++exp10;
    }
    tok_.number = Rational(mantissa, den);
  }

  void skip_ws() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') bump();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        bump();
      } else {
        break;
      }
    }
  }

  void bump() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  const std::string& text_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  Token tok_;
};

class Parser {
 public:
  Parser(const std::string& text) : lex_(text) {}

  Problem parse() {
    Problem p;
    bool have_objective = false;
    while (lex_.peek().type != Token::End) {
      const Token t = expect_ident("statement");
      if (t.text == "var") {
        const Token name = expect_ident("variable name");
        if (var_index_.count(name.text))
          fail("duplicate variable '" + name.text + "'", name);
        expect_ident_text("in");
        expect_symbol("[");
        const double lo = signed_number();
        expect_symbol(",");
        const double hi = signed_number();
        expect_symbol("]");
        expect_symbol(";");
        if (!(lo <= hi)) fail("empty interval for '" + name.text + "'", name);
        var_index_[name.text] = static_cast<int>(p.var_names.size());
        p.var_names.push_back(name.text);
        p.box.emplace_back(lo, hi);
      } else if (t.text == "objective") {
        p.objective = expression();
        expect_symbol(";");
        have_objective = true;
      } else if (t.text == "constraint") {
        Expr e = expression();
        expect_symbol(">=");
        const Token z = lex_.next();
        if (z.type != Token::Number || z.number.num != 0)
          fail("constraint must end with '>= 0'", z);
        expect_symbol(";");
        p.constraints.push_back(std::move(e));
      } else {
        fail("expected 'var', 'objective' or 'constraint'", t);
      }
    }
    if (!have_objective) {
      const Token t = lex_.peek();
      fail("missing objective", t);
    }
    const int n = static_cast<int>(p.var_names.size());
    if (max_var(p.objective) > n) fail("objective references undeclared variable", lex_.peek());
    return p;
  }

  Expr expression_only(const std::vector<std::string>& names) {
    for (size_t i = 0; i < names.size(); ++i)
      var_index_[names[i]] = static_cast<int>(i);
    Expr e = expression();
    if (lex_.peek().type != Token::End) fail("trailing input", lex_.peek());
    return e;
  }

 private:
  // expr := term (('+'|'-') term)*
  Expr expression() {
    Expr e = term();
    while (lex_.peek().type == Token::Symbol &&
           (lex_.peek().text == "+" || lex_.peek().text == "-")) {
      const std::string op = lex_.next().text;
      Expr rhs = term();
      e = op == "+" ? e + rhs : e - rhs;
    }
    return e;
  }

  // term := factor (('*'|'/') factor)*
  Expr term() {
    Expr e = factor();
    while (lex_.peek().type == Token::Symbol &&
           (lex_.peek().text == "*" || lex_.peek().text == "/")) {
      const std::string op = lex_.next().text;
      Expr rhs = factor();
      e = op == "*" ? e * rhs : e / rhs;
    }
    return e;
  }

  // factor := ('-')* power
  Expr factor() {
    if (lex_.peek().type == Token::Symbol && lex_.peek().text == "-") {
      lex_.next();
      return -factor();
    }
    if (lex_.peek().type == Token::Symbol && lex_.peek().text == "+") {
      lex_.next();
      return factor();
    }
    return power();
  }

  // power := atom ['^' exponent]   (right associative)
  Expr power() {
    Expr base = atom();
    if (lex_.peek().type == Token::Symbol && lex_.peek().text == "^") {
      lex_.next();
      const Rational r = exponent();
      return ExprNode::make_pow(base, r);
    }
    return base;
  }

  Rational exponent() {
    bool neg = false;
    while (lex_.peek().type == Token::Symbol &&
           (lex_.peek().text == "-" || lex_.peek().text == "+")) {
      if (lex_.next().text == "-") neg = !neg;
    }
    if (lex_.peek().type == Token::Symbol && lex_.peek().text == "(") {
      lex_.next();
      Rational r = exponent_body(true);
      expect_symbol(")");
      return neg ? Rational(-r.num, r.den) : r;
    }
    // A bare exponent is a single integer; 'x^2/4' means (x^2)/4. Rational
    // exponents require parentheses: x^(2/4).
    Rational r = exponent_body(false);
    return neg ? Rational(-r.num, r.den) : r;
  }

  Rational exponent_body(bool allow_slash) {
    const Token t = lex_.next();
    if (t.type != Token::Number || t.number.den != 1)
      fail("exponent must be an integer or a rational p or 1/p", t);
    std::int64_t num = t.number.num;
    if (allow_slash && lex_.peek().type == Token::Symbol &&
        lex_.peek().text == "/") {
      lex_.next();
      const Token d = lex_.next();
      if (d.type != Token::Number || d.number.den != 1 || d.number.num <= 0)
        fail("exponent denominator must be a positive integer", d);
      return Rational(num, d.number.num);
    }
    return Rational(num, 1);
  }

  Expr atom() {
    const Token t = lex_.next();
    if (t.type == Token::Number) return ExprNode::make_constant(t.number);
    if (t.type == Token::Symbol && t.text == "(") {
      Expr e = expression();
      expect_symbol(")");
      return e;
    }
    if (t.type == Token::Ident) {
      if (t.text == "pi") return ExprNode::make_constant(3.14159265358979323846);
      if (lex_.peek().type == Token::Symbol && lex_.peek().text == "(") {
        return call(t);
      }
      auto it = var_index_.find(t.text);
      if (it == var_index_.end()) fail("unknown identifier '" + t.text + "'", t);
      return ExprNode::make_var(it->second);
    }
    fail("unexpected token '" + t.text + "'", t);
    return nullptr;  // unreachable
  }

  Expr call(const Token& name) {
    expect_symbol("(");
    std::vector<Expr> args;
    args.push_back(expression());
    while (lex_.peek().type == Token::Symbol && lex_.peek().text == ",") {
      lex_.next();
      args.push_back(expression());
    }
    expect_symbol(")");
    auto arity = [&](size_t k) {
      if (args.size() != k)
        fail("function '" + name.text + "' expects " + std::to_string(k) + " argument(s)",
             name);
    };
    if (name.text == "sqrt") { arity(1); return ExprNode::make_sqrt(args[0]); }
    if (name.text == "abs") { arity(1); return ExprNode::make_abs(args[0]); }
    if (name.text == "min") { arity(2); return ExprNode::make_minmax(ExprKind::Min, args[0], args[1]); }
    if (name.text == "max") { arity(2); return ExprNode::make_minmax(ExprKind::Max, args[0], args[1]); }
    if (auto fn = dictionary_lookup(name.text)) { arity(1); return ExprNode::make_dict(*fn, args[0]); }
    fail("unknown function '" + name.text + "'", name);
    return nullptr;  // unreachable
  }

  double signed_number() {
    bool neg = false;
    while (lex_.peek().type == Token::Symbol &&
           (lex_.peek().text == "-" || lex_.peek().text == "+")) {
      if (lex_.next().text == "-") neg = !neg;
    }
    const Token t = lex_.next();
    if (t.type != Token::Number) fail("expected a number", t);
    const double v = t.number.to_double();
    return neg ? -v : v;
  }

  Token expect_ident(const std::string& what) {
    const Token t = lex_.next();
    if (t.type != Token::Ident) fail("expected " + what, t);
    return t;
  }

  void expect_ident_text(const std::string& text) {
    const Token t = lex_.next();
    if (t.type != Token::Ident || t.text != text) fail("expected '" + text + "'", t);
  }

  void expect_symbol(const std::string& s) {
    const Token t = lex_.next();
    if (t.type != Token::Symbol || t.text != s) fail("expected '" + s + "'", t);
  }

  [[noreturn]] void fail(const std::string& msg, const Token& t) {
    throw ParseError(msg, t.line, t.col);
  }

  Lexer lex_;
  std::unordered_map<std::string, int> var_index_;
};

}  // namespace

Problem parse_problem(const std::string& text) { return Parser(text).parse(); }

Problem parse_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open problem file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_problem(ss.str());
}

Expr parse_expression(const std::string& text,
                      const std::vector<std::string>& var_names) {
  return Parser(text).expression_only(var_names);
}

}  // namespace nlcert
