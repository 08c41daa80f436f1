#include "defectscope/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "defectscope/errors.hpp"

namespace defectscope {

enum class Op {
  num, var, neg, add, sub, mul, div, pow,
  sin, cos, tan, atan2, exp, log, sqrt, abs,
};

struct Expression::Node {
  Op op;
  double value = 0.0;   // num
  size_t index = 0;     // var
  NodePtr a, b;
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr mk_num(double v) {
  auto n = std::make_shared<Node>();
  n->op = Op::num;
  n->value = v;
  return n;
}

NodePtr mk_var(size_t i) {
  auto n = std::make_shared<Node>();
  n->op = Op::var;
  n->index = i;
  return n;
}

bool is_num(const NodePtr& n, double v) { return n->op == Op::num && n->value == v; }

NodePtr mk(Op op, NodePtr a, NodePtr b = nullptr) {
  // light constant folding so derivatives stay readable and cheap
  if (a && a->op == Op::num && (!b || b->op == Op::num)) {
    double x = a->value, y = b ? b->value : 0.0;
    switch (op) {
      case Op::neg: return mk_num(-x);
      case Op::add: return mk_num(x + y);
      case Op::sub: return mk_num(x - y);
      case Op::mul: return mk_num(x * y);
      case Op::div: if (y != 0.0) return mk_num(x / y); break;
      case Op::pow: return mk_num(std::pow(x, y));
      case Op::sin: return mk_num(std::sin(x));
      case Op::cos: return mk_num(std::cos(x));
      case Op::tan: return mk_num(std::tan(x));
      case Op::exp: return mk_num(std::exp(x));
      case Op::sqrt: if (x >= 0) return mk_num(std::sqrt(x)); break;
      case Op::abs: return mk_num(std::fabs(x));
      default: break;
    }
  }
  switch (op) {
    case Op::add:
      if (is_num(a, 0)) return b;
      if (is_num(b, 0)) return a;
      break;
    case Op::sub:
      if (is_num(b, 0)) return a;
      if (is_num(a, 0)) return mk(Op::neg, b);
      break;
    case Op::mul:
      if (is_num(a, 0) || is_num(b, 0)) return mk_num(0);
      if (is_num(a, 1)) return b;
      if (is_num(b, 1)) return a;
      break;
    case Op::div:
      if (is_num(a, 0)) return mk_num(0);
      if (is_num(b, 1)) return a;
      break;
    case Op::pow:
      if (is_num(b, 1)) return a;
      if (is_num(b, 0)) return mk_num(1);
      break;
    case Op::neg:
      if (a->op == Op::neg) return a->a;
      break;
    default:
      break;
  }
  auto n = std::make_shared<Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

double eval_node(const Node* n, std::span<const double> vars) {
  switch (n->op) {
    case Op::num: return n->value;
    case Op::var: return vars[n->index];
    case Op::neg: return -eval_node(n->a.get(), vars);
    case Op::add: return eval_node(n->a.get(), vars) + eval_node(n->b.get(), vars);
    case Op::sub: return eval_node(n->a.get(), vars) - eval_node(n->b.get(), vars);
    case Op::mul: return eval_node(n->a.get(), vars) * eval_node(n->b.get(), vars);
    case Op::div: return eval_node(n->a.get(), vars) / eval_node(n->b.get(), vars);
    case Op::pow: {
      double x = eval_node(n->a.get(), vars);
      double y = eval_node(n->b.get(), vars);
      if (y == 2.0) return x * x;
      if (y == 3.0) return x * x * x;
      return std::pow(x, y);
    }
    case Op::sin: return std::sin(eval_node(n->a.get(), vars));
    case Op::cos: return std::cos(eval_node(n->a.get(), vars));
    case Op::tan: return std::tan(eval_node(n->a.get(), vars));
    case Op::atan2: return std::atan2(eval_node(n->a.get(), vars), eval_node(n->b.get(), vars));
    case Op::exp: return std::exp(eval_node(n->a.get(), vars));
    case Op::log: return std::log(eval_node(n->a.get(), vars));
    case Op::sqrt: return std::sqrt(eval_node(n->a.get(), vars));
    case Op::abs: return std::fabs(eval_node(n->a.get(), vars));
  }
  return 0.0;
}

NodePtr diff(const NodePtr& n, size_t idx);

NodePtr diff(const NodePtr& n, size_t idx) {
  switch (n->op) {
    case Op::num: return mk_num(0);
    case Op::var: return mk_num(n->index == idx ? 1 : 0);
    case Op::neg: return mk(Op::neg, diff(n->a, idx));
    case Op::add: return mk(Op::add, diff(n->a, idx), diff(n->b, idx));
    case Op::sub: return mk(Op::sub, diff(n->a, idx), diff(n->b, idx));
    case Op::mul:
      return mk(Op::add, mk(Op::mul, diff(n->a, idx), n->b), mk(Op::mul, n->a, diff(n->b, idx)));
    case Op::div:
      return mk(Op::div,
                mk(Op::sub, mk(Op::mul, diff(n->a, idx), n->b), mk(Op::mul, n->a, diff(n->b, idx))),
                mk(Op::pow, n->b, mk_num(2)));
    case Op::pow: {
      if (n->b->op == Op::num) {
        double p = n->b->value;
        return mk(Op::mul, mk(Op::mul, mk_num(p), mk(Op::pow, n->a, mk_num(p - 1))), diff(n->a, idx));
      }
      // general f^g = exp(g log f)
      NodePtr val = mk(Op::pow, n->a, n->b);
      NodePtr term = mk(Op::add, mk(Op::mul, diff(n->b, idx), mk(Op::log, n->a)),
                        mk(Op::div, mk(Op::mul, n->b, diff(n->a, idx)), n->a));
      return mk(Op::mul, val, term);
    }
    case Op::sin: return mk(Op::mul, mk(Op::cos, n->a), diff(n->a, idx));
    case Op::cos: return mk(Op::neg, mk(Op::mul, mk(Op::sin, n->a), diff(n->a, idx)));
    case Op::tan: {
      NodePtr sec2 = mk(Op::add, mk_num(1), mk(Op::pow, mk(Op::tan, n->a), mk_num(2)));
      return mk(Op::mul, sec2, diff(n->a, idx));
    }
    case Op::atan2: {
      // d atan2(y, x) = (x dy - y dx) / (x^2 + y^2)
      NodePtr y = n->a, x = n->b;
      NodePtr numtr = mk(Op::sub, mk(Op::mul, x, diff(y, idx)), mk(Op::mul, y, diff(x, idx)));
      NodePtr den = mk(Op::add, mk(Op::pow, x, mk_num(2)), mk(Op::pow, y, mk_num(2)));
      return mk(Op::div, numtr, den);
    }
    case Op::exp: return mk(Op::mul, mk(Op::exp, n->a), diff(n->a, idx));
    case Op::log: return mk(Op::div, diff(n->a, idx), n->a);
    case Op::sqrt: return mk(Op::div, diff(n->a, idx), mk(Op::mul, mk_num(2), mk(Op::sqrt, n->a)));
    case Op::abs: {
      // sign(a) * a' via a / abs(a); evaluates to nan at the kink, which is
      // the honest answer for charts that are not differentiable there
      NodePtr sign = mk(Op::div, n->a, mk(Op::abs, n->a));
      return mk(Op::mul, sign, diff(n->a, idx));
    }
  }
  return mk_num(0);
}

void print_node(const Node* n, std::ostringstream& out, const std::vector<std::string>* names) {
  auto name1 = [&](const char* f) {
    out << f << "(";
    print_node(n->a.get(), out, names);
    out << ")";
  };
  switch (n->op) {
    case Op::num: out << n->value; break;
    case Op::var:
      if (names && n->index < names->size()) out << (*names)[n->index];
      else out << "$" << n->index;
      break;
    case Op::neg: out << "(-"; print_node(n->a.get(), out, names); out << ")"; break;
    case Op::add: out << "("; print_node(n->a.get(), out, names); out << " + "; print_node(n->b.get(), out, names); out << ")"; break;
    case Op::sub: out << "("; print_node(n->a.get(), out, names); out << " - "; print_node(n->b.get(), out, names); out << ")"; break;
    case Op::mul: out << "("; print_node(n->a.get(), out, names); out << "*"; print_node(n->b.get(), out, names); out << ")"; break;
    case Op::div: out << "("; print_node(n->a.get(), out, names); out << "/"; print_node(n->b.get(), out, names); out << ")"; break;
    case Op::pow: out << "("; print_node(n->a.get(), out, names); out << "^"; print_node(n->b.get(), out, names); out << ")"; break;
    case Op::sin: name1("sin"); break;
    case Op::cos: name1("cos"); break;
    case Op::tan: name1("tan"); break;
    case Op::exp: name1("exp"); break;
    case Op::log: name1("log"); break;
    case Op::sqrt: name1("sqrt"); break;
    case Op::abs: name1("abs"); break;
    case Op::atan2:
      out << "atan2(";
      print_node(n->a.get(), out, names);
      out << ", ";
      print_node(n->b.get(), out, names);
      out << ")";
      break;
  }
}

// --- parser ---------------------------------------------------------------

struct Token {
  enum Kind { number, ident, lparen, rparen, comma, plus, minus, star, slash, caret, end } kind;
  size_t pos = 0;
  double value = 0.0;
  std::string text;
};

class Lexer {
public:
  Lexer(const std::string& s) : s_(s) {}

  Token next() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    Token t;
    t.pos = i_;
    if (i_ >= s_.size()) { t.kind = Token::end; return t; }
    char c = s_[i_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + i_;
      char* endp = nullptr;
      t.value = std::strtod(begin, &endp);
      if (endp == begin) fail(errc::syntax, "malformed number at byte " + std::to_string(i_));
      i_ += static_cast<size_t>(endp - begin);
      t.kind = Token::number;
      return t;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i_;
      while (j < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[j])) || s_[j] == '_')) ++j;
      t.kind = Token::ident;
      t.text = s_.substr(i_, j - i_);
      i_ = j;
      return t;
    }
    ++i_;
    switch (c) {
      case '(': t.kind = Token::lparen; return t;
      case ')': t.kind = Token::rparen; return t;
      case ',': t.kind = Token::comma; return t;
      case '+': t.kind = Token::plus; return t;
      case '-': t.kind = Token::minus; return t;
      case '*': t.kind = Token::star; return t;
      case '/': t.kind = Token::slash; return t;
      case '^': t.kind = Token::caret; return t;
    }
    fail(errc::syntax, std::string("unexpected character '") + c + "' at byte " + std::to_string(i_ - 1));
  }

private:
  const std::string& s_;
  size_t i_ = 0;
};

class Parser {
public:
  Parser(const std::string& text, const std::vector<std::string>& vars)
      : text_(text), vars_(vars), lex_(text) {
    advance();
  }

  NodePtr parse() {
    NodePtr e = parse_sum();
    if (cur_.kind != Token::end)
      fail(errc::syntax, "unexpected trailing input at byte " + std::to_string(cur_.pos));
    return e;
  }

private:
  const std::string& text_;
  const std::vector<std::string>& vars_;
  Lexer lex_;
  Token cur_;

  void advance() { cur_ = lex_.next(); }

  void expect(Token::Kind k, const char* what) {
    if (cur_.kind != k)
      fail(errc::syntax, std::string("expected ") + what + " at byte " + std::to_string(cur_.pos));
    advance();
  }

  NodePtr parse_sum() {
    NodePtr lhs = parse_product();
    for (;;) {
      if (cur_.kind == Token::plus) { advance(); lhs = mk(Op::add, lhs, parse_product()); }
      else if (cur_.kind == Token::minus) { advance(); lhs = mk(Op::sub, lhs, parse_product()); }
      else return lhs;
    }
  }

  NodePtr parse_product() {
    NodePtr lhs = parse_unary();
    for (;;) {
      if (cur_.kind == Token::star) { advance(); lhs = mk(Op::mul, lhs, parse_unary()); }
      else if (cur_.kind == Token::slash) { advance(); lhs = mk(Op::div, lhs, parse_unary()); }
      else return lhs;
    }
  }

  NodePtr parse_unary() {
    if (cur_.kind == Token::minus) { advance(); return mk(Op::neg, parse_unary()); }
    if (cur_.kind == Token::plus) { advance(); return parse_unary(); }
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_atom();
    if (cur_.kind == Token::caret) {
      advance();
      // right associative; exponent may carry a unary sign
      NodePtr expo = parse_unary_in_exponent();
      return mk(Op::pow, base, expo);
    }
    return base;
  }

  NodePtr parse_unary_in_exponent() {
    if (cur_.kind == Token::minus) { advance(); return mk(Op::neg, parse_unary_in_exponent()); }
    return parse_power();
  }

  NodePtr parse_atom() {
    Token t = cur_;
    switch (t.kind) {
      case Token::number:
        advance();
        return mk_num(t.value);
      case Token::lparen: {
        advance();
        NodePtr e = parse_sum();
        expect(Token::rparen, "')'");
        return e;
      }
      case Token::ident: {
        advance();
        if (t.text == "pi") return mk_num(M_PI);
        if (cur_.kind == Token::lparen) return parse_call(t);
        for (size_t i = 0; i < vars_.size(); ++i)
          if (vars_[i] == t.text) return mk_var(i);
        fail(errc::unknown_identifier,
             "unknown identifier '" + t.text + "' at byte " + std::to_string(t.pos));
      }
      default:
        fail(errc::syntax, "expected value at byte " + std::to_string(t.pos));
    }
  }

  NodePtr parse_call(const Token& fn) {
    advance();  // (
    NodePtr a = parse_sum();
    if (fn.text == "atan2") {
      expect(Token::comma, "','");
      NodePtr b = parse_sum();
      expect(Token::rparen, "')'");
      auto n = std::make_shared<Node>();
      n->op = Op::atan2;
      n->a = a;
      n->b = b;
      return n;
    }
    expect(Token::rparen, "')'");
    if (fn.text == "sin") return mk(Op::sin, a);
    if (fn.text == "cos") return mk(Op::cos, a);
    if (fn.text == "tan") return mk(Op::tan, a);
    if (fn.text == "exp") return mk(Op::exp, a);
    if (fn.text == "log") return mk(Op::log, a);
    if (fn.text == "sqrt") return mk(Op::sqrt, a);
    if (fn.text == "abs") return mk(Op::abs, a);
    fail(errc::unknown_identifier,
         "unknown function '" + fn.text + "' at byte " + std::to_string(fn.pos));
  }
};

}  // namespace

struct ExprBuilder {
  static Expression make(NodePtr n, size_t nvars) { return Expression(std::move(n), nvars); }
  static const Expression::Node* root(const Expression& e) { return e.root_.get(); }
  static NodePtr share(const Expression& e) { return e.root_; }
};

Expression Expression::parse(const std::string& text, const std::vector<std::string>& variables) {
  Parser p(text, variables);
  return ExprBuilder::make(p.parse(), variables.size());
}

Expression Expression::constant(double v) { return ExprBuilder::make(mk_num(v), 0); }

Expression Expression::variable(size_t index, const std::vector<std::string>& variables) {
  return ExprBuilder::make(mk_var(index), variables.size());
}

double Expression::eval(std::span<const double> vars) const {
  return eval_node(root_.get(), vars);
}

Expression Expression::derivative(size_t index) const {
  return ExprBuilder::make(diff(root_, index), nvars_);
}

std::string Expression::str() const {
  std::ostringstream out;
  out.precision(17);
  print_node(root_.get(), out, nullptr);
  return out.str();
}

}  // namespace defectscope
