#pragma once

#include <cctype>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "modlab/errors.hpp"

namespace modlab {

// Minimal radial expression grammar for declarative configs:
//   expr   := term (('+' | '-') term)*
//   term   := factor (('*' | '/') factor)*
//   factor := number | ident | func '(' expr {',' expr} ')' | '(' expr ')' | '-' factor
// Identifiers t, r, x all denote the radial variable; constants e and pi are
// built in; functions are pow, log, exp, abs, sqrt.
class RadialExpr {
 public:
  static RadialExpr parse(const std::string& text) {
    Parser p(text);
    RadialExpr e;
    e.root_ = p.parse_expr();
    p.expect_end();
    e.text_ = text;
    return e;
  }

  double operator()(double t) const { return root_->eval(t); }
  const std::string& text() const { return text_; }

  std::function<double(double)> fn() const {
    auto root = root_;
    return [root](double t) { return root->eval(t); };
  }

 private:
  struct Node {
    virtual ~Node() = default;
    virtual double eval(double t) const = 0;
  };
  using NodePtr = std::shared_ptr<const Node>;

  struct Const : Node {
    double v;
    explicit Const(double x) : v(x) {}
    double eval(double) const override { return v; }
  };
  struct Var : Node {
    double eval(double t) const override { return t; }
  };
  struct Unary : Node {
    NodePtr a;
    std::function<double(double)> f;
    double eval(double t) const override { return f(a->eval(t)); }
  };
  struct Binary : Node {
    NodePtr a, b;
    std::function<double(double, double)> f;
    double eval(double t) const override { return f(a->eval(t), b->eval(t)); }
  };

  class Parser {
   public:
    explicit Parser(const std::string& s) : s_(s) {}

    NodePtr parse_expr() {
      NodePtr lhs = parse_term();
      while (true) {
        skip_ws();
        if (peek() == '+' || peek() == '-') {
          char op = get();
          NodePtr rhs = parse_term();
          lhs = binary(lhs, rhs, op == '+' ? +[](double a, double b) { return a + b; }
                                           : +[](double a, double b) { return a - b; });
        } else {
          return lhs;
        }
      }
    }

    void expect_end() {
      skip_ws();
      if (pos_ != s_.size()) fail("unexpected trailing input");
    }

   private:
    NodePtr parse_term() {
      NodePtr lhs = parse_factor();
      while (true) {
        skip_ws();
        if (peek() == '*' || peek() == '/') {
          char op = get();
          NodePtr rhs = parse_factor();
          lhs = binary(lhs, rhs, op == '*' ? +[](double a, double b) { return a * b; }
                                           : +[](double a, double b) { return a / b; });
        } else {
          return lhs;
        }
      }
    }

    NodePtr parse_factor() {
      skip_ws();
      char c = peek();
      if (c == '-') {
        get();
        NodePtr a = parse_factor();
        auto node = std::make_shared<Unary>();
        node->a = a;
        node->f = [](double x) { return -x; };
        return node;
      }
      if (c == '(') {
        get();
        NodePtr e = parse_expr();
        expect(')');
        return e;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
      fail(std::string("unexpected character '") + c + "'");
      return nullptr;
    }

    NodePtr parse_number() {
      std::size_t end = pos_;
      while (end < s_.size() &&
             (std::isdigit(static_cast<unsigned char>(s_[end])) || s_[end] == '.' ||
              s_[end] == 'e' || s_[end] == 'E' ||
              ((s_[end] == '+' || s_[end] == '-') && end > pos_ &&
               (s_[end - 1] == 'e' || s_[end - 1] == 'E'))))
        ++end;
      double v = 0.0;
      try {
        v = std::stod(s_.substr(pos_, end - pos_));
      } catch (...) {
        fail("bad number literal");
      }
      pos_ = end;
      return std::make_shared<Const>(v);
    }

    NodePtr parse_ident() {
      std::size_t end = pos_;
      while (end < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[end])) || s_[end] == '_'))
        ++end;
      std::string name = s_.substr(pos_, end - pos_);
      pos_ = end;
      skip_ws();
      if (peek() == '(') {
        get();
        std::vector<NodePtr> args;
        args.push_back(parse_expr());
        skip_ws();
        while (peek() == ',') {
          get();
          args.push_back(parse_expr());
          skip_ws();
        }
        expect(')');
        return make_call(name, args);
      }
      if (name == "t" || name == "r" || name == "x") return std::make_shared<Var>();
      if (name == "e") return std::make_shared<Const>(std::exp(1.0));
      if (name == "pi") return std::make_shared<Const>(std::acos(-1.0));
      fail("unknown identifier '" + name + "'");
      return nullptr;
    }

    NodePtr make_call(const std::string& name, const std::vector<NodePtr>& args) {
      auto unary = [&](std::function<double(double)> f) -> NodePtr {
        if (args.size() != 1) fail(name + " takes one argument");
        auto node = std::make_shared<Unary>();
        node->a = args[0];
        node->f = std::move(f);
        return node;
      };
      if (name == "log") return unary([](double x) { return std::log(x); });
      if (name == "exp") return unary([](double x) { return std::exp(x); });
      if (name == "abs") return unary([](double x) { return std::abs(x); });
      if (name == "sqrt") return unary([](double x) { return std::sqrt(x); });
      if (name == "pow") {
        if (args.size() != 2) fail("pow takes two arguments");
        return binary(args[0], args[1], [](double a, double b) { return std::pow(a, b); });
      }
      fail("unknown function '" + name + "'");
      return nullptr;
    }

    static NodePtr binary(NodePtr a, NodePtr b, std::function<double(double, double)> f) {
      auto node = std::make_shared<Binary>();
      node->a = std::move(a);
      node->b = std::move(b);
      node->f = std::move(f);
      return node;
    }

    void skip_ws() {
      while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
    char get() { return s_[pos_++]; }
    void expect(char c) {
      skip_ws();
      if (peek() != c) fail(std::string("expected '") + c + "'");
      get();
    }
    [[noreturn]] void fail(const std::string& msg) const {
      throw Error("expression error at position " + std::to_string(pos_) + ": " + msg);
    }

    const std::string& s_;
    std::size_t pos_{0};
  };

  NodePtr root_;
  std::string text_;
};

}  // namespace modlab
