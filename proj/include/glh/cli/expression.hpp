#pragma once

// Small arithmetic language for scenario files: + - * /, unary minus,
// exp ln sin cos abs dot, numbers, pi, vector literals [e, e, ...], and named
// vector variables (`a`, or component `a0`, `a1`, ...). Values are vectors;
// scalars are vectors of length 1 and broadcast in elementwise operations.

#include <cctype>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "../error.hpp"
#include "../tensor_core.hpp"

namespace glh::cli {

class ExpressionError : public Error {
public:
  ExpressionError(const std::string& what, std::size_t column) : Error(what), column_(column) {}
  std::size_t column() const noexcept { return column_; }

private:
  std::size_t column_;
};

/// Variable values in the order the expression was compiled with.
using Bindings = std::span<const std::span<const double>>;

class Expression {
public:
  using Node = std::function<Vec(Bindings)>;

  Expression() = default;

  /// Compiles `text`; `variables` lists the vector variable names in binding order.
  static Expression parse(const std::string& text, std::vector<std::string> variables) {
    Expression e;
    e.text_ = text;
    e.variables_ = std::move(variables);
    Parser p{e.text_, e.variables_, 0};
    e.root_ = p.parse_all();
    return e;
  }

  /// A constant expression (used for numeric JSON entries).
  static Expression constant(double v, std::vector<std::string> variables = {}) {
    Expression e;
    e.text_ = std::to_string(v);
    e.variables_ = std::move(variables);
    e.root_ = [v](Bindings) { return Vec(Vec::Constant(1, v)); };
    return e;
  }

  bool empty() const noexcept { return !root_; }
  const std::string& text() const noexcept { return text_; }
  const std::vector<std::string>& variables() const noexcept { return variables_; }

  Vec eval(Bindings b) const { return root_(b); }

  double scalar(Bindings b) const {
    const Vec v = root_(b);
    if (v.size() != 1) throw ExpressionError("expression '" + text_ + "' is a vector of length " + std::to_string(v.size()) + ", expected a scalar", 0);
    return v(0);
  }

  template <class... Spans>
  double operator()(const Spans&... s) const {
    const std::span<const double> arr[] = {std::span<const double>(s)...};
    return scalar(Bindings(arr, sizeof...(Spans)));
  }

private:
  struct Parser {
    const std::string& s;
    const std::vector<std::string>& vars;
    std::size_t pos;

    [[noreturn]] void fail(const std::string& msg) const {
      throw ExpressionError(msg + " at column " + std::to_string(pos + 1) + " in '" + s + "'", pos + 1);
    }

    void skip() {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }

    bool accept(char c) {
      skip();
      if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }

    void expect(char c) {
      if (!accept(c)) fail(std::string("expected '") + c + "'");
    }

    Node parse_all() {
      Node n = expr();
      skip();
      if (pos != s.size()) fail(std::string("unexpected '") + s[pos] + "'");
      return n;
    }

    static Vec combine(const Vec& x, const Vec& y, char op) {
      auto apply = [op](double u, double v) {
        switch (op) {
          case '+': return u + v;
          case '-': return u - v;
          case '*': return u * v;
          default: return u / v;
        }
      };
      if (x.size() == y.size()) {
        Vec out(x.size());
        for (Eigen::Index k = 0; k < x.size(); ++k) out(k) = apply(x(k), y(k));
        return out;
      }
      if (x.size() == 1) {
        Vec out(y.size());
        for (Eigen::Index k = 0; k < y.size(); ++k) out(k) = apply(x(0), y(k));
        return out;
      }
      if (y.size() == 1) {
        Vec out(x.size());
        for (Eigen::Index k = 0; k < x.size(); ++k) out(k) = apply(x(k), y(0));
        return out;
      }
      throw ExpressionError("length mismatch: " + std::to_string(x.size()) + " vs " + std::to_string(y.size()), 0);
    }

    Node binary(Node l, Node r, char op) {
      return [l = std::move(l), r = std::move(r), op](Bindings b) { return combine(l(b), r(b), op); };
    }

    Node expr() {
      Node n = term();
      for (;;) {
        if (accept('+')) n = binary(std::move(n), term(), '+');
        else if (accept('-')) n = binary(std::move(n), term(), '-');
        else return n;
      }
    }

    Node term() {
      Node n = unary();
      for (;;) {
        if (accept('*')) n = binary(std::move(n), unary(), '*');
        else if (accept('/')) n = binary(std::move(n), unary(), '/');
        else return n;
      }
    }

    Node unary() {
      if (accept('-')) {
        Node n = unary();
        return [n = std::move(n)](Bindings b) { return Vec(-n(b)); };
      }
      if (accept('+')) return unary();
      return primary();
    }

    Node number() {
      const char* begin = s.c_str() + pos;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("expected a number");
      pos += static_cast<std::size_t>(end - begin);
      return [v](Bindings) { return Vec(Vec::Constant(1, v)); };
    }

    std::vector<Node> arguments() {
      std::vector<Node> args;
      expect('(');
      if (accept(')')) return args;
      do args.push_back(expr());
      while (accept(','));
      expect(')');
      return args;
    }

    Node function(const std::string& name, std::size_t at) {
      std::vector<Node> args = arguments();
      auto arity = [&](std::size_t k) {
        if (args.size() != k) {
          pos = at;
          fail(name + " takes " + std::to_string(k) + " argument(s)");
        }
      };
      if (name == "dot") {
        arity(2);
        return [u = args[0], v = args[1]](Bindings b) {
          const Vec x = u(b), y = v(b);
          if (x.size() != y.size()) throw ExpressionError("dot: length mismatch", 0);
          return Vec(Vec::Constant(1, x.dot(y)));
        };
      }
      double (*fn)(double) = nullptr;
      if (name == "exp") fn = [](double v) { return std::exp(v); };
      else if (name == "ln") fn = [](double v) { return std::log(v); };
      else if (name == "sin") fn = [](double v) { return std::sin(v); };
      else if (name == "cos") fn = [](double v) { return std::cos(v); };
      else if (name == "abs") fn = [](double v) { return std::abs(v); };
      else {
        pos = at;
        fail("unknown function '" + name + "'");
      }
      arity(1);
      return [u = args[0], fn](Bindings b) { return Vec(u(b).unaryExpr(fn)); };
    }

    Node variable(const std::string& name, std::size_t at) {
      if (name == "pi") return [](Bindings) { return Vec(Vec::Constant(1, std::numbers::pi)); };
      for (std::size_t k = 0; k < vars.size(); ++k) {
        const std::string& v = vars[k];
        if (name == v) {
          return [k](Bindings b) { return Vec(Eigen::Map<const Vec>(b[k].data(), static_cast<Eigen::Index>(b[k].size()))); };
        }
        if (name.size() > v.size() && name.compare(0, v.size(), v) == 0 &&
            name.find_first_not_of("0123456789", v.size()) == std::string::npos) {
          const std::size_t c = std::stoul(name.substr(v.size()));
          return [k, c, name](Bindings b) {
            if (c >= b[k].size())
              throw ExpressionError("component " + name + " out of range (length " + std::to_string(b[k].size()) + ")", 0);
            return Vec(Vec::Constant(1, b[k][c]));
          };
        }
      }
      pos = at;
      std::string known;
      for (const auto& v : vars) known += (known.empty() ? "" : ", ") + v;
      fail("unknown variable '" + name + "' (available: " + (known.empty() ? "none" : known) + ")");
    }

    Node primary() {
      skip();
      if (pos >= s.size()) fail("unexpected end of expression");
      const char c = s[pos];
      if (accept('(')) {
        Node n = expr();
        expect(')');
        return n;
      }
      if (accept('[')) {
        std::vector<Node> items;
        do items.push_back(expr());
        while (accept(','));
        expect(']');
        return [items = std::move(items)](Bindings b) {
          Vec out(static_cast<Eigen::Index>(items.size()));
          for (std::size_t k = 0; k < items.size(); ++k) {
            const Vec v = items[k](b);
            if (v.size() != 1) throw ExpressionError("vector literal entries must be scalars", 0);
            out(static_cast<Eigen::Index>(k)) = v(0);
          }
          return out;
        };
      }
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        const std::size_t at = pos;
        while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) ++pos;
        const std::string name = s.substr(at, pos - at);
        skip();
        if (pos < s.size() && s[pos] == '(') return function(name, at);
        return variable(name, at);
      }
      fail(std::string("unexpected '") + c + "'");
    }
  };

  std::string text_;
  std::vector<std::string> variables_;
  Node root_;
};

} // namespace glh::cli
