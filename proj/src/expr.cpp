// SPDX-License-Identifier: Apache-2.0

#include "kgspec/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

namespace kgspec
{

struct Expr::Node
{
  Op op = Op::Const;
  int index = 0;
  double value = 0.0;
  std::unique_ptr<Node> a, b;

  bool is_const() const { return op == Op::Const; }
};

// Recursive-descent parser; folds constant subtrees as it goes so that a field
// such as "2*pi" or "(1+0.5)^2" is recognized as constant downstream.
struct ExprParser
{
  using Node = Expr::Node;
  using Op = Expr::Op;

  std::string_view s;
  std::size_t pos = 0;
  const Expr::VarLookup &vars;

  [[noreturn]] void fail(const std::string &msg) const
  {
    std::ostringstream os;
    os << "expression '" << s << "': " << msg << " at offset " << pos;
    throw ConfigError(os.str());
  }

  void skip()
  {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos])))
    {
      pos++;
    }
  }

  bool accept(char c)
  {
    skip();
    if (pos < s.size() && s[pos] == c)
    {
      pos++;
      return true;
    }
    return false;
  }

  static std::unique_ptr<Node> leaf(double v)
  {
    auto n = std::make_unique<Node>();
    n->op = Op::Const;
    n->value = v;
    return n;
  }

  static double fold_unary(Op op, double x)
  {
    switch (op)
    {
      case Op::Neg:
        return -x;
      case Op::Sin:
        return std::sin(x);
      case Op::Cos:
        return std::cos(x);
      case Op::Tan:
        return std::tan(x);
      case Op::Exp:
        return std::exp(x);
      case Op::Log:
        return std::log(x);
      case Op::Sqrt:
        return std::sqrt(x);
      case Op::Sinh:
        return std::sinh(x);
      case Op::Cosh:
        return std::cosh(x);
      case Op::Tanh:
        return std::tanh(x);
      default:
        return x;
    }
  }

  static std::unique_ptr<Node> unary(Op op, std::unique_ptr<Node> a)
  {
    if (a->is_const())
    {
      return leaf(fold_unary(op, a->value));
    }
    auto n = std::make_unique<Node>();
    n->op = op;
    n->a = std::move(a);
    return n;
  }

  static std::unique_ptr<Node> binary(Op op, std::unique_ptr<Node> a, std::unique_ptr<Node> b)
  {
    if (a->is_const() && b->is_const())
    {
      const double x = a->value, y = b->value;
      switch (op)
      {
        case Op::Add:
          return leaf(x + y);
        case Op::Sub:
          return leaf(x - y);
        case Op::Mul:
          return leaf(x * y);
        case Op::Div:
          return leaf(x / y);
        default:
          return leaf(std::pow(x, y));
      }
    }
    if (op == Op::Pow && b->is_const())
    {
      auto n = std::make_unique<Node>();
      const double p = b->value;
      if (p == std::round(p) && std::abs(p) <= 64)
      {
        n->op = Op::PowInt;
        n->index = static_cast<int>(p);
      }
      else
      {
        n->op = Op::PowConst;
        n->value = p;
      }
      n->a = std::move(a);
      return n;
    }
    auto n = std::make_unique<Node>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
  }

  std::unique_ptr<Node> expr()
  {
    auto lhs = term();
    for (;;)
    {
      if (accept('+'))
      {
        lhs = binary(Op::Add, std::move(lhs), term());
      }
      else if (accept('-'))
      {
        lhs = binary(Op::Sub, std::move(lhs), term());
      }
      else
      {
        return lhs;
      }
    }
  }

  std::unique_ptr<Node> term()
  {
    auto lhs = signed_factor();
    for (;;)
    {
      if (accept('*'))
      {
        lhs = binary(Op::Mul, std::move(lhs), signed_factor());
      }
      else if (accept('/'))
      {
        lhs = binary(Op::Div, std::move(lhs), signed_factor());
      }
      else
      {
        return lhs;
      }
    }
  }

  std::unique_ptr<Node> signed_factor()
  {
    if (accept('-'))
    {
      return unary(Op::Neg, signed_factor());
    }
    if (accept('+'))
    {
      return signed_factor();
    }
    return power();
  }

  std::unique_ptr<Node> power()
  {
    auto base = primary();
    if (accept('^'))
    {
      return binary(Op::Pow, std::move(base), signed_factor());
    }
    return base;
  }

  std::unique_ptr<Node> primary()
  {
    skip();
    if (pos >= s.size())
    {
      fail("unexpected end of input");
    }
    const char c = s[pos];
    if (accept('('))
    {
      auto e = expr();
      if (!accept(')'))
      {
        fail("expected ')'");
      }
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
    {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + s.size(), v);
      if (ec != std::errc())
      {
        fail("bad number");
      }
      pos = static_cast<std::size_t>(ptr - s.data());
      return leaf(v);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
    {
      const std::size_t start = pos;
      while (pos < s.size() &&
             (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
      {
        pos++;
      }
      const std::string_view name = s.substr(start, pos - start);
      if (accept('('))
      {
        Op op;
        if (name == "sin")
          op = Op::Sin;
        else if (name == "cos")
          op = Op::Cos;
        else if (name == "tan")
          op = Op::Tan;
        else if (name == "exp")
          op = Op::Exp;
        else if (name == "log")
          op = Op::Log;
        else if (name == "sqrt")
          op = Op::Sqrt;
        else if (name == "sinh")
          op = Op::Sinh;
        else if (name == "cosh")
          op = Op::Cosh;
        else if (name == "tanh")
          op = Op::Tanh;
        else
          fail("unknown function '" + std::string(name) + "'");
        auto arg = expr();
        if (!accept(')'))
        {
          fail("expected ')'");
        }
        return unary(op, std::move(arg));
      }
      if (name == "pi")
      {
        return leaf(std::numbers::pi);
      }
      const int idx = vars ? vars(name) : -1;
      if (idx < 0)
      {
        fail("unknown identifier '" + std::string(name) + "'");
      }
      auto n = std::make_unique<Node>();
      n->op = Op::Var;
      n->index = idx;
      return n;
    }
    fail(std::string("unexpected character '") + c + "'");
  }
};

void Expr::emit(const Node &node, std::vector<Instr> &code, int depth, int &max_depth)
{
  if (node.a)
  {
    emit(*node.a, code, depth, max_depth);
  }
  if (node.b)
  {
    emit(*node.b, code, depth + 1, max_depth);
  }
  const int here = depth + 1;
  if (here > max_depth)
  {
    max_depth = here;
  }
  code.push_back(Instr{node.op, node.index, node.value});
}

Expr Expr::parse(std::string_view text, const VarLookup &vars)
{
  ExprParser p{text, 0, vars};
  auto root = p.expr();
  p.skip();
  if (p.pos != text.size())
  {
    p.fail("trailing input");
  }
  Expr e;
  e.code_.clear();
  int max_depth = 0;
  emit(*root, e.code_, 0, max_depth);
  if (max_depth > kMaxStack)
  {
    throw ConfigError("expression '" + std::string(text) + "' is nested too deeply");
  }
  e.text_ = std::string(text);
  return e;
}

Expr Expr::constant(double c)
{
  Expr e;
  e.code_[0].value = c;
  std::ostringstream os;
  os.precision(17);
  os << c;
  e.text_ = os.str();
  return e;
}

Expr::VarLookup Expr::standard_vars(int d)
{
  return [d](std::string_view name) -> int
  {
    if (name == "x" && d >= 1)
      return 0;
    if (name == "y" && d >= 2)
      return 1;
    if (name == "z" && d >= 3)
      return 2;
    if (name.size() >= 2 && name[0] == 'x')
    {
      int k = 0;
      auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), k);
      if (ec == std::errc() && ptr == name.data() + name.size() && k >= 1 && k <= d)
      {
        return k - 1;
      }
    }
    return -1;
  };
}

TrigInterpolant::TrigInterpolant(const std::vector<int> &points,
                                 const std::vector<double> &lengths,
                                 const std::vector<double> &samples)
{
  const std::size_t d = points.size();
  std::size_t total = 1;
  for (int m : points)
  {
    total *= static_cast<std::size_t>(m);
  }
  if (samples.size() != total)
  {
    throw ConfigError("grid samples: expected " + std::to_string(total) + " values, got " +
                      std::to_string(samples.size()));
  }
  // Plain DFT over the tensor grid. Sizes are small (fields, not solutions).
  std::vector<int> freq(d, 0);
  std::vector<int> node(d, 0);
  double scale = 0.0;
  for (double v : samples)
  {
    scale = std::max(scale, std::abs(v));
  }
  for (std::size_t f = 0; f < total; f++)
  {
    std::size_t rem = f;
    for (std::size_t i = d; i-- > 0;)
    {
      const int m = points[i];
      const int k = static_cast<int>(rem % static_cast<std::size_t>(m));
      rem /= static_cast<std::size_t>(m);
      freq[i] = k <= m / 2 ? k : k - m;
    }
    // Keep one of each +-k pair, deciding by the first component that is neither
    // zero nor the Nyquist index (Nyquist components are their own partners).
    bool keep = true;
    bool zero = true;
    bool self_conj = true;
    for (std::size_t i = 0; i < d; i++)
    {
      zero = zero && freq[i] == 0;
      const bool nyquist = points[i] % 2 == 0 && freq[i] == points[i] / 2;
      if (freq[i] != 0 && !nyquist && self_conj)
      {
        keep = freq[i] > 0;
        self_conj = false;
      }
    }
    if (!keep)
    {
      continue;
    }
    double re = 0.0, im = 0.0;
    for (std::size_t g = 0; g < total; g++)
    {
      std::size_t r2 = g;
      double phase = 0.0;
      for (std::size_t i = d; i-- > 0;)
      {
        const int m = points[i];
        const int j = static_cast<int>(r2 % static_cast<std::size_t>(m));
        r2 /= static_cast<std::size_t>(m);
        phase += 2.0 * std::numbers::pi * freq[i] * j / m;
      }
      re += samples[g] * std::cos(phase);
      im -= samples[g] * std::sin(phase);
    }
    re /= static_cast<double>(total);
    im /= static_cast<double>(total);
    if (zero)
    {
      mean_ = re;
      continue;
    }
    const double mult = self_conj ? 1.0 : 2.0;
    if (std::hypot(re, im) * mult <= 1e-15 * std::max(scale, 1e-300))
    {
      continue;
    }
    Term t;
    t.kappa.resize(d);
    for (std::size_t i = 0; i < d; i++)
    {
      t.kappa[i] = 2.0 * std::numbers::pi * freq[i] / lengths[i];
    }
    t.a = mult * re;
    t.b = self_conj ? 0.0 : -mult * im;
    terms_.push_back(std::move(t));
  }
}

}  // namespace kgspec
