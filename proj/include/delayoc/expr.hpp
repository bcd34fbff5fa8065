#pragma once

// Scalar expression language used for every piece of problem data.
//
// Grammar (precedence low to high):
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          right-associative
//   primary := number | name | func '(' expr ')' | '(' expr ')'
// Names match [a-z]+[0-9]*; functions are exp, log, sqrt, sin, cos, tanh.

#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "delayoc/dual.hpp"

namespace delayoc {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t offset, std::string expected, const std::string& message)
      : std::runtime_error(message), offset_(offset), expected_(std::move(expected)) {}
  std::size_t offset() const { return offset_; }
  const std::string& expected() const { return expected_; }

 private:
  std::size_t offset_;
  std::string expected_;
};

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnboundVariable : public EvalError {
 public:
  explicit UnboundVariable(std::string name)
      : EvalError("unbound variable '" + name + "'"), name_(std::move(name)) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class DomainError : public EvalError {
 public:
  DomainError(const std::string& what, std::string subexpression)
      : EvalError(what + " in '" + subexpression + "'"), subexpression_(std::move(subexpression)) {}
  const std::string& subexpression() const { return subexpression_; }

 private:
  std::string subexpression_;
};

enum class Func { Exp, Log, Sqrt, Sin, Cos, Tanh };
enum class BinOp { Add, Sub, Mul, Div, Pow };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  enum class Kind { Number, Variable, Negate, Binary, Call };

  Kind kind = Kind::Number;
  double number = 0.0;
  std::string name;
  BinOp op = BinOp::Add;
  Func func = Func::Exp;
  NodePtr lhs;  // operand for Negate and Call
  NodePtr rhs;
  // Source span, used to report the offending subexpression.
  std::size_t offset = 0;
  std::size_t length = 0;
};

using Env = std::map<std::string, double, std::less<>>;

/// Immutable parsed expression. Copies share the tree.
class Expr {
 public:
  Expr();  // the literal 0

  static Expr parse(std::string_view text);
  static Expr constant(double value);

  const Node& root() const { return *root_; }
  const std::string& source() const { return *source_; }

  /// All variable names referenced, sorted.
  std::set<std::string> variables() const;

  /// Minimal-parenthesis rendering that reparses to an equivalent tree.
  std::string str() const;

  /// Text of the subexpression rooted at `node`.
  std::string text_of(const Node& node) const;

 private:
  Expr(NodePtr root, std::shared_ptr<const std::string> source);

  NodePtr root_;
  std::shared_ptr<const std::string> source_;
};

std::string_view func_name(Func f);

/// Ordered variable slots that compiled programs read from.
class VarLayout {
 public:
  VarLayout() = default;
  explicit VarLayout(std::vector<std::string> names);

  int slot_of(std::string_view name) const;  // -1 when absent
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
};

/// An Expr lowered to a postfix tape against a fixed VarLayout.
/// Evaluation is reentrant; one Program may be run from many threads.
class Program {
 public:
  Program() = default;
  /// Throws UnboundVariable if `expr` references a name missing from `layout`.
  Program(const Expr& expr, const VarLayout& layout);

  template <class T>
  T run(std::span<const T> slots) const;

  std::size_t size() const { return code_.size(); }

 private:
  enum class Op : unsigned char { Const, Load, Neg, Add, Sub, Mul, Div, Pow, Call };
  struct Instr {
    Op op;
    Func func;
    int slot;
    double value;
    const Node* node;
  };

  void emit(const Node& node, const VarLayout& layout, int depth);
  [[noreturn]] void fail(const std::string& what, const Node* node) const;

  Expr expr_;
  std::vector<Instr> code_;
  int max_depth_ = 0;
};

extern template double Program::run<double>(std::span<const double>) const;
extern template Dual Program::run<Dual>(std::span<const Dual>) const;

/// Replace every occurrence of variable `name` by `(replacement)`.
Expr substitute(const Expr& e, std::string_view name, std::string_view replacement);

/// Evaluate under a name->value environment.
double eval(const Expr& e, const Env& env);

/// Value plus exact forward-mode derivatives with respect to `wrt`.
std::pair<double, std::vector<double>> eval_grad(const Expr& e, const Env& env,
                                                 const std::vector<std::string>& wrt);

}  // namespace delayoc
