#include "delayoc/expr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <functional>
#include <system_error>

namespace delayoc {

namespace {

constexpr int kMaxNesting = 200;

bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

struct FuncEntry {
  std::string_view name;
  Func func;
};

constexpr std::array<FuncEntry, 6> kFuncs{{
    {"exp", Func::Exp},
    {"log", Func::Log},
    {"sqrt", Func::Sqrt},
    {"sin", Func::Sin},
    {"cos", Func::Cos},
    {"tanh", Func::Tanh},
}};

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr parse() {
    skip_ws();
    auto root = parse_expr(0);
    skip_ws();
    if (pos_ != text_.size()) fail("operator or end of input");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& expected) const {
    std::string found = pos_ < text_.size() ? "'" + std::string(1, text_[pos_]) + "'" : "end of input";
    throw ParseError(pos_, expected,
                     "syntax error at offset " + std::to_string(pos_) + ": expected " + expected + ", found " + found);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      skip_ws();
      return true;
    }
    return false;
  }

  void enter(int depth) const {
    if (depth > kMaxNesting) {
      throw ParseError(pos_, "shallower nesting",
                       "syntax error at offset " + std::to_string(pos_) + ": nesting deeper than " +
                           std::to_string(kMaxNesting));
    }
  }

  static NodePtr binary(BinOp op, NodePtr lhs, NodePtr rhs) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Binary;
    n->op = op;
    n->offset = lhs->offset;
    n->length = rhs->offset + rhs->length - lhs->offset;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
  }

  NodePtr parse_expr(int depth) {
    enter(depth);
    auto lhs = parse_term(depth + 1);
    for (;;) {
      skip_ws();
      if (accept('+')) {
        lhs = binary(BinOp::Add, lhs, parse_term(depth + 1));
      } else if (accept('-')) {
        lhs = binary(BinOp::Sub, lhs, parse_term(depth + 1));
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_term(int depth) {
    enter(depth);
    auto lhs = parse_unary(depth + 1);
    for (;;) {
      if (accept('*')) {
        lhs = binary(BinOp::Mul, lhs, parse_unary(depth + 1));
      } else if (accept('/')) {
        lhs = binary(BinOp::Div, lhs, parse_unary(depth + 1));
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_unary(int depth) {
    enter(depth);
    skip_ws();
    std::size_t start = pos_;
    if (accept('-')) {
      auto operand = parse_unary(depth + 1);
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::Negate;
      n->offset = start;
      n->length = operand->offset + operand->length - start;
      n->lhs = std::move(operand);
      return n;
    }
    return parse_power(depth + 1);
  }

  NodePtr parse_power(int depth) {
    enter(depth);
    auto base = parse_primary(depth + 1);
    if (accept('^')) return binary(BinOp::Pow, base, parse_unary(depth + 1));
    return base;
  }

  NodePtr parse_primary(int depth) {
    enter(depth);
    skip_ws();
    if (pos_ >= text_.size()) fail("number, variable, function call, '(' or '-'");
    const std::size_t start = pos_;
    const char c = text_[pos_];

    if (c == '(') {
      ++pos_;
      auto inner = parse_expr(depth + 1);
      skip_ws();
      if (pos_ >= text_.size() || text_[pos_] != ')') fail("')'");
      ++pos_;
      return inner;
    }

    if (is_digit(c) || c == '.') return parse_number();

    if (is_lower(c)) {
      while (pos_ < text_.size() && is_lower(text_[pos_])) ++pos_;
      while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
      std::string name(text_.substr(start, pos_ - start));
      std::size_t after_name = pos_;
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == '(') {
        const FuncEntry* entry = nullptr;
        for (const auto& f : kFuncs) {
          if (f.name == name) entry = &f;
        }
        if (entry == nullptr) {
          throw ParseError(start, "known function",
                           "unknown function '" + name + "' at offset " + std::to_string(start));
        }
        ++pos_;
        auto arg = parse_expr(depth + 1);
        skip_ws();
        if (pos_ >= text_.size() || text_[pos_] != ')') fail("')'");
        ++pos_;
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Call;
        n->func = entry->func;
        n->offset = start;
        n->length = pos_ - start;
        n->lhs = std::move(arg);
        return n;
      }
      pos_ = after_name;
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::Variable;
      n->name = std::move(name);
      n->offset = start;
      n->length = after_name - start;
      return n;
    }

    fail("number, variable, function call, '(' or '-'");
  }

  NodePtr parse_number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
    }
    if (pos_ - start == 1 && text_[start] == '.') {
      pos_ = start;
      fail("digit");
    }
    // Exponent only when a digit follows, so "2e" stays a syntax error downstream.
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
      if (p < text_.size() && is_digit(text_[p])) {
        pos_ = p;
        while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
      }
    }
    double value = 0.0;
    auto first = text_.data() + start;
    auto last = text_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || !std::isfinite(value)) {
      pos_ = start;
      fail("finite number");
    }
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Number;
    n->number = value;
    n->offset = start;
    n->length = pos_ - start;
    return n;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

int precedence(const Node& n) {
  switch (n.kind) {
    case Node::Kind::Binary:
      switch (n.op) {
        case BinOp::Add:
        case BinOp::Sub:
          return 1;
        case BinOp::Mul:
        case BinOp::Div:
          return 2;
        case BinOp::Pow:
          return 4;
      }
      break;
    case Node::Kind::Negate:
      return 3;
    default:
      break;
  }
  return 5;
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

struct Substitution {
  std::string_view name;
  std::string_view text;
};

void render(const Node& n, std::string& out, const Substitution* sub = nullptr);

void render_child(const Node& child, bool parens, std::string& out, const Substitution* sub) {
  if (parens) out += '(';
  render(child, out, sub);
  if (parens) out += ')';
}

void render(const Node& n, std::string& out, const Substitution* sub) {
  switch (n.kind) {
    case Node::Kind::Number:
      out += format_number(n.number);
      return;
    case Node::Kind::Variable:
      if (sub != nullptr && n.name == sub->name) {
        out += '(';
        out += sub->text;
        out += ')';
      } else {
        out += n.name;
      }
      return;
    case Node::Kind::Negate:
      out += '-';
      render_child(*n.lhs, precedence(*n.lhs) < 3, out, sub);
      return;
    case Node::Kind::Call:
      out += func_name(n.func);
      out += '(';
      render(*n.lhs, out, sub);
      out += ')';
      return;
    case Node::Kind::Binary: {
      const int p = precedence(n);
      if (n.op == BinOp::Pow) {
        render_child(*n.lhs, precedence(*n.lhs) <= 4, out, sub);
        out += '^';
        render_child(*n.rhs, precedence(*n.rhs) < 3, out, sub);
        return;
      }
      render_child(*n.lhs, precedence(*n.lhs) < p, out, sub);
      switch (n.op) {
        case BinOp::Add: out += " + "; break;
        case BinOp::Sub: out += " - "; break;
        case BinOp::Mul: out += "*"; break;
        case BinOp::Div: out += "/"; break;
        case BinOp::Pow: break;
      }
      render_child(*n.rhs, precedence(*n.rhs) <= p, out, sub);
      return;
    }
  }
}

void collect(const Node& n, std::set<std::string>& out) {
  if (n.kind == Node::Kind::Variable) out.insert(n.name);
  if (n.lhs) collect(*n.lhs, out);
  if (n.rhs) collect(*n.rhs, out);
}

bool is_integral(double v) { return std::isfinite(v) && std::floor(v) == v; }

}  // namespace

std::string_view func_name(Func f) {
  for (const auto& e : kFuncs) {
    if (e.func == f) return e.name;
  }
  return "?";
}

Expr::Expr() : Expr(constant(0.0)) {}

Expr::Expr(NodePtr root, std::shared_ptr<const std::string> source)
    : root_(std::move(root)), source_(std::move(source)) {}

Expr Expr::parse(std::string_view text) {
  Parser parser(text);
  auto root = parser.parse();
  return Expr(std::move(root), std::make_shared<const std::string>(text));
}

Expr Expr::constant(double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("non-finite constant");
  auto text = format_number(std::fabs(value));
  if (value < 0 || std::signbit(value)) text = "-" + text;
  return parse(text);
}

std::set<std::string> Expr::variables() const {
  std::set<std::string> out;
  collect(*root_, out);
  return out;
}

std::string Expr::str() const {
  std::string out;
  render(*root_, out);
  return out;
}

std::string Expr::text_of(const Node& node) const {
  if (node.offset + node.length <= source_->size()) return source_->substr(node.offset, node.length);
  std::string out;
  render(node, out);
  return out;
}

VarLayout::VarLayout(std::vector<std::string> names) : names_(std::move(names)) {}

int VarLayout::slot_of(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return static_cast<int>(i);
  }
  return -1;
}

Program::Program(const Expr& expr, const VarLayout& layout) : expr_(expr) {
  emit(expr_.root(), layout, 1);
}

void Program::emit(const Node& node, const VarLayout& layout, int depth) {
  max_depth_ = std::max(max_depth_, depth);
  Instr in{Op::Const, Func::Exp, -1, 0.0, &node};
  switch (node.kind) {
    case Node::Kind::Number:
      in.value = node.number;
      break;
    case Node::Kind::Variable:
      in.op = Op::Load;
      in.slot = layout.slot_of(node.name);
      if (in.slot < 0) throw UnboundVariable(node.name);
      break;
    case Node::Kind::Negate:
      emit(*node.lhs, layout, depth);
      in.op = Op::Neg;
      break;
    case Node::Kind::Call:
      emit(*node.lhs, layout, depth);
      in.op = Op::Call;
      in.func = node.func;
      break;
    case Node::Kind::Binary:
      emit(*node.lhs, layout, depth);
      emit(*node.rhs, layout, depth + 1);
      switch (node.op) {
        case BinOp::Add: in.op = Op::Add; break;
        case BinOp::Sub: in.op = Op::Sub; break;
        case BinOp::Mul: in.op = Op::Mul; break;
        case BinOp::Div: in.op = Op::Div; break;
        case BinOp::Pow: in.op = Op::Pow; break;
      }
      break;
  }
  code_.push_back(in);
}

void Program::fail(const std::string& what, const Node* node) const {
  throw DomainError(what, expr_.text_of(*node));
}

namespace {

template <class T>
T power(const T& base, const T& expo, bool& bad) {
  const double a = value_of(base);
  const double b = value_of(expo);
  bad = false;
  if constexpr (std::is_same_v<T, double>) {
    if (a < 0.0 && !is_integral(b)) bad = true;
    if (a == 0.0 && b < 0.0) bad = true;
    return bad ? 0.0 : std::pow(a, b);
  } else {
    const double da = base.d;
    const double db = expo.d;
    if (a < 0.0 && (!is_integral(b) || db != 0.0)) {
      bad = true;
      return {};
    }
    if (a == 0.0) {
      if (b < 0.0 || (b < 1.0 && b != 0.0 && da != 0.0)) {
        bad = true;
        return {};
      }
      if (b == 0.0) return {1.0, 0.0};
      // d/dx x^b at 0 is 1 for b == 1 and 0 for b > 1; the log term vanishes.
      return {0.0, b == 1.0 ? da : 0.0};
    }
    const double v = std::pow(a, b);
    double d = b * std::pow(a, b - 1.0) * da;
    if (db != 0.0) d += v * std::log(a) * db;
    return {v, d};
  }
}

}  // namespace

template <class T>
T Program::run(std::span<const T> slots) const {
  std::array<T, 48> small{};
  std::vector<T> big;
  T* stack = small.data();
  if (max_depth_ > static_cast<int>(small.size())) {
    big.resize(static_cast<std::size_t>(max_depth_));
    stack = big.data();
  }
  int sp = 0;
  using std::cos;
  using std::exp;
  using std::log;
  using std::sin;
  using std::sqrt;
  using std::tanh;
  for (const Instr& in : code_) {
    switch (in.op) {
      case Op::Const:
        stack[sp++] = T(in.value);
        break;
      case Op::Load:
        stack[sp++] = slots[static_cast<std::size_t>(in.slot)];
        break;
      case Op::Neg:
        stack[sp - 1] = -stack[sp - 1];
        break;
      case Op::Add:
        --sp;
        stack[sp - 1] = stack[sp - 1] + stack[sp];
        break;
      case Op::Sub:
        --sp;
        stack[sp - 1] = stack[sp - 1] - stack[sp];
        break;
      case Op::Mul:
        --sp;
        stack[sp - 1] = stack[sp - 1] * stack[sp];
        break;
      case Op::Div:
        --sp;
        if (value_of(stack[sp]) == 0.0) fail("division by zero", in.node);
        stack[sp - 1] = stack[sp - 1] / stack[sp];
        break;
      case Op::Pow: {
        --sp;
        bool bad = false;
        T r = power(stack[sp - 1], stack[sp], bad);
        if (bad) fail("power outside its real domain", in.node);
        stack[sp - 1] = r;
        break;
      }
      case Op::Call: {
        T& x = stack[sp - 1];
        switch (in.func) {
          case Func::Exp: x = exp(x); break;
          case Func::Log:
            if (value_of(x) <= 0.0) fail("log of non-positive value", in.node);
            x = log(x);
            break;
          case Func::Sqrt:
            if (value_of(x) < 0.0) fail("sqrt of negative value", in.node);
            x = sqrt(x);
            break;
          case Func::Sin: x = sin(x); break;
          case Func::Cos: x = cos(x); break;
          case Func::Tanh: x = tanh(x); break;
        }
        break;
      }
    }
  }
  const T& result = stack[0];
  if (!std::isfinite(value_of(result)) || !std::isfinite(tangent_of(result))) {
    fail("non-finite result", &expr_.root());
  }
  return result;
}

template double Program::run<double>(std::span<const double>) const;
template Dual Program::run<Dual>(std::span<const Dual>) const;

namespace {

VarLayout layout_from(const Env& env) {
  std::vector<std::string> names;
  names.reserve(env.size());
  for (const auto& [name, value] : env) names.push_back(name);
  return VarLayout(std::move(names));
}

}  // namespace

Expr substitute(const Expr& e, std::string_view name, std::string_view replacement) {
  std::string out;
  const Substitution sub{name, replacement};
  render(e.root(), out, &sub);
  return Expr::parse(out);
}

double eval(const Expr& e, const Env& env) {
  Program prog(e, layout_from(env));
  std::vector<double> slots;
  slots.reserve(env.size());
  for (const auto& [name, value] : env) slots.push_back(value);
  return prog.run<double>(slots);
}

std::pair<double, std::vector<double>> eval_grad(const Expr& e, const Env& env,
                                                 const std::vector<std::string>& wrt) {
  const VarLayout layout = layout_from(env);
  Program prog(e, layout);
  std::vector<Dual> slots;
  slots.reserve(env.size());
  for (const auto& [name, value] : env) slots.emplace_back(value);

  std::vector<double> grad(wrt.size(), 0.0);
  double value = 0.0;
  if (wrt.empty()) {
    value = prog.run<Dual>(slots).v;
  }
  for (std::size_t i = 0; i < wrt.size(); ++i) {
    const int slot = layout.slot_of(wrt[i]);
    if (slot < 0) throw UnboundVariable(wrt[i]);
    slots[static_cast<std::size_t>(slot)].d = 1.0;
    const Dual r = prog.run<Dual>(slots);
    slots[static_cast<std::size_t>(slot)].d = 0.0;
    value = r.v;
    grad[i] = r.d;
  }
  return {value, grad};
}

}  // namespace delayoc
