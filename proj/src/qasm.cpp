#include "qpart/qasm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>

namespace qpart {

namespace {

enum class Tok { Ident, Number, String, Symbol, End };

struct Token {
  Tok type = Tok::End;
  std::string text;
  double value = 0.0;
  bool integral = false;
  int line = 1;
  int column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space_and_comments();
      Token t;
      t.line = line_;
      t.column = col_;
      if (pos_ >= src_.size()) {
        t.type = Tok::End;
        out.push_back(t);
        return out;
      }
      const char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        t.type = Tok::Ident;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
          t.text.push_back(advance());
        }
      } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                 (c == '.' && pos_ + 1 < src_.size() &&
                  std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
        lex_number(t);
      } else if (c == '"') {
        t.type = Tok::String;
        advance();
        while (pos_ < src_.size() && src_[pos_] != '"' && src_[pos_] != '\n') {
          t.text.push_back(advance());
        }
        if (pos_ >= src_.size() || src_[pos_] != '"') {
          throw SyntaxError(t.line, t.column, "unterminated string literal");
        }
        advance();
      } else if (c == '-' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '>') {
        t.type = Tok::Symbol;
        t.text = "->";
        advance();
        advance();
      } else if (std::string_view("()[]{},;+-*/^=<>!").find(c) != std::string_view::npos) {
        t.type = Tok::Symbol;
        t.text.push_back(advance());
      } else {
        throw SyntaxError(t.line, t.column, std::string("unexpected character '") + c + "'");
      }
      out.push_back(std::move(t));
    }
  }

 private:
  char advance() {
    const char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_space_and_comments() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '*') {
        const int l = line_, k = col_;
        advance();
        advance();
        while (pos_ + 1 < src_.size() && !(src_[pos_] == '*' && src_[pos_ + 1] == '/')) advance();
        if (pos_ + 1 >= src_.size()) throw SyntaxError(l, k, "unterminated block comment");
        advance();
        advance();
      } else {
        return;
      }
    }
  }

  void lex_number(Token& t) {
    t.type = Tok::Number;
    t.integral = true;
    const auto digits = [&] {
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        t.text.push_back(advance());
      }
    };
    digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      t.integral = false;
      t.text.push_back(advance());
      digits();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      t.integral = false;
      t.text.push_back(advance());
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) {
        t.text.push_back(advance());
      }
      if (pos_ >= src_.size() || !std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        throw SyntaxError(t.line, t.column, "malformed exponent in '" + t.text + "'");
      }
      digits();
    }
    t.value = std::stod(t.text);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

struct Register {
  int offset;
  int size;
};

/// A resolved argument: either one element or a whole register.
struct Operand {
  std::string reg;
  std::optional<long> index;
  int line;
  int column;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Circuit run() {
    bool first = true;
    while (peek().type != Tok::End) {
      statement(first);
      first = false;
    }
    return std::move(circuit_);
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool is_symbol(std::string_view s) const {
    return peek().type == Tok::Symbol && peek().text == s;
  }
  [[noreturn]] void fail(const Token& t, const std::string& what) const {
    throw SyntaxError(t.line, t.column, what);
  }
  void expect_symbol(std::string_view s) {
    if (!is_symbol(s)) {
      const Token& t = peek();
      fail(t, "expected '" + std::string(s) + "' but found " + describe(t));
    }
    next();
  }
  std::string expect_ident() {
    if (peek().type != Tok::Ident) fail(peek(), "expected identifier but found " + describe(peek()));
    return next().text;
  }
  long expect_int() {
    const Token& t = peek();
    if (t.type != Tok::Number || !t.integral) fail(t, "expected integer but found " + describe(t));
    next();
    return std::stol(t.text);
  }
  static std::string describe(const Token& t) {
    switch (t.type) {
      case Tok::End:
        return "end of input";
      case Tok::String:
        return "string \"" + t.text + "\"";
      default:
        return "'" + t.text + "'";
    }
  }

  void statement(bool first) {
    const Token& head = peek();
    if (head.type != Tok::Ident) fail(head, "expected statement but found " + describe(head));
    const std::string& kw = head.text;
    if (kw == "OPENQASM") {
      if (!first) fail(head, "OPENQASM header must be the first statement");
      next();
      const Token& v = peek();
      if (v.type != Tok::Number) fail(v, "expected version number");
      if (v.text != "2.0" && v.text != "2") fail(v, "unsupported OpenQASM version " + v.text);
      next();
      expect_symbol(";");
    } else if (kw == "include") {
      next();
      if (peek().type != Tok::String) fail(peek(), "expected file name string after include");
      next();
      expect_symbol(";");
    } else if (kw == "qreg" || kw == "creg") {
      declare(kw == "qreg");
    } else if (kw == "measure") {
      measure();
    } else if (kw == "barrier") {
      next();
      for (;;) {
        (void)resolve(operand(), qregs_, "qubit");
        if (!is_symbol(",")) break;
        next();
      }
      expect_symbol(";");
    } else if (kw == "gate" || kw == "opaque" || kw == "reset" || kw == "if") {
      fail(head, "unsupported statement '" + kw + "'");
    } else {
      gate_call();
    }
  }

  void declare(bool quantum) {
    next();
    const Token& name_tok = peek();
    const std::string name = expect_ident();
    expect_symbol("[");
    const long size = expect_int();
    expect_symbol("]");
    expect_symbol(";");
    if (size <= 0) fail(name_tok, "register '" + name + "' must have positive size");
    if (qregs_.contains(name) || cregs_.contains(name)) {
      fail(name_tok, "register '" + name + "' redeclared");
    }
    int& total = quantum ? circuit_.num_qubits : circuit_.num_clbits;
    (quantum ? qregs_ : cregs_)[name] = Register{total, static_cast<int>(size)};
    total += static_cast<int>(size);
  }

  Operand operand() {
    Operand op;
    op.line = peek().line;
    op.column = peek().column;
    op.reg = expect_ident();
    if (is_symbol("[")) {
      next();
      op.index = expect_int();
      expect_symbol("]");
    }
    return op;
  }

  /// Flat indices addressed by `op`.
  std::vector<int> resolve(const Operand& op, const std::map<std::string, Register>& regs,
                           const char* what) const {
    const auto it = regs.find(op.reg);
    if (it == regs.end()) {
      throw SyntaxError(op.line, op.column,
                        std::string("unknown ") + what + " register '" + op.reg + "'");
    }
    const Register& r = it->second;
    if (!op.index) {
      std::vector<int> all(static_cast<std::size_t>(r.size));
      for (int i = 0; i < r.size; ++i) all[static_cast<std::size_t>(i)] = r.offset + i;
      return all;
    }
    if (*op.index < 0 || *op.index >= r.size) {
      throw IndexOutOfRange(op.line, op.column, op.reg, *op.index,
                            "index " + std::to_string(*op.index) + " out of range for register '" +
                                op.reg + "[" + std::to_string(r.size) + "]'");
    }
    return {r.offset + static_cast<int>(*op.index)};
  }

  void measure() {
    next();
    const Operand q = operand();
    expect_symbol("->");
    const Operand c = operand();
    expect_symbol(";");
    const auto qs = resolve(q, qregs_, "quantum");
    const auto cs = resolve(c, cregs_, "classical");
    if (qs.size() != cs.size()) {
      throw SyntaxError(q.line, q.column, "measure operands have different sizes");
    }
    for (std::size_t i = 0; i < qs.size(); ++i) {
      circuit_.measures.push_back(Measurement{qs[i], cs[i], circuit_.ops.size()});
    }
  }

  void gate_call() {
    const Token& name_tok = next();
    const auto kind = gate_from_name(name_tok.text);
    if (!kind) throw UnsupportedGateError(name_tok.line, name_tok.column, name_tok.text);

    GateApp app;
    app.kind = *kind;
    app.source_line = name_tok.line;
    if (is_symbol("(")) {
      next();
      if (!is_symbol(")")) {
        for (;;) {
          app.params.push_back(expression());
          if (!is_symbol(",")) break;
          next();
        }
      }
      expect_symbol(")");
    }
    if (static_cast<int>(app.params.size()) != gate_num_params(*kind)) {
      fail(name_tok, "gate '" + name_tok.text + "' takes " +
                         std::to_string(gate_num_params(*kind)) + " parameter(s), got " +
                         std::to_string(app.params.size()));
    }

    std::vector<Operand> args;
    for (;;) {
      args.push_back(operand());
      if (!is_symbol(",")) break;
      next();
    }
    expect_symbol(";");
    if (static_cast<int>(args.size()) != gate_arity(*kind)) {
      fail(name_tok, "gate '" + name_tok.text + "' acts on " + std::to_string(gate_arity(*kind)) +
                         " qubit(s), got " + std::to_string(args.size()));
    }
    for (const auto& a : args) {
      if (!a.index) {
        throw SyntaxError(a.line, a.column,
                          "register broadcast '" + a.reg + "' is not supported; index each qubit");
      }
      const int q = resolve(a, qregs_, "quantum").front();
      if (std::find(app.qubits.begin(), app.qubits.end(), q) != app.qubits.end()) {
        throw DuplicateQubit(a.line, a.column, a.reg, *a.index,
                             "qubit " + a.reg + "[" + std::to_string(*a.index) +
                                 "] used twice in one gate");
      }
      app.qubits.push_back(q);
    }
    circuit_.ops.push_back(std::move(app));
  }

  // expression := term (('+'|'-') term)*
  double expression() {
    double v = term();
    while (is_symbol("+") || is_symbol("-")) {
      const bool plus = next().text == "+";
      const double rhs = term();
      v = plus ? v + rhs : v - rhs;
    }
    return v;
  }
  double term() {
    double v = unary();
    while (is_symbol("*") || is_symbol("/")) {
      const Token& op = next();
      const double rhs = unary();
      if (op.text == "/" && rhs == 0.0) fail(op, "division by zero");
      v = op.text == "*" ? v * rhs : v / rhs;
    }
    return v;
  }
  double unary() {
    if (is_symbol("-")) {
      next();
      return -unary();
    }
    if (is_symbol("+")) {
      next();
      return unary();
    }
    return power();
  }
  double power() {
    const double base = primary();
    if (is_symbol("^")) {
      next();
      return std::pow(base, unary());
    }
    return base;
  }
  double primary() {
    const Token& t = peek();
    if (t.type == Tok::Number) {
      next();
      return t.value;
    }
    if (is_symbol("(")) {
      next();
      const double v = expression();
      expect_symbol(")");
      return v;
    }
    if (t.type == Tok::Ident) {
      next();
      if (t.text == "pi") return std::numbers::pi;
      static const std::map<std::string, double (*)(double), std::less<>> kFuncs{
          {"sin", [](double x) { return std::sin(x); }},
          {"cos", [](double x) { return std::cos(x); }},
          {"tan", [](double x) { return std::tan(x); }},
          {"exp", [](double x) { return std::exp(x); }},
          {"ln", [](double x) { return std::log(x); }},
          {"sqrt", [](double x) { return std::sqrt(x); }},
      };
      const auto f = kFuncs.find(t.text);
      if (f == kFuncs.end()) fail(t, "unknown identifier '" + t.text + "' in expression");
      expect_symbol("(");
      const double arg = expression();
      expect_symbol(")");
      return f->second(arg);
    }
    fail(t, "expected expression but found " + describe(t));
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  Circuit circuit_;
  std::map<std::string, Register> qregs_;
  std::map<std::string, Register> cregs_;
};

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Circuit parse_qasm(std::string_view text) { return Parser(Lexer(text).run()).run(); }

bool same_structure(const Circuit& a, const Circuit& b) {
  if (a.num_qubits != b.num_qubits || a.num_clbits != b.num_clbits) return false;
  if (a.ops.size() != b.ops.size() || a.measures != b.measures) return false;
  for (std::size_t i = 0; i < a.ops.size(); ++i) {
    if (a.ops[i].kind != b.ops[i].kind || a.ops[i].params != b.ops[i].params ||
        a.ops[i].qubits != b.ops[i].qubits) {
      return false;
    }
  }
  return true;
}

std::string unparse_qasm(const Circuit& circuit) {
  std::ostringstream os;
  os << "OPENQASM 2.0;\ninclude \"qelib1.inc\";\n";
  if (circuit.num_qubits > 0) os << "qreg q[" << circuit.num_qubits << "];\n";
  if (circuit.num_clbits > 0) os << "creg c[" << circuit.num_clbits << "];\n";
  std::size_t m = 0;
  const auto flush_measures = [&](std::size_t upto) {
    for (; m < circuit.measures.size() && circuit.measures[m].after_op <= upto; ++m) {
      os << "measure q[" << circuit.measures[m].qubit << "] -> c[" << circuit.measures[m].clbit
         << "];\n";
    }
  };
  for (std::size_t i = 0; i < circuit.ops.size(); ++i) {
    flush_measures(i);
    const auto& op = circuit.ops[i];
    os << gate_name(op.kind);
    if (!op.params.empty()) {
      os << '(';
      for (std::size_t k = 0; k < op.params.size(); ++k) {
        if (k) os << ',';
        os << format_real(op.params[k]);
      }
      os << ')';
    }
    for (std::size_t k = 0; k < op.qubits.size(); ++k) {
      os << (k ? "," : " ") << "q[" << op.qubits[k] << ']';
    }
    os << ";\n";
  }
  flush_measures(circuit.ops.size());
  return os.str();
}

std::vector<Diagnostic> validate(const Circuit& circuit) {
  std::vector<Diagnostic> out;
  for (std::size_t i = 0; i < circuit.ops.size(); ++i) {
    const auto& op = circuit.ops[i];
    const std::string where = "op " + std::to_string(i) + " (" + std::string(gate_name(op.kind)) + ")";
    if (static_cast<int>(op.qubits.size()) != gate_arity(op.kind) ||
        static_cast<int>(op.params.size()) != gate_num_params(op.kind)) {
      out.push_back({DiagnosticKind::BadArity, where + ": wrong number of qubits or parameters"});
    }
    std::set<int> seen;
    for (int q : op.qubits) {
      if (q < 0 || q >= circuit.num_qubits) {
        out.push_back({DiagnosticKind::IndexOutOfRange,
                       where + ": qubit " + std::to_string(q) + " outside [0," +
                           std::to_string(circuit.num_qubits) + ")"});
      } else if (!seen.insert(q).second) {
        out.push_back({DiagnosticKind::DuplicateQubit,
                       where + ": qubit " + std::to_string(q) + " repeated"});
      }
    }
  }
  for (const auto& m : circuit.measures) {
    if (m.qubit < 0 || m.qubit >= circuit.num_qubits) {
      out.push_back({DiagnosticKind::IndexOutOfRange,
                     "measure: qubit " + std::to_string(m.qubit) + " out of range"});
    }
    if (m.clbit < 0 || m.clbit >= circuit.num_clbits) {
      out.push_back({DiagnosticKind::ClbitOutOfRange,
                     "measure: clbit " + std::to_string(m.clbit) + " out of range"});
    }
    if (m.after_op < circuit.ops.size()) {
      out.push_back({DiagnosticKind::MeasureBeforeGate,
                     "measure of qubit " + std::to_string(m.qubit) + " precedes op " +
                         std::to_string(m.after_op)});
    }
  }
  return out;
}

}  // namespace qpart
