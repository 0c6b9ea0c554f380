#pragma once

#include "qpart/gates.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qpart {

struct GateApp {
  GateKind kind = GateKind::I;
  std::vector<double> params;   // radians
  std::vector<int> qubits;      // controls first
  int source_line = 0;

  friend bool operator==(const GateApp&, const GateApp&) = default;
};

struct Measurement {
  int qubit = 0;
  int clbit = 0;
  std::size_t after_op = 0;     // number of gates preceding the statement

  friend bool operator==(const Measurement&, const Measurement&) = default;
};

/// Flattened circuit: all qregs share one index space in declaration order.
struct Circuit {
  int num_qubits = 0;
  int num_clbits = 0;
  std::vector<GateApp> ops;
  std::vector<Measurement> measures;
};

/// Structural equality; source lines are ignored.
bool same_structure(const Circuit& a, const Circuit& b);

class QasmError : public std::runtime_error {
 public:
  QasmError(int line, int column, const std::string& what)
      : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

class SyntaxError : public QasmError {
 public:
  using QasmError::QasmError;
};

class UnsupportedGateError : public QasmError {
 public:
  UnsupportedGateError(int line, int column, std::string name)
      : QasmError(line, column, "unsupported gate '" + name + "'"), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class IndexOutOfRange : public QasmError {
 public:
  IndexOutOfRange(int line, int column, std::string reg, long index, const std::string& what)
      : QasmError(line, column, what), register_(std::move(reg)), index_(index) {}
  const std::string& register_name() const noexcept { return register_; }
  long index() const noexcept { return index_; }

 private:
  std::string register_;
  long index_;
};

/// A gate listing the same qubit twice.
class DuplicateQubit : public IndexOutOfRange {
 public:
  using IndexOutOfRange::IndexOutOfRange;
};

Circuit parse_qasm(std::string_view text);

/// Canonical OpenQASM 2.0 text for `circuit` (single qreg `q`, creg `c`).
std::string unparse_qasm(const Circuit& circuit);

enum class DiagnosticKind {
  IndexOutOfRange,
  DuplicateQubit,
  BadArity,
  ClbitOutOfRange,
  MeasureBeforeGate,
};

struct Diagnostic {
  DiagnosticKind kind;
  std::string message;
};

std::vector<Diagnostic> validate(const Circuit& circuit);

}  // namespace qpart
