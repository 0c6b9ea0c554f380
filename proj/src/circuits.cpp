#include "qpart/circuits.hpp"

#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>

namespace qpart {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Writer {
 public:
  explicit Writer(int d) {
    out_ << "OPENQASM 2.0;\ninclude \"qelib1.inc\";\n";
    if (d > 0) out_ << "qreg q[" << d << "];\n";
  }
  void g1(std::string_view name, int q) { out_ << name << " q[" << q << "];\n"; }
  void g1(std::string_view name, double a, int q) { out_ << name << "(" << num(a) << ") q[" << q << "];\n"; }
  void g2(std::string_view name, int a, int b) { out_ << name << " q[" << a << "],q[" << b << "];\n"; }
  void g2(std::string_view name, double t, int a, int b) {
    out_ << name << "(" << num(t) << ") q[" << a << "],q[" << b << "];\n";
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

constexpr double kPi = std::numbers::pi;

void ghz(Writer& w, int d) {
  if (d == 0) return;
  w.g1("h", 0);
  for (int i = 0; i + 1 < d; ++i) w.g2("cx", i, i + 1);
}

// Balanced oracle f(x) = parity of x masked by alternating bits; ancilla last.
void dj(Writer& w, int d) {
  if (d < 2) {
    for (int i = 0; i < d; ++i) w.g1("h", i);
    return;
  }
  const int anc = d - 1;
  w.g1("x", anc);
  for (int i = 0; i < d; ++i) w.g1("h", i);
  for (int i = 0; i < anc; ++i) {
    if (i % 2 == 0) w.g1("x", i);
    w.g2("cx", i, anc);
    if (i % 2 == 0) w.g1("x", i);
  }
  for (int i = 0; i < anc; ++i) w.g1("h", i);
}

void qft_on(Writer& w, int first, int n) {
  for (int i = 0; i < n; ++i) {
    w.g1("h", first + i);
    for (int j = i + 1; j < n; ++j) w.g2("cp", kPi / static_cast<double>(1ULL << (j - i)), first + j, first + i);
  }
  for (int i = 0; i < n / 2; ++i) w.g2("swap", first + i, first + n - 1 - i);
}

void inverse_qft_on(Writer& w, int first, int n) {
  for (int i = 0; i < n / 2; ++i) w.g2("swap", first + i, first + n - 1 - i);
  for (int i = n - 1; i >= 0; --i) {
    for (int j = n - 1; j > i; --j) w.g2("cp", -kPi / static_cast<double>(1ULL << (j - i)), first + j, first + i);
    w.g1("h", first + i);
  }
}

// Counting register q[0..d-2], eigenstate |1> of p(theta) on q[d-1].
void qpe(Writer& w, int d) {
  if (d < 2) {
    qft_on(w, 0, d);
    return;
  }
  const int n = d - 1;
  const double theta = 2.0 * kPi / 3.0;
  w.g1("x", n);
  for (int i = 0; i < n; ++i) w.g1("h", i);
  for (int i = 0; i < n; ++i) {
    const double angle = theta * static_cast<double>(1ULL << (n - 1 - i));
    w.g2("cp", std::remainder(angle, 2.0 * kPi), i, n);
  }
  inverse_qft_on(w, 0, n);
}

// Transverse-field Ising chain, three first-order Trotter steps.
void ising(Writer& w, int d) {
  const double dt = 0.1, coupling = 1.0, field = 0.7;
  for (int i = 0; i < d; ++i) w.g1("h", i);
  for (int step = 0; step < 3; ++step) {
    for (int i = 0; i + 1 < d; ++i) {
      w.g2("cx", i, i + 1);
      w.g1("rz", 2.0 * coupling * dt, i + 1);
      w.g2("cx", i, i + 1);
    }
    for (int i = 0; i < d; ++i) w.g1("rx", 2.0 * field * dt, i);
  }
}

// Two repetitions of ry/rz rotations with full cx entanglement.
void su2random(Writer& w, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  const auto rotations = [&] {
    for (int i = 0; i < d; ++i) {
      w.g1("ry", angle(rng), i);
      w.g1("rz", angle(rng), i);
    }
  };
  for (int rep = 0; rep < 2; ++rep) {
    rotations();
    for (int i = 0; i < d; ++i) {
      for (int j = i + 1; j < d; ++j) w.g2("cx", i, j);
    }
  }
  rotations();
}

// Layered ansatz: ry/rz on every line, then a cx ladder.
void vqc(Writer& w, int d) {
  for (int layer = 0; layer < 3; ++layer) {
    for (int i = 0; i < d; ++i) {
      w.g1("ry", 0.1 * (layer + 1) + 0.05 * i, i);
      w.g1("rz", 0.2 * (layer + 1) - 0.03 * i, i);
    }
    for (int i = 0; i + 1 < d; ++i) w.g2("cx", i, i + 1);
  }
}

}  // namespace

const std::vector<std::string>& circuit_families() {
  static const std::vector<std::string> names{"ghz", "dj", "qft", "qpe", "ising", "su2random", "vqc"};
  return names;
}

std::string generate_qasm(std::string_view family, int num_qubits, std::uint64_t seed) {
  if (num_qubits < 0) throw std::invalid_argument("negative qubit count");
  Writer w(num_qubits);
  if (family == "ghz") {
    ghz(w, num_qubits);
  } else if (family == "dj") {
    dj(w, num_qubits);
  } else if (family == "qft") {
    qft_on(w, 0, num_qubits);
  } else if (family == "qpe") {
    qpe(w, num_qubits);
  } else if (family == "ising") {
    ising(w, num_qubits);
  } else if (family == "su2random") {
    su2random(w, num_qubits, seed);
  } else if (family == "vqc") {
    vqc(w, num_qubits);
  } else {
    throw UnknownFamily(std::string(family));
  }
  return w.str();
}

Circuit generate_circuit(std::string_view family, int num_qubits, std::uint64_t seed) {
  return parse_qasm(generate_qasm(family, num_qubits, seed));
}

}  // namespace qpart
