#include "qpart/circuits.hpp"

#include "qpart/executor.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace qpart;

TEST(Circuits, EveryFamilyParsesAtEverySize) {
  for (const auto& fam : circuit_families()) {
    for (int d = 2; d <= 12; ++d) {
      const auto c = generate_circuit(fam, d, 1);
      EXPECT_EQ(c.num_qubits, d) << fam;
      EXPECT_FALSE(c.ops.empty()) << fam;
      EXPECT_NEAR(oracle_simulate(c).norm(), 1.0, 1e-12) << fam << d;
    }
  }
}

TEST(Circuits, UnknownFamily) {
  EXPECT_THROW(generate_qasm("nope", 4), UnknownFamily);
}

TEST(Circuits, GhzState) {
  const auto s = oracle_simulate(generate_circuit("ghz", 5));
  EXPECT_NEAR(std::norm(s(0)), 0.5, 1e-14);
  EXPECT_NEAR(std::norm(s(31)), 0.5, 1e-14);
}

TEST(Circuits, QftOfZeroIsUniform) {
  // The generated qft ends with swaps, so only magnitudes are checked.
  const auto s = oracle_simulate(generate_circuit("qft", 7));
  for (Eigen::Index i = 0; i < s.size(); ++i) EXPECT_NEAR(std::norm(s(i)), 1.0 / 128.0, 1e-14);
}

TEST(Circuits, QftMatchesDft) {
  // Prepare |x>, then compare to the DFT column e^{2 pi i x k / N} / sqrt(N).
  const int d = 5;
  const std::size_t n = std::size_t{1} << d;
  for (std::size_t x : {std::size_t{1}, std::size_t{6}, std::size_t{19}}) {
    std::string prep;
    for (int q = 0; q < d; ++q) {
      if ((x >> (d - 1 - q)) & 1) prep += "x q[" + std::to_string(q) + "];";
    }
    auto text = generate_qasm("qft", d);
    const auto pos = text.find(';', text.find("qreg")) + 1;
    text.insert(pos, prep);
    const auto s = oracle_simulate(parse_qasm(text));
    for (std::size_t k = 0; k < n; ++k) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(x * k) / static_cast<double>(n);
      const Complex expected = std::polar(1.0 / std::sqrt(static_cast<double>(n)), angle);
      const Complex conjugate = std::conj(expected);
      const double diff = std::min(std::abs(s(static_cast<Eigen::Index>(k)) - expected),
                                   std::abs(s(static_cast<Eigen::Index>(k)) - conjugate));
      EXPECT_LT(diff, 1e-12) << x << " " << k;
    }
  }
}

TEST(Circuits, DeutschJozsaBalancedOracle) {
  // Balanced oracle: the all-zero input register is never measured.
  for (int d : {3, 6, 9}) {
    const auto s = oracle_simulate(generate_circuit("dj", d));
    EXPECT_NEAR(std::norm(s(0)) + std::norm(s(1)), 0.0, 1e-12) << d;
  }
}

TEST(Circuits, SeedDeterminism) {
  EXPECT_EQ(generate_qasm("su2random", 6, 3), generate_qasm("su2random", 6, 3));
  EXPECT_NE(generate_qasm("su2random", 6, 3), generate_qasm("su2random", 6, 4));
  EXPECT_EQ(generate_qasm("vqc", 6, 3), generate_qasm("vqc", 6, 3));
}
