#pragma once

#include "qpart/qasm.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qpart {

class UnknownFamily : public std::invalid_argument {
 public:
  explicit UnknownFamily(const std::string& name) : std::invalid_argument("unknown circuit family '" + name + "'") {}
};

/// ghz, dj, qft, qpe, ising, su2random, vqc.
const std::vector<std::string>& circuit_families();

/// OpenQASM 2 text for a benchmark family on `num_qubits` qubits. `seed`
/// only affects su2random angles.
std::string generate_qasm(std::string_view family, int num_qubits, std::uint64_t seed = 0);

/// generate_qasm piped through parse_qasm.
Circuit generate_circuit(std::string_view family, int num_qubits, std::uint64_t seed = 0);

}  // namespace qpart
