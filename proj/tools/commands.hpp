#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qpart::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kParseError = 2, kPartitionError = 3, kVerifyFailed = 4 };

struct RunConfig {
  std::string input;                  // QASM path
  std::vector<int> hierarchy;         // local-qubit counts, outermost first
  std::optional<std::uint64_t> ranks;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> shots;
  std::string format = "json";        // json | text
  bool verify = false;
  bool dump_plan = false;
  bool dump_tree = false;
  bool dump_state = false;
  // bench only
  std::string family;
  std::vector<int> qubits;
};

/// Bad flags or flag combinations; maps to kUsage.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// "2", "25,15,5". Throws UsageError.
std::vector<int> parse_int_list(const std::string& text);

/// "30-37", "4,6,8", "4-8,12". Throws UsageError.
std::vector<int> parse_qubit_range(const std::string& text);

/// Hierarchy for a d-qubit circuit from --hierarchy and --ranks. With neither
/// flag everything is local.
std::vector<int> resolve_hierarchy(const RunConfig& config, int num_qubits);

int cmd_partition(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_stats(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_bench(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches; writes to `out` or the --out file.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qpart::cli
