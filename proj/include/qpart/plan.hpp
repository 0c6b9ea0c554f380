#pragma once

#include "qpart/gates.hpp"
#include "qpart/partitioner.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string_view>
#include <variant>
#include <vector>

namespace qpart {

/// Placement of qubits in the distributed amplitude index. Physical index =
/// rank << local_bits() | offset; bits at or above local_bits() are rank bits.
struct Layout {
  int num_qubits = 0;
  int num_global = 0;
  std::vector<int> bit_of_qubit;

  int local_bits() const { return num_qubits - num_global; }
  bool is_global(int qubit) const { return bit_of_qubit.at(static_cast<std::size_t>(qubit)) >= local_bits(); }
  std::vector<int> local_qubits() const;
  int qubit_at(int bit) const;

  /// Local qubits ascending on bits L-1..0, global qubits ascending on bits
  /// d-1..L; with no global qubits this is the dense qubit-0-first order.
  static Layout canonical(int num_qubits, std::span<const int> local_qubits);

  friend bool operator==(const Layout&, const Layout&) = default;
};

/// Qubit remap between two phases, realised as global<->local bit swaps.
struct Reshape {
  std::vector<std::array<int, 2>> swaps;  // {global bit, local bit}
  Layout next;

  std::uint64_t num_blocks() const { return std::uint64_t{1} << swaps.size(); }
  std::uint64_t block_size() const {
    return std::uint64_t{1} << (next.local_bits() - static_cast<int>(swaps.size()));
  }
};

/// Minimal permutation moving `next_local` onto the local bits of `current`:
/// outgoing local qubits (ascending) trade bits with incoming ones (ascending).
Reshape infer_reshape(const Layout& current, std::span<const int> next_local);

struct BlockTransfer {
  int src_rank;
  std::uint64_t src_block;
  int dst_rank;
  std::uint64_t dst_block;

  friend bool operator==(const BlockTransfer&, const BlockTransfer&) = default;
};

/// Every (rank, sub-block) move implied by `swaps`; includes blocks that stay
/// on their rank.
std::vector<BlockTransfer> block_transfers(std::span<const std::array<int, 2>> swaps, int local_bits,
                                           int num_global);

enum class TaskKind { Alloc, Pack, Exchange, Unpack, ApplyFused, Free };

std::string_view task_kind_name(TaskKind kind);

struct AllocPayload {
  int phase = 0;
  friend bool operator==(const AllocPayload&, const AllocPayload&) = default;
};

/// Splits each rank block into 2^m sub-blocks keyed by `block_bits`.
struct PackPayload {
  int phase = 0;
  std::vector<int> block_bits;
  friend bool operator==(const PackPayload&, const PackPayload&) = default;
};

struct ExchangePayload {
  int from_phase = 0;
  int to_phase = 0;
  std::vector<std::array<int, 2>> swaps;
  std::uint64_t block_size = 0;
  friend bool operator==(const ExchangePayload&, const ExchangePayload&) = default;
};

struct UnpackPayload {
  int phase = 0;
  std::vector<int> block_bits;
  friend bool operator==(const UnpackPayload&, const UnpackPayload&) = default;
};

enum class FusedMode { Local, RankControlled, RankDiagonal };

std::string_view fused_mode_name(FusedMode mode);

struct FusedOp {
  int gate = 0;
  GateKind kind = GateKind::I;
  std::vector<double> params;
  std::vector<int> qubits;
  std::vector<int> bits;               // physical bit of each slot
  FusedMode mode = FusedMode::Local;
  // RankControlled: runs only on ranks with (rank & rank_mask) == rank_value.
  std::uint64_t rank_mask = 0;
  std::uint64_t rank_value = 0;
  // RankDiagonal: diagonal over the local slots for each pattern of the global
  // slots (first global slot most significant).
  std::vector<std::vector<Complex>> phase_table;

  friend bool operator==(const FusedOp&, const FusedOp&) = default;
};

/// One leaf partition. `tile_bits` are the local bits resident while the ops
/// run; the remaining local bits are iterated over as tiles.
struct FusedKernel {
  int phase = 0;
  int level = 0;
  std::vector<int> tile_bits;   // ascending qubit order
  std::vector<FusedOp> ops;

  friend bool operator==(const FusedKernel&, const FusedKernel&) = default;
};

struct FreePayload {
  friend bool operator==(const FreePayload&, const FreePayload&) = default;
};

using TaskPayload =
    std::variant<AllocPayload, PackPayload, ExchangePayload, UnpackPayload, FusedKernel, FreePayload>;

struct Task {
  int id = 0;
  std::vector<int> deps;
  TaskPayload payload;

  TaskKind kind() const { return static_cast<TaskKind>(payload.index()); }
  friend bool operator==(const Task&, const Task&) = default;
};

struct ExecutionPlan {
  int version = 1;
  int num_qubits = 0;
  int num_global = 0;
  std::vector<Layout> phases;
  std::vector<Task> tasks;

  int num_ranks() const { return 1 << num_global; }
  int local_bits() const { return num_qubits - num_global; }
  std::size_t count(TaskKind kind) const;

  friend bool operator==(const ExecutionPlan&, const ExecutionPlan&) = default;
};

class PlanInvalid : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fused kernel for a leaf partition under `layout`.
FusedKernel fuse(const Partition& leaf, const Layout& layout, std::span<const PartitionGate> gates);

ExecutionPlan lower(const PartitionTree& tree);

/// Structural checks; throws PlanInvalid.
void validate_plan(const ExecutionPlan& plan);

nlohmann::json plan_to_json(const ExecutionPlan& plan);
ExecutionPlan plan_from_json(const nlohmann::json& j);

}  // namespace qpart
