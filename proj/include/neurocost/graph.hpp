#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace neurocost {

/// One operation of a computational graph. `op` is an open alphabet; the
/// built-in kinds (add, sub, mul, div, pow, cmp, neg, ...) are conventions,
/// not a closed enum.
struct OpNode {
  std::string id;
  std::string op;
  std::vector<std::string> inputs;
  std::string payload;

  bool operator==(const OpNode&) const = default;
};

struct ComputeGraph {
  std::vector<OpNode> nodes;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;

  bool operator==(const ComputeGraph&) const = default;
};

/// A ComputeGraph that passed validation, with index-based adjacency and a
/// topological order attached. Immutable once built.
class ValidatedGraph {
public:
  const ComputeGraph& graph() const noexcept { return graph_; }
  std::size_t size() const noexcept { return graph_.nodes.size(); }
  const OpNode& node(std::size_t i) const { return graph_.nodes.at(i); }

  /// Node indices in a stable topological order (ties broken by index).
  const std::vector<std::size_t>& topo_order() const noexcept { return topo_; }
  /// Producer index per input slot, in the node's input order (may repeat).
  const std::vector<std::size_t>& preds(std::size_t i) const { return preds_.at(i); }
  /// Consumer index per edge (one entry per input slot that references i).
  const std::vector<std::size_t>& succs(std::size_t i) const { return succs_.at(i); }

  std::size_t index_of(const std::string& id) const;
  bool contains(const std::string& id) const { return index_.count(id) != 0; }

  std::vector<std::size_t> input_indices() const;
  std::vector<std::size_t> output_indices() const;
  std::size_t edge_count() const noexcept { return edges_; }

private:
  friend ValidatedGraph validate_graph(ComputeGraph raw);

  ComputeGraph graph_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<std::size_t>> preds_;
  std::vector<std::vector<std::size_t>> succs_;
  std::vector<std::size_t> topo_;
  std::size_t edges_ = 0;
};

struct GraphMetrics {
  std::uint64_t t1 = 0;
  std::uint64_t t_inf = 0;
  std::vector<std::uint64_t> level_widths;
  std::size_t max_fan_in = 0;
  std::size_t max_fan_out = 0;
};

struct ScheduleSlot {
  std::size_t processor = 0;
  std::uint64_t step = 0;
};

struct ScheduleResult {
  std::uint64_t t_p = 0;
  /// Indexed by node index of the scheduled graph.
  std::vector<ScheduleSlot> assignment;
};

/// Checks ids, references and acyclicity. Throws Error with CycleDetected,
/// DanglingReference, EmptyGraph, DuplicateId or InvalidGraph.
ValidatedGraph validate_graph(ComputeGraph raw);

/// Level of a node is its longest-path distance from a source, counted in
/// operations, so level 0 holds the sources and t_inf = deepest level + 1.
std::vector<std::uint64_t> node_levels(const ValidatedGraph& g);

GraphMetrics compute_metrics(const ValidatedGraph& g);

/// Greedy level-by-level list schedule: each level is packed onto `processors`
/// processors before the next level starts. The makespan satisfies
/// max(t_inf, ceil(t1/p)) <= t_p <= ceil(t1/p) + t_inf and is non-increasing
/// in p.
ScheduleResult list_schedule(const ValidatedGraph& g, std::size_t processors);

/// For each spatial copy, the other copies whose previous-layer outputs feed
/// its declared inputs. A copy always reads its own previous layer as well.
struct CouplingRule {
  std::vector<std::vector<std::size_t>> neighbors;

  /// Ring of `copies` points where each point couples to the K nearest
  /// (K/2 on each side; odd K adds one more on the right).
  static CouplingRule ring(std::size_t copies, std::size_t fan_out);
};

/// Replicates `tmpl` spatial x temporal times. Declared inputs of copy (s, t)
/// with t > 0 read every declared output of copies {s} U neighbors(s) at
/// layer t - 1. Node ids become "<id>@<s>.<t>".
ComputeGraph expand_template(const ComputeGraph& tmpl, std::size_t spatial_copies,
                             std::size_t temporal_copies, const CouplingRule& stitching);

}  // namespace neurocost
