#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "neurocost/graph.hpp"

namespace neurocost {

/// Structure of a fragment as seen by the isomorphism machinery: per node its
/// op kind and how many edges cross the fragment boundary in each direction,
/// plus internal edges (with multiplicity) between local indices.
struct FragmentShape {
  std::vector<std::string> ops;
  std::vector<std::size_t> ext_in;
  std::vector<std::size_t> ext_out;
  std::vector<std::pair<std::size_t, std::size_t>> edges;

  std::size_t size() const noexcept { return ops.size(); }
};

inline constexpr std::size_t kExactLabelLimit = 8;
inline constexpr std::size_t kLabelHardCap = 64;
inline constexpr std::size_t kOracleLimit = 12;

FragmentShape fragment_shape(const ValidatedGraph& g, const std::vector<std::size_t>& nodes);
/// Inputs naming ids outside the fragment count as boundary in-edges; nodes
/// listed as declared outputs get one boundary out-edge.
FragmentShape fragment_shape(const ComputeGraph& fragment);

/// Exact canonical form up to kExactLabelLimit nodes, colour-refinement hash
/// above that (equal hashes are then only a strong hint). Throws
/// FragmentTooLarge beyond kLabelHardCap.
std::string canonical_label(const FragmentShape& f);
std::string canonical_label(const ComputeGraph& fragment);

/// Backtracking isomorphism test; exact for any size.
bool are_isomorphic(const FragmentShape& a, const FragmentShape& b);

struct Family {
  std::string label;
  /// Each member lists node ids of g.
  std::vector<std::vector<std::string>> members;
};

struct PartitionResult {
  std::vector<Family> families;
  std::vector<std::string> residual;
  std::size_t p_threads = 1;
  std::size_t granularity = 1;
};

/// Greedy tiling: seeds in (level, index) order grow breadth-first over
/// unassigned neighbours until `granularity` nodes; full fragments are grouped
/// by label and each group is checked member by member with are_isomorphic.
/// Undersized fragments go to the residual. p_threads is the largest family
/// (1 when there is none).
PartitionResult partition_isomorphic(const ValidatedGraph& g, std::size_t granularity);

/// Enumerates every connected `granularity`-node subset, groups them by exact
/// isomorphism and packs each class disjointly; the best class is the single
/// family. Throws GraphTooLargeForOracle above kOracleLimit nodes.
PartitionResult brute_force_partition(const ValidatedGraph& g, std::size_t granularity);

/// min(p_threads, p) / p.
double thread_efficiency(const PartitionResult& pr, std::size_t p);

/// Re-derives every family's member shapes from g and checks them pairwise.
bool verify_families(const ValidatedGraph& g, const PartitionResult& pr);

}  // namespace neurocost
