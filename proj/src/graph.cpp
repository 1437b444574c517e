#include "neurocost/graph.hpp"

#include <algorithm>
#include <queue>
#include <unordered_set>

#include "neurocost/error.hpp"

namespace neurocost {

std::size_t ValidatedGraph::index_of(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) fail(ErrorCode::DanglingReference, "unknown node id '" + id + "'");
  return it->second;
}

std::vector<std::size_t> ValidatedGraph::input_indices() const {
  std::vector<std::size_t> out;
  for (const auto& id : graph_.inputs) out.push_back(index_of(id));
  return out;
}

std::vector<std::size_t> ValidatedGraph::output_indices() const {
  std::vector<std::size_t> out;
  for (const auto& id : graph_.outputs) out.push_back(index_of(id));
  return out;
}

namespace {

// Walks predecessors among the nodes Kahn's algorithm could not release until
// a node repeats; that node lies on a cycle.
std::size_t node_on_cycle(const std::vector<std::vector<std::size_t>>& preds,
                          const std::vector<std::size_t>& indegree) {
  std::size_t cur = 0;
  while (indegree[cur] == 0) ++cur;
  std::vector<char> seen(preds.size(), 0);
  while (!seen[cur]) {
    seen[cur] = 1;
    for (std::size_t p : preds[cur]) {
      if (indegree[p] != 0) {
        cur = p;
        break;
      }
    }
  }
  return cur;
}

}  // namespace

ValidatedGraph validate_graph(ComputeGraph raw) {
  if (raw.nodes.empty()) fail(ErrorCode::EmptyGraph, "graph has no nodes");

  ValidatedGraph g;
  const std::size_t n = raw.nodes.size();
  g.index_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!g.index_.emplace(raw.nodes[i].id, i).second)
      fail(ErrorCode::DuplicateId, "duplicate id '" + raw.nodes[i].id + "'");
  }

  g.preds_.assign(n, {});
  g.succs_.assign(n, {});
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& in : raw.nodes[i].inputs) {
      auto it = g.index_.find(in);
      if (it == g.index_.end())
        fail(ErrorCode::DanglingReference,
             "node '" + raw.nodes[i].id + "' references missing id '" + in + "'");
      if (it->second == i)
        fail(ErrorCode::CycleDetected, "node '" + raw.nodes[i].id + "' references itself");
      g.preds_[i].push_back(it->second);
      g.succs_[it->second].push_back(i);
      ++g.edges_;
    }
  }

  for (const auto& id : raw.inputs) {
    auto it = g.index_.find(id);
    if (it == g.index_.end())
      fail(ErrorCode::DanglingReference, "declared input '" + id + "' does not exist");
    if (!g.preds_[it->second].empty())
      fail(ErrorCode::InvalidGraph, "declared input '" + id + "' has incoming edges");
  }
  for (const auto& id : raw.outputs) {
    if (g.index_.find(id) == g.index_.end())
      fail(ErrorCode::DanglingReference, "declared output '" + id + "' does not exist");
  }

  // Kahn with a min-heap on index keeps the order stable.
  std::vector<std::size_t> indegree(n);
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t i = 0; i < n; ++i) {
    indegree[i] = g.preds_[i].size();
    if (indegree[i] == 0) ready.push(i);
  }
  g.topo_.reserve(n);
  while (!ready.empty()) {
    std::size_t v = ready.top();
    ready.pop();
    g.topo_.push_back(v);
    for (std::size_t s : g.succs_[v]) {
      if (--indegree[s] == 0) ready.push(s);
    }
  }
  if (g.topo_.size() != n) {
    std::size_t v = node_on_cycle(g.preds_, indegree);
    fail(ErrorCode::CycleDetected, "node '" + raw.nodes[v].id + "' lies on a cycle");
  }

  g.graph_ = std::move(raw);
  return g;
}

std::vector<std::uint64_t> node_levels(const ValidatedGraph& g) {
  std::vector<std::uint64_t> level(g.size(), 0);
  for (std::size_t v : g.topo_order()) {
    for (std::size_t p : g.preds(v)) level[v] = std::max(level[v], level[p] + 1);
  }
  return level;
}

GraphMetrics compute_metrics(const ValidatedGraph& g) {
  GraphMetrics m;
  const auto level = node_levels(g);
  m.t1 = g.size();
  m.t_inf = *std::max_element(level.begin(), level.end()) + 1;
  m.level_widths.assign(m.t_inf, 0);
  for (auto l : level) ++m.level_widths[l];
  for (std::size_t i = 0; i < g.size(); ++i) {
    m.max_fan_in = std::max(m.max_fan_in, g.preds(i).size());
    m.max_fan_out = std::max(m.max_fan_out, g.succs(i).size());
  }
  return m;
}

ScheduleResult list_schedule(const ValidatedGraph& g, std::size_t processors) {
  if (processors == 0) fail(ErrorCode::InvalidArgument, "processor count must be >= 1");

  const auto level = node_levels(g);
  const std::uint64_t depth = *std::max_element(level.begin(), level.end()) + 1;
  std::vector<std::vector<std::size_t>> by_level(depth);
  for (std::size_t v : g.topo_order()) by_level[level[v]].push_back(v);

  ScheduleResult r;
  r.assignment.resize(g.size());
  std::uint64_t step = 0;
  for (const auto& nodes : by_level) {
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      r.assignment[nodes[k]] = {k % processors, step + k / processors};
    }
    step += (nodes.size() + processors - 1) / processors;
  }
  r.t_p = step;
  return r;
}

CouplingRule CouplingRule::ring(std::size_t copies, std::size_t fan_out) {
  CouplingRule rule;
  rule.neighbors.resize(copies);
  if (copies == 0) return rule;
  std::vector<long long> offsets;
  for (std::size_t k = 1; offsets.size() < fan_out; ++k) {
    offsets.push_back(static_cast<long long>(k));
    if (offsets.size() < fan_out) offsets.push_back(-static_cast<long long>(k));
  }
  const auto n = static_cast<long long>(copies);
  for (long long s = 0; s < n; ++s) {
    auto& out = rule.neighbors[static_cast<std::size_t>(s)];
    for (long long off : offsets) {
      auto j = static_cast<std::size_t>(((s + off) % n + n) % n);
      if (j != static_cast<std::size_t>(s) && std::find(out.begin(), out.end(), j) == out.end())
        out.push_back(j);
    }
  }
  return rule;
}

ComputeGraph expand_template(const ComputeGraph& tmpl, std::size_t spatial_copies,
                             std::size_t temporal_copies, const CouplingRule& stitching) {
  const ValidatedGraph checked = validate_graph(tmpl);
  if (spatial_copies == 0 || temporal_copies == 0)
    fail(ErrorCode::InvalidArgument, "copy counts must be >= 1");
  if (!stitching.neighbors.empty() && stitching.neighbors.size() != spatial_copies)
    fail(ErrorCode::StitchingMismatch, "coupling rule covers " +
                                           std::to_string(stitching.neighbors.size()) +
                                           " copies, expected " + std::to_string(spatial_copies));
  for (std::size_t s = 0; s < stitching.neighbors.size(); ++s) {
    for (std::size_t j : stitching.neighbors[s]) {
      if (j >= spatial_copies)
        fail(ErrorCode::StitchingMismatch, "copy " + std::to_string(s) +
                                               " couples to nonexistent copy " + std::to_string(j) +
                                               " of " + std::to_string(spatial_copies));
    }
  }
  if (temporal_copies > 1 && (tmpl.inputs.empty() || tmpl.outputs.empty()))
    fail(ErrorCode::StitchingMismatch,
         "temporal stitching needs declared inputs and outputs on the template");

  auto name = [](const std::string& id, std::size_t s, std::size_t t) {
    return id + "@" + std::to_string(s) + "." + std::to_string(t);
  };
  const std::unordered_set<std::string> declared_inputs(tmpl.inputs.begin(), tmpl.inputs.end());

  ComputeGraph out;
  out.nodes.reserve(tmpl.nodes.size() * spatial_copies * temporal_copies);
  for (std::size_t t = 0; t < temporal_copies; ++t) {
    for (std::size_t s = 0; s < spatial_copies; ++s) {
      for (const auto& node : tmpl.nodes) {
        OpNode copy{name(node.id, s, t), node.op, {}, node.payload};
        for (const auto& in : node.inputs) copy.inputs.push_back(name(in, s, t));
        if (t > 0 && declared_inputs.count(node.id)) {
          std::vector<std::size_t> sources{s};
          if (!stitching.neighbors.empty()) {
            for (std::size_t j : stitching.neighbors[s])
              if (j != s) sources.push_back(j);
          }
          for (std::size_t src : sources)
            for (const auto& o : tmpl.outputs) copy.inputs.push_back(name(o, src, t - 1));
        }
        out.nodes.push_back(std::move(copy));
      }
    }
  }
  for (std::size_t s = 0; s < spatial_copies; ++s) {
    for (const auto& in : tmpl.inputs) out.inputs.push_back(name(in, s, 0));
    for (const auto& o : tmpl.outputs) out.outputs.push_back(name(o, s, temporal_copies - 1));
  }
  return out;
}

}  // namespace neurocost
