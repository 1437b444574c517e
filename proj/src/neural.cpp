#include "neurocost/neural.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "neurocost/error.hpp"

namespace neurocost {

std::string_view to_string(NeuronModel m) {
  switch (m) {
    case NeuronModel::threshold_gate: return "threshold_gate";
    case NeuronModel::ann_relu: return "ann_relu";
    case NeuronModel::ann_tanh: return "ann_tanh";
    case NeuronModel::lif: return "lif";
  }
  return "lif";
}

NeuronModel parse_neuron_model(std::string_view name) {
  if (name == "threshold_gate") return NeuronModel::threshold_gate;
  if (name == "ann_relu") return NeuronModel::ann_relu;
  if (name == "ann_tanh") return NeuronModel::ann_tanh;
  if (name == "lif") return NeuronModel::lif;
  fail(ErrorCode::InvalidNeuralGraph, "unknown neuron model '" + std::string(name) + "'");
}

StepOutput step_neuron(const NeuronSpec& spec, double x, double input_sum) {
  if (!std::isfinite(x) || !std::isfinite(input_sum))
    fail(ErrorCode::NonFiniteInput, "state or input is not finite");

  StepOutput out;
  switch (spec.model) {
    case NeuronModel::threshold_gate:
      out.x_next = input_sum;
      out.y = out.x_next > spec.v_thresh ? 1.0 : 0.0;
      break;
    case NeuronModel::ann_relu:
      out.x_next = input_sum;
      out.y = input_sum > spec.v_thresh ? input_sum : 0.0;
      break;
    case NeuronModel::ann_tanh:
      out.x_next = input_sum;
      out.y = std::tanh(input_sum);
      break;
    case NeuronModel::lif: {
      const double decay = std::isinf(spec.tau) ? 1.0 : std::exp(-spec.dt / spec.tau);
      out.x_next = x * decay + input_sum;
      if (out.x_next > spec.v_thresh) {
        out.y = 1.0;
        out.x_next = spec.v_reset;
      }
      break;
    }
  }
  return out;
}

void validate_neural_graph(const NeuralGraph& ng) {
  std::unordered_set<std::string> ids;
  for (const auto& n : ng.neurons) {
    if (!ids.insert(n.id).second)
      fail(ErrorCode::InvalidNeuralGraph, "duplicate neuron id '" + n.id + "'");
    if (!(n.spec.tau > 0.0))
      fail(ErrorCode::InvalidNeuralGraph, "neuron '" + n.id + "' has tau <= 0");
    if (n.spec.model == NeuronModel::lif && !(n.spec.v_reset < n.spec.v_thresh))
      fail(ErrorCode::InvalidNeuralGraph, "neuron '" + n.id + "' has v_reset >= v_thresh");
    if (!std::isfinite(n.x0))
      fail(ErrorCode::InvalidNeuralGraph, "neuron '" + n.id + "' has a non-finite initial state");
  }
  for (const auto& s : ng.synapses) {
    if (!ids.count(s.source) || !ids.count(s.target))
      fail(ErrorCode::InvalidNeuralGraph,
           "synapse " + s.source + "->" + s.target + " references a missing neuron");
    if (s.delay < 1)
      fail(ErrorCode::InvalidNeuralGraph, "synapse " + s.source + "->" + s.target + " has delay < 1");
    if (!std::isfinite(s.weight))
      fail(ErrorCode::InvalidNeuralGraph,
           "synapse " + s.source + "->" + s.target + " has a non-finite weight");
  }
  for (const auto& id : ng.inputs)
    if (!ids.count(id)) fail(ErrorCode::InvalidNeuralGraph, "input neuron '" + id + "' missing");
  for (const auto& id : ng.outputs)
    if (!ids.count(id)) fail(ErrorCode::InvalidNeuralGraph, "output neuron '" + id + "' missing");
}

std::vector<std::size_t> self_loop_synapses(const NeuralGraph& ng) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < ng.synapses.size(); ++i)
    if (ng.synapses[i].source == ng.synapses[i].target) out.push_back(i);
  return out;
}

LoweringRules default_lowering_rules() {
  LoweringRules r;
  for (const char* k : {"relay", "identity", "input", "load", "wsum", "threshold"}) r[k] = {1, 0};
  for (const char* k : {"add", "sub", "mul", "div", "pow", "cmp", "neg", "min", "max"}) r[k] = {2, 0};
  return r;
}

LoweringRules relay_lowering_rules() { return {{"*", {1, 0}}}; }

std::size_t assembly_depth(std::size_t neurons) { return std::min<std::size_t>(neurons, 3); }

namespace {

NeuronSpec gate(double needed) {
  NeuronSpec s;
  s.model = NeuronModel::lif;
  s.v_thresh = needed - 0.5;
  s.v_reset = 0.0;
  return s;
}

}  // namespace

LoweredGraph lower_graph(const ValidatedGraph& g, const LoweringRules& rules) {
  LoweredGraph out;
  auto& ng = out.graph;
  auto& am = out.assemblies;

  std::vector<std::string> entry(g.size()), exit(g.size());
  for (std::size_t v = 0; v < g.size(); ++v) {
    const auto& node = g.node(v);
    auto it = rules.find(node.op);
    if (it == rules.end()) it = rules.find("*");
    if (it == rules.end())
      fail(ErrorCode::NoRuleForOpKind, "no lowering rule for op kind '" + node.op + "'");
    const LoweringRule& rule = it->second;
    const std::size_t fan_in = g.preds(v).size();
    if (rule.max_fan_in != 0 && fan_in > rule.max_fan_in)
      fail(ErrorCode::FanInExceedsRule, "node '" + node.id + "' has fan-in " +
                                            std::to_string(fan_in) + " but rule for '" + node.op +
                                            "' allows " + std::to_string(rule.max_fan_in));
    if (rule.neurons == 0)
      fail(ErrorCode::InconsistentAssembly, "rule for '" + node.op + "' emits no neurons");

    AssemblyEntry e;
    e.depth = assembly_depth(rule.neurons);
    const std::size_t base = ng.neurons.size();
    for (std::size_t k = 0; k < rule.neurons; ++k) {
      std::string id = node.id + "#" + std::to_string(k);
      double needed = 1.0;
      if (k == 0) needed = static_cast<double>(std::max<std::size_t>(1, fan_in));
      else if (rule.neurons >= 3 && k == rule.neurons - 1) needed = static_cast<double>(rule.neurons - 2);
      ng.neurons.push_back({id, gate(needed), 0.0});
      e.neurons.push_back(std::move(id));
    }
    const auto& ids = e.neurons;
    if (rule.neurons == 2) {
      e.synapses.push_back(ng.synapses.size());
      ng.synapses.push_back({ids[0], ids[1], 1.0, 1});
    } else if (rule.neurons >= 3) {
      for (std::size_t k = 1; k + 1 < rule.neurons; ++k) {
        e.synapses.push_back(ng.synapses.size());
        ng.synapses.push_back({ids[0], ids[k], 1.0, 1});
        e.synapses.push_back(ng.synapses.size());
        ng.synapses.push_back({ids[k], ids.back(), 1.0, 1});
      }
    }
    entry[v] = ng.neurons[base].id;
    exit[v] = ng.neurons.back().id;
    am.per_op_neuron_count[node.id] = rule.neurons;
    am.entries[node.id] = std::move(e);
  }

  for (std::size_t v = 0; v < g.size(); ++v) {
    auto& e = am.entries[g.node(v).id];
    for (std::size_t p : g.preds(v)) {
      e.synapses.push_back(ng.synapses.size());
      ng.synapses.push_back({exit[p], entry[v], 1.0, 1});
    }
    if (g.preds(v).empty()) ng.inputs.push_back(entry[v]);
  }
  if (g.graph().outputs.empty()) {
    for (std::size_t v = 0; v < g.size(); ++v)
      if (g.succs(v).empty()) ng.outputs.push_back(exit[v]);
  } else {
    for (std::size_t v : g.output_indices()) ng.outputs.push_back(exit[v]);
  }
  return out;
}

ResourceCount count_resources(const NeuralGraph& ng, const AssemblyMap& am) {
  std::unordered_set<std::string> ids;
  for (const auto& n : ng.neurons) ids.insert(n.id);

  ResourceCount r;
  for (const auto& [op, count] : am.per_op_neuron_count) {
    auto it = am.entries.find(op);
    if (it == am.entries.end() || it->second.neurons.size() != count)
      fail(ErrorCode::InconsistentAssembly, "neuron count for op '" + op + "' disagrees with its entry");
    for (const auto& id : it->second.neurons)
      if (!ids.count(id))
        fail(ErrorCode::InconsistentAssembly, "assembly of '" + op + "' names missing neuron '" + id + "'");
    r.n_total += count;
  }
  if (am.entries.size() != am.per_op_neuron_count.size())
    fail(ErrorCode::InconsistentAssembly, "entries and per-op counts cover different ops");
  if (r.n_total != ng.neurons.size())
    fail(ErrorCode::InconsistentAssembly, "assemblies hold " + std::to_string(r.n_total) +
                                              " neurons, graph has " +
                                              std::to_string(ng.neurons.size()));
  r.s_total = ng.synapses.size();
  const auto ops = static_cast<double>(am.entries.size());
  if (ops > 0) {
    r.n_bar = static_cast<double>(r.n_total) / ops;
    r.s_bar = static_cast<double>(r.s_total) / ops;
  }
  return r;
}

ResourceCount count_resources(const NeuralGraph& ng) {
  ResourceCount r;
  r.n_total = ng.neurons.size();
  r.s_total = ng.synapses.size();
  if (r.n_total > 0) {
    r.n_bar = 1.0;
    r.s_bar = static_cast<double>(r.s_total) / static_cast<double>(r.n_total);
  }
  return r;
}

std::vector<std::pair<std::string, std::string>> contract_assemblies(const NeuralGraph& ng,
                                                                     const AssemblyMap& am) {
  std::unordered_map<std::string, std::string> owner;
  for (const auto& [op, e] : am.entries)
    for (const auto& id : e.neurons) owner[id] = op;

  std::vector<std::pair<std::string, std::string>> edges;
  for (const auto& s : ng.synapses) {
    const auto& a = owner.at(s.source);
    const auto& b = owner.at(s.target);
    if (a != b) edges.emplace_back(a, b);
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

LoweredGraph disjoint_union(const LoweredGraph& a, const LoweredGraph& b) {
  LoweredGraph out;
  auto add = [&out](const LoweredGraph& part, const std::string& prefix) {
    const std::size_t offset = out.graph.synapses.size();
    for (auto n : part.graph.neurons) {
      n.id = prefix + n.id;
      out.graph.neurons.push_back(std::move(n));
    }
    for (auto s : part.graph.synapses) {
      s.source = prefix + s.source;
      s.target = prefix + s.target;
      out.graph.synapses.push_back(std::move(s));
    }
    for (const auto& id : part.graph.inputs) out.graph.inputs.push_back(prefix + id);
    for (const auto& id : part.graph.outputs) out.graph.outputs.push_back(prefix + id);
    for (const auto& [op, e] : part.assemblies.entries) {
      AssemblyEntry copy = e;
      for (auto& id : copy.neurons) id = prefix + id;
      for (auto& idx : copy.synapses) idx += offset;
      out.assemblies.entries[prefix + op] = std::move(copy);
    }
    for (const auto& [op, count] : part.assemblies.per_op_neuron_count)
      out.assemblies.per_op_neuron_count[prefix + op] = count;
  };
  add(a, "a/");
  add(b, "b/");
  return out;
}

}  // namespace neurocost
