#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "neurocost/graph.hpp"

namespace neurocost {

enum class NeuronModel { threshold_gate, ann_relu, ann_tanh, lif };

std::string_view to_string(NeuronModel m);
NeuronModel parse_neuron_model(std::string_view name);

struct NeuronSpec {
  NeuronModel model = NeuronModel::lif;
  double v_thresh = 1.0;
  double v_reset = 0.0;
  double tau = std::numeric_limits<double>::infinity();
  double dt = 1.0;

  bool operator==(const NeuronSpec&) const = default;
};

struct StepOutput {
  double x_next = 0.0;
  double y = 0.0;
};

/// One update of a single neuron. LIF decays first, then integrates, then
/// fires on x > v_thresh. ann_relu passes input_sum through when it exceeds
/// v_thresh (v_thresh = 0 is the plain rectifier).
StepOutput step_neuron(const NeuronSpec& spec, double x, double input_sum);

struct Neuron {
  std::string id;
  NeuronSpec spec;
  double x0 = 0.0;

  bool operator==(const Neuron&) const = default;
};

struct SynapseSpec {
  std::string source;
  std::string target;
  double weight = 1.0;
  int delay = 1;

  bool operator==(const SynapseSpec&) const = default;
};

struct NeuralGraph {
  std::vector<Neuron> neurons;
  std::vector<SynapseSpec> synapses;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;

  bool operator==(const NeuralGraph&) const = default;
};

/// Throws InvalidNeuralGraph on duplicate ids, missing endpoints, delay < 1,
/// tau <= 0 or a LIF neuron with v_reset >= v_thresh.
void validate_neural_graph(const NeuralGraph& ng);

/// Indices of synapses whose source equals their target. Legal, but callers
/// usually want to know.
std::vector<std::size_t> self_loop_synapses(const NeuralGraph& ng);

struct AssemblyEntry {
  std::vector<std::string> neurons;
  /// Indices into NeuralGraph::synapses: the assembly's internal synapses
  /// followed by the ones feeding its entry neuron.
  std::vector<std::size_t> synapses;
  std::size_t depth = 0;

  bool operator==(const AssemblyEntry&) const = default;
};

struct AssemblyMap {
  std::map<std::string, AssemblyEntry> entries;
  std::map<std::string, std::size_t> per_op_neuron_count;

  bool operator==(const AssemblyMap&) const = default;
};

struct LoweringRule {
  std::size_t neurons = 1;
  /// 0 means unbounded.
  std::size_t max_fan_in = 0;
};

/// Rules keyed by op kind. The key "*" matches any kind without its own rule.
using LoweringRules = std::map<std::string, LoweringRule>;

/// relay/identity/input/load and wsum/threshold get 1 neuron, the arithmetic
/// kinds get 2.
LoweringRules default_lowering_rules();
/// Every op kind becomes a single relay neuron.
LoweringRules relay_lowering_rules();

struct LoweredGraph {
  NeuralGraph graph;
  AssemblyMap assemblies;
};

/// One assembly per op node. Assemblies are non-leaky LIF neurons laid out as
/// entry -> (parallel middle) -> exit; the entry fires once every input slot has
/// delivered a spike. Each graph edge becomes one synapse from the producer's
/// exit to the consumer's entry. Inputs of the neural graph are the entry
/// neurons of source ops; outputs are the exits of declared outputs (sinks if
/// none are declared).
LoweredGraph lower_graph(const ValidatedGraph& g, const LoweringRules& rules);

/// Assembly depth in neurons for an n-neuron assembly.
std::size_t assembly_depth(std::size_t neurons);

struct ResourceCount {
  std::size_t n_total = 0;
  std::size_t s_total = 0;
  double n_bar = 0.0;
  double s_bar = 0.0;
};

ResourceCount count_resources(const NeuralGraph& ng, const AssemblyMap& am);
/// Totals for a network that was not produced by lowering; means are per neuron.
ResourceCount count_resources(const NeuralGraph& ng);

/// Edges between assemblies after contracting each assembly to its op id, with
/// multiplicity, sorted.
std::vector<std::pair<std::string, std::string>> contract_assemblies(const NeuralGraph& ng,
                                                                     const AssemblyMap& am);

/// Places both graphs side by side with ids prefixed "a/" and "b/".
LoweredGraph disjoint_union(const LoweredGraph& a, const LoweredGraph& b);

}  // namespace neurocost
