#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "neurocost/error.hpp"
#include "neurocost/neural.hpp"
#include "neurocost/workloads.hpp"

using namespace neurocost;

namespace {

ComputeGraph footnote() {
  return {{{"a", "sub", {}, ""}, {"b", "sub", {}, ""}, {"c", "mul", {"a", "b"}, ""}, {"d", "pow", {"c"}, ""}},
          {},
          {"d"}};
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::IoError;
}

LoweringRules uniform(std::size_t n) { return {{"*", {n, 0}}}; }

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST(StepNeuron, LifFiresAndResets) {
  NeuronSpec s;
  const auto o = step_neuron(s, 0.5, 0.6);
  EXPECT_EQ(o.y, 1.0);
  EXPECT_EQ(o.x_next, 0.0);
}

TEST(StepNeuron, LifDecay) {
  NeuronSpec s;
  s.tau = 1.0;
  const auto o = step_neuron(s, 1.0, 0.0);
  EXPECT_NEAR(o.x_next, 0.36787944117144233, 1e-15);
  EXPECT_EQ(o.y, 0.0);
}

TEST(StepNeuron, ThresholdIsStrict) {
  NeuronSpec s{NeuronModel::threshold_gate, 0.0};
  EXPECT_EQ(step_neuron(s, 0.0, 0.0).y, 0.0);
  EXPECT_EQ(step_neuron(s, 0.0, 1e-300).y, 1.0);
}

TEST(StepNeuron, RejectsNonFinite) {
  NeuronSpec s;
  EXPECT_EQ(code_of([&] { step_neuron(s, NAN, 0.0); }), ErrorCode::NonFiniteInput);
  EXPECT_EQ(code_of([&] { step_neuron(s, 0.0, INFINITY); }), ErrorCode::NonFiniteInput);
}

TEST(StepNeuron, ModelNamesRoundTrip) {
  for (auto m : {NeuronModel::threshold_gate, NeuronModel::ann_relu, NeuronModel::ann_tanh, NeuronModel::lif})
    EXPECT_EQ(parse_neuron_model(to_string(m)), m);
}

// straight-line transcription of the neuron table, one branch per row
TEST(Property, TableConformance) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::uniform_real_distribution<double> tau_d(0.5, 20.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng), in = u(rng), th = std::abs(u(rng));

    const auto tg = step_neuron({NeuronModel::threshold_gate, th}, x, in);
    EXPECT_EQ(tg.y, in > th ? 1.0 : 0.0);

    const auto relu = step_neuron({NeuronModel::ann_relu, 0.0}, x, in);
    const double relu_ref = in > 0 ? in : 0;
    EXPECT_LE(rel(relu.y, relu_ref), 1e-12);

    const auto th_ = step_neuron({NeuronModel::ann_tanh}, x, in);
    const double e2 = std::exp(2 * in);
    EXPECT_LE(rel(th_.y, (e2 - 1) / (e2 + 1)), 1e-12);

    NeuronSpec lif{NeuronModel::lif, th + 0.1, -0.5, tau_d(rng), 1.0};
    const auto l = step_neuron(lif, x, in);
    const double v = x * std::pow(std::exp(1.0), -1.0 / lif.tau) + in;
    EXPECT_EQ(l.y, v > lif.v_thresh ? 1.0 : 0.0);
    EXPECT_LE(rel(l.x_next, v > lif.v_thresh ? lif.v_reset : v), 1e-12);
  }
}

TEST(Property, LifDecayTrajectory) {
  NeuronSpec s{NeuronModel::lif, 1e9, 0.0, 7.5, 0.5};
  double x = 3.0;
  for (int k = 1; k <= 200; ++k) {
    x = step_neuron(s, x, 0.0).x_next;
    EXPECT_LE(rel(x, 3.0 * std::exp(-k * 0.5 / 7.5)), 1e-9);
  }
}

TEST(Lower, FootnoteTwoNeuronRule) {
  const auto l = lower_graph(validate_graph(footnote()), uniform(2));
  const auto r = count_resources(l.graph, l.assemblies);
  EXPECT_EQ(r.n_total, 8u);
  EXPECT_EQ(l.assemblies.entries.size(), 4u);
  EXPECT_DOUBLE_EQ(r.n_bar, 2.0);
  // one internal synapse per assembly plus one per graph edge
  EXPECT_EQ(r.s_total, 4u + 3u);
}

TEST(Lower, SingleOp) {
  const auto l = lower_graph(validate_graph({{{"x", "relay", {}, ""}}, {}, {}}), relay_lowering_rules());
  EXPECT_EQ(count_resources(l.graph, l.assemblies).n_total, 1u);
}

TEST(Lower, MissingRule) {
  const auto g = validate_graph({{{"x", "fft", {}, ""}}, {}, {}});
  EXPECT_EQ(code_of([&] { lower_graph(g, {}); }), ErrorCode::NoRuleForOpKind);
}

TEST(Lower, FanInLimit) {
  const auto g = validate_graph(footnote());
  LoweringRules r = {{"*", {1, 1}}};
  EXPECT_EQ(code_of([&] { lower_graph(g, r); }), ErrorCode::FanInExceedsRule);
}

TEST(Lower, DefaultRulesCoverArithmetic) {
  const auto rules = default_lowering_rules();
  for (const char* k : {"add", "sub", "mul", "div", "pow"}) EXPECT_EQ(rules.at(k).neurons, 2u) << k;
  for (const char* k : {"relay", "identity"}) EXPECT_EQ(rules.at(k).neurons, 1u) << k;
}

TEST(Lower, DenseLayerSynapses) {
  const auto l = lower_graph(validate_graph(ff_compute_graph(8, 4)), relay_lowering_rules());
  // every w node feeds its row sum once; the layer's weighted connections
  std::size_t w_to_s = 0;
  for (const auto& s : l.graph.synapses)
    if (s.source[0] == 'w' && s.target[0] == 's') ++w_to_s;
  EXPECT_EQ(w_to_s, 32u);
  EXPECT_EQ(gen_ff_layer(default_ff_spec(8, 4, 0.5, 8, 1)).synapses.size(), 32u);
}

TEST(CountResources, Direct) {
  NeuralGraph ng;
  for (int i = 0; i < 8; ++i) ng.neurons.push_back({"n" + std::to_string(i), {}, 0.0});
  for (int i = 0; i < 10; ++i) ng.synapses.push_back({"n" + std::to_string(i % 8), "n" + std::to_string((i + 1) % 8)});
  AssemblyMap am;
  for (int a = 0; a < 4; ++a) {
    AssemblyEntry e;
    e.neurons = {"n" + std::to_string(2 * a), "n" + std::to_string(2 * a + 1)};
    e.depth = 2;
    am.entries["op" + std::to_string(a)] = e;
    am.per_op_neuron_count["op" + std::to_string(a)] = 2;
  }
  // synapse ownership: by target neuron's assembly
  for (std::size_t s = 0; s < ng.synapses.size(); ++s) {
    const int tgt = std::stoi(ng.synapses[s].target.substr(1));
    am.entries["op" + std::to_string(tgt / 2)].synapses.push_back(s);
  }
  const auto r = count_resources(ng, am);
  EXPECT_EQ(r.n_total, 8u);
  EXPECT_EQ(r.s_total, 10u);
  EXPECT_DOUBLE_EQ(r.n_bar, 2.0);
  EXPECT_DOUBLE_EQ(r.s_bar, 2.5);

  NeuralGraph empty;
  empty.neurons.push_back({"a", {}, 0.0});
  EXPECT_EQ(count_resources(empty).s_total, 0u);
}

TEST(Validate, NeuralGraphErrors) {
  NeuralGraph ng;
  ng.neurons = {{"a", {}, 0.0}, {"a", {}, 0.0}};
  EXPECT_EQ(code_of([&] { validate_neural_graph(ng); }), ErrorCode::InvalidNeuralGraph);
  ng.neurons = {{"a", {}, 0.0}};
  ng.synapses = {{"a", "zz"}};
  EXPECT_EQ(code_of([&] { validate_neural_graph(ng); }), ErrorCode::InvalidNeuralGraph);
  ng.synapses = {{"a", "a", 1.0, 0}};
  EXPECT_EQ(code_of([&] { validate_neural_graph(ng); }), ErrorCode::InvalidNeuralGraph);
  ng.synapses = {{"a", "a", 1.0, 1}};
  EXPECT_NO_THROW(validate_neural_graph(ng));
  EXPECT_EQ(self_loop_synapses(ng), (std::vector<std::size_t>{0}));
}

TEST(Property, LoweringIsomorphism) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto raw = gen_random_dag(3 + seed % 25, 0.2, {"add", "mul", "relay"}, seed);
    const auto g = validate_graph(raw);
    for (const auto& rules : {default_lowering_rules(), relay_lowering_rules(), uniform(4)}) {
      const auto l = lower_graph(g, rules);
      std::vector<std::pair<std::string, std::string>> expect;
      for (const auto& n : raw.nodes)
        for (const auto& in : n.inputs) expect.emplace_back(in, n.id);
      std::sort(expect.begin(), expect.end());
      EXPECT_EQ(contract_assemblies(l.graph, l.assemblies), expect) << "seed " << seed;
    }
  }
}

TEST(Property, ResourceAdditivity) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto a = lower_graph(validate_graph(gen_random_dag(12, 0.3, {"add", "mul"}, seed)),
                               default_lowering_rules());
    const auto b = lower_graph(validate_graph(gen_random_dag(7, 0.5, {"sub", "relay"}, seed + 100)),
                               default_lowering_rules());
    const auto u = disjoint_union(a, b);
    const auto ru = count_resources(u.graph, u.assemblies);
    const auto ra = count_resources(a.graph, a.assemblies);
    const auto rb = count_resources(b.graph, b.assemblies);
    EXPECT_EQ(ru.n_total, ra.n_total + rb.n_total);
    EXPECT_EQ(ru.s_total, ra.s_total + rb.s_total);
  }
}

TEST(AssemblyDepth, Layout) {
  EXPECT_EQ(assembly_depth(1), 1u);
  EXPECT_EQ(assembly_depth(2), 2u);
  EXPECT_EQ(assembly_depth(5), 3u);
}
