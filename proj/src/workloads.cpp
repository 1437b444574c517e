#include "neurocost/workloads.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numeric>
#include <random>

#include "neurocost/error.hpp"

namespace neurocost {

std::vector<double> MeshOperator::apply(const std::vector<double>& x) const {
  std::vector<double> out(rows.size(), 0.0);
  for (std::size_t j = 0; j < rows.size(); ++j)
    for (const auto& [i, m] : rows[j]) out[j] += m * x[i];
  return out;
}

MeshOperator mesh_operator(const MeshSpec& spec) {
  if (spec.m_s == 0) fail(ErrorCode::InvalidArgument, "mesh needs at least one point");
  if (spec.k == 0 && spec.m_s > 1)
    fail(ErrorCode::DegenerateMesh, fmt::format("K = 0 with {} mesh points", spec.m_s));
  if (spec.init.size() != spec.m_s)
    fail(ErrorCode::InvalidArgument,
         fmt::format("init has {} values for {} mesh points", spec.init.size(), spec.m_s));
  for (double v : spec.init)
    if (!std::isfinite(v)) fail(ErrorCode::InvalidArgument, "init contains a non-finite value");

  MeshOperator op;
  op.rows.resize(spec.m_s);
  if (spec.dynamics == MeshDynamics::diffusion) {
    if (!(spec.alpha > 0.0 && spec.alpha < 1.0))
      fail(ErrorCode::InvalidArgument, "diffusion alpha must lie in (0, 1)");
    const auto ring = CouplingRule::ring(spec.m_s, spec.k);
    for (std::size_t j = 0; j < spec.m_s; ++j) {
      const auto& nbrs = ring.neighbors[j];
      op.rows[j].emplace_back(j, nbrs.empty() ? 1.0 : 1.0 - spec.alpha);
      for (std::size_t i : nbrs)
        op.rows[j].emplace_back(i, spec.alpha / static_cast<double>(nbrs.size()));
    }
    return op;
  }

  const auto& p = spec.transition;
  if (p.size() != spec.m_s)
    fail(ErrorCode::NonStochasticMatrix, fmt::format("transition has {} rows, expected {}", p.size(), spec.m_s));
  for (std::size_t i = 0; i < spec.m_s; ++i) {
    if (p[i].size() != spec.m_s)
      fail(ErrorCode::NonStochasticMatrix, fmt::format("transition row {} has {} entries", i, p[i].size()));
    double sum = 0.0;
    std::size_t off_diag = 0;
    for (std::size_t j = 0; j < spec.m_s; ++j) {
      if (!(p[i][j] >= 0.0) || !std::isfinite(p[i][j]))
        fail(ErrorCode::NonStochasticMatrix, fmt::format("transition[{}][{}] is not a probability", i, j));
      sum += p[i][j];
      if (j != i && p[i][j] != 0.0) ++off_diag;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      fail(ErrorCode::NonStochasticMatrix, fmt::format("transition row {} sums to {}", i, sum));
    if (off_diag > spec.k)
      fail(ErrorCode::InvalidArgument,
           fmt::format("transition row {} couples to {} states, K is {}", i, off_diag, spec.k));
  }
  // x(t+1) = x(t) P, so row j of the operator is column j of P.
  for (std::size_t i = 0; i < spec.m_s; ++i)
    for (std::size_t j = 0; j < spec.m_s; ++j)
      if (p[i][j] != 0.0) op.rows[j].emplace_back(i, p[i][j]);
  return op;
}

std::vector<std::vector<double>> reference_mesh_solve(const MeshSpec& spec) {
  const MeshOperator op = mesh_operator(spec);
  std::vector<std::vector<double>> states{spec.init};
  states.reserve(spec.m_t + 1);
  for (std::size_t t = 0; t < spec.m_t; ++t) states.push_back(op.apply(states.back()));
  return states;
}

namespace {

ComputeGraph mesh_template(const MeshSpec& spec, const MeshOperator& op) {
  ComputeGraph g;
  if (spec.dynamics == MeshDynamics::diffusion) {
    const std::size_t k = spec.m_s > 1 ? spec.k : 0;
    for (std::size_t i = 0; i <= k; ++i) {
      g.nodes.push_back({fmt::format("ld{}", i), "load", {}, ""});
      g.inputs.push_back(g.nodes.back().id);
    }
    g.nodes.push_back({"cs", "mul", {"ld0"}, fmt::format("{}", 1.0 - spec.alpha)});
    if (k > 0) {
      OpNode sum{"nsum", "add", {}, ""};
      for (std::size_t i = 1; i <= k; ++i) sum.inputs.push_back(fmt::format("ld{}", i));
      g.nodes.push_back(sum);
      g.nodes.push_back({"cn", "mul", {"nsum"}, fmt::format("{}", spec.alpha / static_cast<double>(k))});
      g.nodes.push_back({"x_next", "add", {"cs", "cn"}, ""});
    } else {
      g.nodes.push_back({"x_next", "add", {"cs"}, ""});
    }
  } else {
    std::size_t widest = 0;
    for (const auto& row : op.rows) widest = std::max(widest, row.size());
    OpNode sum{"x_next", "add", {}, ""};
    for (std::size_t i = 0; i < widest; ++i) {
      g.nodes.push_back({fmt::format("ld{}", i), "load", {}, ""});
      g.inputs.push_back(g.nodes.back().id);
      g.nodes.push_back({fmt::format("w{}", i), "mul", {fmt::format("ld{}", i)}, ""});
      sum.inputs.push_back(fmt::format("w{}", i));
    }
    g.nodes.push_back(sum);
  }
  g.outputs = {"x_next"};
  return g;
}

}  // namespace

MeshWorkload gen_mesh(const MeshSpec& spec) {
  if (spec.n_mesh != 2)
    fail(ErrorCode::InvalidArgument, "the spiking mesh uses exactly 2 neurons per point");
  if (!(spec.v_thresh > 0.0)) fail(ErrorCode::InvalidArgument, "v_thresh must be positive");

  MeshWorkload w;
  w.op = mesh_operator(spec);
  w.x0 = spec.init;
  w.point_template = mesh_template(spec, w.op);
  w.template_metrics = compute_metrics(validate_graph(w.point_template));

  NeuronSpec relu;
  relu.model = NeuronModel::ann_relu;
  relu.v_thresh = (spec.dynamics == MeshDynamics::diffusion ? spec.alpha : 1.0) * spec.v_thresh;

  auto& ng = w.network;
  for (std::size_t i = 0; i < spec.m_s; ++i) {
    ng.neurons.push_back({fmt::format("p{}", i), relu, 0.0});
    ng.neurons.push_back({fmt::format("m{}", i), relu, 0.0});
  }
  for (const auto& n : ng.neurons) {
    ng.inputs.push_back(n.id);
    ng.outputs.push_back(n.id);
  }
  for (std::size_t j = 0; j < spec.m_s; ++j) {
    for (const auto& [i, m] : w.op.rows[j]) {
      const auto pi = fmt::format("p{}", i), mi = fmt::format("m{}", i);
      const auto pj = fmt::format("p{}", j), mj = fmt::format("m{}", j);
      ng.synapses.push_back({pi, pj, m, 1});
      ng.synapses.push_back({mi, pj, -m, 1});
      ng.synapses.push_back({pi, mj, -m, 1});
      ng.synapses.push_back({mi, mj, m, 1});
    }
  }

  const auto next = w.op.apply(w.x0);
  for (std::size_t i = 0; i < spec.m_s; ++i) {
    const double d = next[i] - w.x0[i];
    if (d == 0.0) continue;
    w.kickoff.emplace_back(2 * i, d);
    w.kickoff.emplace_back(2 * i + 1, -d);
  }
  return w;
}

EncodingMode mesh_encoding() { return EncodingMode::digital(16, 2.0); }

SimTrace run_mesh(const MeshWorkload& w, std::uint64_t max_steps, const SimOptions& opts,
                  std::uint64_t zero_activity_window) {
  SimState s = init_sim(w.network, mesh_encoding(), 0, opts);
  RunOptions ro;
  ro.max_steps = max_steps;
  ro.zero_activity_window = zero_activity_window;
  ro.schedule = [&w](std::uint64_t t) {
    return t == 1 ? w.kickoff : std::vector<std::pair<std::size_t, double>>{};
  };
  return run_sim(s, ro);
}

std::vector<std::vector<double>> decode_mesh(const MeshWorkload& w, const SimTrace& tr) {
  std::vector<std::vector<double>> out;
  std::vector<double> x = w.x0;
  for (const auto& y : tr.outputs) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += y[2 * i] - y[2 * i + 1];
    out.push_back(x);
  }
  return out;
}

std::vector<double> default_ff_weights(std::size_t n_i, std::size_t n_j, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.5, 1.5);
  std::vector<double> w(n_i * n_j);
  for (auto& v : w) v = dist(rng) / static_cast<double>(n_i);
  return w;
}

FFLayerSpec default_ff_spec(std::size_t n_i, std::size_t n_j, double rate, std::size_t steps,
                            std::uint64_t seed) {
  FFLayerSpec spec;
  spec.n_i = n_i;
  spec.n_j = n_j;
  spec.weights = default_ff_weights(n_i, n_j, seed);
  spec.input_rates.assign(n_i, rate);
  spec.steps = steps;
  return spec;
}

namespace {

void check_ff(const FFLayerSpec& spec) {
  if (spec.n_i == 0 || spec.n_j == 0) fail(ErrorCode::ZeroWidth, "layer width must be >= 1");
  if (spec.weights.size() != spec.n_i * spec.n_j)
    fail(ErrorCode::InvalidArgument, fmt::format("expected {} weights, got {}", spec.n_i * spec.n_j,
                                                 spec.weights.size()));
  for (double w : spec.weights)
    if (!std::isfinite(w)) fail(ErrorCode::InvalidArgument, "weights must be finite");
  if (!spec.input_rates.empty() && spec.input_rates.size() != spec.n_i)
    fail(ErrorCode::InvalidArgument, "one input rate per source expected");
  for (double r : spec.input_rates)
    if (!(r >= 0.0 && r <= 1.0)) fail(ErrorCode::InvalidArgument, "input rates must lie in [0, 1]");
}

}  // namespace

NeuralGraph gen_ff_layer(const FFLayerSpec& spec) {
  check_ff(spec);
  NeuralGraph ng;
  NeuronSpec in;
  in.model = NeuronModel::threshold_gate;
  in.v_thresh = 0.5;
  NeuronSpec out = in;
  out.v_thresh = spec.output_thresh;
  for (std::size_t i = 0; i < spec.n_i; ++i) {
    ng.neurons.push_back({fmt::format("in{}", i), in, 0.0});
    ng.inputs.push_back(ng.neurons.back().id);
  }
  for (std::size_t j = 0; j < spec.n_j; ++j) {
    ng.neurons.push_back({fmt::format("out{}", j), out, 0.0});
    ng.outputs.push_back(ng.neurons.back().id);
  }
  ng.synapses.reserve(spec.n_i * spec.n_j);
  for (std::size_t i = 0; i < spec.n_i; ++i)
    for (std::size_t j = 0; j < spec.n_j; ++j)
      ng.synapses.push_back({fmt::format("in{}", i), fmt::format("out{}", j),
                             spec.weights[i * spec.n_j + j], 1});
  return ng;
}

std::vector<std::pair<std::size_t, double>> ff_inputs_at(const FFLayerSpec& spec, std::uint64_t t) {
  std::vector<std::pair<std::size_t, double>> out;
  if (t == 0 || t > spec.steps) return out;
  for (std::size_t i = 0; i < spec.input_rates.size(); ++i) {
    const double r = spec.input_rates[i];
    if (std::floor(static_cast<double>(t) * r) > std::floor(static_cast<double>(t - 1) * r))
      out.emplace_back(i, 1.0);
  }
  return out;
}

SimTrace run_ff_presentation(const FFLayerSpec& spec, const SimOptions& opts) {
  SimState s = init_sim(gen_ff_layer(spec), EncodingMode::digital(16, 128.0), 0, opts);
  RunOptions ro;
  ro.max_steps = spec.steps + 3;
  ro.schedule = [&spec](std::uint64_t t) { return ff_inputs_at(spec, t); };
  return run_sim(s, ro);
}

ComputeGraph ff_compute_graph(std::size_t n_i, std::size_t n_j) {
  if (n_i == 0 || n_j == 0) fail(ErrorCode::ZeroWidth, "layer width must be >= 1");
  ComputeGraph g;
  for (std::size_t j = 0; j < n_j; ++j) {
    OpNode sum{fmt::format("s{}", j), "add", {}, ""};
    for (std::size_t i = 0; i < n_i; ++i) {
      g.nodes.push_back({fmt::format("w{}_{}", j, i), "mul", {}, ""});
      sum.inputs.push_back(g.nodes.back().id);
    }
    g.nodes.push_back(std::move(sum));
    g.nodes.push_back({fmt::format("r{}", j), "relu", {fmt::format("s{}", j)}, ""});
    g.outputs.push_back(g.nodes.back().id);
  }
  return g;
}

ComputeGraph gen_random_dag(std::size_t n, double edge_density,
                            const std::vector<std::string>& alphabet, std::uint64_t seed) {
  if (alphabet.empty()) fail(ErrorCode::InvalidArgument, "alphabet must not be empty");
  if (!(edge_density >= 0.0 && edge_density <= 1.0))
    fail(ErrorCode::InvalidArgument, "edge density must lie in [0, 1]");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);

  ComputeGraph g;
  std::vector<char> has_succ(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    OpNode node{fmt::format("n{}", i), alphabet[pick(rng)], {}, ""};
    for (std::size_t j = 0; j < i; ++j) {
      if (coin(rng) < edge_density) {
        node.inputs.push_back(fmt::format("n{}", j));
        has_succ[j] = 1;
      }
    }
    g.nodes.push_back(std::move(node));
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!has_succ[i]) g.outputs.push_back(g.nodes[i].id);
  return g;
}

NeuralGraph gen_self_exciting_ring(std::size_t n) {
  if (n == 0) fail(ErrorCode::InvalidArgument, "ring needs at least one neuron");
  NeuralGraph ng;
  NeuronSpec lif;
  lif.model = NeuronModel::lif;
  lif.v_thresh = 1.0;
  for (std::size_t i = 0; i < n; ++i) ng.neurons.push_back({fmt::format("r{}", i), lif, 2.0});
  for (std::size_t i = 0; i < n; ++i)
    ng.synapses.push_back({fmt::format("r{}", i), fmt::format("r{}", (i + 1) % n), 1.5, 1});
  ng.outputs.push_back("r0");
  return ng;
}

NeuralGraph gen_fanin_network(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (n == 0 || k == 0 || k > n) fail(ErrorCode::InvalidArgument, "need 1 <= k <= n");
  NeuralGraph ng;
  NeuronSpec src;
  src.model = NeuronModel::lif;
  src.v_thresh = 0.5;
  NeuronSpec sink = src;
  sink.v_thresh = 1e12;
  for (std::size_t i = 0; i < n; ++i) {
    ng.neurons.push_back({fmt::format("s{}", i), src, 0.0});
    ng.inputs.push_back(ng.neurons.back().id);
  }
  for (std::size_t j = 0; j < n; ++j) ng.neurons.push_back({fmt::format("t{}", j), sink, 0.0});

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t a = 0; a < k; ++a) {
      std::uniform_int_distribution<std::size_t> d(a, n - 1);
      std::swap(pool[a], pool[d(rng)]);
      ng.synapses.push_back({fmt::format("s{}", pool[a]), fmt::format("t{}", j), 1.0, 1});
    }
  }
  return ng;
}

}  // namespace neurocost
