#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "neurocost/graph.hpp"
#include "neurocost/neural.hpp"
#include "neurocost/sim.hpp"

namespace neurocost {

enum class MeshDynamics { diffusion, dtmc };

struct MeshSpec {
  std::size_t m_s = 4;
  std::size_t k = 2;
  std::size_t m_t = 100;
  std::size_t n_mesh = 2;
  MeshDynamics dynamics = MeshDynamics::diffusion;
  double alpha = 0.5;
  /// Row-stochastic, m_s x m_s; dtmc only.
  std::vector<std::vector<double>> transition;
  std::vector<double> init;
  /// Residual size (state units) below which a mesh point stays silent.
  double v_thresh = 0.01;
};

/// rows[j] lists (i, M_ji): x(t+1)_j = sum_i M_ji x(t)_i.
struct MeshOperator {
  std::vector<std::vector<std::pair<std::size_t, double>>> rows;

  std::vector<double> apply(const std::vector<double>& x) const;
};

/// Validates the spec and builds the update operator. Throws DegenerateMesh,
/// NonStochasticMatrix or InvalidArgument.
MeshOperator mesh_operator(const MeshSpec& spec);

/// x(0) .. x(m_t) of the dense iteration.
std::vector<std::vector<double>> reference_mesh_solve(const MeshSpec& spec);

struct MeshWorkload {
  ComputeGraph point_template;
  GraphMetrics template_metrics;
  /// Two graded ReLU neurons per point carry the positive and negative part
  /// of the point's per-step change; outputs list them as p0, m0, p1, m1, ...
  NeuralGraph network;
  /// Initial change M x(0) - x(0), injected at step 1 (neuron index, value).
  std::vector<std::pair<std::size_t, double>> kickoff;
  std::vector<double> x0;
  MeshOperator op;
};

MeshWorkload gen_mesh(const MeshSpec& spec);

/// Digital word layout used for mesh runs.
EncodingMode mesh_encoding();

SimTrace run_mesh(const MeshWorkload& w, std::uint64_t max_steps, const SimOptions& opts,
                  std::uint64_t zero_activity_window = 3);

/// Decoded mesh state after each recorded step: x(0) plus every emitted change.
std::vector<std::vector<double>> decode_mesh(const MeshWorkload& w, const SimTrace& tr);

struct FFLayerSpec {
  std::size_t n_i = 8;
  std::size_t n_j = 4;
  /// Row-major n_i x n_j, weights[i * n_j + j] is source i -> output j.
  std::vector<double> weights;
  std::vector<double> input_rates;
  std::size_t steps = 8;
  double output_thresh = 0.5;
};

/// Uniform in [0.5, 1.5] / n_i, so each output sums to about 1.
std::vector<double> default_ff_weights(std::size_t n_i, std::size_t n_j, std::uint64_t seed);
FFLayerSpec default_ff_spec(std::size_t n_i, std::size_t n_j, double rate, std::size_t steps,
                            std::uint64_t seed);

/// n_i threshold-gate inputs fully connected to n_j threshold-gate outputs.
NeuralGraph gen_ff_layer(const FFLayerSpec& spec);
/// Evenly spaced spike train: input i fires at step t when floor(t r_i) steps up.
std::vector<std::pair<std::size_t, double>> ff_inputs_at(const FFLayerSpec& spec, std::uint64_t t);
/// One presentation plus the steps needed to drain it.
SimTrace run_ff_presentation(const FFLayerSpec& spec, const SimOptions& opts);

/// Products, per-output sums, then the nonlinearity: t_inf = 3.
ComputeGraph ff_compute_graph(std::size_t n_i, std::size_t n_j);

ComputeGraph gen_random_dag(std::size_t n, double edge_density,
                            const std::vector<std::string>& alphabet, std::uint64_t seed);

/// Ring of non-leaky LIF neurons, all starting above threshold, each exciting
/// its successor with weight > v_thresh: fires every step forever.
NeuralGraph gen_self_exciting_ring(std::size_t n);

/// n externally driven sources; n non-firing integrators each fed by k
/// distinct random sources.
NeuralGraph gen_fanin_network(std::size_t n, std::size_t k, std::uint64_t seed);

}  // namespace neurocost
