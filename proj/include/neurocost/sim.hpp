#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "neurocost/cost.hpp"
#include "neurocost/neural.hpp"

namespace neurocost {

struct EncodingMode {
  enum class Kind { digital, analog };
  Kind kind = Kind::digital;
  int word_width = 16;
  double scale = 128.0;

  static EncodingMode digital(int word_width, double scale);
  static EncodingMode analog();
};

/// Fixed-point word for x: round(x / scale * 2^(w-1)) clamped to the signed
/// range, stored two's-complement in the low w bits. With w = 8 and
/// scale = 128 an integer x in [-128, 127] maps to itself.
std::uint64_t encode_word(double x, const EncodingMode& enc);
int hamming_distance(std::uint64_t a, std::uint64_t b);

struct SimOptions {
  CostConstants constants;
  /// Zero-weight synapses normally carry nothing and cost nothing.
  bool deliver_zero_weight = false;
  /// Trailing window for the f_t series carried in the trace.
  std::uint64_t f_window = 1;
};

struct StepRecord {
  std::uint64_t t = 0;
  std::vector<std::uint32_t> spiking;
  std::uint64_t synaptic_events = 0;
  std::uint64_t neurons_touched = 0;
  double delta_n = 0.0;
  double e_voltage_term = 0.0;
  double e_spikegen_term = 0.0;
  double e_synapse_term = 0.0;
  double e_spike_term = 0.0;
  double e_t = 0.0;

  std::uint64_t spikes() const noexcept { return spiking.size(); }
};

/// Energy of one step from its event counts. The terms are summed
/// voltage, spikegen, synapse, spike, left to right.
void charge_step(StepRecord& rec, const CostConstants& c);

using ExternalInputs = std::vector<std::pair<std::string, double>>;

class SimState {
public:
  const NeuralGraph& graph() const noexcept { return graph_; }
  std::uint64_t t() const noexcept { return t_; }
  const std::vector<double>& x() const noexcept { return x_; }
  const std::vector<double>& last_outputs() const noexcept { return last_y_out_; }
  const EncodingMode& encoding() const noexcept { return enc_; }
  const SimOptions& options() const noexcept { return opts_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t neuron_index(const std::string& id) const;
  std::size_t pending_events() const noexcept { return pending_count_; }

private:
  friend SimState init_sim(const NeuralGraph&, const EncodingMode&, std::uint64_t, SimOptions);
  friend StepRecord step_sim_indexed(SimState&, const std::vector<std::pair<std::size_t, double>>&);

  struct OutSyn {
    std::uint32_t target;
    double weight;
    std::uint32_t delay;
  };
  struct Event {
    std::uint32_t target;
    double value;
  };

  NeuralGraph graph_;
  EncodingMode enc_;
  SimOptions opts_;
  std::uint64_t seed_ = 0;
  std::uint64_t t_ = 0;
  std::vector<double> x_;
  std::vector<std::vector<OutSyn>> out_;
  std::vector<char> is_input_;
  std::vector<std::uint32_t> output_idx_;
  std::vector<double> last_y_out_;
  std::vector<std::vector<Event>> pending_;
  std::size_t pending_count_ = 0;
  std::vector<char> unsettled_;
  std::vector<std::uint32_t> unsettled_list_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// The seed is recorded for reproducibility; the update rules themselves are
/// deterministic.
SimState init_sim(const NeuralGraph& ng, const EncodingMode& enc, std::uint64_t seed,
                  SimOptions opts = {});

/// Advances one timestep: deliver due events and external inputs, update every
/// neuron that received input or whose zero-input update would change its
/// word or emit, queue outgoing events, then charge energy.
StepRecord step_sim(SimState& s, const ExternalInputs& external);
StepRecord step_sim_indexed(SimState& s, const std::vector<std::pair<std::size_t, double>>& external);

struct RunOptions {
  std::uint64_t max_steps = 1000;
  /// Stop after this many consecutive steps with no spikes, no events, no
  /// state change and nothing queued. 0 disables.
  std::uint64_t zero_activity_window = 0;
  /// Stop once every output changed by less than tol for this many steps.
  /// 0 disables.
  std::uint64_t convergence_window = 0;
  double convergence_tol = 1e-6;
  /// External inputs for timestep t (1-based), by neuron index.
  std::function<std::vector<std::pair<std::size_t, double>>(std::uint64_t)> schedule;
};

struct SimTrace {
  std::vector<StepRecord> records;
  std::vector<double> f_series;
  double e_n = 0.0;
  /// Output values per recorded step, in NeuralGraph::outputs order.
  std::vector<std::vector<double>> outputs;
  std::size_t neuron_count = 0;
  std::size_t synapse_count = 0;
  std::string stop_reason;
};

SimTrace run_sim(SimState& s, const RunOptions& opts);

/// Sliding-window firing rate: element i covers steps i+1 .. i+window.
std::vector<double> measure_firing_rate(const SimTrace& tr, std::uint64_t window);

struct TermReconciliation {
  std::string term;
  double measured = 0.0;
  double analytic = 0.0;
  /// analytic / measured; 1 when both are zero.
  double ratio = 1.0;
  bool firing_dependent = true;
};

struct ReconciliationReport {
  std::uint64_t steps_checked = 0;
  std::vector<TermReconciliation> terms;
};

/// Recomputes every e_t from the recorded counts (throws MismatchDetected on
/// any bit difference), then evaluates the per-step analytic model with the
/// trace's f_t and compares each term's total. `k` feeds the refined voltage
/// term; 0 uses round(s_total / n_total).
ReconciliationReport reconcile_energy(const SimTrace& tr, const ResourceCount& r,
                                      const CostConstants& c, std::uint64_t k = 0);

}  // namespace neurocost
