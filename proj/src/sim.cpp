#include "neurocost/sim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "neurocost/error.hpp"

namespace neurocost {

EncodingMode EncodingMode::digital(int word_width, double scale) {
  if (word_width < 4 || word_width > 64)
    fail(ErrorCode::InvalidArgument, "word width must be in [4, 64]");
  if (!(scale > 0.0) || !std::isfinite(scale))
    fail(ErrorCode::InvalidArgument, "fixed-point scale must be positive");
  return {Kind::digital, word_width, scale};
}

EncodingMode EncodingMode::analog() { return {Kind::analog, 64, 1.0}; }

std::uint64_t encode_word(double x, const EncodingMode& enc) {
  if (enc.kind == EncodingMode::Kind::analog) return std::bit_cast<std::uint64_t>(x);
  const int w = enc.word_width;
  const double half = std::ldexp(1.0, w - 1);
  double v = std::nearbyint(x / enc.scale * half);
  v = std::clamp(v, -half, half - (w == 64 ? 1024.0 : 1.0));
  const auto word = static_cast<std::uint64_t>(static_cast<std::int64_t>(v));
  return w == 64 ? word : word & ((std::uint64_t{1} << w) - 1);
}

int hamming_distance(std::uint64_t a, std::uint64_t b) { return std::popcount(a ^ b); }

void charge_step(StepRecord& rec, const CostConstants& c) {
  const auto events = static_cast<double>(rec.synaptic_events);
  rec.e_voltage_term = c.e_voltage * static_cast<double>(rec.neurons_touched);
  rec.e_spikegen_term = c.e_spikegen * static_cast<double>(rec.spikes());
  rec.e_synapse_term = c.e_synapse * events;
  rec.e_spike_term = c.e_spike * c.ell * events;
  rec.e_t = rec.e_voltage_term + rec.e_spikegen_term + rec.e_synapse_term + rec.e_spike_term;
}

std::size_t SimState::neuron_index(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) fail(ErrorCode::UnknownInputNeuron, "no neuron '" + id + "'");
  return it->second;
}

namespace {

double integrate(const NeuronSpec& spec, double x, double input) {
  if (spec.model != NeuronModel::lif) return input;
  const double decay = std::isinf(spec.tau) ? 1.0 : std::exp(-spec.dt / spec.tau);
  return x * decay + input;
}

bool same_word(double a, double b, const EncodingMode& enc) {
  if (enc.kind == EncodingMode::Kind::analog) return a == b;
  return encode_word(a, enc) == encode_word(b, enc);
}

// A neuron is unsettled when a zero-input update would still do something.
bool unsettled(const NeuronSpec& spec, double x, const EncodingMode& enc) {
  const StepOutput probe = step_neuron(spec, x, 0.0);
  if (probe.y != 0.0) return true;
  return !same_word(integrate(spec, x, 0.0), x, enc) || !same_word(probe.x_next, x, enc);
}

}  // namespace

SimState init_sim(const NeuralGraph& ng, const EncodingMode& enc, std::uint64_t seed,
                  SimOptions opts) {
  validate_neural_graph(ng);
  check_constants(opts.constants);
  if (opts.f_window == 0) fail(ErrorCode::InvalidArgument, "f window must be >= 1");

  SimState s;
  s.graph_ = ng;
  s.enc_ = enc;
  s.opts_ = opts;
  s.seed_ = seed;
  const std::size_t n = ng.neurons.size();
  s.x_.resize(n);
  s.out_.resize(n);
  s.is_input_.assign(n, 0);
  s.unsettled_.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    s.index_.emplace(ng.neurons[i].id, i);
    s.x_[i] = ng.neurons[i].x0;
  }
  std::uint32_t max_delay = 1;
  for (const auto& syn : ng.synapses) {
    const auto d = static_cast<std::uint32_t>(syn.delay);
    s.out_[s.index_.at(syn.source)].push_back(
        {static_cast<std::uint32_t>(s.index_.at(syn.target)), syn.weight, d});
    max_delay = std::max(max_delay, d);
  }
  s.pending_.resize(max_delay + 1);
  for (const auto& id : ng.inputs) s.is_input_[s.index_.at(id)] = 1;
  for (const auto& id : ng.outputs)
    s.output_idx_.push_back(static_cast<std::uint32_t>(s.index_.at(id)));
  s.last_y_out_.assign(s.output_idx_.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (unsettled(ng.neurons[i].spec, s.x_[i], enc)) {
      s.unsettled_[i] = 1;
      s.unsettled_list_.push_back(static_cast<std::uint32_t>(i));
    }
  }
  return s;
}

StepRecord step_sim(SimState& s, const ExternalInputs& external) {
  std::vector<std::pair<std::size_t, double>> indexed;
  indexed.reserve(external.size());
  for (const auto& [id, value] : external) indexed.emplace_back(s.neuron_index(id), value);
  return step_sim_indexed(s, indexed);
}

StepRecord step_sim_indexed(SimState& s, const std::vector<std::pair<std::size_t, double>>& external) {
  const std::size_t n = s.x_.size();
  const std::uint64_t t = s.t_ + 1;
  StepRecord rec;
  rec.t = t;

  std::unordered_map<std::uint32_t, double> input;
  auto& due = s.pending_[t % s.pending_.size()];
  for (const auto& ev : due) input[ev.target] += ev.value;
  s.pending_count_ -= due.size();
  due.clear();
  for (const auto& [idx, value] : external) {
    if (idx >= n || !s.is_input_[idx])
      fail(ErrorCode::UnknownInputNeuron,
           "external input targets '" + (idx < n ? s.graph_.neurons[idx].id : std::to_string(idx)) +
               "', which is not a declared input");
    input[static_cast<std::uint32_t>(idx)] += value;
  }

  std::vector<std::uint32_t> candidates;
  candidates.reserve(input.size() + s.unsettled_list_.size());
  for (const auto& kv : input) candidates.push_back(kv.first);
  for (std::uint32_t i : s.unsettled_list_)
    if (!input.count(i)) candidates.push_back(i);
  std::sort(candidates.begin(), candidates.end());

  std::vector<double> y_out(s.output_idx_.size(), 0.0);
  std::vector<double> y(candidates.size(), 0.0);
  const auto& enc = s.enc_;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const std::uint32_t i = candidates[c];
    const auto& spec = s.graph_.neurons[i].spec;
    auto it = input.find(i);
    const double in = it == input.end() ? 0.0 : it->second;
    const double old = s.x_[i];
    const double mid = integrate(spec, old, in);
    if (!std::isfinite(in) || !std::isfinite(mid))
      fail(ErrorCode::NonFiniteState, "neuron '" + s.graph_.neurons[i].id + "' diverged");
    const StepOutput out = step_neuron(spec, old, in);

    if (enc.kind == EncodingMode::Kind::digital) {
      const auto w_old = encode_word(old, enc);
      const auto w_mid = encode_word(mid, enc);
      const auto w_new = encode_word(out.x_next, enc);
      rec.delta_n += hamming_distance(w_old, w_mid) + hamming_distance(w_mid, w_new);
      if (w_mid != w_old || w_new != w_old) ++rec.neurons_touched;
    } else {
      rec.delta_n += std::abs(mid - old) + std::abs(out.x_next - mid);
      if (mid != old || out.x_next != old) ++rec.neurons_touched;
    }
    s.x_[i] = out.x_next;
    y[c] = out.y;
    if (out.y != 0.0) rec.spiking.push_back(i);
  }

  for (std::size_t c = 0; c < candidates.size(); ++c) {
    if (y[c] == 0.0) continue;
    for (const auto& syn : s.out_[candidates[c]]) {
      if (syn.weight == 0.0 && !s.opts_.deliver_zero_weight) continue;
      s.pending_[(t + syn.delay) % s.pending_.size()].push_back({syn.target, syn.weight * y[c]});
      ++s.pending_count_;
      ++rec.synaptic_events;
    }
  }

  for (std::size_t k = 0; k < s.output_idx_.size(); ++k) {
    auto pos = std::lower_bound(candidates.begin(), candidates.end(), s.output_idx_[k]);
    if (pos != candidates.end() && *pos == s.output_idx_[k])
      y_out[k] = y[static_cast<std::size_t>(pos - candidates.begin())];
  }
  s.last_y_out_ = std::move(y_out);

  for (std::uint32_t i : candidates) s.unsettled_[i] = 0;
  for (std::uint32_t i : s.unsettled_list_)
    if (!input.count(i)) s.unsettled_[i] = 0;
  s.unsettled_list_.clear();
  for (std::uint32_t i : candidates) {
    if (unsettled(s.graph_.neurons[i].spec, s.x_[i], enc)) {
      s.unsettled_[i] = 1;
      s.unsettled_list_.push_back(i);
    }
  }

  charge_step(rec, s.opts_.constants);
  s.t_ = t;
  return rec;
}

SimTrace run_sim(SimState& s, const RunOptions& opts) {
  if (opts.max_steps == 0) fail(ErrorCode::InvalidArgument, "max_steps must be >= 1");
  SimTrace tr;
  tr.neuron_count = s.graph().neurons.size();
  tr.synapse_count = s.graph().synapses.size();
  tr.stop_reason = "max_steps";

  const std::uint64_t window = s.options().f_window;
  const double n = static_cast<double>(std::max<std::size_t>(tr.neuron_count, 1));
  std::uint64_t idle = 0;
  std::uint64_t steady = 0;
  std::uint64_t spikes_in_window = 0;

  for (std::uint64_t k = 0; k < opts.max_steps; ++k) {
    const std::uint64_t t = s.t() + 1;
    StepRecord rec;
    try {
      rec = opts.schedule ? step_sim_indexed(s, opts.schedule(t)) : step_sim_indexed(s, {});
    } catch (const Error& e) {
      throw Error(e.code(), std::string(e.what()) + " (at step " + std::to_string(t) + ")");
    }

    spikes_in_window += rec.spikes();
    if (tr.records.size() >= window) spikes_in_window -= tr.records[tr.records.size() - window].spikes();
    const auto span = std::min<std::uint64_t>(window, tr.records.size() + 1);
    tr.f_series.push_back(static_cast<double>(spikes_in_window) / (static_cast<double>(span) * n));
    tr.e_n += rec.e_t;

    const bool quiet = rec.spikes() == 0 && rec.synaptic_events == 0 && rec.neurons_touched == 0 &&
                       s.pending_events() == 0;
    idle = quiet ? idle + 1 : 0;

    const auto& y = s.last_outputs();
    bool still = !tr.outputs.empty();
    for (std::size_t i = 0; still && i < y.size(); ++i)
      still = std::abs(y[i] - tr.outputs.back()[i]) < opts.convergence_tol;
    steady = still ? steady + 1 : 0;

    tr.outputs.push_back(y);
    tr.records.push_back(std::move(rec));

    if (opts.zero_activity_window && idle >= opts.zero_activity_window) {
      tr.stop_reason = "zero_activity";
      break;
    }
    if (opts.convergence_window && steady >= opts.convergence_window) {
      tr.stop_reason = "converged";
      break;
    }
  }
  return tr;
}

std::vector<double> measure_firing_rate(const SimTrace& tr, std::uint64_t window) {
  if (window == 0) fail(ErrorCode::InvalidArgument, "window must be >= 1");
  if (window > tr.records.size())
    fail(ErrorCode::WindowTooLarge, "window " + std::to_string(window) + " exceeds trace length " +
                                        std::to_string(tr.records.size()));
  const double denom =
      static_cast<double>(window) * static_cast<double>(std::max<std::size_t>(tr.neuron_count, 1));
  std::vector<double> out;
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < tr.records.size(); ++i) {
    acc += tr.records[i].spikes();
    if (i >= window) acc -= tr.records[i - window].spikes();
    if (i + 1 >= window) out.push_back(static_cast<double>(acc) / denom);
  }
  return out;
}

ReconciliationReport reconcile_energy(const SimTrace& tr, const ResourceCount& r,
                                      const CostConstants& c, std::uint64_t k) {
  ReconciliationReport rep;
  double e_n = 0.0;
  for (const auto& rec : tr.records) {
    StepRecord again = rec;
    charge_step(again, c);
    if (again.e_t != rec.e_t || again.e_voltage_term != rec.e_voltage_term ||
        again.e_spikegen_term != rec.e_spikegen_term ||
        again.e_synapse_term != rec.e_synapse_term || again.e_spike_term != rec.e_spike_term)
      fail(ErrorCode::MismatchDetected, "step " + std::to_string(rec.t) + " recorded e_t " +
                                            std::to_string(rec.e_t) + ", recomputed " +
                                            std::to_string(again.e_t));
    e_n += rec.e_t;
    ++rep.steps_checked;
  }
  if (e_n != tr.e_n)
    fail(ErrorCode::MismatchDetected, "cumulative energy disagrees with the sum of steps");

  if (k == 0 && r.n_total > 0)
    k = static_cast<std::uint64_t>(
        std::llround(static_cast<double>(r.s_total) / static_cast<double>(r.n_total)));

  Breakdown measured = {{"voltage", 0.0}, {"spikegen", 0.0}, {"synapse", 0.0}, {"spike", 0.0}};
  Breakdown analytic = measured;
  for (std::size_t i = 0; i < tr.records.size(); ++i) {
    const auto& rec = tr.records[i];
    measured[0].second += rec.e_voltage_term;
    measured[1].second += rec.e_spikegen_term;
    measured[2].second += rec.e_synapse_term;
    measured[3].second += rec.e_spike_term;
    const double f = std::clamp(tr.f_series.at(i), 0.0, 1.0);
    const auto est = nmc_energy_per_step(r, c, f, k, true);
    for (std::size_t j = 0; j < 4; ++j) analytic[j].second += est.breakdown[j].second;
  }
  for (std::size_t j = 0; j < 4; ++j) {
    TermReconciliation term;
    term.term = measured[j].first;
    term.measured = measured[j].second;
    term.analytic = analytic[j].second;
    term.firing_dependent = j != 0;
    if (term.measured != 0.0) term.ratio = term.analytic / term.measured;
    else term.ratio = term.analytic == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    rep.terms.push_back(term);
  }
  return rep;
}

}  // namespace neurocost
