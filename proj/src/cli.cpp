#include "neurocost/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <fmt/format.h>
#include <fmt/ranges.h>
#include <sstream>

#include "neurocost/cost.hpp"
#include "neurocost/error.hpp"
#include "neurocost/io.hpp"
#include "neurocost/simd.hpp"
#include "neurocost/sweep.hpp"
#include "neurocost/workloads.hpp"

namespace neurocost {

namespace {

struct Options {
  std::string graph;
  std::string config;
  std::string preset;
  std::string p = "1";
  std::uint64_t ncore = 0;
  std::uint64_t seed = 0;
  std::string out;
  std::uint64_t steps = 100;
  std::uint64_t window = 1;
  std::uint64_t idle = 3;
  std::size_t granularity = 1;
  double rate = 0.1;
  std::string rules = "default";
  int word_width = 16;
  double scale = 128.0;
  bool analog = false;
  bool oracle = false;
  std::string spec;
  std::string workload;
  std::string param;
  std::vector<double> values;
};

std::uint64_t parse_p(const std::string& s) {
  if (s == "inf" || s == "infinity") return kUnboundedProcessors;
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v == 0)
    throw CLI::ValidationError("--p", "expected a positive integer or 'inf'");
  return v;
}

CostConstants constants_from(const Options& o) {
  if (!o.config.empty()) {
    std::string text = read_file(o.config);
    if (!o.preset.empty()) text = "preset = " + o.preset + "\n" + text;
    return parse_config(text);
  }
  return load_preset(o.preset.empty() ? "unit" : o.preset);
}

LoweringRules cli_rules(const std::string& name) {
  if (name == "relay") return relay_lowering_rules();
  if (name != "default") throw CLI::ValidationError("--rules", "expected default or relay");
  auto r = default_lowering_rules();
  r["*"] = {2, 0};
  return r;
}

std::string bounds(std::uint64_t lo, std::uint64_t hi) {
  auto show = [](std::uint64_t v) { return v == kUnboundedProcessors ? std::string("inf") : std::to_string(v); };
  return fmt::format("[{}, {}]", show(lo), show(hi));
}

std::string terms(const Breakdown& b) {
  std::vector<std::string> parts;
  for (const auto& [k, v] : b) parts.push_back(k + "=" + format_number(v));
  return fmt::format("{}", fmt::join(parts, " "));
}

void emit(const Options& o, std::ostream& out, const std::string& text) {
  if (o.out.empty()) out << text;
  else write_file(o.out, text);
}

int cmd_analyze(const Options& o, std::ostream& out) {
  auto c = constants_from(o);
  if (o.ncore > 0) c.n_core = static_cast<double>(o.ncore);
  const auto g = validate_graph(parse_graph_file(read_file(o.graph)));
  const auto m = compute_metrics(g);
  const std::uint64_t p = parse_p(o.p);
  const auto sched = list_schedule(g, p == kUnboundedProcessors ? g.size() : p);
  const auto part = partition_isomorphic(g, o.granularity);
  const auto lowered = lower_graph(g, cli_rules(o.rules));
  const auto r = count_resources(lowered.graph, lowered.assemblies);

  const auto cpu = conventional_time(m, p);
  const auto gpu = conventional_time(m, std::min<std::uint64_t>(part.p_threads, p), ArchModel::gpu);
  const auto nmc = nmc_time(m);
  const auto nmc_r = nmc_time(m, static_cast<std::uint64_t>(c.n_core));
  const auto conv_space = conventional_space(c, p == kUnboundedProcessors ? g.size() : p,
                                             static_cast<double>(m.t1),
                                             c.c_mem * static_cast<double>(m.t1));
  const auto space = nmc_space(r, m, c);
  const auto space_r = nmc_space(r, m, c, true);
  const auto conv_e = conventional_energy(m, c);
  const auto nmc_e = nmc_energy_per_step(r, c, o.rate, std::max<std::size_t>(1, m.max_fan_in), true);

  std::ostringstream s;
  s << "t1=" << m.t1 << "\n";
  s << "t_inf=" << m.t_inf << "\n";
  s << "level_widths=[" << fmt::format("{}", fmt::join(m.level_widths, ",")) << "]\n";
  s << "max_fan_in=" << m.max_fan_in << "\n";
  s << "max_fan_out=" << m.max_fan_out << "\n";
  s << "p=" << o.p << "\n";
  s << "t_p=" << sched.t_p << "\n";
  s << "p_threads=" << part.p_threads << "\n";
  s << "p_efficiency=" << format_number(thread_efficiency(part, p == kUnboundedProcessors ? g.size() : p)) << "\n";
  s << "n_total=" << r.n_total << "\n";
  s << "s_total=" << r.s_total << "\n";
  s << "\n";
  s << fmt::format("{:<14}{:<16}{:<28}{}\n", "arch", "time", "space", "energy");
  s << fmt::format("{:<14}{:<16}{:<28}{}\n", "cpu_ideal", bounds(cpu.lower, cpu.upper),
                   ">= " + format_number(conv_space.lower), format_number(conv_e.total));
  s << fmt::format("{:<14}{:<16}{:<28}{}\n", "gpu", bounds(gpu.lower, gpu.upper),
                   ">= " + format_number(conv_space.lower), format_number(conv_e.total));
  s << fmt::format("{:<14}{:<16}{:<28}{}\n", "nmc_ideal", bounds(nmc.lower, nmc.upper),
                   fmt::format("[{}, {}]", format_number(space.lower), format_number(space.upper)),
                   format_number(nmc_e.total) + " per step");
  s << fmt::format("{:<14}{:<16}{:<28}{}\n", "nmc_realized", bounds(nmc_r.lower, nmc_r.upper),
                   fmt::format("[{}, {}]", format_number(space_r.lower), format_number(space_r.upper)),
                   format_number(nmc_e.total) + " per step");
  s << "\n";
  s << "conventional_energy: " << terms(conv_e.breakdown) << "\n";
  s << "nmc_energy_per_step f=" << format_number(o.rate) << ": " << terms(nmc_e.breakdown) << "\n";
  emit(o, out, s.str());
  return kExitOk;
}

int cmd_lower(const Options& o, std::ostream& out) {
  const auto g = validate_graph(parse_graph_file(read_file(o.graph)));
  const auto lowered = lower_graph(g, cli_rules(o.rules));
  const auto r = count_resources(lowered.graph, lowered.assemblies);
  const std::string text = emit_neural_graph(lowered.graph);
  if (o.out.empty()) {
    out << text;
  } else {
    write_file(o.out, text);
    out << "assemblies=" << lowered.assemblies.entries.size() << "\n";
    out << "n_total=" << r.n_total << "\n";
    out << "s_total=" << r.s_total << "\n";
    out << "n_bar=" << format_number(r.n_bar) << "\n";
    out << "s_bar=" << format_number(r.s_bar) << "\n";
  }
  return kExitOk;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  SimOptions so;
  so.constants = constants_from(o);
  so.f_window = o.window;
  const std::string text = read_file(o.graph);

  NeuralFile nf;
  if (text.find("\"nodes\"") != std::string::npos && text.find("\"neurons\"") == std::string::npos) {
    const auto lowered = lower_graph(validate_graph(parse_graph_file(text)), cli_rules(o.rules));
    nf.graph = lowered.graph;
    for (const auto& id : nf.graph.inputs) nf.stimulus.push_back({1, id, 1.0});
  } else {
    nf = parse_neural_file(text);
  }
  const EncodingMode enc = o.analog ? EncodingMode::analog() : EncodingMode::digital(o.word_width, o.scale);
  SimState s = init_sim(nf.graph, enc, o.seed, so);

  std::map<std::uint64_t, std::vector<std::pair<std::size_t, double>>> schedule;
  for (const auto& st : nf.stimulus) schedule[st.t].emplace_back(s.neuron_index(st.neuron), st.value);
  RunOptions ro;
  ro.max_steps = o.steps;
  ro.zero_activity_window = o.idle;
  ro.schedule = [&schedule](std::uint64_t t) {
    auto it = schedule.find(t);
    return it == schedule.end() ? std::vector<std::pair<std::size_t, double>>{} : it->second;
  };
  const SimTrace tr = run_sim(s, ro);
  const auto rep = reconcile_energy(tr, count_resources(nf.graph), so.constants);

  const std::string csv = emit_csv(trace_table(tr));
  if (o.out.empty()) {
    out << csv;
    return kExitOk;
  }
  write_file(o.out, csv);
  out << "steps=" << tr.records.size() << "\n";
  out << "stop=" << tr.stop_reason << "\n";
  out << "e_n=" << format_number(tr.e_n) << "\n";
  for (const auto& t : rep.terms)
    out << "ratio_" << t.term << "=" << format_number(t.ratio) << "\n";
  return kExitOk;
}

int cmd_partition(const Options& o, std::ostream& out) {
  const auto g = validate_graph(parse_graph_file(read_file(o.graph)));
  const std::uint64_t p = parse_p(o.p);
  const auto pr = partition_isomorphic(g, o.granularity);
  std::ostringstream s;
  s << "granularity=" << pr.granularity << "\n";
  s << "p_threads=" << pr.p_threads << "\n";
  if (p != kUnboundedProcessors) s << "p_efficiency=" << format_number(thread_efficiency(pr, p)) << "\n";
  s << "families=" << pr.families.size() << "\n";
  s << "residual=" << pr.residual.size() << "\n";
  s << "verified=" << (verify_families(g, pr) ? "yes" : "no") << "\n";
  for (const auto& f : pr.families) {
    std::vector<std::string> members;
    for (const auto& m : f.members) members.push_back(fmt::format("{{{}}}", fmt::join(m, ",")));
    s << "family size=" << f.members.size() << " members=" << fmt::format("{}", fmt::join(members, " ")) << "\n";
  }
  if (o.oracle) {
    const auto bf = brute_force_partition(g, o.granularity);
    s << "oracle_p_threads=" << bf.p_threads << "\n";
    s << "greedy_over_oracle=" << format_number(static_cast<double>(pr.p_threads) / static_cast<double>(bf.p_threads)) << "\n";
  }
  emit(o, out, s.str());
  return kExitOk;
}

int cmd_sweep(const Options& o, std::ostream& out) {
  SweepSpec spec;
  if (!o.spec.empty()) {
    spec = parse_sweep_spec(read_file(o.spec));
  } else {
    if (o.workload.empty() || o.param.empty())
      throw CLI::RequiredError("sweep needs --spec, or --workload with --param and --values");
    if (o.workload == "mesh") spec.workload = SweepWorkload::mesh;
    else if (o.workload == "ff") spec.workload = SweepWorkload::ff;
    else if (o.workload == "random") spec.workload = SweepWorkload::random;
    else throw CLI::ValidationError("--workload", "expected mesh, ff or random");
    spec.parameter = o.param;
    spec.values = o.values;
    spec.seed = o.seed;
  }
  if (!o.config.empty() || !o.preset.empty()) spec.constants = constants_from(o);
  if (!o.out.empty()) spec.output_path = o.out;

  const auto result = run_sweep(spec);
  const std::string csv = emit_csv(sweep_table(result));
  if (spec.output_path.empty()) out << csv;
  else write_file(spec.output_path, csv);
  const std::string prefix = spec.output_path.empty() ? "# " : "";
  if (result.regression) {
    out << prefix << "slope=" << format_number(result.regression->slope) << "\n";
    out << prefix << "intercept=" << format_number(result.regression->intercept) << "\n";
    out << prefix << "r_squared=" << format_number(result.regression->r_squared) << "\n";
  } else {
    out << prefix << result.note << "\n";
  }
  return kExitOk;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Time, space and energy cost models for conventional and neuromorphic execution",
               "neurocost"};
  app.require_subcommand(1, 1);
  Options o;

  auto common = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config, "Constants file (key = value)");
    sub->add_option("--preset", o.preset, "Constants preset name");
    sub->add_option("--out", o.out, "Write the main artifact here");
    sub->add_option("--seed", o.seed, "Seed");
  };

  auto* analyze = app.add_subcommand("analyze", "Metrics and per-architecture cost table for a graph");
  analyze->add_option("graph_pos", o.graph, "Graph file");
  analyze->add_option("--graph", o.graph, "Graph file");
  analyze->add_option("--p", o.p, "Processor count or 'inf'");
  analyze->add_option("--ncore", o.ncore, "Neurons per realized core (overrides n_core)")->check(CLI::PositiveNumber);
  analyze->add_option("--granularity", o.granularity, "Fragment size for the thread estimate")->check(CLI::PositiveNumber);
  analyze->add_option("--rate", o.rate, "Firing rate for the per-step estimate")->check(CLI::Range(0.0, 1.0));
  analyze->add_option("--rules", o.rules, "Lowering rules: default or relay");
  common(analyze);

  auto* lower = app.add_subcommand("lower", "Lower a graph to neurons and synapses");
  lower->add_option("graph_pos", o.graph, "Graph file");
  lower->add_option("--graph", o.graph, "Graph file");
  lower->add_option("--rules", o.rules, "Lowering rules: default or relay");
  common(lower);

  auto* simulate = app.add_subcommand("simulate", "Run the spiking simulator and emit a trace CSV");
  simulate->add_option("graph_pos", o.graph, "Neural graph or compute graph file");
  simulate->add_option("--graph", o.graph, "Neural graph or compute graph file");
  simulate->add_option("--steps", o.steps, "Maximum steps")->check(CLI::PositiveNumber);
  simulate->add_option("--window", o.window, "Firing-rate window")->check(CLI::PositiveNumber);
  simulate->add_option("--idle", o.idle, "Stop after this many idle steps (0 = never)");
  simulate->add_option("--word-width", o.word_width, "Digital word width")->check(CLI::Range(4, 64));
  simulate->add_option("--scale", o.scale, "Fixed-point scale")->check(CLI::PositiveNumber);
  simulate->add_flag("--analog", o.analog, "Analog state accounting");
  simulate->add_option("--rules", o.rules, "Lowering rules when given a compute graph");
  common(simulate);

  auto* partition = app.add_subcommand("partition", "Isomorphic-subgraph thread estimate");
  partition->add_option("graph_pos", o.graph, "Graph file");
  partition->add_option("--graph", o.graph, "Graph file");
  partition->add_option("--granularity", o.granularity, "Nodes per fragment")->check(CLI::PositiveNumber);
  partition->add_option("--p", o.p, "Processor count or 'inf'");
  partition->add_flag("--oracle", o.oracle, "Also run the exhaustive search (<= 12 nodes)");
  common(partition);

  auto* sweep = app.add_subcommand("sweep", "Parameter sweep with log-log regression");
  sweep->add_option("--spec", o.spec, "Sweep description (JSON)");
  sweep->add_option("--workload", o.workload, "mesh, ff or random");
  sweep->add_option("--param", o.param, "Swept parameter");
  sweep->add_option("--values", o.values, "Swept values")->delimiter(',');
  common(sweep);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
    auto* sub = app.get_subcommands().front();
    if (sub != sweep && o.graph.empty()) throw CLI::RequiredError("--graph");
    if (sub == analyze) return cmd_analyze(o, out);
    if (sub == lower) return cmd_lower(o, out);
    if (sub == simulate) return cmd_simulate(o, out);
    if (sub == partition) return cmd_partition(o, out);
    return cmd_sweep(o, out);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::MismatchDetected ? kExitMismatch : kExitInput;
  }
}

}  // namespace neurocost
