#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <limits>

#include "neurocost/error.hpp"
#include "neurocost/io.hpp"
#include "neurocost/workloads.hpp"

using namespace neurocost;

namespace {

struct Caught {
  ErrorCode code;
  std::string what;
};

Caught caught(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return {e.code(), e.what()};
  }
  ADD_FAILURE() << "no error raised";
  return {ErrorCode::IoError, ""};
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("neurocost_io_" + name);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace

TEST(GraphFile, BundledFootnote) {
  const auto g = parse_graph_file(read_file("data/footnote.graph"));
  ComputeGraph expect{{{"a", "sub", {}, ""}, {"b", "sub", {}, ""}, {"c", "mul", {"a", "b"}, ""}, {"d", "pow", {"c"}, ""}},
                      {},
                      {"d"}};
  EXPECT_EQ(g, expect);
}

TEST(GraphFile, Errors) {
  EXPECT_EQ(caught([] { parse_graph_file(""); }).code, ErrorCode::SyntaxError);
  const auto syn = caught([] { parse_graph_file("{\n  \"nodes\": [\n    {\"id\": \"a\" \"op\": \"add\"}\n  ]\n}"); });
  EXPECT_EQ(syn.code, ErrorCode::SyntaxError);
  EXPECT_NE(syn.what.find("line 3"), std::string::npos) << syn.what;

  const auto dup = caught([] {
    parse_graph_file(R"({"nodes": [{"id": "x", "op": "add"}, {"id": "x", "op": "mul"}]})");
  });
  EXPECT_EQ(dup.code, ErrorCode::SchemaError);
  EXPECT_NE(dup.what.find("duplicate id"), std::string::npos);
  EXPECT_NE(dup.what.find("$.nodes[1].id"), std::string::npos);

  const auto extra = caught([] { parse_graph_file(R"({"nodes": [{"id": "x", "op": "add", "colour": 1}]})"); });
  EXPECT_EQ(extra.code, ErrorCode::SchemaError);
  EXPECT_NE(extra.what.find("$.nodes[0].colour"), std::string::npos);

  EXPECT_EQ(caught([] { parse_graph_file(R"({"nodes": [{"id": 3, "op": "add"}]})"); }).code, ErrorCode::SchemaError);
  EXPECT_EQ(caught([] { parse_graph_file(R"({"edges": []})"); }).code, ErrorCode::SchemaError);
}

TEST(Property, GraphRoundTrip) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto g = gen_random_dag(1 + seed * 3, 0.2, {"add", "mul", "x\"q"}, seed);
    if (seed % 3 == 0) g.nodes[0].payload = "const 3.5";
    g.inputs = {g.nodes[0].id};
    EXPECT_EQ(parse_graph_file(emit_graph(g)), g);
  }
  for (const auto& e : std::filesystem::directory_iterator("data/corpus")) {
    if (e.path().extension() != ".graph") continue;
    const auto g = parse_graph_file(read_file(e.path().string()));
    EXPECT_EQ(parse_graph_file(emit_graph(g)), g) << e.path();
  }
}

TEST(NeuralFile, RoundTrip) {
  NeuralGraph ng = gen_fanin_network(6, 2, 3);
  ng.neurons[0].spec.tau = 4.5;
  ng.neurons[1].spec.model = NeuronModel::ann_tanh;
  ng.synapses[0].delay = 3;
  ng.outputs = {"t0"};
  const std::vector<Stimulus> stim = {{1, "s0", 1.0}, {4, "s2", 0.25}};
  const auto f = parse_neural_file(emit_neural_graph(ng, stim));
  EXPECT_EQ(f.graph, ng);
  ASSERT_EQ(f.stimulus.size(), 2u);
  EXPECT_EQ(f.stimulus[1].t, 4u);
  EXPECT_EQ(f.stimulus[1].neuron, "s2");
  EXPECT_EQ(f.stimulus[1].value, 0.25);

  EXPECT_EQ(caught([] { parse_neural_file(R"({"neurons": [{"id": "a"}], "synapses": [{"source": "a", "target": "a", "delay": 0}]})"); })
                .code,
            ErrorCode::SchemaError);
  EXPECT_EQ(caught([] { parse_neural_file(R"({"neurons": [{"id": "a", "model": "hh"}]})"); }).code,
            ErrorCode::SchemaError);
}

TEST(Config, Parse) {
  const auto unit = parse_config("preset = unit\n");
  for (const auto& n : constant_names()) EXPECT_EQ(constant_value(unit, n), 1.0);

  const auto over = parse_config("# spikes are dear\npreset = unit\ne_spike = 100  # override\n");
  for (const auto& n : constant_names()) EXPECT_EQ(constant_value(over, n), n == "e_spike" ? 100.0 : 1.0) << n;

  const auto neg = caught([] { parse_config("e_mem = -1\n"); });
  EXPECT_EQ(neg.code, ErrorCode::NegativeConstant);
  EXPECT_EQ(caught([] { parse_config("e_bogus = 1\n"); }).code, ErrorCode::UnknownKey);
  const auto bad = caught([] { parse_config("e_op = 1\njust words\n"); });
  EXPECT_EQ(bad.code, ErrorCode::SyntaxError);
  EXPECT_NE(bad.what.find("line 2"), std::string::npos);
  EXPECT_EQ(caught([] { parse_config("e_op = fast\n"); }).code, ErrorCode::SyntaxError);
}

TEST(Config, Presets) {
  const auto skew = load_preset("digital-skew");
  EXPECT_EQ(skew, builtin_preset("digital-skew"));
  EXPECT_EQ(load_preset("unit"), builtin_preset("unit"));
  EXPECT_EQ(caught([] { load_preset("nope"); }).code, ErrorCode::SchemaError);

  const auto dir = scratch_dir("presets");
  write_file((dir / "mine.conf").string(), "preset = digital-skew\nell = 4\n");
  ::setenv("NEUROCOST_PRESET_DIR", dir.c_str(), 1);
  const auto mine = parse_config("preset = mine\n");
  ::unsetenv("NEUROCOST_PRESET_DIR");
  EXPECT_EQ(mine.ell, 4.0);
  EXPECT_EQ(mine.e_spike, 100.0);
}

TEST(Csv, Trace) {
  SimTrace empty;
  EXPECT_EQ(emit_csv(trace_table(empty)),
            "t,spikes,synaptic_events,neurons_touched,delta_n,f_window,e_voltage_term,e_spikegen_term,"
            "e_synapse_term,e_spike_term,e_t,e_cum\n");

  auto s = init_sim(gen_self_exciting_ring(3), EncodingMode::digital(16, 128), 0);
  RunOptions ro;
  ro.max_steps = 3;
  const auto tr = run_sim(s, ro);
  const auto text = emit_csv(trace_table(tr));
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
  EXPECT_EQ(text, emit_csv(trace_table(tr)));
}

TEST(Csv, QuotingAndNumbers) {
  CsvTable t{{"a", "b,c"}, {{"1", "say \"hi\""}}};
  EXPECT_EQ(emit_csv(t), "a,\"b,c\"\n1,\"say \"\"hi\"\"\"\n");
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(std::stod(format_number(1.0 / 3.0)), 1.0 / 3.0);
  EXPECT_EQ(format_number(std::numeric_limits<double>::infinity()), "inf");
}

TEST(Files, Missing) {
  EXPECT_EQ(caught([] { read_file("/nonexistent/dir/x.graph"); }).code, ErrorCode::IoError);
}
