#include "neurocost/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <set>
#include <sstream>

#include "neurocost/error.hpp"

namespace neurocost {

using json = nlohmann::ordered_json;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{}", v);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write '" + path + "'");
  out << text;
  if (!out) fail(ErrorCode::IoError, "write to '" + path + "' failed");
}

namespace {

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t end = std::min(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    fail(ErrorCode::SyntaxError, fmt::format("line {}, column {}: invalid JSON", line, col));
  }
}

[[noreturn]] void schema(const std::string& field, const std::string& what) {
  fail(ErrorCode::SchemaError, field + ": " + what);
}

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : keys) known = known || it.key() == k;
    if (!known) schema(where + "." + it.key(), "unknown field");
  }
}

const json& object_at(const json& j, const std::string& where) {
  if (!j.is_object()) schema(where, "expected an object");
  return j;
}

std::string string_at(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) schema(where + "." + key, "missing");
  if (!it->is_string()) schema(where + "." + key, "expected a string");
  return it->get<std::string>();
}

std::vector<std::string> strings_at(const json& obj, const char* key, const std::string& where) {
  std::vector<std::string> out;
  auto it = obj.find(key);
  if (it == obj.end()) return out;
  if (!it->is_array()) schema(where + "." + key, "expected an array of strings");
  for (const auto& v : *it) {
    if (!v.is_string()) schema(where + "." + key, "expected an array of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

double number_at(const json& obj, const char* key, const std::string& where, double fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (it->is_string() && (*it == "inf" || *it == "infinity"))
    return std::numeric_limits<double>::infinity();
  if (!it->is_number()) schema(where + "." + key, "expected a number");
  return it->get<double>();
}

json number_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

}  // namespace

ComputeGraph parse_graph_file(std::string_view text) {
  const json doc = parse_json(text);
  object_at(doc, "$");
  only_keys(doc, "$", {"nodes", "inputs", "outputs"});
  auto nodes = doc.find("nodes");
  if (nodes == doc.end()) schema("$.nodes", "missing");
  if (!nodes->is_array()) schema("$.nodes", "expected an array");

  ComputeGraph g;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < nodes->size(); ++i) {
    const std::string where = fmt::format("$.nodes[{}]", i);
    const json& n = object_at((*nodes)[i], where);
    only_keys(n, where, {"id", "op", "inputs", "payload"});
    OpNode node;
    node.id = string_at(n, "id", where);
    node.op = string_at(n, "op", where);
    node.inputs = strings_at(n, "inputs", where);
    if (n.contains("payload")) node.payload = string_at(n, "payload", where);
    if (node.id.empty()) schema(where + ".id", "empty id");
    if (!ids.insert(node.id).second) schema(where + ".id", "duplicate id '" + node.id + "'");
    g.nodes.push_back(std::move(node));
  }
  g.inputs = strings_at(doc, "inputs", "$");
  g.outputs = strings_at(doc, "outputs", "$");
  return g;
}

std::string emit_graph(const ComputeGraph& g) {
  json doc;
  doc["nodes"] = json::array();
  for (const auto& n : g.nodes) {
    json node;
    node["id"] = n.id;
    node["op"] = n.op;
    node["inputs"] = n.inputs;
    if (!n.payload.empty()) node["payload"] = n.payload;
    doc["nodes"].push_back(std::move(node));
  }
  doc["inputs"] = g.inputs;
  doc["outputs"] = g.outputs;
  return doc.dump(2) + "\n";
}

NeuralFile parse_neural_file(std::string_view text) {
  const json doc = parse_json(text);
  object_at(doc, "$");
  only_keys(doc, "$", {"neurons", "synapses", "inputs", "outputs", "stimulus"});
  NeuralFile f;
  auto neurons = doc.find("neurons");
  if (neurons == doc.end() || !neurons->is_array()) schema("$.neurons", "expected an array");
  for (std::size_t i = 0; i < neurons->size(); ++i) {
    const std::string where = fmt::format("$.neurons[{}]", i);
    const json& n = object_at((*neurons)[i], where);
    only_keys(n, where, {"id", "model", "v_thresh", "v_reset", "tau", "dt", "x0"});
    Neuron neuron;
    neuron.id = string_at(n, "id", where);
    if (n.contains("model")) {
      try {
        neuron.spec.model = parse_neuron_model(string_at(n, "model", where));
      } catch (const Error&) {
        schema(where + ".model", "unknown neuron model");
      }
    }
    neuron.spec.v_thresh = number_at(n, "v_thresh", where, neuron.spec.v_thresh);
    neuron.spec.v_reset = number_at(n, "v_reset", where, neuron.spec.v_reset);
    neuron.spec.tau = number_at(n, "tau", where, neuron.spec.tau);
    neuron.spec.dt = number_at(n, "dt", where, neuron.spec.dt);
    neuron.x0 = number_at(n, "x0", where, 0.0);
    f.graph.neurons.push_back(std::move(neuron));
  }
  if (auto syn = doc.find("synapses"); syn != doc.end()) {
    if (!syn->is_array()) schema("$.synapses", "expected an array");
    for (std::size_t i = 0; i < syn->size(); ++i) {
      const std::string where = fmt::format("$.synapses[{}]", i);
      const json& s = object_at((*syn)[i], where);
      only_keys(s, where, {"source", "target", "weight", "delay"});
      SynapseSpec spec;
      spec.source = string_at(s, "source", where);
      spec.target = string_at(s, "target", where);
      spec.weight = number_at(s, "weight", where, 1.0);
      const double d = number_at(s, "delay", where, 1.0);
      if (d != std::floor(d) || d < 1.0 || d > 1e6) schema(where + ".delay", "expected an integer >= 1");
      spec.delay = static_cast<int>(d);
      f.graph.synapses.push_back(std::move(spec));
    }
  }
  f.graph.inputs = strings_at(doc, "inputs", "$");
  f.graph.outputs = strings_at(doc, "outputs", "$");
  if (auto st = doc.find("stimulus"); st != doc.end()) {
    if (!st->is_array()) schema("$.stimulus", "expected an array");
    for (std::size_t i = 0; i < st->size(); ++i) {
      const std::string where = fmt::format("$.stimulus[{}]", i);
      const json& s = object_at((*st)[i], where);
      only_keys(s, where, {"t", "neuron", "value"});
      Stimulus stim;
      const double t = number_at(s, "t", where, 1.0);
      if (t != std::floor(t) || t < 1.0) schema(where + ".t", "expected an integer >= 1");
      stim.t = static_cast<std::uint64_t>(t);
      stim.neuron = string_at(s, "neuron", where);
      stim.value = number_at(s, "value", where, 1.0);
      f.stimulus.push_back(std::move(stim));
    }
  }
  return f;
}

std::string emit_neural_graph(const NeuralGraph& ng, const std::vector<Stimulus>& stimulus) {
  json doc;
  doc["neurons"] = json::array();
  for (const auto& n : ng.neurons) {
    json j;
    j["id"] = n.id;
    j["model"] = std::string(to_string(n.spec.model));
    j["v_thresh"] = number_json(n.spec.v_thresh);
    j["v_reset"] = number_json(n.spec.v_reset);
    j["tau"] = number_json(n.spec.tau);
    j["dt"] = number_json(n.spec.dt);
    j["x0"] = number_json(n.x0);
    doc["neurons"].push_back(std::move(j));
  }
  doc["synapses"] = json::array();
  for (const auto& s : ng.synapses) {
    json j;
    j["source"] = s.source;
    j["target"] = s.target;
    j["weight"] = number_json(s.weight);
    j["delay"] = s.delay;
    doc["synapses"].push_back(std::move(j));
  }
  doc["inputs"] = ng.inputs;
  doc["outputs"] = ng.outputs;
  if (!stimulus.empty()) {
    doc["stimulus"] = json::array();
    for (const auto& s : stimulus) {
      json j;
      j["t"] = s.t;
      j["neuron"] = s.neuron;
      j["value"] = number_json(s.value);
      doc["stimulus"].push_back(std::move(j));
    }
  }
  return doc.dump(2) + "\n";
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct ConfigLine {
  std::size_t line;
  std::string key;
  std::string value;
};

std::vector<ConfigLine> split_config(std::string_view text) {
  std::vector<ConfigLine> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      fail(ErrorCode::SyntaxError, fmt::format("line {}, column 1: expected key = value", line_no));
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      fail(ErrorCode::SyntaxError, fmt::format("line {}, column 1: empty key or value", line_no));
    out.push_back({line_no, std::string(key), std::string(value)});
  }
  return out;
}

CostConstants apply_config(std::string_view text, int depth);

CostConstants load_preset_at(const std::string& name, int depth) {
  if (depth > 4) fail(ErrorCode::SchemaError, "preset '" + name + "' nests too deeply");
  if (name.find('/') != std::string::npos || name.find("..") != std::string::npos)
    fail(ErrorCode::SchemaError, "invalid preset name '" + name + "'");
  std::vector<std::filesystem::path> dirs;
  if (const char* env = std::getenv("NEUROCOST_PRESET_DIR"); env && *env) dirs.emplace_back(env);
  dirs.emplace_back(std::filesystem::path(NEUROCOST_SOURCE_DIR) / "presets");
  for (const auto& dir : dirs) {
    const auto file = dir / (name + ".conf");
    std::error_code ec;
    if (std::filesystem::is_regular_file(file, ec)) return apply_config(read_file(file.string()), depth + 1);
  }
  try {
    return builtin_preset(name);
  } catch (const Error&) {
    fail(ErrorCode::SchemaError, "unknown preset '" + name + "'");
  }
}

CostConstants apply_config(std::string_view text, int depth) {
  const auto lines = split_config(text);
  std::string preset = "unit";
  bool named = false;
  for (const auto& l : lines) {
    if (l.key != "preset") continue;
    if (named) fail(ErrorCode::SyntaxError, fmt::format("line {}, column 1: preset given twice", l.line));
    preset = l.value;
    named = true;
  }
  CostConstants c = named ? load_preset_at(preset, depth) : builtin_preset("unit");
  for (const auto& l : lines) {
    if (l.key == "preset") continue;
    double v = 0.0;
    const char* first = l.value.data();
    const char* last = first + l.value.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v))
      fail(ErrorCode::SyntaxError,
           fmt::format("line {}, column 1: '{}' is not a number", l.line, l.value));
    double* slot = nullptr;
    try {
      slot = &constant_ref(c, l.key);
    } catch (const Error&) {
      fail(ErrorCode::UnknownKey, fmt::format("line {}: unknown key '{}'", l.line, l.key));
    }
    if (v < 0.0) fail(ErrorCode::NegativeConstant, fmt::format("line {}: {} = {}", l.line, l.key, l.value));
    *slot = v;
  }
  if (c.n_core < 1.0) fail(ErrorCode::SchemaError, "n_core must be >= 1");
  return c;
}

}  // namespace

CostConstants parse_config(std::string_view text) { return apply_config(text, 0); }

CostConstants load_preset(const std::string& name) { return load_preset_at(name, 0); }

std::string emit_csv(const CsvTable& table) {
  auto cell = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
      if (ch == '"') q += '"';
      q += ch;
    }
    return q + "\"";
  };
  std::string out;
  for (std::size_t i = 0; i < table.header.size(); ++i) out += (i ? "," : "") + cell(table.header[i]);
  out += "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + cell(row[i]);
    out += "\n";
  }
  return out;
}

const std::vector<std::string>& trace_columns() {
  static const std::vector<std::string> cols = {
      "t",           "spikes",          "synaptic_events", "neurons_touched",
      "delta_n",     "f_window",        "e_voltage_term",  "e_spikegen_term",
      "e_synapse_term", "e_spike_term", "e_t",             "e_cum"};
  return cols;
}

CsvTable trace_table(const SimTrace& tr) {
  CsvTable t;
  t.header = trace_columns();
  double cum = 0.0;
  for (std::size_t i = 0; i < tr.records.size(); ++i) {
    const auto& r = tr.records[i];
    cum += r.e_t;
    t.rows.push_back({std::to_string(r.t), std::to_string(r.spikes()),
                      std::to_string(r.synaptic_events), std::to_string(r.neurons_touched),
                      format_number(r.delta_n), format_number(tr.f_series.at(i)),
                      format_number(r.e_voltage_term), format_number(r.e_spikegen_term),
                      format_number(r.e_synapse_term), format_number(r.e_spike_term),
                      format_number(r.e_t), format_number(cum)});
  }
  return t;
}

}  // namespace neurocost
