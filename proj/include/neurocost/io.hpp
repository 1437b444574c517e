#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "neurocost/cost.hpp"
#include "neurocost/graph.hpp"
#include "neurocost/neural.hpp"
#include "neurocost/sim.hpp"

namespace neurocost {

/// Shortest decimal that reads back to the same double.
std::string format_number(double v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view text);

/// Strict JSON graph format; see data/graph.schema.json. Throws SyntaxError
/// (with line and column) or SchemaError (naming the field).
ComputeGraph parse_graph_file(std::string_view text);
std::string emit_graph(const ComputeGraph& g);

struct Stimulus {
  std::uint64_t t = 1;
  std::string neuron;
  double value = 1.0;
};

struct NeuralFile {
  NeuralGraph graph;
  std::vector<Stimulus> stimulus;
};

NeuralFile parse_neural_file(std::string_view text);
std::string emit_neural_graph(const NeuralGraph& ng, const std::vector<Stimulus>& stimulus = {});

/// key = value lines, '#' starts a comment. `preset = NAME` picks the base
/// (default "unit"); every other key must name a constant. Throws SyntaxError,
/// UnknownKey or NegativeConstant.
CostConstants parse_config(std::string_view text);

/// Looks for NAME.conf in $NEUROCOST_PRESET_DIR, then the bundled presets/
/// directory, then falls back to the built-in table.
CostConstants load_preset(const std::string& name);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::string emit_csv(const CsvTable& table);

const std::vector<std::string>& trace_columns();
CsvTable trace_table(const SimTrace& tr);

}  // namespace neurocost
