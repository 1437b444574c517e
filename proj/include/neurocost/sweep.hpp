#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "neurocost/cost.hpp"
#include "neurocost/io.hpp"

namespace neurocost {

struct RegressionResult {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares of ln y on ln x. Returns nullopt when fewer than two
/// points are given or any value is not strictly positive.
std::optional<RegressionResult> fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

enum class SweepWorkload { mesh, ff, random };

struct SweepSpec {
  SweepWorkload workload = SweepWorkload::mesh;
  std::string parameter = "m_s";
  std::vector<double> values;
  std::map<std::string, double> fixed;
  std::string preset = "unit";
  CostConstants constants;
  std::uint64_t repetitions = 1;
  std::uint64_t seed = 1;
  std::string output_path;
};

/// JSON: {"workload", "parameter", "values", "fixed", "preset",
/// "repetitions", "seed", "output"}.
SweepSpec parse_sweep_spec(std::string_view text);

struct SweepRow {
  double value = 0.0;
  /// The regressed quantity: warm-up mean E_t (mesh), energy per
  /// presentation (ff), conventional energy (random).
  double metric = 0.0;
  double e_n = 0.0;
  double steps = 0.0;
  double mean_f = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::optional<RegressionResult> regression;
  std::string note;
};

/// Points run concurrently; rows come back sorted by swept value with
/// repetitions averaged.
SweepResult run_sweep(const SweepSpec& spec);

CsvTable sweep_table(const SweepResult& r);

}  // namespace neurocost
