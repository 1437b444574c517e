#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "neurocost/graph.hpp"
#include "neurocost/neural.hpp"

namespace neurocost {

struct CostConstants {
  double e_op = 1.0;
  double e_mem = 1.0;
  double b_p = 1.0;
  double c_p = 1.0;
  double c_mem = 1.0;
  double c_n = 1.0;
  double c_s = 1.0;
  double e_voltage = 1.0;
  double e_spikegen = 1.0;
  double e_synapse = 1.0;
  double e_spike = 1.0;
  double ell = 1.0;
  double n_core = 1.0;

  bool operator==(const CostConstants&) const = default;
};

/// Field names in declaration order, matching the config keys.
const std::vector<std::string>& constant_names();
double& constant_ref(CostConstants& c, const std::string& name);
double constant_value(const CostConstants& c, const std::string& name);

/// Built-in presets: "unit" and "digital-skew". Throws InvalidArgument otherwise.
CostConstants builtin_preset(const std::string& name);
/// Throws NegativeConstant / InvalidArgument when a field is out of range.
void check_constants(const CostConstants& c);

enum class ArchModel { cpu_ideal, gpu, nmc_ideal, nmc_realized };
std::string_view to_string(ArchModel m);

struct TimeBounds {
  std::uint64_t lower = 0;
  std::uint64_t upper = 0;
  ArchModel model = ArchModel::cpu_ideal;
};

using Breakdown = std::vector<std::pair<std::string, double>>;

struct SpaceBounds {
  double lower = 0.0;
  double upper = 0.0;
  bool unbounded = false;
  Breakdown breakdown;
};

struct EnergyEstimate {
  double total = 0.0;
  Breakdown breakdown;
};

/// Sums the breakdown left to right; every estimate's total is built this way.
double breakdown_sum(const Breakdown& b);

/// Processor count meaning "unlimited".
inline constexpr std::uint64_t kUnboundedProcessors = UINT64_MAX;

TimeBounds conventional_time(const GraphMetrics& m, std::uint64_t p_threads,
                             ArchModel model = ArchModel::cpu_ideal);
TimeBounds nmc_time(const GraphMetrics& m, std::optional<std::uint64_t> n_core = std::nullopt);

SpaceBounds conventional_space(const CostConstants& c, std::uint64_t p, double program_size,
                               double data_size);
SpaceBounds mesh_conventional_space(const CostConstants& c, std::uint64_t p, std::uint64_t m_s);
/// Upper bound is the fully unrolled footprint, lower bound is full recurrence
/// compression. `realized` divides both by n_core.
SpaceBounds nmc_space(const ResourceCount& r, const GraphMetrics& m, const CostConstants& c,
                      bool realized = false);

EnergyEstimate conventional_energy(const GraphMetrics& m, const CostConstants& c,
                                   bool include_memory = true);
EnergyEstimate nmc_energy_per_step(const ResourceCount& r, const CostConstants& c, double f_t,
                                   std::uint64_t k, bool refined);
double nmc_total_energy(const std::vector<EnergyEstimate>& per_step);

struct CostRow {
  ArchModel arch = ArchModel::cpu_ideal;
  TimeBounds time;
  SpaceBounds space;
  EnergyEstimate energy;
};

struct ComparisonTable {
  std::vector<CostRow> rows;
  /// Named scalars describing the workload (t1, t_inf, n_total, ...).
  Breakdown params;
};

struct MeshReportInput {
  std::uint64_t m_s = 1;
  std::uint64_t m_t = 1;
  std::uint64_t k = 1;
  std::uint64_t t1s = 1;
  std::uint64_t t_infs = 1;
  std::uint64_t n_mesh = 1;
  std::uint64_t p = 1;
  /// Per-step firing rates; steps past the end reuse the last value.
  std::vector<double> f_series;
  bool refined = true;
  bool include_memory = false;
};

struct MeshReport {
  ComparisonTable table;
  /// Cumulative energy after t = 1..m_t steps.
  std::vector<double> conventional_cumulative;
  std::vector<double> nmc_cumulative;
  /// Smallest horizon from which NMC stays strictly cheaper through m_t and
  /// its per-step energy stays below the conventional per-step energy.
  std::optional<std::uint64_t> m_t_star;
};

MeshReport mesh_cost_report(const MeshReportInput& in, const CostConstants& c);

ComparisonTable ff_cost_report(std::uint64_t n_i, std::uint64_t n_j, const CostConstants& c,
                               double f_t, std::uint64_t p = 1);

}  // namespace neurocost
