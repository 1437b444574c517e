#include "neurocost/cost.hpp"

#include <algorithm>
#include <cmath>

#include "neurocost/error.hpp"

namespace neurocost {

namespace {

struct Field {
  const char* name;
  double CostConstants::*member;
};

constexpr Field kFields[] = {
    {"e_op", &CostConstants::e_op},           {"e_mem", &CostConstants::e_mem},
    {"b_p", &CostConstants::b_p},             {"c_p", &CostConstants::c_p},
    {"c_mem", &CostConstants::c_mem},         {"c_n", &CostConstants::c_n},
    {"c_s", &CostConstants::c_s},             {"e_voltage", &CostConstants::e_voltage},
    {"e_spikegen", &CostConstants::e_spikegen}, {"e_synapse", &CostConstants::e_synapse},
    {"e_spike", &CostConstants::e_spike},     {"ell", &CostConstants::ell},
    {"n_core", &CostConstants::n_core},
};

std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return a / b + (a % b != 0); }

}  // namespace

const std::vector<std::string>& constant_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& f : kFields) v.emplace_back(f.name);
    return v;
  }();
  return names;
}

double& constant_ref(CostConstants& c, const std::string& name) {
  for (const auto& f : kFields)
    if (name == f.name) return c.*(f.member);
  fail(ErrorCode::UnknownKey, "unknown constant '" + name + "'");
}

double constant_value(const CostConstants& c, const std::string& name) {
  return constant_ref(const_cast<CostConstants&>(c), name);
}

CostConstants builtin_preset(const std::string& name) {
  CostConstants c;
  if (name == "unit") return c;
  if (name == "digital-skew") {
    c.e_spike = 100.0;
    c.e_spikegen = 10.0;
    c.e_synapse = 5.0;
    c.e_voltage = 1.0;
    return c;
  }
  fail(ErrorCode::InvalidArgument, "unknown preset '" + name + "'");
}

void check_constants(const CostConstants& c) {
  for (const auto& f : kFields) {
    const double v = c.*(f.member);
    if (!std::isfinite(v)) fail(ErrorCode::InvalidArgument, std::string(f.name) + " is not finite");
    if (v < 0.0) fail(ErrorCode::NegativeConstant, std::string(f.name) + " is negative");
  }
  if (c.n_core < 1.0) fail(ErrorCode::InvalidArgument, "n_core must be >= 1");
}

std::string_view to_string(ArchModel m) {
  switch (m) {
    case ArchModel::cpu_ideal: return "cpu_ideal";
    case ArchModel::gpu: return "gpu";
    case ArchModel::nmc_ideal: return "nmc_ideal";
    case ArchModel::nmc_realized: return "nmc_realized";
  }
  return "cpu_ideal";
}

double breakdown_sum(const Breakdown& b) {
  double total = 0.0;
  for (const auto& term : b) total += term.second;
  return total;
}

TimeBounds conventional_time(const GraphMetrics& m, std::uint64_t p_threads, ArchModel model) {
  if (p_threads == 0) fail(ErrorCode::InvalidArgument, "p_threads must be >= 1");
  const std::uint64_t work = ceil_div(m.t1, p_threads);
  return {std::max(m.t_inf, work), work + m.t_inf, model};
}

TimeBounds nmc_time(const GraphMetrics& m, std::optional<std::uint64_t> n_core) {
  if (!n_core) return {m.t_inf, m.t_inf, ArchModel::nmc_ideal};
  if (*n_core == 0) fail(ErrorCode::InvalidArgument, "n_core must be >= 1");
  return {m.t_inf, *n_core * m.t_inf, ArchModel::nmc_realized};
}

SpaceBounds conventional_space(const CostConstants& c, std::uint64_t p, double program_size,
                               double data_size) {
  if (p == 0) fail(ErrorCode::InvalidArgument, "processor count must be >= 1");
  if (program_size < 0.0 || data_size < 0.0)
    fail(ErrorCode::InvalidArgument, "program and data sizes must be >= 0");
  SpaceBounds s;
  s.breakdown = {{"processors", c.c_p * static_cast<double>(p)},
                 {"program", program_size},
                 {"data", data_size}};
  s.lower = breakdown_sum(s.breakdown);
  s.upper = s.lower;
  s.unbounded = true;
  return s;
}

SpaceBounds mesh_conventional_space(const CostConstants& c, std::uint64_t p, std::uint64_t m_s) {
  if (p == 0) fail(ErrorCode::InvalidArgument, "processor count must be >= 1");
  SpaceBounds s;
  s.breakdown = {{"processors", c.c_p * static_cast<double>(p)},
                 {"mesh_state", c.c_mem * static_cast<double>(m_s)}};
  s.lower = breakdown_sum(s.breakdown);
  s.upper = s.lower;
  s.unbounded = true;
  return s;
}

SpaceBounds nmc_space(const ResourceCount& r, const GraphMetrics& m, const CostConstants& c,
                      bool realized) {
  if (m.t_inf == 0) fail(ErrorCode::InvalidArgument, "t_inf must be >= 1");
  const double per_op_neurons = c.c_n * r.n_bar;
  const double per_op_synapses = c.c_s * r.s_bar;
  const double t1 = static_cast<double>(m.t1);
  double divisor = realized ? c.n_core : 1.0;
  if (!(divisor >= 1.0)) fail(ErrorCode::InvalidArgument, "n_core must be >= 1");

  SpaceBounds s;
  s.breakdown = {{"neurons", per_op_neurons * t1 / divisor},
                 {"synapses", per_op_synapses * t1 / divisor}};
  s.upper = breakdown_sum(s.breakdown);
  s.lower = s.upper / static_cast<double>(m.t_inf);
  return s;
}

EnergyEstimate conventional_energy(const GraphMetrics& m, const CostConstants& c,
                                   bool include_memory) {
  const double t1 = static_cast<double>(m.t1);
  EnergyEstimate e;
  e.breakdown = {{"operations", c.e_op * t1},
                 {"communication", include_memory ? c.e_mem * c.b_p * t1 : 0.0}};
  e.total = breakdown_sum(e.breakdown);
  return e;
}

EnergyEstimate nmc_energy_per_step(const ResourceCount& r, const CostConstants& c, double f_t,
                                   std::uint64_t k, bool refined) {
  if (!(f_t >= 0.0 && f_t <= 1.0))
    fail(ErrorCode::FiringRateOutOfRange, "firing rate " + std::to_string(f_t) + " not in [0, 1]");
  const double n = static_cast<double>(r.n_total);
  const double s = static_cast<double>(r.s_total);
  double voltage = c.e_voltage * n;
  if (refined) voltage *= 1.0 - std::pow(1.0 - f_t, static_cast<double>(k));

  EnergyEstimate e;
  e.breakdown = {{"voltage", voltage},
                 {"spikegen", c.e_spikegen * f_t * n},
                 {"synapse", c.e_synapse * f_t * s},
                 {"spike", c.e_spike * c.ell * f_t * s}};
  e.total = breakdown_sum(e.breakdown);
  return e;
}

double nmc_total_energy(const std::vector<EnergyEstimate>& per_step) {
  double total = 0.0;
  for (const auto& e : per_step) total += e.total;
  return total;
}

MeshReport mesh_cost_report(const MeshReportInput& in, const CostConstants& c) {
  if (in.m_s == 0 || in.m_t == 0 || in.t1s == 0 || in.t_infs == 0 || in.n_mesh == 0 || in.p == 0)
    fail(ErrorCode::InvalidArgument, "mesh counts must be >= 1");
  if (in.k == 0 && in.m_s > 1) fail(ErrorCode::DegenerateMesh, "K = 0 with more than one mesh point");
  for (double f : in.f_series)
    if (!(f >= 0.0 && f <= 1.0)) fail(ErrorCode::FiringRateOutOfRange, "f_series value not in [0, 1]");

  GraphMetrics mesh;
  mesh.t1 = in.m_s * in.m_t * in.t1s;
  mesh.t_inf = in.m_t * in.t_infs;

  ResourceCount r;
  r.n_total = in.m_s * in.n_mesh;
  r.s_total = in.m_s * in.n_mesh * in.k;
  r.n_bar = static_cast<double>(in.n_mesh);
  r.s_bar = static_cast<double>(in.n_mesh * in.k);

  MeshReport rep;
  auto& table = rep.table;
  table.params = {{"m_s", static_cast<double>(in.m_s)},
                  {"m_t", static_cast<double>(in.m_t)},
                  {"k", static_cast<double>(in.k)},
                  {"t1s", static_cast<double>(in.t1s)},
                  {"t_infs", static_cast<double>(in.t_infs)},
                  {"t1_mesh", static_cast<double>(mesh.t1)},
                  {"t_inf_mesh", static_cast<double>(mesh.t_inf)},
                  {"n_total", static_cast<double>(r.n_total)},
                  {"s_total", static_cast<double>(r.s_total)}};

  CostRow conv;
  conv.arch = ArchModel::cpu_ideal;
  conv.time = conventional_time(mesh, in.p);
  conv.space = mesh_conventional_space(c, in.p, in.m_s);
  conv.energy = conventional_energy(mesh, c, in.include_memory);

  // Per-step conventional energy is one temporal layer of work.
  GraphMetrics layer{in.m_s * in.t1s, in.t_infs, {}, 0, 0};
  const double conv_step = conventional_energy(layer, c, in.include_memory).total;

  std::vector<EnergyEstimate> steps;
  steps.reserve(in.m_t);
  const double f_last = in.f_series.empty() ? 0.0 : in.f_series.back();
  for (std::uint64_t t = 0; t < in.m_t; ++t) {
    const double f = t < in.f_series.size() ? in.f_series[t] : f_last;
    steps.push_back(nmc_energy_per_step(r, c, f, in.k, in.refined));
  }

  CostRow nmc;
  nmc.arch = ArchModel::nmc_ideal;
  nmc.time = {mesh.t_inf, mesh.t_inf, ArchModel::nmc_ideal};
  nmc.space.breakdown = {{"neurons", c.c_n * static_cast<double>(in.n_mesh * in.m_s)}};
  nmc.space.lower = nmc.space.upper = breakdown_sum(nmc.space.breakdown);
  Breakdown terms = steps.front().breakdown;
  for (std::size_t t = 1; t < steps.size(); ++t)
    for (std::size_t i = 0; i < terms.size(); ++i) terms[i].second += steps[t].breakdown[i].second;
  nmc.energy.breakdown = terms;
  nmc.energy.total = breakdown_sum(terms);
  table.rows = {conv, nmc};

  rep.conventional_cumulative.resize(in.m_t);
  rep.nmc_cumulative.resize(in.m_t);
  double acc = 0.0;
  for (std::uint64_t t = 0; t < in.m_t; ++t) {
    acc += steps[t].total;
    rep.nmc_cumulative[t] = acc;
    GraphMetrics upto{in.m_s * (t + 1) * in.t1s, (t + 1) * in.t_infs, {}, 0, 0};
    rep.conventional_cumulative[t] = conventional_energy(upto, c, in.include_memory).total;
  }

  if (steps.back().total < conv_step) {
    std::optional<std::uint64_t> star;
    for (std::uint64_t t = in.m_t; t-- > 0;) {
      if (!(rep.nmc_cumulative[t] < rep.conventional_cumulative[t])) break;
      star = t + 1;
    }
    rep.m_t_star = star;
  }
  return rep;
}

ComparisonTable ff_cost_report(std::uint64_t n_i, std::uint64_t n_j, const CostConstants& c,
                               double f_t, std::uint64_t p) {
  if (n_i == 0 || n_j == 0) fail(ErrorCode::ZeroWidth, "layer width must be >= 1");
  if (p == 0) fail(ErrorCode::InvalidArgument, "processor count must be >= 1");

  GraphMetrics conv_m;
  conv_m.t1 = n_i * n_j + 2 * n_j;
  conv_m.t_inf = 3;

  ResourceCount r;
  r.n_total = n_i + n_j;
  r.s_total = n_i * n_j;
  r.n_bar = static_cast<double>(r.n_total) / static_cast<double>(conv_m.t1);
  r.s_bar = static_cast<double>(r.s_total) / static_cast<double>(conv_m.t1);

  ComparisonTable table;
  table.params = {{"n_i", static_cast<double>(n_i)},
                  {"n_j", static_cast<double>(n_j)},
                  {"t1", static_cast<double>(conv_m.t1)},
                  {"t_inf", 3.0},
                  {"n_total", static_cast<double>(r.n_total)},
                  {"s_total", static_cast<double>(r.s_total)}};

  CostRow conv;
  conv.arch = ArchModel::cpu_ideal;
  conv.time = conventional_time(conv_m, p);
  conv.space = conventional_space(c, p, 0.0,
                                  c.c_mem * static_cast<double>(n_i * n_j + n_i + n_j));
  conv.energy = conventional_energy(conv_m, c);

  CostRow nmc;
  nmc.arch = ArchModel::nmc_ideal;
  nmc.time = {3, 3, ArchModel::nmc_ideal};
  nmc.space.breakdown = {{"neurons", c.c_n * static_cast<double>(r.n_total)},
                         {"synapses", c.c_s * static_cast<double>(r.s_total)}};
  nmc.space.lower = nmc.space.upper = breakdown_sum(nmc.space.breakdown);
  nmc.energy = nmc_energy_per_step(r, c, f_t, n_i, false);
  table.rows = {conv, nmc};
  return table;
}

}  // namespace neurocost
