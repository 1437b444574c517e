#include "neurocost/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <future>
#include <json.hpp>
#include <random>
#include <set>

#include "neurocost/error.hpp"
#include "neurocost/workloads.hpp"

namespace neurocost {

std::optional<RegressionResult> fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) return std::nullopt;
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) return std::nullopt;
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
    sx += lx.back();
    sy += ly.back();
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0) return std::nullopt;
  RegressionResult r;
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  r.r_squared = syy == 0.0 ? 1.0 : std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
  return r;
}

namespace {

const std::set<std::string>& workload_keys(SweepWorkload w) {
  static const std::set<std::string> mesh = {"m_s", "k", "alpha", "v_thresh", "warmup", "max_steps"};
  static const std::set<std::string> ff = {"n", "n_i", "n_j", "rate", "steps"};
  static const std::set<std::string> random = {"n", "density"};
  switch (w) {
    case SweepWorkload::mesh: return mesh;
    case SweepWorkload::ff: return ff;
    case SweepWorkload::random: return random;
  }
  return mesh;
}

double get(const std::map<std::string, double>& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

std::size_t count_param(const std::map<std::string, double>& p, const std::string& key, double fallback) {
  const double v = get(p, key, fallback);
  if (!(v >= 0.0) || v != std::floor(v) || v > 1e9)
    fail(ErrorCode::InvalidArgument, fmt::format("{} must be a non-negative integer", key));
  return static_cast<std::size_t>(v);
}

SweepRow run_point(const SweepSpec& spec, const std::map<std::string, double>& p, std::uint64_t seed) {
  SimOptions opts;
  opts.constants = spec.constants;
  SweepRow row;
  switch (spec.workload) {
    case SweepWorkload::mesh: {
      MeshSpec m;
      m.m_s = count_param(p, "m_s", 64);
      m.k = count_param(p, "k", 4);
      m.alpha = get(p, "alpha", 0.5);
      m.v_thresh = get(p, "v_thresh", 0.01);
      const std::size_t warmup = std::max<std::size_t>(1, count_param(p, "warmup", 5));
      m.m_t = count_param(p, "max_steps", 1000);
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      m.init.resize(m.m_s);
      for (auto& v : m.init) v = u(rng);
      const auto w = gen_mesh(m);
      const auto tr = run_mesh(w, m.m_t, opts);
      const std::size_t upto = std::min(warmup, tr.records.size());
      double e = 0.0, f = 0.0;
      for (std::size_t t = 0; t < upto; ++t) {
        e += tr.records[t].e_t;
        f += tr.f_series[t];
      }
      row.metric = e / static_cast<double>(upto);
      row.mean_f = f / static_cast<double>(upto);
      row.e_n = tr.e_n;
      row.steps = static_cast<double>(tr.records.size());
      break;
    }
    case SweepWorkload::ff: {
      std::size_t n_i = count_param(p, "n_i", 8), n_j = count_param(p, "n_j", 8);
      if (p.count("n")) n_i = n_j = count_param(p, "n", 8);
      const auto spec_ff =
          default_ff_spec(n_i, n_j, get(p, "rate", 0.5), count_param(p, "steps", 8), seed);
      const auto tr = run_ff_presentation(spec_ff, opts);
      double f = 0.0;
      for (double v : tr.f_series) f += v;
      row.metric = tr.e_n;
      row.e_n = tr.e_n;
      row.mean_f = tr.f_series.empty() ? 0.0 : f / static_cast<double>(tr.f_series.size());
      row.steps = static_cast<double>(tr.records.size());
      break;
    }
    case SweepWorkload::random: {
      const auto g = validate_graph(gen_random_dag(count_param(p, "n", 50), get(p, "density", 0.1),
                                                   {"add", "mul", "sub"}, seed));
      const auto m = compute_metrics(g);
      row.metric = conventional_energy(m, spec.constants).total;
      row.e_n = row.metric;
      row.steps = static_cast<double>(m.t_inf);
      break;
    }
  }
  return row;
}

}  // namespace

SweepSpec parse_sweep_spec(std::string_view text) {
  using json = nlohmann::ordered_json;
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    fail(ErrorCode::SyntaxError, fmt::format("byte {}: invalid JSON", e.byte));
  }
  if (!doc.is_object()) fail(ErrorCode::SchemaError, "$: expected an object");
  SweepSpec s;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string& key = it.key();
    const json& v = it.value();
    try {
      if (key == "workload") {
        const auto w = v.get<std::string>();
        if (w == "mesh") s.workload = SweepWorkload::mesh;
        else if (w == "ff") s.workload = SweepWorkload::ff;
        else if (w == "random") s.workload = SweepWorkload::random;
        else fail(ErrorCode::SchemaError, "$.workload: expected mesh, ff or random");
      } else if (key == "parameter") {
        s.parameter = v.get<std::string>();
      } else if (key == "values") {
        s.values = v.get<std::vector<double>>();
      } else if (key == "fixed") {
        s.fixed = v.get<std::map<std::string, double>>();
      } else if (key == "preset") {
        s.preset = v.get<std::string>();
      } else if (key == "repetitions") {
        s.repetitions = v.get<std::uint64_t>();
      } else if (key == "seed") {
        s.seed = v.get<std::uint64_t>();
      } else if (key == "output") {
        s.output_path = v.get<std::string>();
      } else {
        fail(ErrorCode::SchemaError, "$." + key + ": unknown field");
      }
    } catch (const json::exception&) {
      fail(ErrorCode::SchemaError, "$." + key + ": wrong type");
    }
  }
  s.constants = load_preset(s.preset);
  return s;
}

SweepResult run_sweep(const SweepSpec& spec) {
  if (spec.values.size() < 2) fail(ErrorCode::InvalidArgument, "a sweep needs at least two values");
  if (spec.repetitions == 0) fail(ErrorCode::InvalidArgument, "repetitions must be >= 1");
  const auto& keys = workload_keys(spec.workload);
  if (!keys.count(spec.parameter))
    fail(ErrorCode::UnknownKey, "cannot sweep '" + spec.parameter + "' for this workload");
  SweepSpec resolved = spec;
  std::map<std::string, double> params;
  for (const auto& [k, v] : spec.fixed) {
    if (keys.count(k)) {
      params[k] = v;
    } else {
      if (v < 0.0) fail(ErrorCode::NegativeConstant, k + " is negative");
      constant_ref(resolved.constants, k) = v;
    }
  }
  check_constants(resolved.constants);

  std::vector<double> values = spec.values;
  std::sort(values.begin(), values.end());
  if (std::adjacent_find(values.begin(), values.end()) != values.end())
    fail(ErrorCode::InvalidArgument, "swept values must be distinct");

  std::vector<std::vector<std::future<SweepRow>>> jobs(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto p = params;
    p[spec.parameter] = values[i];
    for (std::uint64_t r = 0; r < spec.repetitions; ++r)
      jobs[i].push_back(std::async(std::launch::async, run_point, std::cref(resolved), p,
                                   spec.seed + r));
  }

  SweepResult out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    SweepRow avg;
    avg.value = values[i];
    for (auto& f : jobs[i]) {
      const SweepRow r = f.get();
      avg.metric += r.metric;
      avg.e_n += r.e_n;
      avg.steps += r.steps;
      avg.mean_f += r.mean_f;
    }
    const auto reps = static_cast<double>(spec.repetitions);
    avg.metric /= reps;
    avg.e_n /= reps;
    avg.steps /= reps;
    avg.mean_f /= reps;
    out.rows.push_back(avg);
  }

  std::vector<double> x, y;
  for (const auto& r : out.rows) {
    x.push_back(r.value);
    y.push_back(r.metric);
  }
  out.regression = fit_loglog(x, y);
  if (!out.regression) out.note = "regression skipped: a swept value or measured energy is not positive";
  return out;
}

CsvTable sweep_table(const SweepResult& r) {
  CsvTable t;
  t.header = {"value", "metric", "e_n", "steps", "mean_f"};
  for (const auto& row : r.rows)
    t.rows.push_back({format_number(row.value), format_number(row.metric), format_number(row.e_n),
                      format_number(row.steps), format_number(row.mean_f)});
  return t;
}

}  // namespace neurocost
