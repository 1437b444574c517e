#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <map>

#include "neurocost/error.hpp"
#include "neurocost/graph.hpp"
#include "neurocost/workloads.hpp"

using namespace neurocost;

namespace {

ComputeGraph footnote() {
  return {{{"a", "sub", {}, ""}, {"b", "sub", {}, ""}, {"c", "mul", {"a", "b"}, ""}, {"d", "pow", {"c"}, ""}},
          {},
          {"d"}};
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::IoError;
}

// longest path in nodes, by plain memoised recursion over ids
std::uint64_t depth_oracle(const ComputeGraph& g) {
  std::map<std::string, const OpNode*> by_id;
  for (const auto& n : g.nodes) by_id[n.id] = &n;
  std::map<std::string, std::uint64_t> memo;
  std::function<std::uint64_t(const std::string&)> d = [&](const std::string& id) -> std::uint64_t {
    if (auto it = memo.find(id); it != memo.end()) return it->second;
    std::uint64_t best = 0;
    for (const auto& in : by_id.at(id)->inputs) best = std::max(best, d(in));
    return memo[id] = best + 1;
  };
  std::uint64_t out = 0;
  for (const auto& n : g.nodes) out = std::max(out, d(n.id));
  return out;
}

// exhaustive optimal makespan for tiny graphs: BFS over completed-sets
std::uint64_t optimal_makespan(const ValidatedGraph& g, std::size_t p) {
  const std::size_t n = g.size();
  std::vector<std::uint32_t> need(n, 0);
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t u : g.preds(v)) need[v] |= 1u << u;
  const std::uint32_t all = (1u << n) - 1;
  std::vector<std::uint32_t> frontier{0};
  std::vector<char> seen(all + 1, 0);
  seen[0] = 1;
  for (std::uint64_t steps = 0;; ++steps) {
    std::vector<std::uint32_t> next;
    for (std::uint32_t done : frontier) {
      if (done == all) return steps;
      std::uint32_t ready = 0;
      for (std::size_t v = 0; v < n; ++v)
        if (!(done >> v & 1) && (need[v] & done) == need[v]) ready |= 1u << v;
      for (std::uint32_t sub = ready; sub; sub = (sub - 1) & ready) {
        if (static_cast<std::size_t>(__builtin_popcount(sub)) > p) continue;
        const std::uint32_t nd = done | sub;
        if (!seen[nd]) {
          seen[nd] = 1;
          next.push_back(nd);
        }
      }
    }
    frontier = std::move(next);
  }
}

}  // namespace

TEST(Validate, FootnoteTopoOrder) {
  const auto g = validate_graph(footnote());
  std::vector<std::string> ids;
  for (auto i : g.topo_order()) ids.push_back(g.node(i).id);
  EXPECT_EQ(ids, (std::vector<std::string>{"a", "b", "c", "d"}));
}

TEST(Validate, SingleNode) {
  const auto g = validate_graph({{{"x", "add", {}, ""}}, {}, {}});
  EXPECT_EQ(g.size(), 1u);
}

TEST(Validate, Errors) {
  EXPECT_EQ(code_of([] { validate_graph({{{"x", "add", {"x"}, ""}}, {}, {}}); }), ErrorCode::CycleDetected);
  EXPECT_EQ(code_of([] { validate_graph({{{"x", "add", {"y"}, ""}, {"y", "add", {"x"}, ""}}, {}, {}}); }),
            ErrorCode::CycleDetected);
  EXPECT_EQ(code_of([] { validate_graph({{{"x", "add", {"q"}, ""}}, {}, {}}); }), ErrorCode::DanglingReference);
  EXPECT_EQ(code_of([] { validate_graph({}); }), ErrorCode::EmptyGraph);
  EXPECT_EQ(code_of([] { validate_graph({{{"x", "add", {}, ""}, {"x", "mul", {}, ""}}, {}, {}}); }),
            ErrorCode::DuplicateId);
}

TEST(Metrics, Footnote) {
  const auto m = compute_metrics(validate_graph(footnote()));
  EXPECT_EQ(m.t1, 4u);
  EXPECT_EQ(m.t_inf, 3u);
  EXPECT_EQ(m.level_widths, (std::vector<std::uint64_t>{2, 1, 1}));
  EXPECT_EQ(m.max_fan_in, 2u);
}

TEST(Metrics, ExpandedExponent) {
  ComputeGraph g{{{"a", "sub", {}, ""},
                  {"b", "sub", {}, ""},
                  {"c", "mul", {"a", "b"}, ""},
                  {"c2", "mul", {"c", "c"}, ""},
                  {"c3", "mul", {"c2", "c"}, ""}},
                 {},
                 {"c3"}};
  const auto m = compute_metrics(validate_graph(g));
  EXPECT_EQ(m.t1, 5u);
  EXPECT_EQ(m.t_inf, 4u);
}

TEST(Metrics, SingleNode) {
  const auto m = compute_metrics(validate_graph({{{"x", "add", {}, ""}}, {}, {}}));
  EXPECT_EQ(m.t1, 1u);
  EXPECT_EQ(m.t_inf, 1u);
  EXPECT_EQ(m.level_widths, (std::vector<std::uint64_t>{1}));
}

TEST(Schedule, Footnote) {
  const auto g = validate_graph(footnote());
  EXPECT_EQ(list_schedule(g, 1).t_p, 4u);
  EXPECT_EQ(list_schedule(g, 2).t_p, 3u);
  EXPECT_EQ(list_schedule(g, 1000).t_p, 3u);
  EXPECT_EQ(optimal_makespan(g, 2), 3u);
  EXPECT_EQ(optimal_makespan(g, 1), 4u);
}

TEST(Schedule, AssignmentRespectsDependenciesAndCapacity) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto g = validate_graph(gen_random_dag(40, 0.15, {"add", "mul"}, seed));
    for (std::size_t p : {1u, 3u, 8u}) {
      const auto s = list_schedule(g, p);
      std::map<std::uint64_t, std::size_t> per_step;
      for (std::size_t v = 0; v < g.size(); ++v) {
        ++per_step[s.assignment[v].step];
        EXPECT_LT(s.assignment[v].processor, p);
        EXPECT_LT(s.assignment[v].step, s.t_p);
        for (std::size_t u : g.preds(v)) EXPECT_LT(s.assignment[u].step, s.assignment[v].step);
      }
      for (const auto& [step, count] : per_step) EXPECT_LE(count, p);
    }
  }
}

TEST(Property, BrentSandwichAndMonotonicity) {
  for (std::uint64_t seed = 0; seed < 120; ++seed) {
    const std::size_t n = 2 + seed % 150;
    const double density = 0.02 + 0.3 * static_cast<double>(seed % 7) / 7.0;
    const auto g = validate_graph(gen_random_dag(n, density, {"add", "mul", "sub"}, seed));
    const auto m = compute_metrics(g);
    std::uint64_t prev = UINT64_MAX;
    for (std::size_t p : {1u, 2u, 4u, 8u, 16u, 1u << 20}) {
      const std::uint64_t ceil = (m.t1 + p - 1) / p;
      const auto tp = list_schedule(g, p).t_p;
      EXPECT_GE(tp, std::max<std::uint64_t>(m.t_inf, ceil)) << "seed " << seed << " p " << p;
      EXPECT_LE(tp, ceil + m.t_inf) << "seed " << seed << " p " << p;
      EXPECT_LE(tp, prev);
      prev = tp;
    }
  }
}

TEST(Property, LevelDecomposition) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto raw = gen_random_dag(60, 0.1, {"add", "mul"}, seed);
    const auto g = validate_graph(raw);
    const auto m = compute_metrics(g);
    std::uint64_t sum = 0;
    for (auto w : m.level_widths) sum += w;
    EXPECT_EQ(sum, m.t1);
    EXPECT_EQ(m.t_inf, depth_oracle(raw));
    EXPECT_LE(m.t_inf, m.t1);
    const auto level = node_levels(g);
    for (std::size_t v = 0; v < g.size(); ++v)
      for (std::size_t u : g.preds(v)) EXPECT_LT(level[u], level[v]);
  }
}

TEST(Expand, ClosedFormProducts) {
  // template with t1 = 3, t_inf = 2
  ComputeGraph tmpl{{{"in", "load", {}, ""}, {"k", "load", {}, ""}, {"out", "add", {"in", "k"}, ""}},
                    {"in"},
                    {"out"}};
  const auto tm = compute_metrics(validate_graph(tmpl));
  ASSERT_EQ(tm.t1, 3u);
  ASSERT_EQ(tm.t_inf, 2u);
  const auto big = expand_template(tmpl, 4, 5, CouplingRule::ring(4, 2));
  const auto m = compute_metrics(validate_graph(big));
  EXPECT_EQ(m.t1, 60u);
  EXPECT_EQ(m.t_inf, 10u);
  EXPECT_EQ(m.t_inf, depth_oracle(big));
  EXPECT_EQ(big.nodes.size(), 4u * 5u * tm.t1);
}

TEST(Expand, Identity) {
  const auto g = expand_template(footnote(), 1, 1, CouplingRule{{{}}});
  const auto a = compute_metrics(validate_graph(g));
  const auto b = compute_metrics(validate_graph(footnote()));
  EXPECT_EQ(a.t1, b.t1);
  EXPECT_EQ(a.t_inf, b.t_inf);
  EXPECT_EQ(a.level_widths, b.level_widths);
}

TEST(Expand, BadCoupling) {
  ComputeGraph tmpl{{{"in", "load", {}, ""}, {"out", "add", {"in"}, ""}}, {"in"}, {"out"}};
  CouplingRule bad{{{9}, {0}, {1}, {2}}};
  EXPECT_EQ(code_of([&] { expand_template(tmpl, 4, 2, bad); }), ErrorCode::StitchingMismatch);
}

TEST(Coupling, RingNeighbors) {
  const auto r = CouplingRule::ring(6, 2);
  EXPECT_EQ(r.neighbors[0], (std::vector<std::size_t>{1, 5}));
  const auto r4 = CouplingRule::ring(6, 4);
  for (const auto& n : r4.neighbors) EXPECT_EQ(n.size(), 4u);
}
