#include "neurocost/simd.hpp"

#include <algorithm>
#include <bit>
#include <deque>
#include <fmt/format.h>
#include <fmt/ranges.h>
#include <functional>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "neurocost/error.hpp"

namespace neurocost {

FragmentShape fragment_shape(const ValidatedGraph& g, const std::vector<std::size_t>& nodes) {
  std::unordered_map<std::size_t, std::size_t> local;
  for (std::size_t k = 0; k < nodes.size(); ++k) local.emplace(nodes[k], k);

  FragmentShape f;
  f.ops.reserve(nodes.size());
  f.ext_in.assign(nodes.size(), 0);
  f.ext_out.assign(nodes.size(), 0);
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const std::size_t v = nodes[k];
    f.ops.push_back(g.node(v).op);
    for (std::size_t p : g.preds(v)) {
      auto it = local.find(p);
      if (it == local.end()) ++f.ext_in[k];
      else f.edges.emplace_back(it->second, k);
    }
    for (std::size_t s : g.succs(v))
      if (!local.count(s)) ++f.ext_out[k];
  }
  return f;
}

FragmentShape fragment_shape(const ComputeGraph& fragment) {
  std::unordered_map<std::string, std::size_t> local;
  for (std::size_t k = 0; k < fragment.nodes.size(); ++k) local.emplace(fragment.nodes[k].id, k);
  const std::unordered_set<std::string> outs(fragment.outputs.begin(), fragment.outputs.end());

  FragmentShape f;
  f.ext_in.assign(fragment.nodes.size(), 0);
  f.ext_out.assign(fragment.nodes.size(), 0);
  for (std::size_t k = 0; k < fragment.nodes.size(); ++k) {
    const auto& node = fragment.nodes[k];
    f.ops.push_back(node.op);
    for (const auto& in : node.inputs) {
      auto it = local.find(in);
      if (it == local.end()) ++f.ext_in[k];
      else f.edges.emplace_back(it->second, k);
    }
    if (outs.count(node.id)) ++f.ext_out[k];
  }
  return f;
}

namespace {

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 14695981039346656037ull) {
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string attr(const FragmentShape& f, std::size_t i) {
  return fmt::format("{}:{}/{}/{}", f.ops[i].size(), f.ops[i], f.ext_in[i], f.ext_out[i]);
}

struct Refinement {
  std::vector<std::size_t> colors;
  /// Sorted signature lists from every round, for hashing.
  std::vector<std::string> history;
};

// Colour refinement where each colour id is the rank of its signature, so ids
// are invariant under relabelling.
Refinement refine(const FragmentShape& f) {
  const std::size_t n = f.size();
  std::vector<std::vector<std::size_t>> out(n), in(n);
  for (auto [a, b] : f.edges) {
    out[a].push_back(b);
    in[b].push_back(a);
  }
  std::vector<std::string> sig(n);
  for (std::size_t i = 0; i < n; ++i) sig[i] = attr(f, i);

  Refinement r;
  std::size_t classes = 0;
  for (std::size_t round = 0; round <= n; ++round) {
    std::vector<std::string> sorted = sig;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    r.colors.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i)
      r.colors[i] = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), sig[i]) -
                                             sorted.begin());
    std::vector<std::string> all = sig;
    std::sort(all.begin(), all.end());
    r.history.push_back(fmt::format("{}", fmt::join(all, ";")));
    if (round > 0 && sorted.size() == classes) break;
    classes = sorted.size();

    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::size_t> o, p;
      for (std::size_t j : out[i]) o.push_back(r.colors[j]);
      for (std::size_t j : in[i]) p.push_back(r.colors[j]);
      std::sort(o.begin(), o.end());
      std::sort(p.begin(), p.end());
      sig[i] = fmt::format("{}>{}<{}", r.colors[i], fmt::join(o, ","), fmt::join(p, ","));
    }
  }
  return r;
}

std::string exact_label(const FragmentShape& f) {
  const std::size_t n = f.size();
  const Refinement r = refine(f);
  std::map<std::size_t, std::vector<std::size_t>> by_color;
  for (std::size_t i = 0; i < n; ++i) by_color[r.colors[i]].push_back(i);
  std::vector<std::vector<std::size_t>> classes;
  for (auto& [c, members] : by_color) classes.push_back(members);

  std::vector<int> adj(n * n, 0);
  for (auto [a, b] : f.edges) ++adj[a * n + b];

  std::string best;
  std::vector<std::size_t> order(n), pos(n);
  std::string cur(n * n, '\0');
  std::function<void(std::size_t)> walk = [&](std::size_t k) {
    if (k == classes.size()) {
      std::size_t at = 0;
      for (const auto& cls : classes)
        for (std::size_t v : cls) order[at++] = v;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          cur[i * n + j] = static_cast<char>('0' + adj[order[i] * n + order[j]]);
      if (best.empty() || cur < best) best = cur;
      return;
    }
    auto& cls = classes[k];
    std::sort(cls.begin(), cls.end());
    do {
      walk(k + 1);
    } while (std::next_permutation(cls.begin(), cls.end()));
  };
  walk(0);

  std::string label = fmt::format("x{}|", n);
  for (const auto& cls : classes)
    for (std::size_t v : cls) label += attr(f, v) + "|";
  return label + best;
}

}  // namespace

std::string canonical_label(const FragmentShape& f) {
  if (f.size() > kLabelHardCap)
    fail(ErrorCode::FragmentTooLarge, fmt::format("fragment has {} nodes, cap is {}", f.size(),
                                                  kLabelHardCap));
  if (f.size() <= kExactLabelLimit) return exact_label(f);
  const Refinement r = refine(f);
  std::uint64_t h = fnv1a(fmt::format("{}/{}", f.size(), f.edges.size()));
  for (const auto& round : r.history) h = fnv1a(round, fnv1a("#", h));
  return fmt::format("w{}|{:016x}", f.size(), h);
}

std::string canonical_label(const ComputeGraph& fragment) {
  return canonical_label(fragment_shape(fragment));
}

bool are_isomorphic(const FragmentShape& a, const FragmentShape& b) {
  const std::size_t n = a.size();
  if (n != b.size() || a.edges.size() != b.edges.size()) return false;

  std::vector<int> adj_a(n * n, 0), adj_b(n * n, 0);
  std::vector<std::size_t> in_a(n, 0), out_a(n, 0), in_b(n, 0), out_b(n, 0);
  for (auto [u, v] : a.edges) {
    ++adj_a[u * n + v];
    ++out_a[u];
    ++in_a[v];
  }
  for (auto [u, v] : b.edges) {
    ++adj_b[u * n + v];
    ++out_b[u];
    ++in_b[v];
  }
  auto key = [](const FragmentShape& f, std::size_t i, std::size_t in, std::size_t out) {
    return attr(f, i) + fmt::format("#{}#{}", in, out);
  };
  std::vector<std::string> ka(n), kb(n);
  for (std::size_t i = 0; i < n; ++i) {
    ka[i] = key(a, i, in_a[i], out_a[i]);
    kb[i] = key(b, i, in_b[i], out_b[i]);
  }
  {
    auto sa = ka, sb = kb;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    if (sa != sb) return false;
  }

  // Visit a's nodes so each one (after the first of a component) touches an
  // already mapped node, which keeps the adjacency checks tight.
  std::vector<std::size_t> order;
  std::vector<char> seen(n, 0);
  for (std::size_t s = 0; s < n; ++s) {
    if (seen[s]) continue;
    std::deque<std::size_t> q{s};
    seen[s] = 1;
    while (!q.empty()) {
      std::size_t u = q.front();
      q.pop_front();
      order.push_back(u);
      for (std::size_t v = 0; v < n; ++v) {
        if (!seen[v] && (adj_a[u * n + v] || adj_a[v * n + u])) {
          seen[v] = 1;
          q.push_back(v);
        }
      }
    }
  }

  std::vector<std::size_t> map(n, n);
  std::vector<char> used(n, 0);
  std::function<bool(std::size_t)> place = [&](std::size_t k) {
    if (k == n) return true;
    const std::size_t u = order[k];
    for (std::size_t cand = 0; cand < n; ++cand) {
      if (used[cand] || ka[u] != kb[cand]) continue;
      bool ok = adj_a[u * n + u] == adj_b[cand * n + cand];
      for (std::size_t j = 0; ok && j < k; ++j) {
        const std::size_t w = order[j];
        ok = adj_a[u * n + w] == adj_b[cand * n + map[w]] &&
             adj_a[w * n + u] == adj_b[map[w] * n + cand];
      }
      if (!ok) continue;
      map[u] = cand;
      used[cand] = 1;
      if (place(k + 1)) return true;
      used[cand] = 0;
    }
    return false;
  };
  return place(0);
}

namespace {

std::vector<std::string> ids_of(const ValidatedGraph& g, const std::vector<std::size_t>& nodes) {
  std::vector<std::string> out;
  for (std::size_t v : nodes) out.push_back(g.node(v).id);
  return out;
}

// Groups fragments by label, then splits each group into exact isomorphism
// classes so no family ever holds non-isomorphic members.
std::vector<std::pair<std::string, std::vector<std::size_t>>> group_fragments(
    const ValidatedGraph& g, const std::vector<std::vector<std::size_t>>& frags) {
  std::map<std::string, std::vector<std::size_t>> by_label;
  std::vector<FragmentShape> shapes;
  shapes.reserve(frags.size());
  for (std::size_t i = 0; i < frags.size(); ++i) {
    shapes.push_back(fragment_shape(g, frags[i]));
    by_label[canonical_label(shapes.back())].push_back(i);
  }
  std::vector<std::pair<std::string, std::vector<std::size_t>>> out;
  for (auto& [label, members] : by_label) {
    std::vector<std::vector<std::size_t>> classes;
    for (std::size_t m : members) {
      bool placed = false;
      for (auto& cls : classes) {
        if (are_isomorphic(shapes[cls.front()], shapes[m])) {
          cls.push_back(m);
          placed = true;
          break;
        }
      }
      if (!placed) classes.push_back({m});
    }
    for (std::size_t k = 0; k < classes.size(); ++k)
      out.emplace_back(k == 0 ? label : fmt::format("{}#{}", label, k), std::move(classes[k]));
  }
  return out;
}

template <typename Before>
PartitionResult tile(const ValidatedGraph& g, const std::vector<std::size_t>& order, Before before,
                     std::size_t granularity, std::size_t phase) {
  std::vector<char> assigned(g.size(), 0);
  std::vector<std::vector<std::size_t>> full;
  PartitionResult pr;
  pr.granularity = granularity;
  for (std::size_t i = 0; i < phase && i < order.size(); ++i) {
    assigned[order[i]] = 1;
    pr.residual.push_back(g.node(order[i]).id);
  }
  for (std::size_t seed : order) {
    if (assigned[seed]) continue;
    std::vector<std::size_t> frag{seed};
    assigned[seed] = 1;
    for (std::size_t head = 0; head < frag.size() && frag.size() < granularity; ++head) {
      const std::size_t u = frag[head];
      std::vector<std::size_t> nbrs(g.preds(u).begin(), g.preds(u).end());
      nbrs.insert(nbrs.end(), g.succs(u).begin(), g.succs(u).end());
      std::sort(nbrs.begin(), nbrs.end(), before);
      nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
      for (std::size_t v : nbrs) {
        if (frag.size() == granularity) break;
        if (assigned[v]) continue;
        assigned[v] = 1;
        frag.push_back(v);
      }
    }
    if (frag.size() == granularity) {
      full.push_back(std::move(frag));
    } else {
      for (std::size_t v : frag) pr.residual.push_back(g.node(v).id);
    }
  }

  for (auto& [label, members] : group_fragments(g, full)) {
    Family fam;
    fam.label = label;
    for (std::size_t m : members) fam.members.push_back(ids_of(g, full[m]));
    pr.families.push_back(std::move(fam));
  }
  pr.p_threads = 1;
  for (const auto& fam : pr.families) pr.p_threads = std::max(pr.p_threads, fam.members.size());
  return pr;
}

}  // namespace

PartitionResult partition_isomorphic(const ValidatedGraph& g, std::size_t granularity) {
  if (granularity == 0) fail(ErrorCode::InvalidArgument, "granularity must be >= 1");
  if (granularity > kLabelHardCap)
    fail(ErrorCode::FragmentTooLarge,
         fmt::format("granularity {} exceeds the label cap {}", granularity, kLabelHardCap));

  const auto level = node_levels(g);
  std::vector<std::size_t> order(g.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto before = [&level](std::size_t a, std::size_t b) {
    return level[a] != level[b] ? level[a] < level[b] : a < b;
  };
  std::sort(order.begin(), order.end(), before);

  // Boundary fragments carry different external-port attributes, so the tiling
  // is retried with the first few seeds held back and the best phase kept.
  PartitionResult best;
  const std::size_t phases = std::max<std::size_t>(1, std::min(granularity, g.size()));
  for (std::size_t phase = 0; phase < phases; ++phase) {
    PartitionResult pr = tile(g, order, before, granularity, phase);
    if (phase == 0 || pr.p_threads > best.p_threads) best = std::move(pr);
  }
  return best;
}

PartitionResult brute_force_partition(const ValidatedGraph& g, std::size_t granularity) {
  const std::size_t n = g.size();
  if (n > kOracleLimit)
    fail(ErrorCode::GraphTooLargeForOracle,
         fmt::format("graph has {} nodes, oracle limit is {}", n, kOracleLimit));
  if (granularity == 0) fail(ErrorCode::InvalidArgument, "granularity must be >= 1");

  std::vector<std::uint32_t> nbr(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t p : g.preds(v)) nbr[v] |= 1u << p;
    for (std::size_t s : g.succs(v)) nbr[v] |= 1u << s;
  }
  auto connected = [&](std::uint32_t mask) {
    std::uint32_t reach = mask & (~mask + 1);
    for (;;) {
      std::uint32_t next = reach;
      for (std::uint32_t m = reach; m; m &= m - 1) next |= nbr[std::countr_zero(m)] & mask;
      if (next == reach) return reach == mask;
      reach = next;
    }
  };

  std::vector<std::vector<std::size_t>> frags;
  std::vector<std::uint32_t> masks;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) != granularity || !connected(mask)) continue;
    std::vector<std::size_t> nodes;
    for (std::uint32_t m = mask; m; m &= m - 1) nodes.push_back(std::countr_zero(m));
    frags.push_back(std::move(nodes));
    masks.push_back(mask);
  }

  PartitionResult pr;
  pr.granularity = granularity;
  std::uint32_t best_cover = 0;
  std::vector<std::uint32_t> best_pick;
  std::string best_label;
  const std::uint32_t all = (n == 32) ? ~0u : ((1u << n) - 1);

  for (auto& [label, members] : group_fragments(g, frags)) {
    std::vector<int> memo(std::size_t{1} << n, -1);
    std::vector<std::uint32_t> choice(std::size_t{1} << n, 0);
    std::function<int(std::uint32_t)> best = [&](std::uint32_t used) -> int {
      if (used == all) return 0;
      int& slot = memo[used];
      if (slot >= 0) return slot;
      const std::uint32_t e = ~used & all & (~(~used & all) + 1);
      int value = best(used | e);
      std::uint32_t pick = 0;
      for (std::size_t m : members) {
        const std::uint32_t s = masks[m];
        if ((s & e) && !(s & used)) {
          const int v = 1 + best(used | s);
          if (v > value) {
            value = v;
            pick = s;
          }
        }
      }
      choice[used] = pick;
      memo[used] = value;
      return value;
    };
    const int count = best(0);
    if (static_cast<std::size_t>(count) > best_pick.size()) {
      best_pick.clear();
      best_cover = 0;
      std::uint32_t used = 0;
      while (used != all) {
        const std::uint32_t e = ~used & all & (~(~used & all) + 1);
        const std::uint32_t pick = choice[used];
        if (pick) {
          best_pick.push_back(pick);
          best_cover |= pick;
          used |= pick;
        } else {
          used |= e;
        }
      }
      best_label = label;
    }
  }

  if (!best_pick.empty()) {
    Family fam;
    fam.label = best_label;
    for (std::uint32_t mask : best_pick) {
      std::vector<std::size_t> nodes;
      for (std::uint32_t m = mask; m; m &= m - 1) nodes.push_back(std::countr_zero(m));
      fam.members.push_back(ids_of(g, nodes));
    }
    pr.families.push_back(std::move(fam));
  }
  for (std::size_t v = 0; v < n; ++v)
    if (!(best_cover >> v & 1u)) pr.residual.push_back(g.node(v).id);
  pr.p_threads = std::max<std::size_t>(1, best_pick.size());
  return pr;
}

double thread_efficiency(const PartitionResult& pr, std::size_t p) {
  if (p == 0) fail(ErrorCode::InvalidArgument, "processor count must be >= 1");
  return static_cast<double>(std::min(pr.p_threads, p)) / static_cast<double>(p);
}

bool verify_families(const ValidatedGraph& g, const PartitionResult& pr) {
  std::unordered_set<std::string> seen;
  std::size_t covered = 0;
  for (const auto& fam : pr.families) {
    std::vector<FragmentShape> shapes;
    for (const auto& member : fam.members) {
      std::vector<std::size_t> nodes;
      for (const auto& id : member) {
        if (!g.contains(id) || !seen.insert(id).second) return false;
        nodes.push_back(g.index_of(id));
      }
      covered += member.size();
      shapes.push_back(fragment_shape(g, nodes));
    }
    for (std::size_t i = 1; i < shapes.size(); ++i)
      if (!are_isomorphic(shapes[0], shapes[i])) return false;
  }
  for (const auto& id : pr.residual)
    if (!g.contains(id) || !seen.insert(id).second) return false;
  return covered + pr.residual.size() == g.size();
}

}  // namespace neurocost
