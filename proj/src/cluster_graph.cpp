#include "cgldpc/cluster_graph.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace cgldpc {

int ClusterGraph::edge_between(int a, int b) const {
  if (a > b) std::swap(a, b);
  for (const auto& [nb, eid] : adjacency[a])
    if (nb == b) return eid;
  return -1;
}

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[b] = a;
    return true;
  }
};

std::size_t intersection_size(const std::vector<int>& a, const std::vector<int>& b) {
  std::size_t i = 0, j = 0, n = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j])
      ++i;
    else if (a[i] > b[j])
      ++j;
    else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

}  // namespace

ClusterGraph build_ltrip(const std::vector<std::vector<int>>& clusters) {
  if (clusters.empty()) throw std::invalid_argument("cluster list is empty");
  int num_vars = 0;
  for (const auto& c : clusters) {
    if (c.empty()) throw std::invalid_argument("empty cluster");
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (c[i] < 0) throw std::invalid_argument("negative variable id");
      if (i > 0 && c[i] <= c[i - 1])
        throw std::invalid_argument("cluster variables must be sorted and unique");
      num_vars = std::max(num_vars, c[i] + 1);
    }
  }

  std::vector<std::vector<int>> containing(num_vars);
  for (std::size_t j = 0; j < clusters.size(); ++j)
    for (int v : clusters[j]) containing[v].push_back(int(j));
  for (int v = 0; v < num_vars; ++v)
    if (containing[v].empty())
      throw std::invalid_argument("variable " + std::to_string(v) +
                                  " does not occur in any cluster");

  // sepsets accumulated across variable layers, keyed by (min id, max id)
  std::map<std::pair<int, int>, std::vector<int>> sepsets;

  struct Cand {
    double w;
    int a, b;
  };
  for (int v = 0; v < num_vars; ++v) {
    const auto& members = containing[v];
    if (members.size() < 2) continue;
    std::vector<Cand> cands;
    cands.reserve(members.size() * (members.size() - 1) / 2);
    for (std::size_t i = 0; i < members.size(); ++i)
      for (std::size_t j = i + 1; j < members.size(); ++j) {
        const int a = members[i], b = members[j];
        double w = double(intersection_size(clusters[a], clusters[b]));
        if (sepsets.count({a, b})) w += 0.5;  // reuse edges laid down by earlier layers
        cands.push_back({w, a, b});
      }
    std::sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
      if (x.w != y.w) return x.w > y.w;
      if (x.a != y.a) return x.a < y.a;
      return x.b < y.b;
    });

    // members are few; map cluster ids to dense indices for union-find
    UnionFind uf(int(members.size()));
    auto dense = [&](int id) {
      return int(std::lower_bound(members.begin(), members.end(), id) - members.begin());
    };
    std::size_t chosen = 0;
    for (const Cand& c : cands) {
      if (chosen + 1 == members.size()) break;
      if (uf.unite(dense(c.a), dense(c.b))) {
        sepsets[{c.a, c.b}].push_back(v);
        ++chosen;
      }
    }
  }

  ClusterGraph g;
  g.num_vars = num_vars;
  g.clusters = clusters;
  g.adjacency.resize(clusters.size());
  for (auto& [key, vars] : sepsets) {
    std::sort(vars.begin(), vars.end());
    const int eid = int(g.edges.size());
    g.edges.push_back({key.first, key.second, std::move(vars)});
    g.adjacency[key.first].emplace_back(key.second, eid);
    g.adjacency[key.second].emplace_back(key.first, eid);
  }
  for (auto& adj : g.adjacency) std::sort(adj.begin(), adj.end());
  return g;
}

std::vector<RipViolation> validate_rip(const ClusterGraph& g) {
  std::vector<RipViolation> out;

  // structural sanity: sepsets must be non-empty subsets of both endpoints
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const auto& edge = g.edges[e];
    if (edge.sepset.empty()) {
      out.push_back({-1, "edge " + std::to_string(e) + " has an empty sepset"});
      continue;
    }
    for (int v : edge.sepset) {
      for (int side : {edge.a, edge.b}) {
        const auto& c = g.clusters[side];
        if (!std::binary_search(c.begin(), c.end(), v))
          out.push_back({v, "sepset of edge " + std::to_string(e) + " contains variable " +
                                std::to_string(v) + " absent from cluster " +
                                std::to_string(side)});
      }
    }
  }

  std::vector<std::vector<int>> containing(g.num_vars);
  for (std::size_t j = 0; j < g.clusters.size(); ++j)
    for (int v : g.clusters[j]) containing[v].push_back(int(j));

  for (int v = 0; v < g.num_vars; ++v) {
    const auto& members = containing[v];
    UnionFind uf(int(members.size()));
    auto dense = [&](int id) {
      return int(std::lower_bound(members.begin(), members.end(), id) - members.begin());
    };
    std::size_t carrying = 0;
    bool cycle = false;
    std::pair<int, int> cycle_edge{-1, -1};
    for (const auto& edge : g.edges) {
      if (!std::binary_search(edge.sepset.begin(), edge.sepset.end(), v)) continue;
      ++carrying;
      if (!std::binary_search(members.begin(), members.end(), edge.a) ||
          !std::binary_search(members.begin(), members.end(), edge.b))
        continue;  // already reported as a structural violation above
      if (!uf.unite(dense(edge.a), dense(edge.b)) && !cycle) {
        cycle = true;
        cycle_edge = {edge.a, edge.b};
      }
    }
    if (cycle) {
      out.push_back({v, "variable " + std::to_string(v) + ": edge (" +
                            std::to_string(cycle_edge.first) + "," +
                            std::to_string(cycle_edge.second) +
                            ") closes a cycle in its sepset subgraph"});
      continue;
    }
    if (members.size() >= 2 && carrying != members.size() - 1) {
      // count components for the report
      std::set<int> roots;
      for (std::size_t i = 0; i < members.size(); ++i) roots.insert(uf.find(int(i)));
      out.push_back({v, "variable " + std::to_string(v) + ": sepset subgraph spans " +
                            std::to_string(roots.size()) + " components over " +
                            std::to_string(members.size()) + " clusters (disconnected)"});
    }
  }
  return out;
}

LargeClusterPolicy LargeClusterPolicy::explicit_ids(std::vector<int> v) {
  LargeClusterPolicy p;
  p.kind = Kind::ExplicitIds;
  p.ids = std::move(v);
  return p;
}

LargeClusterPolicy LargeClusterPolicy::min_cardinality_of(int c) {
  LargeClusterPolicy p;
  p.kind = Kind::MinCardinality;
  p.min_cardinality = c;
  return p;
}

std::vector<int> select_large_clusters(const std::vector<std::vector<int>>& clusters,
                                       const LargeClusterPolicy& policy) {
  std::vector<int> out;
  switch (policy.kind) {
    case LargeClusterPolicy::Kind::ExplicitIds: {
      out = policy.ids;
      std::sort(out.begin(), out.end());
      out.erase(std::unique(out.begin(), out.end()), out.end());
      for (int id : out)
        if (id < 0 || id >= int(clusters.size()))
          throw std::invalid_argument("large cluster id out of range: " + std::to_string(id));
      break;
    }
    case LargeClusterPolicy::Kind::MinCardinality: {
      for (std::size_t j = 0; j < clusters.size(); ++j)
        if (int(clusters[j].size()) >= policy.min_cardinality) out.push_back(int(j));
      break;
    }
    case LargeClusterPolicy::Kind::TwoLargestDistinct: {
      std::set<std::size_t, std::greater<>> sizes;
      for (const auto& c : clusters) sizes.insert(c.size());
      std::set<std::size_t> top;
      for (auto it = sizes.begin(); it != sizes.end() && top.size() < 2; ++it) top.insert(*it);
      for (std::size_t j = 0; j < clusters.size(); ++j)
        if (top.count(clusters[j].size())) out.push_back(int(j));
      break;
    }
  }
  if (out.empty()) throw std::invalid_argument("large cluster selection is empty");
  return out;
}

MessageSchedule layered_schedule(const ClusterGraph& g, const std::vector<int>& large_ids) {
  if (large_ids.empty()) throw std::invalid_argument("schedule needs at least one large cluster");
  for (int id : large_ids)
    if (id < 0 || id >= int(g.clusters.size()))
      throw std::invalid_argument("large cluster id out of range: " + std::to_string(id));

  std::set<int> remaining;
  for (std::size_t j = 0; j < g.clusters.size(); ++j) remaining.insert(int(j));

  MessageSchedule ms;
  std::set<int> layer(large_ids.begin(), large_ids.end());
  while (!remaining.empty()) {
    if (layer.empty()) {
      // Disconnected from everything scheduled so far: seed a fresh layer
      // with the largest remaining cluster (lowest id on ties).
      int best = -1;
      std::size_t best_size = 0;
      for (int id : remaining)
        if (g.clusters[id].size() > best_size) {
          best = id;
          best_size = g.clusters[id].size();
        }
      layer.insert(best);
    }
    ms.layers.emplace_back(layer.begin(), layer.end());
    std::set<int> next;
    for (int s : layer) {
      remaining.erase(s);
      for (const auto& [n, eid] : g.adjacency[s]) {
        (void)eid;
        if (!remaining.count(n)) continue;
        ms.ordered_pairs.emplace_back(s, n);
        if (!layer.count(n)) next.insert(n);
      }
    }
    layer = std::move(next);
  }
  ms.first_parity_layer = int(ms.layers.size()) - 1;
  return ms;
}

BitAttachment attach_bits(const ClusterGraph& g, const MessageSchedule& schedule) {
  BitAttachment at;
  at.cluster_of_bit.assign(g.num_vars, -1);
  at.fallback.assign(g.num_vars, 0);

  std::vector<int> layer_of(g.clusters.size(), -1);
  for (std::size_t l = 0; l < schedule.layers.size(); ++l)
    for (int id : schedule.layers[l]) layer_of[id] = int(l);

  std::vector<std::vector<int>> containing(g.num_vars);
  for (std::size_t j = 0; j < g.clusters.size(); ++j)
    for (int v : g.clusters[j]) containing[v].push_back(int(j));

  for (int v = 0; v < g.num_vars; ++v) {
    if (containing[v].empty())
      throw std::runtime_error("bit " + std::to_string(v) + " occurs in no cluster");
    for (int l = schedule.first_parity_layer; l >= 0; --l) {
      int best = -1;
      std::size_t best_size = 0;
      for (int id : containing[v])
        if (layer_of[id] == l && (best < 0 || g.clusters[id].size() < best_size)) {
          best = id;
          best_size = g.clusters[id].size();
        }
      if (best >= 0) {
        at.cluster_of_bit[v] = best;
        at.fallback[v] = (l != schedule.first_parity_layer);
        break;
      }
    }
    if (at.cluster_of_bit[v] < 0)
      throw std::runtime_error("bit " + std::to_string(v) + " is not covered by any layer");
  }
  return at;
}

std::string describe_graph(const ClusterGraph& g, const MessageSchedule& schedule,
                           const BitAttachment& attachment) {
  std::ostringstream os;
  os << "clusters: " << g.clusters.size() << ", edges: " << g.edges.size()
     << ", variables: " << g.num_vars << "\n";
  for (std::size_t j = 0; j < g.clusters.size(); ++j) {
    os << "cluster " << j << " (card " << g.clusters[j].size() << "):";
    for (int v : g.clusters[j]) os << " b" << v;
    os << "\n";
  }
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    os << "edge " << e << ": " << g.edges[e].a << " -- " << g.edges[e].b << " sepset {";
    for (std::size_t i = 0; i < g.edges[e].sepset.size(); ++i)
      os << (i ? " " : "") << "b" << g.edges[e].sepset[i];
    os << "}\n";
  }
  for (std::size_t l = 0; l < schedule.layers.size(); ++l) {
    os << "layer " << l << ":";
    for (int id : schedule.layers[l]) os << " " << id;
    os << "\n";
  }
  os << "schedule pairs:";
  for (const auto& [s, d] : schedule.ordered_pairs) os << " (" << s << "," << d << ")";
  os << "\n";
  for (std::size_t v = 0; v < attachment.cluster_of_bit.size(); ++v) {
    os << "bit b" << v << " -> cluster " << attachment.cluster_of_bit[v];
    if (attachment.fallback[v]) os << " (fallback layer)";
    os << "\n";
  }
  const auto violations = validate_rip(g);
  os << "rip violations: " << violations.size() << "\n";
  for (const auto& viol : violations) os << "  " << viol.detail << "\n";
  return os.str();
}

}  // namespace cgldpc
