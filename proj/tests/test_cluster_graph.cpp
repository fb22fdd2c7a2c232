#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "cgldpc/cluster_graph.hpp"
#include "cgldpc/gf2.hpp"
#include "cgldpc/rng.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace cgldpc;

namespace {

std::vector<int> sepset_between(const ClusterGraph& g, int a, int b) {
  const int e = g.edge_between(a, b);
  REQUIRE(e >= 0);
  return g.edges[std::size_t(e)].sepset;
}

}  // namespace

TEST_CASE("two overlapping clusters link through their shared variable") {
  const auto g = build_ltrip({{0, 1}, {1, 2}});
  REQUIRE(g.edges.size() == 1);
  CHECK(g.edges[0].a == 0);
  CHECK(g.edges[0].b == 1);
  CHECK(g.edges[0].sepset == std::vector<int>{1});
  CHECK(validate_rip(g).empty());
  CHECK(g.edge_between(0, 1) == 0);
  CHECK(g.edge_between(1, 0) == 0);
}

TEST_CASE("worked (16,8) example: structure, sepsets, schedule, attachment") {
  const auto h = builtin_16_8();
  const auto g = build_ltrip(h);
  REQUIRE(g.clusters.size() == 8);
  CHECK(g.num_vars == 16);
  CHECK(g.edges.size() == 12);
  CHECK(g.clusters[0].size() == 7);
  CHECK(g.clusters[3].size() == 6);

  CHECK(sepset_between(g, 0, 2) == std::vector<int>{3, 10});
  CHECK(sepset_between(g, 0, 3) == std::vector<int>{7});
  CHECK(sepset_between(g, 0, 5) == std::vector<int>{1, 8});
  CHECK(sepset_between(g, 0, 6) == std::vector<int>{2, 6, 8});
  CHECK(sepset_between(g, 0, 7) == std::vector<int>{1, 7});
  CHECK(sepset_between(g, 1, 3) == std::vector<int>{0, 4, 11});
  CHECK(sepset_between(g, 1, 4) == std::vector<int>{9});
  CHECK(sepset_between(g, 1, 5) == std::vector<int>{0, 4});
  CHECK(sepset_between(g, 1, 7) == std::vector<int>{9});
  CHECK(sepset_between(g, 2, 4) == std::vector<int>{3, 12});
  CHECK(sepset_between(g, 3, 4) == std::vector<int>{5});
  CHECK(sepset_between(g, 3, 6) == std::vector<int>{5, 6});
  CHECK(g.edge_between(0, 1) == -1);

  CHECK(validate_rip(g).empty());

  const auto large = select_large_clusters(g.clusters);
  CHECK(large == std::vector<int>{0, 3});

  const auto sched = layered_schedule(g, large);
  REQUIRE(sched.layers.size() == 2);
  CHECK(sched.layers[0] == std::vector<int>{0, 3});
  CHECK(sched.layers[1] == std::vector<int>{1, 2, 4, 5, 6, 7});
  CHECK(sched.first_parity_layer == 1);
  const std::vector<std::pair<int, int>> want_pairs = {
      {0, 2}, {0, 3}, {0, 5}, {0, 6}, {0, 7}, {3, 1},
      {3, 4}, {3, 6}, {1, 4}, {1, 5}, {1, 7}, {2, 4}};
  CHECK(sched.ordered_pairs == want_pairs);

  const auto att = attach_bits(g, sched);
  const std::vector<int> want_att = {1, 7, 6, 2, 1, 4, 6, 7, 5, 1, 2, 1, 2, 5, 6, 7};
  CHECK(att.cluster_of_bit == want_att);
  for (std::uint8_t f : att.fallback) CHECK(f == 0);
  // No observation evidence enters through the two large clusters.
  for (int c : att.cluster_of_bit) {
    CHECK(c != 0);
    CHECK(c != 3);
  }

  const auto text = describe_graph(g, sched, att);
  CHECK(text.find("clusters: 8") != std::string::npos);
  CHECK(text.find("rip violations: 0") != std::string::npos);
}

TEST_CASE("every edge sepset is a subset of both endpoint clusters") {
  SplitMix64 rng(31);
  for (int t = 0; t < 30; ++t) {
    const int n = 4 + int(rng.below(20));
    const int m = 2 + int(rng.below(10));
    const auto clusters = testutil::random_clusters(rng, n, m);
    const auto g = build_ltrip(clusters);
    for (const auto& e : g.edges) {
      CHECK_FALSE(e.sepset.empty());
      for (int v : e.sepset) {
        CHECK(std::binary_search(g.clusters[std::size_t(e.a)].begin(),
                                 g.clusters[std::size_t(e.a)].end(), v));
        CHECK(std::binary_search(g.clusters[std::size_t(e.b)].begin(),
                                 g.clusters[std::size_t(e.b)].end(), v));
      }
    }
  }
}

TEST_CASE("per-variable sepset subgraphs are spanning trees (random property)") {
  SplitMix64 rng(37);
  for (int t = 0; t < 200; ++t) {
    const int n = 4 + int(rng.below(21));
    const int m = 2 + int(rng.below(11));
    const auto clusters = testutil::random_clusters(rng, n, m);
    const auto g = build_ltrip(clusters);
    REQUIRE(validate_rip(g).empty());
    // Tree edge-count identity: edges carrying v == clusters containing v - 1.
    for (int v = 0; v < n; ++v) {
      std::size_t in_clusters = 0;
      for (const auto& c : g.clusters)
        if (std::binary_search(c.begin(), c.end(), v)) ++in_clusters;
      std::size_t carrying = 0;
      for (const auto& e : g.edges)
        if (std::binary_search(e.sepset.begin(), e.sepset.end(), v)) ++carrying;
      CHECK(carrying + 1 == in_clusters);
    }
  }
}

TEST_CASE("validate_rip flags an injected cycle") {
  const auto g = testutil::manual_graph(
      4, {{0, 1}, {1, 2}, {1, 3}},
      {{0, 1, {1}}, {0, 2, {1}}, {1, 2, {1}}});
  const auto v = validate_rip(g);
  REQUIRE(v.size() == 1);
  CHECK(v[0].var == 1);
  CHECK(v[0].detail.find("closes a cycle") != std::string::npos);
}

TEST_CASE("validate_rip flags a disconnected sepset subgraph") {
  const auto g = testutil::manual_graph(
      4, {{0, 1}, {1, 2}, {1, 3}},
      {{0, 1, {1}}});
  const auto v = validate_rip(g);
  REQUIRE(v.size() == 1);
  CHECK(v[0].var == 1);
  CHECK(v[0].detail.find("disconnected") != std::string::npos);
}

TEST_CASE("validate_rip flags sepset variables missing from an endpoint") {
  const auto g = testutil::manual_graph(
      3, {{0, 1}, {1, 2}},
      {{0, 1, {0, 1}}});  // 0 is not in cluster 1
  const auto v = validate_rip(g);
  REQUIRE_FALSE(v.empty());
  CHECK(v[0].var == 0);
  CHECK(v[0].detail.find("absent from cluster") != std::string::npos);
}

TEST_CASE("large-cluster selection policies") {
  const auto h = builtin_16_8();
  const auto g = build_ltrip(h);
  CHECK(select_large_clusters(g.clusters) == std::vector<int>{0, 3});
  CHECK(select_large_clusters(g.clusters, LargeClusterPolicy::explicit_ids({5})) ==
        std::vector<int>{5});
  CHECK(select_large_clusters(g.clusters, LargeClusterPolicy::min_cardinality_of(5)) ==
        std::vector<int>{0, 3, 5, 6});

  // Equal-cardinality graphs: the default picks the two distinct largest
  // cardinalities; with all clusters the same size everything qualifies.
  const std::vector<std::vector<int>> chain = {{0, 1}, {1, 2}, {2, 3}};
  const auto all = select_large_clusters(chain);
  CHECK(all == std::vector<int>{0, 1, 2});

  CHECK_THROWS(select_large_clusters(chain, LargeClusterPolicy::explicit_ids({7})));
  CHECK_THROWS(select_large_clusters(chain, LargeClusterPolicy::explicit_ids({})));
}

TEST_CASE("layered schedule on a path graph walks outward then is replayed") {
  // Path 0-1-2 with root 0: discovery order (0,1) then (1,2).
  const auto g = build_ltrip({{0, 1}, {1, 2}, {2, 3}});
  const auto sched = layered_schedule(g, {0});
  const std::vector<std::pair<int, int>> want = {{0, 1}, {1, 2}};
  CHECK(sched.ordered_pairs == want);
  REQUIRE(sched.layers.size() == 3);
  CHECK(sched.layers[0] == std::vector<int>{0});
  CHECK(sched.layers[1] == std::vector<int>{1});
  CHECK(sched.layers[2] == std::vector<int>{2});
  CHECK(sched.first_parity_layer == 2);
}

TEST_CASE("layered schedule covers every edge exactly once on random graphs") {
  SplitMix64 rng(41);
  for (int t = 0; t < 50; ++t) {
    const int n = 5 + int(rng.below(18));
    const int m = 3 + int(rng.below(9));
    const auto clusters = testutil::random_clusters(rng, n, m);
    const auto g = build_ltrip(clusters);
    const auto large = select_large_clusters(g.clusters);
    const auto sched = layered_schedule(g, large);

    std::set<std::pair<int, int>> seen;
    for (auto [a, b] : sched.ordered_pairs) {
      CHECK(g.edge_between(a, b) >= 0);
      const auto key = std::minmax(a, b);
      CHECK_FALSE(seen.count({key.first, key.second}));
      seen.insert({key.first, key.second});
    }
    CHECK(seen.size() == g.edges.size());

    // Layers partition the clusters.
    std::set<int> in_layers;
    for (const auto& layer : sched.layers)
      for (int c : layer) {
        CHECK_FALSE(in_layers.count(c));
        in_layers.insert(c);
      }
    CHECK(in_layers.size() == g.clusters.size());
  }
}

TEST_CASE("bit attachment prefers the smallest outer cluster and falls back") {
  // Cardinalities 5/4/2/2: the large set is {0, 1}; bit 0 lives only in the
  // large clusters, so it must fall back inward.
  const std::vector<std::vector<int>> clusters = {
      {0, 1, 2, 3, 4}, {0, 4, 5, 6}, {2, 5}, {3, 6}};
  const auto g = build_ltrip(clusters);
  const auto large = select_large_clusters(g.clusters);
  CHECK(large == std::vector<int>{0, 1});
  const auto sched = layered_schedule(g, large);
  const auto att = attach_bits(g, sched);

  REQUIRE(att.cluster_of_bit.size() == 7);
  CHECK(att.fallback[0] == 1);               // only lives in layer 0
  CHECK((att.cluster_of_bit[0] == 0 || att.cluster_of_bit[0] == 1));
  CHECK(att.cluster_of_bit[2] == 2);         // smallest outer cluster with b2
  CHECK(att.cluster_of_bit[5] == 2);
  CHECK(att.cluster_of_bit[3] == 3);
  CHECK(att.cluster_of_bit[6] == 3);
  CHECK(att.fallback[2] == 0);

  // Every bit attaches somewhere, and always to a cluster containing it.
  for (int v = 0; v < 7; ++v) {
    const int c = att.cluster_of_bit[std::size_t(v)];
    REQUIRE(c >= 0);
    CHECK(std::binary_search(g.clusters[std::size_t(c)].begin(),
                             g.clusters[std::size_t(c)].end(), v));
  }
}

TEST_CASE("disconnected cluster graphs still get a full schedule") {
  // Two islands: {0,1},{1,2} and {3,4},{4,5}.  The schedule must reseed on
  // the second island so every edge is covered.
  const auto g = build_ltrip({{0, 1}, {1, 2}, {3, 4}, {4, 5}});
  const auto sched = layered_schedule(g, {0});
  std::set<std::pair<int, int>> seen;
  for (auto [a, b] : sched.ordered_pairs) seen.insert({std::min(a, b), std::max(a, b)});
  CHECK(seen.size() == g.edges.size());
  std::size_t in_layers = 0;
  for (const auto& layer : sched.layers) in_layers += layer.size();
  CHECK(in_layers == g.clusters.size());
}
