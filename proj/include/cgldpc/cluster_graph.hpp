#pragma once
#include <string>
#include <utility>
#include <vector>

#include "cgldpc/gf2.hpp"

namespace cgldpc {

// Undirected cluster graph over binary variables.  Sepsets are non-empty
// subsets of both endpoint clusters; cluster ids index `clusters`.
struct ClusterGraph {
  int num_vars = 0;
  std::vector<std::vector<int>> clusters;  // sorted variable lists

  struct Edge {
    int a = -1, b = -1;              // a < b
    std::vector<int> sepset;         // sorted
  };
  std::vector<Edge> edges;
  // per cluster: (neighbor id, edge id), sorted by neighbor
  std::vector<std::vector<std::pair<int, int>>> adjacency;

  int edge_between(int a, int b) const;  // -1 when absent
};

// Layered per-variable spanning-tree construction.  Variables are processed
// in ascending order; for each variable a maximum-weight spanning tree is
// built over the clusters containing it (Kruskal, deterministic tie-break by
// (min id, max id)), with edge weight |Ci intersect Cj| plus a 0.5 bonus for
// pairs already connected in earlier layers.  Chosen edges gain the variable
// in their sepset; the final sepsets are the unions over all layers.  The
// result satisfies the running intersection property by construction.
ClusterGraph build_ltrip(const std::vector<std::vector<int>>& clusters);

inline ClusterGraph build_ltrip(const ParityCheckMatrix& h) {
  return build_ltrip(h.row_support);
}

struct RipViolation {
  int var = -1;
  std::string detail;
};

// Checks that for every variable the edges carrying it form a spanning tree
// of the clusters containing it.  Returns one violation per failing variable.
std::vector<RipViolation> validate_rip(const ClusterGraph& g);

// Message schedule produced by breadth-first layering away from the large
// clusters.  `ordered_pairs` holds (source, destination) in discovery order:
// sources sit closer to layer 0.  The decoder's first sweep replays the pairs
// in reverse order and reversed direction (evidence flows from the outermost
// layer into the large clusters), and its second sweep replays them as
// stored.  Every graph edge appears exactly once.
struct MessageSchedule {
  std::vector<std::pair<int, int>> ordered_pairs;
  std::vector<std::vector<int>> layers;  // layer 0 = large clusters
  int first_parity_layer = 0;            // index of the outermost layer
};

MessageSchedule layered_schedule(const ClusterGraph& g, const std::vector<int>& large_ids);

// Policy for picking the schedule's initial (large) clusters.
struct LargeClusterPolicy {
  enum class Kind { TwoLargestDistinct, ExplicitIds, MinCardinality };
  Kind kind = Kind::TwoLargestDistinct;
  std::vector<int> ids;        // ExplicitIds
  int min_cardinality = 0;     // MinCardinality

  static LargeClusterPolicy two_largest() { return {}; }
  static LargeClusterPolicy explicit_ids(std::vector<int> v);
  static LargeClusterPolicy min_cardinality_of(int c);
};

std::vector<int> select_large_clusters(const std::vector<std::vector<int>>& clusters,
                                       const LargeClusterPolicy& policy = {});

// Each bit attaches to the smallest-cardinality cluster containing it in the
// outermost layer; bits absent there fall back to the next-closest layer.
// Ties break to the lowest cluster id.  `fallback` marks bits that attached
// outside the outermost layer.
struct BitAttachment {
  std::vector<int> cluster_of_bit;
  std::vector<std::uint8_t> fallback;
};

BitAttachment attach_bits(const ClusterGraph& g, const MessageSchedule& schedule);

// Human-readable dump used by the build-graph CLI subcommand.
std::string describe_graph(const ClusterGraph& g, const MessageSchedule& schedule,
                           const BitAttachment& attachment);

}  // namespace cgldpc
