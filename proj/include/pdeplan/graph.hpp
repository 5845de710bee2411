// graph.hpp — undirected graph core: adjacency storage, shortest-path
// distances, uniform edge subdivision, fill distance, and local geometry
// classification of the distance field.
#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

namespace pdeplan {

using VertexId = int;

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();
inline constexpr long long kInfiniteHops = std::numeric_limits<long long>::max();

// Immutable undirected graph.  Neighbour lists are sorted ascending by vertex
// identifier; iterating them in order realises lexicographic tie-breaking
// everywhere downstream.  Edge costs are optional: an empty cost table means
// every edge has unit cost.
class Graph {
 public:
  Graph() = default;

  // Validates endpoints, rejects self-loops, duplicate edges and non-positive
  // costs.  `costs`, when non-empty, must be parallel to `edges`.
  static Graph build(VertexId vertex_count,
                     const std::vector<std::pair<VertexId, VertexId>>& edges,
                     const std::vector<double>& costs = {});

  VertexId vertex_count() const { return static_cast<VertexId>(offsets_.size()) - 1; }
  std::size_t edge_count() const { return targets_.size() / 2; }
  bool unit_cost() const { return costs_.empty(); }

  std::span<const VertexId> neighbors(VertexId v) const {
    check_vertex(v);
    return {targets_.data() + offsets_[static_cast<std::size_t>(v)],
            targets_.data() + offsets_[static_cast<std::size_t>(v) + 1]};
  }

  int degree(VertexId v) const { return static_cast<int>(neighbors(v).size()); }

  // Cost of edge {u, v}; throws if the edge does not exist.
  double edge_cost(VertexId u, VertexId v) const;

  bool has_edge(VertexId u, VertexId v) const;

  // Edges in canonical (u < v) order, sorted lexicographically.
  std::vector<std::pair<VertexId, VertexId>> edges() const;
  std::vector<double> edge_costs() const;  // parallel to edges(); empty if unit

  void check_vertex(VertexId v) const;

 private:
  std::vector<std::size_t> offsets_{0};
  std::vector<VertexId> targets_;
  std::vector<double> costs_;  // parallel to targets_; empty = unit cost
};

// Exact shortest-path distances to a fixed goal.  Unreachable vertices carry
// the +inf sentinel rather than an error; consumers that require global
// reachability must reject such fields at use.
struct DistanceField {
  VertexId goal = 0;
  std::vector<double> dist;  // hop count on unit graphs (exactly integral)

  bool reachable(VertexId v) const { return dist[static_cast<std::size_t>(v)] != kUnreachable; }
  double operator[](VertexId v) const { return dist[static_cast<std::size_t>(v)]; }
};

// Breadth-first search on unit-cost graphs, Dijkstra otherwise.
DistanceField shortest_path_distances(const Graph& graph, VertexId goal);

// Uniform k-subdivision: every edge becomes a path of k unit edges through
// k - 1 fresh vertices.  Original vertices keep their identifiers.
struct Subdivision {
  Graph graph;
  std::vector<VertexId> vertex_image;  // original id -> id in subdivided graph
  int k = 1;

  // The neighbour of vertex_image[u] along the subdivided edge {u, v}
  // (equals vertex_image[v] when k == 1).
  VertexId first_vertex_toward(VertexId u, VertexId v) const;

  // canonical original edge (u < v) -> inserted chain ordered from u to v
  std::vector<std::pair<VertexId, VertexId>> chain_edges;
  std::vector<std::vector<VertexId>> chains;
};

Subdivision subdivide(const Graph& graph, int k);

// max over x in A of the hop distance from x to the nearest vertex of the
// labelled set; kInfiniteHops when some x in A is unreachable from the set.
long long fill_distance(const Graph& graph, std::span<const VertexId> target_set,
                        std::span<const VertexId> labelled_set);

// Hop distance from every vertex to the nearest labelled vertex
// (multi-source BFS); kInfiniteHops where unreachable.
std::vector<long long> hops_to_labelled(const Graph& graph,
                                        std::span<const VertexId> labelled_set);

// Partition of N(x) by d_g(y) - d_g(x) in {+1, 0, -1}.  n_plus >= 1 is the
// midrange-compatibility condition, n_plus == n_minus the averaging one, and
// extendability coincides with midrange compatibility.
struct GeometryClass {
  int n_plus = 0;
  int n_zero = 0;
  int n_minus = 0;
  bool amle_compatible = false;
  bool harmonic_compatible = false;
  bool extendable = false;
};

// Unit-cost graphs only; x must be reachable and distinct from the goal.
// Integer arithmetic throughout.
GeometryClass geometry_classify(const Graph& graph, const DistanceField& field, VertexId x);

}  // namespace pdeplan
