#include "pdeplan/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>

namespace pdeplan {

void Graph::check_vertex(VertexId v) const {
  if (v < 0 || v >= vertex_count()) {
    throw std::out_of_range("vertex " + std::to_string(v) + " out of range [0, " +
                            std::to_string(vertex_count()) + ")");
  }
}

Graph Graph::build(VertexId vertex_count, const std::vector<std::pair<VertexId, VertexId>>& edges,
                   const std::vector<double>& costs) {
  if (vertex_count < 0) throw std::invalid_argument("vertex_count must be non-negative");
  if (!costs.empty() && costs.size() != edges.size()) {
    throw std::invalid_argument("cost list must be parallel to edge list");
  }

  const std::size_t n = static_cast<std::size_t>(vertex_count);
  std::vector<std::vector<std::pair<VertexId, double>>> adj(n);
  std::set<std::pair<VertexId, VertexId>> seen;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    auto [u, v] = edges[i];
    if (u < 0 || u >= vertex_count || v < 0 || v >= vertex_count) {
      throw std::out_of_range("edge endpoint out of range: {" + std::to_string(u) + ", " +
                              std::to_string(v) + "}");
    }
    if (u == v) throw std::invalid_argument("self-loop at vertex " + std::to_string(u));
    const double c = costs.empty() ? 1.0 : costs[i];
    if (!(c > 0.0)) throw std::invalid_argument("edge cost must be strictly positive");
    auto key = std::minmax(u, v);
    if (!seen.insert(key).second) {
      throw std::invalid_argument("duplicate edge {" + std::to_string(key.first) + ", " +
                                  std::to_string(key.second) + "}");
    }
    adj[static_cast<std::size_t>(u)].emplace_back(v, c);
    adj[static_cast<std::size_t>(v)].emplace_back(u, c);
  }

  Graph g;
  g.offsets_.assign(n + 1, 0);
  g.targets_.reserve(2 * edges.size());
  if (!costs.empty()) g.costs_.reserve(2 * edges.size());
  for (std::size_t v = 0; v < n; ++v) {
    std::sort(adj[v].begin(), adj[v].end());
    for (auto& [to, c] : adj[v]) {
      g.targets_.push_back(to);
      if (!costs.empty()) g.costs_.push_back(c);
    }
    g.offsets_[v + 1] = g.targets_.size();
  }
  return g;
}

bool Graph::has_edge(VertexId u, VertexId v) const {
  const auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

double Graph::edge_cost(VertexId u, VertexId v) const {
  const auto nb = neighbors(u);
  const auto it = std::lower_bound(nb.begin(), nb.end(), v);
  if (it == nb.end() || *it != v) {
    throw std::invalid_argument("no edge {" + std::to_string(u) + ", " + std::to_string(v) + "}");
  }
  if (unit_cost()) return 1.0;
  const std::size_t idx = offsets_[static_cast<std::size_t>(u)] +
                          static_cast<std::size_t>(it - nb.begin());
  return costs_[idx];
}

std::vector<std::pair<VertexId, VertexId>> Graph::edges() const {
  std::vector<std::pair<VertexId, VertexId>> out;
  out.reserve(edge_count());
  for (VertexId u = 0; u < vertex_count(); ++u) {
    for (VertexId v : neighbors(u)) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;
}

std::vector<double> Graph::edge_costs() const {
  if (unit_cost()) return {};
  std::vector<double> out;
  out.reserve(edge_count());
  for (VertexId u = 0; u < vertex_count(); ++u) {
    for (VertexId v : neighbors(u)) {
      if (u < v) out.push_back(edge_cost(u, v));
    }
  }
  return out;
}

DistanceField shortest_path_distances(const Graph& graph, VertexId goal) {
  graph.check_vertex(goal);
  DistanceField field;
  field.goal = goal;
  field.dist.assign(static_cast<std::size_t>(graph.vertex_count()), kUnreachable);

  if (graph.unit_cost()) {
    std::deque<VertexId> queue{goal};
    field.dist[static_cast<std::size_t>(goal)] = 0.0;
    while (!queue.empty()) {
      const VertexId x = queue.front();
      queue.pop_front();
      const double next = field.dist[static_cast<std::size_t>(x)] + 1.0;
      for (VertexId y : graph.neighbors(x)) {
        if (field.dist[static_cast<std::size_t>(y)] == kUnreachable) {
          field.dist[static_cast<std::size_t>(y)] = next;
          queue.push_back(y);
        }
      }
    }
  } else {
    using Item = std::pair<double, VertexId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    field.dist[static_cast<std::size_t>(goal)] = 0.0;
    heap.emplace(0.0, goal);
    while (!heap.empty()) {
      auto [d, x] = heap.top();
      heap.pop();
      if (d > field.dist[static_cast<std::size_t>(x)]) continue;
      for (VertexId y : graph.neighbors(x)) {
        const double nd = d + graph.edge_cost(x, y);
        if (nd < field.dist[static_cast<std::size_t>(y)]) {
          field.dist[static_cast<std::size_t>(y)] = nd;
          heap.emplace(nd, y);
        }
      }
    }
  }
  return field;
}

Subdivision subdivide(const Graph& graph, int k) {
  if (k < 1) throw std::invalid_argument("subdivision factor must be >= 1");
  if (!graph.unit_cost()) throw std::invalid_argument("subdivide requires a unit-cost graph");

  const VertexId n = graph.vertex_count();
  const auto original_edges = graph.edges();

  Subdivision result;
  result.k = k;
  result.vertex_image.resize(static_cast<std::size_t>(n));
  for (VertexId v = 0; v < n; ++v) result.vertex_image[static_cast<std::size_t>(v)] = v;

  std::vector<std::pair<VertexId, VertexId>> new_edges;
  new_edges.reserve(original_edges.size() * static_cast<std::size_t>(k));
  VertexId next_id = n;
  for (auto [u, v] : original_edges) {
    std::vector<VertexId> chain;
    chain.reserve(static_cast<std::size_t>(k - 1));
    VertexId prev = u;
    for (int i = 1; i < k; ++i) {
      chain.push_back(next_id);
      new_edges.emplace_back(prev, next_id);
      prev = next_id++;
    }
    new_edges.emplace_back(prev, v);
    result.chain_edges.emplace_back(u, v);
    result.chains.push_back(std::move(chain));
  }
  result.graph = Graph::build(next_id, new_edges);
  return result;
}

VertexId Subdivision::first_vertex_toward(VertexId u, VertexId v) const {
  const auto key = std::minmax(u, v);
  for (std::size_t i = 0; i < chain_edges.size(); ++i) {
    if (chain_edges[i] == std::pair<VertexId, VertexId>(key.first, key.second)) {
      if (chains[i].empty()) return vertex_image[static_cast<std::size_t>(v)];
      return u == key.first ? chains[i].front() : chains[i].back();
    }
  }
  throw std::invalid_argument("first_vertex_toward: {" + std::to_string(u) + ", " +
                              std::to_string(v) + "} is not an original edge");
}

std::vector<long long> hops_to_labelled(const Graph& graph,
                                        std::span<const VertexId> labelled_set) {
  if (labelled_set.empty()) throw std::invalid_argument("labelled set must be non-empty");
  if (!graph.unit_cost()) throw std::invalid_argument("hops_to_labelled requires unit costs");
  std::vector<long long> hops(static_cast<std::size_t>(graph.vertex_count()), kInfiniteHops);
  std::deque<VertexId> queue;
  for (VertexId z : labelled_set) {
    graph.check_vertex(z);
    if (hops[static_cast<std::size_t>(z)] != 0) {
      hops[static_cast<std::size_t>(z)] = 0;
      queue.push_back(z);
    }
  }
  while (!queue.empty()) {
    const VertexId x = queue.front();
    queue.pop_front();
    for (VertexId y : graph.neighbors(x)) {
      if (hops[static_cast<std::size_t>(y)] == kInfiniteHops) {
        hops[static_cast<std::size_t>(y)] = hops[static_cast<std::size_t>(x)] + 1;
        queue.push_back(y);
      }
    }
  }
  return hops;
}

long long fill_distance(const Graph& graph, std::span<const VertexId> target_set,
                        std::span<const VertexId> labelled_set) {
  const auto hops = hops_to_labelled(graph, labelled_set);
  long long worst = 0;
  for (VertexId x : target_set) {
    graph.check_vertex(x);
    const long long h = hops[static_cast<std::size_t>(x)];
    if (h == kInfiniteHops) return kInfiniteHops;
    worst = std::max(worst, h);
  }
  return worst;
}

GeometryClass geometry_classify(const Graph& graph, const DistanceField& field, VertexId x) {
  graph.check_vertex(x);
  if (!graph.unit_cost()) throw std::invalid_argument("geometry_classify requires unit costs");
  if (x == field.goal) throw std::invalid_argument("geometry_classify: x equals the goal");
  if (!field.reachable(x)) throw std::invalid_argument("geometry_classify: x unreachable");

  // Unit-graph hop counts are exactly integral doubles; classify in integers.
  const long long dx = std::llround(field[x]);
  GeometryClass cls;
  for (VertexId y : graph.neighbors(x)) {
    const long long dy = std::llround(field[y]);
    const long long diff = dy - dx;
    if (diff == 1) {
      ++cls.n_plus;
    } else if (diff == 0) {
      ++cls.n_zero;
    } else if (diff == -1) {
      ++cls.n_minus;
    } else {
      throw std::logic_error("distance field violates the unit-edge Lipschitz bound");
    }
  }
  cls.amle_compatible = cls.n_plus >= 1;
  cls.harmonic_compatible = cls.n_plus == cls.n_minus;
  cls.extendable = cls.amle_compatible;
  return cls;
}

}  // namespace pdeplan
