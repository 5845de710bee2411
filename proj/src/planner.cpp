#include "pdeplan/planner.hpp"

#include <stdexcept>
#include <string>

namespace pdeplan {

namespace {

bool cycle_touches_boundary(std::span<const VertexId> cycle, const BoundaryCondition& boundary) {
  for (VertexId v : cycle) {
    if (v != boundary.goal() && boundary.is_labelled(v)) return true;
  }
  return false;
}

// Shared walk driver; `successor` must be deterministic.
template <typename Successor>
RolloutResult walk(const Graph& graph, VertexId goal, VertexId start, Successor successor,
                   const BoundaryCondition* boundary) {
  graph.check_vertex(start);
  RolloutResult result;
  result.start = start;

  const VertexId n = graph.vertex_count();
  std::vector<int> position(static_cast<std::size_t>(n), -1);
  VertexId state = start;
  for (int step = 0; step <= n + 1; ++step) {
    result.visited.push_back(state);
    if (state == goal) {
      result.outcome = Outcome::kReached;
      result.steps = static_cast<int>(result.visited.size()) - 1;
      return result;
    }
    const int seen_at = position[static_cast<std::size_t>(state)];
    if (seen_at >= 0) {
      result.outcome = Outcome::kLoop;
      result.steps = static_cast<int>(result.visited.size()) - 1;
      result.cycle.assign(result.visited.begin() + seen_at, result.visited.end() - 1);
      if (boundary != nullptr) {
        result.boundary_touching = cycle_touches_boundary(result.cycle, *boundary);
      }
      return result;
    }
    position[static_cast<std::size_t>(state)] = static_cast<int>(result.visited.size()) - 1;
    state = successor(state);
  }
  // Unreachable for a deterministic successor map: a walk of |V|+1 steps must
  // revisit.  Kept as a guard with its own outcome tag.
  result.outcome = Outcome::kOverrun;
  result.steps = static_cast<int>(result.visited.size()) - 1;
  return result;
}

}  // namespace

VertexId greedy_step(const Graph& graph, const ValueField& field, VertexId goal, VertexId state) {
  graph.check_vertex(state);
  graph.check_vertex(goal);
  if (state == goal) return goal;
  const auto nb = graph.neighbors(state);
  if (nb.empty()) {
    throw std::invalid_argument("greedy_step: isolated non-goal state " + std::to_string(state));
  }
  VertexId best = nb.front();
  double best_q = graph.edge_cost(state, best) + field[best];
  for (VertexId y : nb.subspan(1)) {
    const double q = graph.edge_cost(state, y) + field[y];
    if (q < best_q) {  // neighbours ascend by id, so '<' keeps the smallest id
      best = y;
      best_q = q;
    }
  }
  return best;
}

RolloutResult rollout(const Graph& graph, const ValueField& field, VertexId goal, VertexId start,
                      const BoundaryCondition* boundary) {
  return walk(
      graph, goal, start, [&](VertexId s) { return greedy_step(graph, field, goal, s); },
      boundary);
}

BasinPartition basin_partition(const Graph& graph, const ValueField& field, VertexId goal,
                               const BoundaryCondition* boundary) {
  const VertexId n = graph.vertex_count();
  std::vector<VertexId> successor(static_cast<std::size_t>(n));
  for (VertexId v = 0; v < n; ++v) successor[static_cast<std::size_t>(v)] = greedy_step(graph, field, goal, v);

  BasinPartition basin;
  basin.outcomes.reserve(static_cast<std::size_t>(n) - 1);
  long long loops = 0;
  for (VertexId start = 0; start < n; ++start) {
    if (start == goal) continue;
    basin.outcomes.push_back(walk(
        graph, goal, start, [&](VertexId s) { return successor[static_cast<std::size_t>(s)]; },
        boundary));
    if (basin.outcomes.back().outcome == Outcome::kLoop) ++loops;
  }
  basin.failure_rate =
      basin.outcomes.empty() ? 0.0 : static_cast<double>(loops) / static_cast<double>(n - 1);
  return basin;
}

FailureCounts classify_failures(std::span<const RolloutResult> outcomes,
                                const BoundaryCondition& boundary) {
  FailureCounts counts;
  for (const auto& result : outcomes) {
    if (result.outcome != Outcome::kLoop) continue;
    if (cycle_touches_boundary(result.cycle, boundary)) {
      ++counts.boundary_touching;
    } else {
      ++counts.interior;
    }
  }
  return counts;
}

}  // namespace pdeplan
