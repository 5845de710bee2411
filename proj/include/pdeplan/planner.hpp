// planner.hpp — deterministic argmin-Q greedy planner: single steps, rollouts
// with exact cycle recovery, the full basin partition, and failure
// classification against the labelled set.
#pragma once

#include <optional>
#include <span>
#include <vector>

#include "pdeplan/graph.hpp"
#include "pdeplan/instances.hpp"
#include "pdeplan/solvers.hpp"

namespace pdeplan {

enum class Outcome { kReached, kLoop, kOverrun };

struct RolloutResult {
  VertexId start = 0;
  Outcome outcome = Outcome::kReached;
  int steps = 0;                  // edges traversed before termination
  std::vector<VertexId> visited;  // ends at the goal, or at the repeated vertex
  std::vector<VertexId> cycle;    // eventually-repeating suffix (loops only)
  bool boundary_touching = false;
};

// argmin over neighbours of edge cost plus surrogate value; ties broken by
// smallest vertex identifier; the goal is absorbing.  Non-goal labelled
// vertices are not absorbing.
VertexId greedy_step(const Graph& graph, const ValueField& field, VertexId goal, VertexId state);

// Iterates greedy_step until the goal or the first vertex revisit; on revisit
// the cycle is the visited suffix from the first occurrence of the repeated
// vertex.  When a boundary is supplied, loops crossing a labelled non-goal
// vertex are flagged boundary-touching.  The kOverrun outcome guards against
// a broken successor map and cannot occur for a correct one.
RolloutResult rollout(const Graph& graph, const ValueField& field, VertexId goal, VertexId start,
                      const BoundaryCondition* boundary = nullptr);

struct BasinPartition {
  std::vector<RolloutResult> outcomes;  // one per start in V \ {goal}
  double failure_rate = 0.0;            // loop share
};

// Rollouts from every non-goal start over a successor map evaluated once.
BasinPartition basin_partition(const Graph& graph, const ValueField& field, VertexId goal,
                               const BoundaryCondition* boundary = nullptr);

struct FailureCounts {
  long long interior = 0;
  long long boundary_touching = 0;
};

// Splits loop outcomes by whether the limit cycle meets the labelled set away
// from the goal; interior + boundary_touching equals the loop count exactly.
FailureCounts classify_failures(std::span<const RolloutResult> outcomes,
                                const BoundaryCondition& boundary);

}  // namespace pdeplan
