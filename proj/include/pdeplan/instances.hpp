// instances.hpp — problem-instance generation: maze layouts and refinement,
// sparse boundary sampling, the builtin seven-node worked example, and random
// lattice candidates for the adversarial search.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pdeplan/graph.hpp"
#include "pdeplan/rational.hpp"

namespace pdeplan {

struct MazeLayout {
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> open;  // row-major; 1 = open, 0 = wall

  bool is_open(int r, int c) const {
    return open[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) +
                static_cast<std::size_t>(c)] != 0;
  }
  int open_cell_count() const;
};

// Grid of '#' (wall) and '.' (open); rows must be equally long.
MazeLayout parse_layout(const std::string& text);

// Shipped layout masks by name ("medium" | "large").
const std::string& builtin_layout(const std::string& name);

struct RefinedMaze {
  Graph graph;
  // refined-grid coordinates (row, col) of each vertex, at resolution
  // (rows * r) x (cols * r)
  std::vector<std::pair<int, int>> cell;
};

// Each open cell becomes an r x r block of vertices with 4-neighbour
// adjacency inside and across adjacent open cells.  Rejects layouts whose
// open region is not 4-connected.
RefinedMaze refine_to_graph(const MazeLayout& layout, int r);

// Goal vertex plus labelled set with observed values; the goal is always
// labelled and its label is exactly zero for distance-style data.
class BoundaryCondition {
 public:
  BoundaryCondition() = default;
  BoundaryCondition(VertexId goal, std::vector<VertexId> labelled, std::vector<double> labels,
                    VertexId vertex_count);

  VertexId goal() const { return goal_; }
  const std::vector<VertexId>& labelled() const { return labelled_; }
  const std::vector<double>& labels() const { return labels_; }
  bool is_labelled(VertexId v) const { return mask_[static_cast<std::size_t>(v)] != 0; }
  double label_of(VertexId v) const;
  std::size_t size() const { return labelled_.size(); }

 private:
  VertexId goal_ = 0;
  std::vector<VertexId> labelled_;  // sorted ascending
  std::vector<double> labels_;      // parallel to labelled_
  std::vector<std::uint8_t> mask_;
};

// Goal plus ceil(lf * (|V| - 1)) uniformly sampled non-goal vertices, labelled
// with exact goal distances plus independent uniform noise in
// [-noise_bound, +noise_bound].  The goal label is always exactly zero.
// Rejects graphs with vertices unreachable from the goal.
BoundaryCondition sample_boundary(const Graph& graph, const DistanceField& distances,
                                  double label_fraction, std::uint64_t seed,
                                  double noise_bound = 0.0);

// Reference values of the builtin seven-node example, exact rationals.
// Vertices are stored under dense identifiers; `original_label` maps them back
// to the labels used when talking about the construction.
struct G7Expected {
  std::vector<int> original_label;  // dense id -> original label
  VertexId goal = 0;                // dense ids below
  VertexId decision_state = 0;      // original 4
  VertexId branch_short = 0;        // original 3 (true best)
  VertexId branch_long = 0;         // original 1 (harmonic pick)
  VertexId far_label = 0;           // original 7
  Rat64 harmonic_at_branch_long;    // 36/29
  Rat64 harmonic_at_branch_short;   // 39/29
  Rat64 amle_at_branch_short;       // 1
  Rat64 amle_at_branch_long;        // 4/3
  Rat64 omega_long_far;             // 12/29
  Rat64 omega_short_far;            // 13/29
  Rat64 action_gap;                 // 1
  Rat64 eps_amle;                   // 2/3
  Rat64 eps_harmonic;               // 22/29

  VertexId dense_of_original(int label) const;
};

struct G7Instance {
  Graph graph;
  BoundaryCondition boundary;
  G7Expected expected;
};

G7Instance builtin_g7();

// Random connected induced subgraph of the rows x cols unit lattice with a
// goal plus 1-4 additional exactly-labelled vertices (resamples until
// connected).
struct LatticeCandidate {
  Graph graph;
  BoundaryCondition boundary;
  std::vector<std::pair<int, int>> cell;  // lattice coordinates per vertex
};

LatticeCandidate random_lattice_candidate(int rows, int cols, std::uint64_t seed);

// Zero-valued fields resolve to per-method defaults at solve time
// (5000 sweeps; residual 1e-8 for harmonic/midrange, update 1e-6 for
// finite p; relaxation 0.05).
struct SolverBudget {
  int sweeps = 0;
  double tolerance = 0.0;
  double relaxation = 0.0;
};

struct MethodSpec {
  // "harmonic", "amle", "p" (finite exponent), "nearest", "oracle"
  std::string kind = "amle";
  double p = 0.0;

  std::string name() const;
  static MethodSpec parse(const std::string& text);
};

struct ExperimentConfig {
  std::string layout = "medium";
  int refine = 4;
  double label_fraction = 0.05;
  std::uint64_t seed = 54;
  MethodSpec method;
  SolverBudget budget;
  int eval_pairs = 128;

  std::string key() const;  // layout|r|lf|seed (method excluded)
};

// Flat key-value document, one "key value" pair per line ('#' comments).
ExperimentConfig parse_config(const std::string& text);
std::string format_config(const ExperimentConfig& config);

}  // namespace pdeplan
