#include "pdeplan/instances.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <map>
#include <sstream>
#include <stdexcept>

#include "pdeplan/rng.hpp"

namespace pdeplan {

namespace {

// Footprints loosely following the AntMaze medium / large mask shapes.
const std::string kMediumLayout =
    "########\n"
    "#..##..#\n"
    "#..#...#\n"
    "##....##\n"
    "#..#...#\n"
    "#.#..#.#\n"
    "#...#..#\n"
    "########\n";

const std::string kLargeLayout =
    "############\n"
    "#....#.....#\n"
    "#.##.#.###.#\n"
    "#.#....#...#\n"
    "#.#.##.#.#.#\n"
    "#...#..#.#.#\n"
    "#.#.#.##.#.#\n"
    "#.#......#.#\n"
    "############\n";

}  // namespace

int MazeLayout::open_cell_count() const {
  int count = 0;
  for (auto c : open) count += c;
  return count;
}

MazeLayout parse_layout(const std::string& text) {
  MazeLayout layout;
  std::vector<std::string> lines;
  std::string line;
  std::istringstream in(text);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  if (lines.empty()) throw std::invalid_argument("layout: empty input");

  layout.rows = static_cast<int>(lines.size());
  layout.cols = static_cast<int>(lines.front().size());
  layout.open.reserve(static_cast<std::size_t>(layout.rows * layout.cols));
  for (const auto& row : lines) {
    if (static_cast<int>(row.size()) != layout.cols) {
      throw std::invalid_argument("layout: ragged rows");
    }
    for (char c : row) {
      if (c == '.') {
        layout.open.push_back(1);
      } else if (c == '#') {
        layout.open.push_back(0);
      } else {
        throw std::invalid_argument(std::string("layout: illegal character '") + c + "'");
      }
    }
  }
  if (layout.open_cell_count() == 0) throw std::invalid_argument("layout: no open cells");
  return layout;
}

const std::string& builtin_layout(const std::string& name) {
  if (name == "medium") return kMediumLayout;
  if (name == "large") return kLargeLayout;
  throw std::invalid_argument("unknown builtin layout '" + name + "'");
}

RefinedMaze refine_to_graph(const MazeLayout& layout, int r) {
  if (r < 1) throw std::invalid_argument("refinement must be >= 1");

  // Connectivity is decided at cell level; the refined graph inherits it.
  {
    std::vector<int> component(static_cast<std::size_t>(layout.rows * layout.cols), -1);
    int start = -1;
    for (int i = 0; i < layout.rows * layout.cols; ++i) {
      if (layout.open[static_cast<std::size_t>(i)]) {
        start = i;
        break;
      }
    }
    std::deque<int> queue{start};
    component[static_cast<std::size_t>(start)] = 0;
    int seen = 1;
    while (!queue.empty()) {
      const int cell = queue.front();
      queue.pop_front();
      const int cr = cell / layout.cols;
      const int cc = cell % layout.cols;
      const int dr[] = {-1, 1, 0, 0};
      const int dc[] = {0, 0, -1, 1};
      for (int d = 0; d < 4; ++d) {
        const int nr = cr + dr[d];
        const int nc = cc + dc[d];
        if (nr < 0 || nr >= layout.rows || nc < 0 || nc >= layout.cols) continue;
        const int ni = nr * layout.cols + nc;
        if (layout.open[static_cast<std::size_t>(ni)] && component[static_cast<std::size_t>(ni)] < 0) {
          component[static_cast<std::size_t>(ni)] = 0;
          queue.push_back(ni);
          ++seen;
        }
      }
    }
    if (seen != layout.open_cell_count()) {
      throw std::invalid_argument("layout: open region is not 4-connected");
    }
  }

  const int rows = layout.rows * r;
  const int cols = layout.cols * r;
  std::vector<VertexId> id(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), -1);
  RefinedMaze maze;
  VertexId next = 0;
  for (int R = 0; R < rows; ++R) {
    for (int C = 0; C < cols; ++C) {
      if (layout.is_open(R / r, C / r)) {
        id[static_cast<std::size_t>(R) * static_cast<std::size_t>(cols) +
           static_cast<std::size_t>(C)] = next++;
        maze.cell.emplace_back(R, C);
      }
    }
  }

  std::vector<std::pair<VertexId, VertexId>> edges;
  for (int R = 0; R < rows; ++R) {
    for (int C = 0; C < cols; ++C) {
      const VertexId u = id[static_cast<std::size_t>(R) * static_cast<std::size_t>(cols) +
                            static_cast<std::size_t>(C)];
      if (u < 0) continue;
      if (C + 1 < cols) {
        const VertexId v = id[static_cast<std::size_t>(R) * static_cast<std::size_t>(cols) +
                              static_cast<std::size_t>(C) + 1];
        if (v >= 0) edges.emplace_back(u, v);
      }
      if (R + 1 < rows) {
        const VertexId v = id[static_cast<std::size_t>(R + 1) * static_cast<std::size_t>(cols) +
                              static_cast<std::size_t>(C)];
        if (v >= 0) edges.emplace_back(u, v);
      }
    }
  }
  maze.graph = Graph::build(next, edges);
  return maze;
}

BoundaryCondition::BoundaryCondition(VertexId goal, std::vector<VertexId> labelled,
                                     std::vector<double> labels, VertexId vertex_count) {
  if (labelled.size() != labels.size()) {
    throw std::invalid_argument("boundary: labelled/labels size mismatch");
  }
  std::vector<std::size_t> order(labelled.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return labelled[a] < labelled[b]; });

  goal_ = goal;
  mask_.assign(static_cast<std::size_t>(vertex_count), 0);
  labelled_.reserve(labelled.size());
  labels_.reserve(labels.size());
  for (std::size_t i : order) {
    const VertexId v = labelled[i];
    if (v < 0 || v >= vertex_count) throw std::out_of_range("boundary: vertex out of range");
    if (mask_[static_cast<std::size_t>(v)]) {
      throw std::invalid_argument("boundary: duplicate labelled vertex");
    }
    mask_[static_cast<std::size_t>(v)] = 1;
    labelled_.push_back(v);
    labels_.push_back(labels[i]);
  }
  if (goal_ < 0 || goal_ >= vertex_count || !is_labelled(goal_)) {
    throw std::invalid_argument("boundary: goal must be a labelled vertex");
  }
}

double BoundaryCondition::label_of(VertexId v) const {
  const auto it = std::lower_bound(labelled_.begin(), labelled_.end(), v);
  if (it == labelled_.end() || *it != v) {
    throw std::invalid_argument("boundary: vertex " + std::to_string(v) + " is not labelled");
  }
  return labels_[static_cast<std::size_t>(it - labelled_.begin())];
}

BoundaryCondition sample_boundary(const Graph& graph, const DistanceField& distances,
                                  double label_fraction, std::uint64_t seed, double noise_bound) {
  if (!(label_fraction > 0.0) || label_fraction > 1.0) {
    throw std::invalid_argument("label fraction must lie in (0, 1]");
  }
  const VertexId n = graph.vertex_count();
  for (VertexId v = 0; v < n; ++v) {
    if (!distances.reachable(v)) {
      throw std::invalid_argument("sample_boundary: vertex " + std::to_string(v) +
                                  " unreachable from the goal");
    }
  }
  const VertexId goal = distances.goal;
  const int extra = static_cast<int>(std::ceil(label_fraction * static_cast<double>(n - 1)));

  SeededRng rng(seed);
  std::vector<VertexId> labelled{goal};
  std::vector<double> labels{0.0};
  for (int idx : rng.sample_without_replacement(n - 1, std::min<int>(extra, n - 1))) {
    const VertexId v = idx < goal ? idx : idx + 1;
    double y = distances[v];
    if (noise_bound > 0.0) y += rng.real_in(-noise_bound, noise_bound);
    labelled.push_back(v);
    labels.push_back(y);
  }
  return BoundaryCondition(goal, std::move(labelled), std::move(labels), n);
}

VertexId G7Expected::dense_of_original(int label) const {
  for (std::size_t i = 0; i < original_label.size(); ++i) {
    if (original_label[i] == label) return static_cast<VertexId>(i);
  }
  throw std::invalid_argument("no such original label");
}

G7Instance builtin_g7() {
  // Original vertex labels {0, 1, 3, 4, 5, 6, 7} relabelled densely in order.
  G7Instance inst;
  inst.expected.original_label = {0, 1, 3, 4, 5, 6, 7};
  const auto d = [&](int label) { return inst.expected.dense_of_original(label); };

  const std::vector<std::pair<VertexId, VertexId>> edges = {
      {d(0), d(3)}, {d(0), d(5)}, {d(5), d(1)}, {d(1), d(4)},
      {d(3), d(4)}, {d(3), d(6)}, {d(6), d(7)}, {d(4), d(7)},
  };
  inst.graph = Graph::build(7, edges);
  inst.boundary = BoundaryCondition(d(0), {d(0), d(7)}, {0.0, 3.0}, 7);

  auto& e = inst.expected;
  e.goal = d(0);
  e.decision_state = d(4);
  e.branch_short = d(3);
  e.branch_long = d(1);
  e.far_label = d(7);
  e.harmonic_at_branch_long = Rat64(36, 29);
  e.harmonic_at_branch_short = Rat64(39, 29);
  e.amle_at_branch_short = Rat64(1, 1);
  e.amle_at_branch_long = Rat64(4, 3);
  e.omega_long_far = Rat64(12, 29);
  e.omega_short_far = Rat64(13, 29);
  e.action_gap = Rat64(1, 1);
  e.eps_amle = Rat64(2, 3);
  e.eps_harmonic = Rat64(22, 29);
  return inst;
}

LatticeCandidate random_lattice_candidate(int rows, int cols, std::uint64_t seed) {
  if (rows < 2 || cols < 2) throw std::invalid_argument("lattice must be at least 2x2");
  SeededRng rng(seed);

  for (int attempt = 0;; ++attempt) {
    const double keep_prob = attempt < 1000 ? rng.real_in(0.45, 0.95) : 1.0;
    std::vector<std::uint8_t> keep(static_cast<std::size_t>(rows * cols));
    int kept = 0;
    for (auto& cell : keep) {
      cell = rng.real01() < keep_prob ? 1 : 0;
      kept += cell;
    }
    if (kept < 2) continue;

    std::vector<VertexId> id(static_cast<std::size_t>(rows * cols), -1);
    LatticeCandidate cand;
    VertexId next = 0;
    for (int R = 0; R < rows; ++R) {
      for (int C = 0; C < cols; ++C) {
        if (keep[static_cast<std::size_t>(R * cols + C)]) {
          id[static_cast<std::size_t>(R * cols + C)] = next++;
          cand.cell.emplace_back(R, C);
        }
      }
    }
    std::vector<std::pair<VertexId, VertexId>> edges;
    for (int R = 0; R < rows; ++R) {
      for (int C = 0; C < cols; ++C) {
        const VertexId u = id[static_cast<std::size_t>(R * cols + C)];
        if (u < 0) continue;
        if (C + 1 < cols && id[static_cast<std::size_t>(R * cols + C + 1)] >= 0) {
          edges.emplace_back(u, id[static_cast<std::size_t>(R * cols + C + 1)]);
        }
        if (R + 1 < rows && id[static_cast<std::size_t>((R + 1) * cols + C)] >= 0) {
          edges.emplace_back(u, id[static_cast<std::size_t>((R + 1) * cols + C)]);
        }
      }
    }
    cand.graph = Graph::build(next, edges);

    const VertexId goal = static_cast<VertexId>(rng.below(static_cast<std::uint64_t>(next)));
    const auto dist = shortest_path_distances(cand.graph, goal);
    bool connected = true;
    for (VertexId v = 0; v < next; ++v) connected = connected && dist.reachable(v);
    if (!connected) continue;

    const int extra = static_cast<int>(rng.int_in(1, 4));
    std::vector<VertexId> labelled{goal};
    std::vector<double> labels{0.0};
    for (int idx : rng.sample_without_replacement(next - 1, std::min(extra, next - 1))) {
      const VertexId v = idx < goal ? idx : idx + 1;
      labelled.push_back(v);
      labels.push_back(dist[v]);
    }
    cand.boundary = BoundaryCondition(goal, std::move(labelled), std::move(labels), next);
    return cand;
  }
}

std::string MethodSpec::name() const {
  if (kind == "p") {
    char buf[32];
    if (p == std::floor(p)) {
      std::snprintf(buf, sizeof buf, "p=%d", static_cast<int>(p));
    } else {
      std::snprintf(buf, sizeof buf, "p=%g", p);
    }
    return buf;
  }
  return kind;
}

MethodSpec MethodSpec::parse(const std::string& text) {
  MethodSpec spec;
  if (text == "harmonic" || text == "amle" || text == "nearest" || text == "oracle") {
    spec.kind = text;
    return spec;
  }
  if (text.rfind("p=", 0) == 0) {
    spec.kind = "p";
    spec.p = std::stod(text.substr(2));
    if (spec.p < 2.0) throw std::invalid_argument("finite-p method requires p >= 2");
    return spec;
  }
  throw std::invalid_argument("unknown method '" + text + "'");
}

std::string ExperimentConfig::key() const {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%s|r%d|lf%g|s%llu", layout.c_str(), refine, label_fraction,
                static_cast<unsigned long long>(seed));
  return buf;
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig config;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    std::string keyword, value;
    if (!(row >> keyword >> value)) continue;
    if (keyword == "layout") {
      config.layout = value;
    } else if (keyword == "refine") {
      config.refine = std::stoi(value);
    } else if (keyword == "label_fraction") {
      config.label_fraction = std::stod(value);
    } else if (keyword == "seed") {
      config.seed = std::stoull(value);
    } else if (keyword == "method") {
      config.method = MethodSpec::parse(value);
    } else if (keyword == "sweeps") {
      config.budget.sweeps = std::stoi(value);
    } else if (keyword == "tol") {
      config.budget.tolerance = std::stod(value);
    } else if (keyword == "relax") {
      config.budget.relaxation = std::stod(value);
    } else if (keyword == "eval_pairs") {
      config.eval_pairs = std::stoi(value);
    } else {
      throw std::invalid_argument("config: unknown key '" + keyword + "'");
    }
  }
  if (config.refine < 1) throw std::invalid_argument("config: refine must be >= 1");
  if (!(config.label_fraction > 0.0) || config.label_fraction > 1.0) {
    throw std::invalid_argument("config: label_fraction must lie in (0, 1]");
  }
  return config;
}

std::string format_config(const ExperimentConfig& config) {
  std::ostringstream out;
  out << "layout " << config.layout << "\n";
  out << "refine " << config.refine << "\n";
  out << "label_fraction " << config.label_fraction << "\n";
  out << "seed " << config.seed << "\n";
  out << "method " << config.method.name() << "\n";
  out << "sweeps " << config.budget.sweeps << "\n";
  out << "tol " << config.budget.tolerance << "\n";
  out << "relax " << config.budget.relaxation << "\n";
  out << "eval_pairs " << config.eval_pairs << "\n";
  return out.str();
}

}  // namespace pdeplan
