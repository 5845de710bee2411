#include "pdeplan/solvers.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace pdeplan {

namespace {

void require_unit_connected(const Graph& graph, const BoundaryCondition& boundary) {
  if (!graph.unit_cost()) throw std::invalid_argument("solver requires a unit-cost graph");
  if (boundary.labelled().empty()) throw std::invalid_argument("boundary set is empty");
  // Every interior vertex must see the boundary through the graph.
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(graph.vertex_count()), 0);
  std::deque<VertexId> queue;
  for (VertexId z : boundary.labelled()) {
    graph.check_vertex(z);
    seen[static_cast<std::size_t>(z)] = 1;
    queue.push_back(z);
  }
  while (!queue.empty()) {
    const VertexId x = queue.front();
    queue.pop_front();
    for (VertexId y : graph.neighbors(x)) {
      if (!seen[static_cast<std::size_t>(y)]) {
        seen[static_cast<std::size_t>(y)] = 1;
        queue.push_back(y);
      }
    }
  }
  for (VertexId v = 0; v < graph.vertex_count(); ++v) {
    if (!seen[static_cast<std::size_t>(v)]) {
      throw std::invalid_argument("interior component with no boundary contact (vertex " +
                                  std::to_string(v) + ")");
    }
  }
}

double boundary_mean(const BoundaryCondition& boundary) {
  double sum = 0.0;
  for (double y : boundary.labels()) sum += y;
  return sum / static_cast<double>(boundary.labels().size());
}

std::vector<VertexId> interior_vertices(const Graph& graph, const BoundaryCondition& boundary) {
  std::vector<VertexId> interior;
  for (VertexId v = 0; v < graph.vertex_count(); ++v) {
    if (!boundary.is_labelled(v)) interior.push_back(v);
  }
  return interior;
}

std::vector<double> pinned_start(const Graph& graph, const BoundaryCondition& boundary) {
  std::vector<double> values(static_cast<std::size_t>(graph.vertex_count()),
                             boundary_mean(boundary));
  for (std::size_t i = 0; i < boundary.labelled().size(); ++i) {
    values[static_cast<std::size_t>(boundary.labelled()[i])] = boundary.labels()[i];
  }
  return values;
}

// |d|^(p-2) * d with fast integer powers for the common exponents.
double signed_power(double d, double p) {
  const double m = p - 2.0;
  if (m == 0.0) return d;
  const double a = std::abs(d);
  if (a == 0.0) return 0.0;
  double w;
  if (m == std::floor(m) && m <= 62.0) {
    w = 1.0;
    double base = a;
    for (long long e = static_cast<long long>(m); e > 0; e >>= 1) {
      if (e & 1) w *= base;
      base *= base;
    }
  } else {
    w = std::pow(a, m);
  }
  return w * d;
}

// Root of t -> sum_y |u(y) - t|^(p-2) (u(y) - t) over the bracket
// [min_y u(y), max_y u(y)].  The p = 2 case is the plain mean.
double p_local_update(const Graph& graph, std::span<const double> values, VertexId x, double p) {
  const auto nb = graph.neighbors(x);
  if (p == 2.0) {
    double sum = 0.0;
    for (VertexId y : nb) sum += values[static_cast<std::size_t>(y)];
    return sum / static_cast<double>(nb.size());
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (VertexId y : nb) {
    lo = std::min(lo, values[static_cast<std::size_t>(y)]);
    hi = std::max(hi, values[static_cast<std::size_t>(y)]);
  }
  if (lo == hi) return lo;
  const double span = hi - lo;
  for (int iter = 0; iter < 64 && hi - lo > 1e-14 * std::max(1.0, span); ++iter) {
    const double mid = 0.5 * (lo + hi);
    double f = 0.0;
    for (VertexId y : nb) f += signed_power(values[static_cast<std::size_t>(y)] - mid, p);
    if (f > 0.0) {
      lo = mid;  // root is above: f decreases in t
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double midrange_update(const Graph& graph, std::span<const double> values, VertexId x) {
  const auto nb = graph.neighbors(x);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (VertexId y : nb) {
    lo = std::min(lo, values[static_cast<std::size_t>(y)]);
    hi = std::max(hi, values[static_cast<std::size_t>(y)]);
  }
  return 0.5 * (lo + hi);
}

double local_defect(const Graph& graph, const ValueField& field, VertexId x) {
  switch (field.method) {
    case Method::kHarmonic:
      return p_local_update(graph, field.values, x, 2.0) - field[x];
    case Method::kFiniteP:
      return p_local_update(graph, field.values, x, field.p) - field[x];
    case Method::kAmle:
      return midrange_update(graph, field.values, x) - field[x];
    default:
      throw std::invalid_argument("residual is defined for PDE-style fields only");
  }
}

}  // namespace

std::string method_name(Method method, double p) {
  switch (method) {
    case Method::kHarmonic:
      return "harmonic";
    case Method::kFiniteP: {
      MethodSpec spec;
      spec.kind = "p";
      spec.p = p;
      return spec.name();
    }
    case Method::kAmle:
      return "amle";
    case Method::kNearestLabel:
      return "nearest";
    case Method::kOracleDistance:
      return "oracle";
  }
  return "?";
}

ValueField solve_harmonic(const Graph& graph, const BoundaryCondition& boundary,
                          double tolerance) {
  require_unit_connected(graph, boundary);
  const auto interior = interior_vertices(graph, boundary);

  ValueField field;
  field.method = Method::kHarmonic;
  field.values = pinned_start(graph, boundary);

  if (!interior.empty()) {
    std::vector<int> index(static_cast<std::size_t>(graph.vertex_count()), -1);
    for (std::size_t i = 0; i < interior.size(); ++i) {
      index[static_cast<std::size_t>(interior[i])] = static_cast<int>(i);
    }
    const int m = static_cast<int>(interior.size());
    Eigen::SparseMatrix<double> laplacian(m, m);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    std::vector<Eigen::Triplet<double>> triplets;
    for (int i = 0; i < m; ++i) {
      const VertexId x = interior[static_cast<std::size_t>(i)];
      triplets.emplace_back(i, i, static_cast<double>(graph.degree(x)));
      for (VertexId y : graph.neighbors(x)) {
        if (const int j = index[static_cast<std::size_t>(y)]; j >= 0) {
          triplets.emplace_back(i, j, -1.0);
        } else {
          rhs[i] += boundary.label_of(y);
        }
      }
    }
    laplacian.setFromTriplets(triplets.begin(), triplets.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(laplacian);
    if (solver.info() != Eigen::Success) {
      throw std::runtime_error("harmonic solve: factorization failed");
    }
    const Eigen::VectorXd u = solver.solve(rhs);
    for (int i = 0; i < m; ++i) {
      field.values[static_cast<std::size_t>(interior[static_cast<std::size_t>(i)])] = u[i];
    }
  }

  field.terminal_residual_inf = residual_sup_norm(graph, boundary, field);
  if (field.terminal_residual_inf > tolerance) {
    throw std::runtime_error("harmonic solve residual exceeds tolerance");
  }
  return field;
}

ValueField solve_p_picard(const Graph& graph, const BoundaryCondition& boundary, double p,
                          int max_sweeps, double relaxation, double tolerance) {
  if (p < 2.0) throw std::invalid_argument("finite-p solver requires p >= 2");
  if (!(relaxation > 0.0) || relaxation > 1.0) {
    throw std::invalid_argument("relaxation must lie in (0, 1]");
  }
  require_unit_connected(graph, boundary);
  const auto interior = interior_vertices(graph, boundary);

  ValueField field;
  field.method = Method::kFiniteP;
  field.p = p;
  field.values = pinned_start(graph, boundary);

  int sweeps = 0;
  while (!interior.empty() && sweeps < max_sweeps) {
    double defect = 0.0;
    for (VertexId x : interior) {
      const double t = p_local_update(graph, field.values, x, p);
      defect = std::max(defect, std::abs(t - field[x]));
      field.values[static_cast<std::size_t>(x)] += relaxation * (t - field[x]);
    }
    ++sweeps;
    if (defect < tolerance) break;
  }
  field.sweeps_used = sweeps;
  field.terminal_residual_inf = residual_sup_norm(graph, boundary, field);
  return field;
}

ValueField solve_amle(const Graph& graph, const BoundaryCondition& boundary, int max_sweeps,
                      double tolerance) {
  require_unit_connected(graph, boundary);
  const auto interior = interior_vertices(graph, boundary);

  ValueField field;
  field.method = Method::kAmle;
  field.values = pinned_start(graph, boundary);

  int sweeps = 0;
  while (!interior.empty() && sweeps < max_sweeps) {
    double defect = 0.0;
    for (VertexId x : interior) {
      const double t = midrange_update(graph, field.values, x);
      defect = std::max(defect, std::abs(t - field[x]));
      field.values[static_cast<std::size_t>(x)] = t;
    }
    ++sweeps;
    // The in-sweep defect underestimates the post-sweep residual, so confirm
    // with a frozen-field pass before declaring convergence.
    if (tolerance > 0.0 && defect < tolerance &&
        residual_sup_norm(graph, boundary, field) < tolerance) {
      break;
    }
  }
  field.sweeps_used = sweeps;
  field.terminal_residual_inf = residual_sup_norm(graph, boundary, field);
  return field;
}

std::vector<double> residual_field(const Graph& graph, const BoundaryCondition& boundary,
                                   const ValueField& field) {
  if (field.values.size() != static_cast<std::size_t>(graph.vertex_count())) {
    throw std::invalid_argument("residual_field: field does not match the graph");
  }
  std::vector<double> residual(field.values.size(), 0.0);
  for (VertexId x = 0; x < graph.vertex_count(); ++x) {
    if (boundary.is_labelled(x) || graph.degree(x) == 0) continue;
    residual[static_cast<std::size_t>(x)] = local_defect(graph, field, x);
  }
  return residual;
}

double residual_sup_norm(const Graph& graph, const BoundaryCondition& boundary,
                         const ValueField& field) {
  double sup = 0.0;
  for (double r : residual_field(graph, boundary, field)) sup = std::max(sup, std::abs(r));
  return sup;
}

double HarmonicMeasureField::omega(VertexId source, VertexId z) const {
  const auto it = std::lower_bound(boundary_.begin(), boundary_.end(), z);
  if (it == boundary_.end() || *it != z) {
    throw std::invalid_argument("harmonic measure: vertex " + std::to_string(z) +
                                " is not a boundary vertex");
  }
  return row(source)[static_cast<std::size_t>(it - boundary_.begin())];
}

std::span<const double> HarmonicMeasureField::row(VertexId source) const {
  if (source < 0 || source >= vertex_count_) {
    throw std::out_of_range("harmonic measure: source out of range");
  }
  const std::size_t b = boundary_.size();
  return {weights_.data() + static_cast<std::size_t>(source) * b, b};
}

HarmonicMeasureField harmonic_measure(const Graph& graph,
                                      std::span<const VertexId> labelled_set) {
  if (labelled_set.empty()) throw std::invalid_argument("harmonic measure: empty boundary");
  if (!graph.unit_cost()) throw std::invalid_argument("harmonic measure requires unit costs");

  HarmonicMeasureField result;
  result.vertex_count_ = graph.vertex_count();
  result.boundary_.assign(labelled_set.begin(), labelled_set.end());
  std::sort(result.boundary_.begin(), result.boundary_.end());

  std::vector<double> dummy_labels(result.boundary_.size(), 0.0);
  // Validates membership/connectivity exactly as the harmonic solve does.
  BoundaryCondition boundary(result.boundary_.front(), result.boundary_, dummy_labels,
                             graph.vertex_count());
  require_unit_connected(graph, boundary);

  const auto interior = interior_vertices(graph, boundary);
  const std::size_t b = result.boundary_.size();
  result.weights_.assign(static_cast<std::size_t>(graph.vertex_count()) * b, 0.0);

  std::vector<int> index(static_cast<std::size_t>(graph.vertex_count()), -1);
  for (std::size_t i = 0; i < interior.size(); ++i) {
    index[static_cast<std::size_t>(interior[i])] = static_cast<int>(i);
  }
  const int m = static_cast<int>(interior.size());

  Eigen::SparseMatrix<double> laplacian(m, m);
  std::vector<Eigen::Triplet<double>> triplets;
  for (int i = 0; i < m; ++i) {
    const VertexId x = interior[static_cast<std::size_t>(i)];
    triplets.emplace_back(i, i, static_cast<double>(graph.degree(x)));
    for (VertexId y : graph.neighbors(x)) {
      if (const int j = index[static_cast<std::size_t>(y)]; j >= 0) {
        triplets.emplace_back(i, j, -1.0);
      }
    }
  }
  laplacian.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  if (m > 0) {
    solver.compute(laplacian);
    if (solver.info() != Eigen::Success) {
      throw std::runtime_error("harmonic measure: factorization failed");
    }
  }

  for (std::size_t zi = 0; zi < b; ++zi) {
    const VertexId z = result.boundary_[zi];
    result.weights_[static_cast<std::size_t>(z) * b + zi] = 1.0;  // absorbed at start
    if (m == 0) continue;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    for (int i = 0; i < m; ++i) {
      const VertexId x = interior[static_cast<std::size_t>(i)];
      for (VertexId y : graph.neighbors(x)) {
        if (y == z) rhs[i] += 1.0;
      }
    }
    const Eigen::VectorXd u = solver.solve(rhs);
    for (int i = 0; i < m; ++i) {
      const VertexId x = interior[static_cast<std::size_t>(i)];
      result.weights_[static_cast<std::size_t>(x) * b + zi] = u[i];
    }
  }
  return result;
}

ValueField exact_distance_field(const DistanceField& distances) {
  ValueField field;
  field.method = Method::kOracleDistance;
  field.values = distances.dist;
  return field;
}

ValueField nearest_label_field(const Graph& graph, const BoundaryCondition& boundary) {
  if (boundary.labelled().empty()) throw std::invalid_argument("boundary set is empty");
  if (!graph.unit_cost()) throw std::invalid_argument("nearest-label requires unit costs");

  // Multi-source BFS keeping, per vertex, the lexicographically least
  // (hops, label value, label vertex) among nearest labelled vertices.
  struct Best {
    long long hops = kInfiniteHops;
    double label = 0.0;
    VertexId source = -1;
  };
  std::vector<Best> best(static_cast<std::size_t>(graph.vertex_count()));
  std::deque<VertexId> queue;
  for (std::size_t i = 0; i < boundary.labelled().size(); ++i) {
    const VertexId z = boundary.labelled()[i];
    auto& slot = best[static_cast<std::size_t>(z)];
    const double y = boundary.labels()[i];
    if (slot.hops > 0 || y < slot.label || (y == slot.label && z < slot.source)) {
      slot = {0, y, z};
    }
  }
  for (VertexId z : boundary.labelled()) queue.push_back(z);
  // Plain BFS layering: process strictly by hop count so ties resolve by
  // (label value, vertex id) within a layer.
  std::vector<VertexId> frontier(queue.begin(), queue.end());
  queue.clear();
  long long hops = 0;
  while (!frontier.empty()) {
    std::vector<VertexId> next;
    for (VertexId x : frontier) {
      const Best& bx = best[static_cast<std::size_t>(x)];
      if (bx.hops != hops) continue;
      for (VertexId y : graph.neighbors(x)) {
        auto& by = best[static_cast<std::size_t>(y)];
        const Best candidate{hops + 1, bx.label, bx.source};
        const bool improves =
            by.hops > candidate.hops ||
            (by.hops == candidate.hops &&
             (candidate.label < by.label ||
              (candidate.label == by.label && candidate.source < by.source)));
        if (improves) {
          const bool first_visit = by.hops == kInfiniteHops;
          by = candidate;
          if (first_visit) next.push_back(y);
        }
      }
    }
    frontier = std::move(next);
    ++hops;
  }

  ValueField field;
  field.method = Method::kNearestLabel;
  field.values.resize(static_cast<std::size_t>(graph.vertex_count()), 0.0);
  for (VertexId v = 0; v < graph.vertex_count(); ++v) {
    const Best& bv = best[static_cast<std::size_t>(v)];
    if (bv.hops == kInfiniteHops) {
      throw std::invalid_argument("nearest-label: vertex unreachable from the boundary");
    }
    field.values[static_cast<std::size_t>(v)] = bv.label;
  }
  return field;
}

}  // namespace pdeplan
