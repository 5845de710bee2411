// solvers.hpp — boundary-pinned Dirichlet extension solvers on unit-cost
// graphs: harmonic (p = 2, sparse direct solve), finite-p relaxed Picard
// sweeps, and the AMLE midrange iteration; plus residual reports and the
// harmonic-measure computation.
#pragma once

#include <span>
#include <string>
#include <vector>

#include "pdeplan/graph.hpp"
#include "pdeplan/instances.hpp"

namespace pdeplan {

enum class Method { kHarmonic, kFiniteP, kAmle, kNearestLabel, kOracleDistance };

std::string method_name(Method method, double p = 0.0);

struct ValueField {
  std::vector<double> values;
  Method method = Method::kAmle;
  double p = 0.0;  // finite-p exponent, meaningful for kFiniteP only
  int sweeps_used = 0;
  double terminal_residual_inf = 0.0;
  bool boundary_pinned = true;

  double operator[](VertexId v) const { return values[static_cast<std::size_t>(v)]; }
};

// Interior values satisfy the neighbour-averaging equation; solved directly
// via a sparse factorization of the interior Laplacian, so the reported
// residual is rounding-level (well below any practical tolerance argument).
ValueField solve_harmonic(const Graph& graph, const BoundaryCondition& boundary,
                          double tolerance = 1e-8);

// Relaxed Gauss-Seidel Picard sweeps of the local p-Laplacian update: the
// one-variable equation sum_y |u(y) - t|^(p-2) (u(y) - t) = 0 is solved by
// bisection at each interior vertex (the function is monotone in t), then the
// value moves by the relaxation fraction toward the root.  Terminates when
// the unrelaxed update falls below `tolerance` in sup norm, or at the sweep
// budget.
ValueField solve_p_picard(const Graph& graph, const BoundaryCondition& boundary, double p,
                          int max_sweeps = 5000, double relaxation = 0.05,
                          double tolerance = 1e-6);

// Gauss-Seidel sweeps of the midrange update over interior vertices in
// ascending identifier order, starting from the boundary-label mean.
// A tolerance of zero runs exactly `max_sweeps` sweeps (fixed-budget mode).
ValueField solve_amle(const Graph& graph, const BoundaryCondition& boundary,
                      int max_sweeps = 200000, double tolerance = 1e-8);

// Method-matched local defect at every interior vertex (zero on the
// boundary): averaging defect for harmonic, p-update defect for finite p,
// midrange defect for AMLE.
std::vector<double> residual_field(const Graph& graph, const BoundaryCondition& boundary,
                                   const ValueField& field);

double residual_sup_norm(const Graph& graph, const BoundaryCondition& boundary,
                         const ValueField& field);

// Hitting distribution of the simple random walk on the labelled set,
// computed as |labelled| harmonic indicator solves sharing one factorization.
class HarmonicMeasureField {
 public:
  const std::vector<VertexId>& boundary() const { return boundary_; }
  // omega_source(z): probability that the walk from `source` is absorbed at z
  double omega(VertexId source, VertexId z) const;
  std::span<const double> row(VertexId source) const;  // aligned with boundary()

 private:
  friend HarmonicMeasureField harmonic_measure(const Graph&, std::span<const VertexId>);
  std::vector<VertexId> boundary_;
  std::vector<double> weights_;  // row-major: vertex x boundary-index
  VertexId vertex_count_ = 0;
};

HarmonicMeasureField harmonic_measure(const Graph& graph, std::span<const VertexId> labelled_set);

// Surrogates used by the reference baselines.
ValueField exact_distance_field(const DistanceField& distances);
ValueField nearest_label_field(const Graph& graph, const BoundaryCondition& boundary);

}  // namespace pdeplan
