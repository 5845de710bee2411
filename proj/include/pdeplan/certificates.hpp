// certificates.hpp — per-decision audit quantities and admissibility
// certificates: action gaps, local errors, the half-gap ordering test,
// rollout certification, the midrange fill-distance certificate, harmonic
// anti-admissibility, neighbour Kendall-tau with its gap bound, combined
// local separation, the strict-extrema scan, the bad-tail diagnostic, and
// subdivision-margin verification.
#pragma once

#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "pdeplan/graph.hpp"
#include "pdeplan/instances.hpp"
#include "pdeplan/planner.hpp"
#include "pdeplan/solvers.hpp"

namespace pdeplan {

inline constexpr double kInfiniteGap = std::numeric_limits<double>::infinity();

struct ActionGap {
  std::vector<VertexId> true_best;  // argmin of true Q over neighbours
  double gap = kInfiniteGap;        // +inf when every neighbour is optimal
};

// True Q at `state` is edge cost plus goal distance of the neighbour.
ActionGap action_gap(const Graph& graph, const DistanceField& distances, VertexId state);

// sup over neighbours of |surrogate - true| value.
double local_error(const Graph& graph, const DistanceField& distances, const ValueField& field,
                   VertexId state);

// Strict half-gap condition; an infinite gap passes vacuously.
inline bool half_gap_test(double eps, double gap) {
  return gap == kInfiniteGap || eps < gap / 2.0;
}

// Per-method view of one (state, goal) decision.
struct MethodDecision {
  VertexId chosen = -1;          // planner's pick after lexicographic ties
  bool in_true_best = false;
  double beta_true_gap = 0.0;    // true Q of pick minus optimal true Q
  double eps = 0.0;              // local error
  double tau = 1.0;              // neighbour Kendall-tau (degree >= 2)
  bool tau_defined = false;
  int inversions = 0;
  int small_gap_pairs = 0;       // M(2 eps)
  bool half_gap_certified = false;
};

MethodDecision audit_decision(const Graph& graph, const DistanceField& distances,
                              const ValueField& field, VertexId state);

struct KendallResult {
  double tau = 1.0;
  int inversions = 0;
  int small_gap_pairs = 0;  // M(2 eps_s)
  bool bound_ok = true;     // tau >= 1 - 4 M / (d(d-1)), i.e. I <= M
};

// Pairwise surrogate-vs-true inversion count at a degree >= 2 state.  True
// Q-ties are never inversions (they count into M(0)); surrogate ties are
// resolved by vertex identifier before comparison.
KendallResult neighbour_kendall_tau(const Graph& graph, const DistanceField& distances,
                                    const ValueField& field, VertexId state);

// Joint audit row for one (state, goal), combining the harmonic and AMLE
// sides; the exported columnar format mirrors these fields.
struct DecisionRecord {
  VertexId state = 0;
  VertexId goal = 0;
  int degree = 0;
  std::vector<VertexId> true_best;
  double action_gap = kInfiniteGap;
  bool tied_true_best = false;  // |true_best| > 1; excluded from inversion stats
  GeometryClass geometry;
  MethodDecision harmonic;
  MethodDecision amle;
  bool harmonic_inversion = false;
  bool amle_correction = false;
  bool certified_correction = false;
};

DecisionRecord build_decision_record(const Graph& graph, const DistanceField& distances,
                                     const ValueField& harmonic_field,
                                     const ValueField& amle_field, VertexId state);

struct CertifiedStep {
  VertexId state = 0;
  double eps = 0.0;
  double gap = kInfiniteGap;
  bool pass = false;
};

struct CertifiedRollout {
  bool certified = false;  // half-gap test passed at every visited non-goal state
  RolloutResult rollout;
  std::vector<CertifiedStep> steps;
};

// Walks the surrogate-greedy rollout and applies the half-gap test at every
// visited non-goal state before termination.  Certification is sufficient
// for success, not necessary.
CertifiedRollout certify_rollout(const Graph& graph, const DistanceField& distances,
                                 const ValueField& field, VertexId start);

struct FillCertificateStep {
  VertexId state = 0;
  long long fill = 0;     // fill distance of N(state) w.r.t. the labelled set
  double gap = kInfiniteGap;
  double slack = 0.0;     // gap/2 - (eps_lab + 2 L fill); pass iff > 0
  bool pass = false;
};

struct FillCertificate {
  bool passes = false;
  RolloutResult rollout;
  std::vector<FillCertificateStep> steps;
};

// Checks eps_lab + 2 L h(N(s_t)) < gap(s_t) / 2 along the midrange-greedy
// rollout.  L defaults to 1: the goal distance is 1-Lipschitz on unit graphs.
// Solves the midrange extension internally unless a field is supplied.
FillCertificate amle_fill_certificate(const Graph& graph, const BoundaryCondition& boundary,
                                      const DistanceField& distances, VertexId start,
                                      double eps_lab = 0.0, double lipschitz = 1.0,
                                      const ValueField* amle_field = nullptr);

struct AntiAdmissibility {
  bool fires = false;
  VertexId witness = -1;  // suboptimal neighbour strictly preferred by harmonic
  double margin = 0.0;    // worst-case measure-form margin of the witness
  bool q_form_checked = false;
  bool q_form_fires = false;  // same inequality on the solved harmonic field
};

// Measure-form search on unit-cost graphs: some b outside the true-best set
// with sum_z (omega_b(z) - omega_a(z)) Y(z) < 0 for every true-best a.  When
// a solved harmonic field is supplied the equivalent Q-form verdict is
// reported alongside.
AntiAdmissibility harmonic_anti_admissibility(const Graph& graph,
                                              const BoundaryCondition& boundary,
                                              const HarmonicMeasureField& measures,
                                              const DistanceField& distances, VertexId state,
                                              const ValueField* harmonic_field = nullptr);

struct LocalSeparation {
  bool separated = false;
  bool clause_amle_half_gap = false;
  bool clause_harmonic_anti = false;
  VertexId harmonic_choice = -1;
  VertexId amle_choice = -1;
};

// Separation at a decision state: the midrange half-gap clause plus the
// harmonic anti-admissibility clause (Q-form on the solved field).
LocalSeparation local_separation(const Graph& graph, const DistanceField& distances,
                                 const ValueField& harmonic_field, const ValueField& amle_field,
                                 const BoundaryCondition& boundary, VertexId state);

struct StrictExtremum {
  VertexId vertex = 0;
  double depth = 0.0;
  bool is_minimum = true;
};

struct ExtremaScan {
  std::vector<StrictExtremum> extrema;
  bool verdict = true;  // every depth bounded by the field's terminal residual
};

// Finds every interior strict local minimum / maximum and checks each depth
// against the field's reported residual sup-norm.
ExtremaScan strict_extrema_scan(const Graph& graph, const BoundaryCondition& boundary,
                                const ValueField& field);

struct BadTailInput {
  double tau = 1.0;
  double eps = 0.0;
  int degree = 2;
  int small_gap_pairs = 0;  // M(2 eps)
};

struct BadTailReport {
  double lhs_mass = 0.0;   // empirical mass of tau <= theta
  double rhs_bound = 0.0;  // 2^(alpha+1) C0 E[eps^alpha] / (1 - theta)
  bool hypothesis_ok = false;  // per-record small-gap CDF bound at 2 eps
  bool holds = false;          // hypothesis_ok and lhs <= rhs
};

BadTailReport bad_tail_diagnostic(std::span<const BadTailInput> records, double theta,
                                  double alpha, double c0);

struct SubdivisionMargin {
  int k = 1;
  double harmonic_q_diff = 0.0;  // Q(branch_a image) - Q(branch_b image)
  double amle_q_diff = 0.0;
  // Original neighbour whose image each surrogate's planner picks at the state.
  VertexId harmonic_branch = -1;
  VertexId amle_branch = -1;
};

struct SubdivisionCheck {
  std::vector<SubdivisionMargin> rows;
  bool k_independent = true;  // every margin matches the k = 1 margin within tolerance
};

// Subdivides, scales labels by k, re-solves both endpoint surrogates, and
// reports the first-step Q-difference between the images of the two branches.
SubdivisionCheck subdivision_margin_check(const Graph& graph, const BoundaryCondition& boundary,
                                          VertexId state, VertexId branch_a, VertexId branch_b,
                                          std::span<const int> ks, double tolerance = 1e-6);

}  // namespace pdeplan
