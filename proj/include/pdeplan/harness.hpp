// harness.hpp — experiment orchestration: the phase-diagram grid, decision
// audits, failure decomposition, the p-family sweep, the midrange iteration
// audit, reference baselines, the adversarial lattice search, and report
// assembly.
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pdeplan/certificates.hpp"
#include "pdeplan/instances.hpp"
#include "pdeplan/io.hpp"
#include "pdeplan/planner.hpp"
#include "pdeplan/solvers.hpp"
#include "pdeplan/stats.hpp"

namespace pdeplan {

// Immutable per-configuration instance shared by every method run on it.
struct CaseData {
  ExperimentConfig config;  // method field ignored here
  Graph graph;
  DistanceField distances;
  BoundaryCondition boundary;
  VertexId goal = 0;
  std::vector<VertexId> eval_starts;
};

// The goal position is a function of (layout, seed) alone: an open layout
// cell plus within-cell fractions, mapped into the refined grid; labels and
// eval starts use streams derived from the full configuration key.
std::shared_ptr<const CaseData> build_case(const ExperimentConfig& config);

struct SolverReport {
  int sweeps = 0;
  double residual = 0.0;
};

struct ConfigResult {
  ExperimentConfig config;  // method field set
  std::shared_ptr<const CaseData> data;
  std::shared_ptr<const ValueField> field;
  std::vector<RolloutResult> rollouts;  // one per eval start
  double success_rate = 0.0;
  double loop_share = 0.0;
  long long interior_failures = 0;
  long long boundary_touching_failures = 0;
  SolverReport solver;
};

ValueField solve_with_method(const Graph& graph, const BoundaryCondition& boundary,
                             const DistanceField& distances, const MethodSpec& method,
                             const SolverBudget& budget);

ConfigResult run_config(std::shared_ptr<const CaseData> data, const MethodSpec& method);

struct GridSpec {
  std::vector<std::string> layouts{"medium", "large"};
  std::vector<int> refines{4, 8};
  std::vector<double> label_fractions{0.02, 0.08};
  std::vector<std::uint64_t> seeds{54, 55, 56};
  int eval_pairs = 128;
  SolverBudget budget;  // zero fields resolve to per-method defaults
  bool per_pair_goals = false;

  std::vector<ExperimentConfig> expand() const;
};

struct PhaseDiagram {
  std::vector<ConfigResult> results;
  std::map<std::string, StatsSummary> per_method;
  std::optional<PairedLift> amle_vs_harmonic;  // percentage points
};

PhaseDiagram run_phase_diagram(const GridSpec& grid, const std::vector<MethodSpec>& methods,
                               int bootstrap_resamples = 10000, std::uint64_t stats_seed = 99,
                               int threads = 0);

struct OrderingMetrics {
  long long decisions = 0;
  long long tau_decisions = 0;  // degree >= 2 subset
  double tau_lt_05_rate = 0.0;
  double best_agree_rate = 0.0;
  double mean_beta_true_gap = 0.0;
  double positive_gap_rate = 0.0;
  double tau_mean = 0.0;
};

struct AuditSummary {
  std::string scope;  // "all" | "eval_rollouts"
  std::map<std::string, OrderingMetrics> per_method;
};

AuditSummary ordering_audit(const std::vector<ConfigResult>& results, const std::string& scope);

struct MechanismSummary {
  long long decisions = 0;  // rollout-weighted, pooled over both endpoint methods
  double share_both_compatible = 0.0;
  double share_amle_only = 0.0;
  double share_both_incompatible = 0.0;
  long long non_tied = 0;
  long long inversions = 0;
  double inversion_rate = 0.0;
  double inversion_in_primary_share = 0.0;
  double amle_correction_rate = 0.0;
  double certified_correction_rate = 0.0;
};

MechanismSummary mechanism_audit(const std::vector<ConfigResult>& results);

struct FailureRow {
  std::string method;
  std::string config_key;  // empty for pooled rows
  long long pairs = 0;
  long long loops = 0;
  long long interior = 0;
  long long boundary_touching = 0;
};

struct FailureDecomposition {
  std::vector<FailureRow> per_config;
  std::vector<FailureRow> pooled;  // one per method
};

FailureDecomposition failure_decomposition(const std::vector<ConfigResult>& results);

struct PFamilyRow {
  std::string method;
  double success_mean = 0.0;
  double success_sd = 0.0;
  double loop_mean = 0.0;
  double low_tau_rate = 0.0;
  double best_agree_rate = 0.0;
  double mean_beta_true_gap = 0.0;
  double tau_mean = 0.0;
  long long converged_cells = 0;
  long long cells = 0;
  double mean_residual = 0.0;
  double max_residual = 0.0;
  bool certification_incomplete = false;  // residual above 10x the p tolerance
};

struct PFamilySweep {
  std::vector<ConfigResult> results;
  std::vector<PFamilyRow> rows;
};

// p = 2 runs the direct harmonic endpoint, infinity the midrange endpoint,
// finite p the relaxed Picard solver; optionally adds a Picard p = 2 row for
// the solver cross-check.
PFamilySweep p_family_sweep(const GridSpec& grid, const std::vector<double>& p_values,
                            bool include_p2_picard = true, int threads = 0);

struct IterationAuditRow {
  int budget = 0;
  double success_mean = 0.0;
  double success_sd = 0.0;
  double loop_share = 0.0;
  double mean_residual = 0.0;
  double max_residual = 0.0;
};

std::vector<IterationAuditRow> amle_iteration_audit(const GridSpec& subset,
                                                    const std::vector<int>& budgets,
                                                    int threads = 0);

std::vector<ConfigResult> baselines(const GridSpec& grid, int threads = 0);

struct AdversarialWitness {
  int rows = 0;
  int cols = 0;
  std::uint64_t candidate_seed = 0;
  double harmonic_success = 0.0;
  double amle_success = 0.0;
  LatticeCandidate candidate;
  ValueField harmonic_field;
  ValueField amle_field;
  std::vector<RolloutResult> amle_failures;
  bool reverified = false;
};

struct AdversarialSearch {
  long long candidates_tested = 0;
  std::vector<AdversarialWitness> witnesses;
};

// Solves both endpoints to the stated tolerance on random lattice candidates,
// rolls out from every non-boundary vertex, and emits re-verified witnesses
// where harmonic success strictly exceeds the midrange endpoint's.
AdversarialSearch adversarial_search(const std::vector<std::pair<int, int>>& lattice_sizes,
                                     int budget, std::uint64_t seed, double tolerance = 1e-8);

struct PlateauDiagnostic {
  bool is_plateau = false;  // value oscillation <= 2 tol |cycle|
  double oscillation = 0.0;
  double plateau_mean = 0.0;
  long long nearest_label_hops = 0;   // hop distance from the cycle to the labelled set
  double nearest_label_max = 0.0;     // largest label among the nearest labelled vertices
  bool has_nearby_label = false;
};

PlateauDiagnostic witness_plateau_diagnostic(const AdversarialWitness& witness,
                                             const RolloutResult& failure,
                                             double tolerance = 1e-8);

// Report-table builders (file stems a01..a10).
ReportTable make_rollout_cells_table(const std::vector<ConfigResult>& results);
ReportTable make_rollout_grid_table(const std::vector<ConfigResult>& results);
ReportTable make_ordering_table(const std::vector<AuditSummary>& audits);
ReportTable make_subdivision_table(const SubdivisionCheck& check, VertexId branch_a,
                                   VertexId branch_b);
ReportTable make_p_sweep_table(const PFamilySweep& sweep);
ReportTable make_baselines_table(const std::vector<ConfigResult>& results);
ReportTable make_iteration_table(const std::vector<IterationAuditRow>& rows);
ReportTable make_solver_audit_table(const PFamilySweep& sweep, double p_tolerance = 1e-6);
ReportTable make_mechanism_table(const MechanismSummary& summary);
ReportTable make_failure_table(const FailureDecomposition& decomposition);
ReportTable make_p_family_table(const PFamilySweep& sweep);
ReportTable make_adversarial_table(const AdversarialSearch& search);

}  // namespace pdeplan
