// Python bindings for the main operations: graph construction and metrics,
// instance generation, the three extension solvers, the greedy planner, and
// the certificate layer.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pdeplan/certificates.hpp"
#include "pdeplan/graph.hpp"
#include "pdeplan/harness.hpp"
#include "pdeplan/instances.hpp"
#include "pdeplan/planner.hpp"
#include "pdeplan/solvers.hpp"
#include "pdeplan/stats.hpp"

namespace py = pybind11;
using namespace pdeplan;

PYBIND11_MODULE(_pdeplan, m) {
  m.doc() = "sparse goal-conditioned value completion on graphs with greedy-planner audits";

  py::class_<Graph>(m, "Graph")
      .def_static(
          "build",
          [](VertexId n, const std::vector<std::pair<VertexId, VertexId>>& edges,
             const std::vector<double>& costs) { return Graph::build(n, edges, costs); },
          py::arg("vertex_count"), py::arg("edges"), py::arg("costs") = std::vector<double>{})
      .def_property_readonly("vertex_count", &Graph::vertex_count)
      .def_property_readonly("edge_count", &Graph::edge_count)
      .def_property_readonly("unit_cost", &Graph::unit_cost)
      .def("neighbors",
           [](const Graph& g, VertexId v) {
             const auto nb = g.neighbors(v);
             return std::vector<VertexId>(nb.begin(), nb.end());
           })
      .def("degree", &Graph::degree)
      .def("edges", &Graph::edges)
      .def("edge_cost", &Graph::edge_cost);

  py::class_<DistanceField>(m, "DistanceField")
      .def_readonly("goal", &DistanceField::goal)
      .def_readonly("dist", &DistanceField::dist)
      .def("reachable", &DistanceField::reachable)
      .def("__getitem__", [](const DistanceField& f, VertexId v) { return f[v]; });

  py::class_<GeometryClass>(m, "GeometryClass")
      .def_readonly("n_plus", &GeometryClass::n_plus)
      .def_readonly("n_zero", &GeometryClass::n_zero)
      .def_readonly("n_minus", &GeometryClass::n_minus)
      .def_readonly("amle_compatible", &GeometryClass::amle_compatible)
      .def_readonly("harmonic_compatible", &GeometryClass::harmonic_compatible)
      .def_readonly("extendable", &GeometryClass::extendable);

  py::class_<Subdivision>(m, "Subdivision")
      .def_readonly("graph", &Subdivision::graph)
      .def_readonly("vertex_image", &Subdivision::vertex_image)
      .def_readonly("k", &Subdivision::k)
      .def("first_vertex_toward", &Subdivision::first_vertex_toward);

  m.def("shortest_path_distances", &shortest_path_distances, py::arg("graph"), py::arg("goal"));
  m.def("subdivide", &subdivide, py::arg("graph"), py::arg("k"));
  m.def(
      "fill_distance",
      [](const Graph& g, const std::vector<VertexId>& target, const std::vector<VertexId>& lab) {
        return fill_distance(g, target, lab);
      },
      py::arg("graph"), py::arg("target_set"), py::arg("labelled_set"));
  m.def("geometry_classify", &geometry_classify, py::arg("graph"), py::arg("distances"),
        py::arg("x"));

  py::class_<MazeLayout>(m, "MazeLayout")
      .def_readonly("rows", &MazeLayout::rows)
      .def_readonly("cols", &MazeLayout::cols)
      .def("is_open", &MazeLayout::is_open)
      .def("open_cell_count", &MazeLayout::open_cell_count);

  py::class_<RefinedMaze>(m, "RefinedMaze")
      .def_readonly("graph", &RefinedMaze::graph)
      .def_readonly("cell", &RefinedMaze::cell);

  py::class_<BoundaryCondition>(m, "BoundaryCondition")
      .def(py::init<VertexId, std::vector<VertexId>, std::vector<double>, VertexId>(),
           py::arg("goal"), py::arg("labelled"), py::arg("labels"), py::arg("vertex_count"))
      .def_property_readonly("goal", &BoundaryCondition::goal)
      .def_property_readonly("labelled", &BoundaryCondition::labelled)
      .def_property_readonly("labels", &BoundaryCondition::labels)
      .def("is_labelled", &BoundaryCondition::is_labelled)
      .def("label_of", &BoundaryCondition::label_of);

  m.def("parse_layout", &parse_layout);
  m.def("builtin_layout", &builtin_layout);
  m.def("refine_to_graph", &refine_to_graph, py::arg("layout"), py::arg("r"));
  m.def("sample_boundary", &sample_boundary, py::arg("graph"), py::arg("distances"),
        py::arg("label_fraction"), py::arg("seed"), py::arg("noise_bound") = 0.0);

  py::class_<Rat64>(m, "Rat64")
      .def_readonly("num", &Rat64::num)
      .def_readonly("den", &Rat64::den)
      .def("value", &Rat64::value)
      .def("__repr__", &Rat64::str);

  py::class_<G7Expected>(m, "G7Expected")
      .def_readonly("original_label", &G7Expected::original_label)
      .def_readonly("goal", &G7Expected::goal)
      .def_readonly("decision_state", &G7Expected::decision_state)
      .def_readonly("branch_short", &G7Expected::branch_short)
      .def_readonly("branch_long", &G7Expected::branch_long)
      .def_readonly("far_label", &G7Expected::far_label)
      .def_readonly("harmonic_at_branch_long", &G7Expected::harmonic_at_branch_long)
      .def_readonly("harmonic_at_branch_short", &G7Expected::harmonic_at_branch_short)
      .def_readonly("amle_at_branch_short", &G7Expected::amle_at_branch_short)
      .def_readonly("amle_at_branch_long", &G7Expected::amle_at_branch_long)
      .def_readonly("omega_long_far", &G7Expected::omega_long_far)
      .def_readonly("omega_short_far", &G7Expected::omega_short_far)
      .def_readonly("action_gap", &G7Expected::action_gap)
      .def_readonly("eps_amle", &G7Expected::eps_amle)
      .def_readonly("eps_harmonic", &G7Expected::eps_harmonic)
      .def("dense_of_original", &G7Expected::dense_of_original);

  py::class_<G7Instance>(m, "G7Instance")
      .def_readonly("graph", &G7Instance::graph)
      .def_readonly("boundary", &G7Instance::boundary)
      .def_readonly("expected", &G7Instance::expected);

  m.def("builtin_g7", &builtin_g7);

  py::class_<LatticeCandidate>(m, "LatticeCandidate")
      .def_readonly("graph", &LatticeCandidate::graph)
      .def_readonly("boundary", &LatticeCandidate::boundary)
      .def_readonly("cell", &LatticeCandidate::cell);

  m.def("random_lattice_candidate", &random_lattice_candidate, py::arg("rows"), py::arg("cols"),
        py::arg("seed"));

  py::enum_<Method>(m, "Method")
      .value("harmonic", Method::kHarmonic)
      .value("finite_p", Method::kFiniteP)
      .value("amle", Method::kAmle)
      .value("nearest_label", Method::kNearestLabel)
      .value("oracle_distance", Method::kOracleDistance);

  py::class_<ValueField>(m, "ValueField")
      .def_readonly("values", &ValueField::values)
      .def_readonly("method", &ValueField::method)
      .def_readonly("p", &ValueField::p)
      .def_readonly("sweeps_used", &ValueField::sweeps_used)
      .def_readonly("terminal_residual_inf", &ValueField::terminal_residual_inf)
      .def_readonly("boundary_pinned", &ValueField::boundary_pinned)
      .def("__getitem__", [](const ValueField& f, VertexId v) { return f[v]; });

  m.def("solve_harmonic", &solve_harmonic, py::arg("graph"), py::arg("boundary"),
        py::arg("tolerance") = 1e-8);
  m.def("solve_p_picard", &solve_p_picard, py::arg("graph"), py::arg("boundary"), py::arg("p"),
        py::arg("max_sweeps") = 5000, py::arg("relaxation") = 0.05, py::arg("tolerance") = 1e-6);
  m.def("solve_amle", &solve_amle, py::arg("graph"), py::arg("boundary"),
        py::arg("max_sweeps") = 200000, py::arg("tolerance") = 1e-8);
  m.def("residual_field", &residual_field);
  m.def("exact_distance_field", &exact_distance_field);
  m.def("nearest_label_field", &nearest_label_field);

  py::class_<HarmonicMeasureField>(m, "HarmonicMeasureField")
      .def_property_readonly("boundary", &HarmonicMeasureField::boundary)
      .def("omega", &HarmonicMeasureField::omega, py::arg("source"), py::arg("z"))
      .def("row", [](const HarmonicMeasureField& f, VertexId source) {
        const auto row = f.row(source);
        return std::vector<double>(row.begin(), row.end());
      });

  m.def(
      "harmonic_measure",
      [](const Graph& graph, const std::vector<VertexId>& labelled) {
        return harmonic_measure(graph, labelled);
      },
      py::arg("graph"), py::arg("labelled_set"));

  py::enum_<Outcome>(m, "Outcome")
      .value("reached", Outcome::kReached)
      .value("loop", Outcome::kLoop)
      .value("overrun", Outcome::kOverrun);

  py::class_<RolloutResult>(m, "RolloutResult")
      .def_readonly("start", &RolloutResult::start)
      .def_readonly("outcome", &RolloutResult::outcome)
      .def_readonly("steps", &RolloutResult::steps)
      .def_readonly("visited", &RolloutResult::visited)
      .def_readonly("cycle", &RolloutResult::cycle)
      .def_readonly("boundary_touching", &RolloutResult::boundary_touching);

  m.def("greedy_step", &greedy_step, py::arg("graph"), py::arg("field"), py::arg("goal"),
        py::arg("state"));
  m.def(
      "rollout",
      [](const Graph& graph, const ValueField& field, VertexId goal, VertexId start,
         const BoundaryCondition* boundary) {
        return rollout(graph, field, goal, start, boundary);
      },
      py::arg("graph"), py::arg("field"), py::arg("goal"), py::arg("start"),
      py::arg("boundary") = nullptr);

  py::class_<BasinPartition>(m, "BasinPartition")
      .def_readonly("outcomes", &BasinPartition::outcomes)
      .def_readonly("failure_rate", &BasinPartition::failure_rate);

  m.def(
      "basin_partition",
      [](const Graph& graph, const ValueField& field, VertexId goal,
         const BoundaryCondition* boundary) {
        return basin_partition(graph, field, goal, boundary);
      },
      py::arg("graph"), py::arg("field"), py::arg("goal"), py::arg("boundary") = nullptr);

  py::class_<FailureCounts>(m, "FailureCounts")
      .def_readonly("interior", &FailureCounts::interior)
      .def_readonly("boundary_touching", &FailureCounts::boundary_touching);

  m.def(
      "classify_failures",
      [](const std::vector<RolloutResult>& outcomes, const BoundaryCondition& boundary) {
        return classify_failures(outcomes, boundary);
      },
      py::arg("outcomes"), py::arg("boundary"));

  py::class_<ActionGap>(m, "ActionGap")
      .def_readonly("true_best", &ActionGap::true_best)
      .def_readonly("gap", &ActionGap::gap);

  m.def("action_gap", &action_gap);
  m.def("local_error", &local_error);
  m.def("half_gap_test", &half_gap_test, py::arg("eps"), py::arg("gap"));

  py::class_<KendallResult>(m, "KendallResult")
      .def_readonly("tau", &KendallResult::tau)
      .def_readonly("inversions", &KendallResult::inversions)
      .def_readonly("small_gap_pairs", &KendallResult::small_gap_pairs)
      .def_readonly("bound_ok", &KendallResult::bound_ok);

  m.def("neighbour_kendall_tau", &neighbour_kendall_tau);

  py::class_<CertifiedStep>(m, "CertifiedStep")
      .def_readonly("state", &CertifiedStep::state)
      .def_readonly("eps", &CertifiedStep::eps)
      .def_readonly("gap", &CertifiedStep::gap)
      .def_readonly("pass_", &CertifiedStep::pass);

  py::class_<CertifiedRollout>(m, "CertifiedRollout")
      .def_readonly("certified", &CertifiedRollout::certified)
      .def_readonly("rollout", &CertifiedRollout::rollout)
      .def_readonly("steps", &CertifiedRollout::steps);

  m.def("certify_rollout", &certify_rollout);

  py::class_<FillCertificateStep>(m, "FillCertificateStep")
      .def_readonly("state", &FillCertificateStep::state)
      .def_readonly("fill", &FillCertificateStep::fill)
      .def_readonly("gap", &FillCertificateStep::gap)
      .def_readonly("slack", &FillCertificateStep::slack)
      .def_readonly("pass_", &FillCertificateStep::pass);

  py::class_<FillCertificate>(m, "FillCertificate")
      .def_readonly("passes", &FillCertificate::passes)
      .def_readonly("rollout", &FillCertificate::rollout)
      .def_readonly("steps", &FillCertificate::steps);

  m.def(
      "amle_fill_certificate",
      [](const Graph& graph, const BoundaryCondition& boundary, const DistanceField& distances,
         VertexId start, double eps_lab, double lipschitz, const ValueField* field) {
        return amle_fill_certificate(graph, boundary, distances, start, eps_lab, lipschitz,
                                     field);
      },
      py::arg("graph"), py::arg("boundary"), py::arg("distances"), py::arg("start"),
      py::arg("eps_lab") = 0.0, py::arg("lipschitz") = 1.0, py::arg("amle_field") = nullptr);

  py::class_<AntiAdmissibility>(m, "AntiAdmissibility")
      .def_readonly("fires", &AntiAdmissibility::fires)
      .def_readonly("witness", &AntiAdmissibility::witness)
      .def_readonly("margin", &AntiAdmissibility::margin)
      .def_readonly("q_form_checked", &AntiAdmissibility::q_form_checked)
      .def_readonly("q_form_fires", &AntiAdmissibility::q_form_fires);

  m.def(
      "harmonic_anti_admissibility",
      [](const Graph& graph, const BoundaryCondition& boundary,
         const HarmonicMeasureField& measures, const DistanceField& distances, VertexId state,
         const ValueField* field) {
        return harmonic_anti_admissibility(graph, boundary, measures, distances, state, field);
      },
      py::arg("graph"), py::arg("boundary"), py::arg("measures"), py::arg("distances"),
      py::arg("state"), py::arg("harmonic_field") = nullptr);

  py::class_<LocalSeparation>(m, "LocalSeparation")
      .def_readonly("separated", &LocalSeparation::separated)
      .def_readonly("clause_amle_half_gap", &LocalSeparation::clause_amle_half_gap)
      .def_readonly("clause_harmonic_anti", &LocalSeparation::clause_harmonic_anti)
      .def_readonly("harmonic_choice", &LocalSeparation::harmonic_choice)
      .def_readonly("amle_choice", &LocalSeparation::amle_choice);

  m.def("local_separation", &local_separation);

  py::class_<StrictExtremum>(m, "StrictExtremum")
      .def_readonly("vertex", &StrictExtremum::vertex)
      .def_readonly("depth", &StrictExtremum::depth)
      .def_readonly("is_minimum", &StrictExtremum::is_minimum);

  py::class_<ExtremaScan>(m, "ExtremaScan")
      .def_readonly("extrema", &ExtremaScan::extrema)
      .def_readonly("verdict", &ExtremaScan::verdict);

  m.def("strict_extrema_scan", &strict_extrema_scan);

  py::class_<SubdivisionMargin>(m, "SubdivisionMargin")
      .def_readonly("k", &SubdivisionMargin::k)
      .def_readonly("harmonic_q_diff", &SubdivisionMargin::harmonic_q_diff)
      .def_readonly("amle_q_diff", &SubdivisionMargin::amle_q_diff)
      .def_readonly("harmonic_branch", &SubdivisionMargin::harmonic_branch)
      .def_readonly("amle_branch", &SubdivisionMargin::amle_branch);

  py::class_<SubdivisionCheck>(m, "SubdivisionCheck")
      .def_readonly("rows", &SubdivisionCheck::rows)
      .def_readonly("k_independent", &SubdivisionCheck::k_independent);

  m.def(
      "subdivision_margin_check",
      [](const Graph& graph, const BoundaryCondition& boundary, VertexId state, VertexId a,
         VertexId b, const std::vector<int>& ks, double tolerance) {
        return subdivision_margin_check(graph, boundary, state, a, b, ks, tolerance);
      },
      py::arg("graph"), py::arg("boundary"), py::arg("state"), py::arg("branch_a"),
      py::arg("branch_b"), py::arg("ks"), py::arg("tolerance") = 1e-6);

  py::class_<Interval>(m, "Interval")
      .def_readonly("level", &Interval::level)
      .def_readonly("low", &Interval::low)
      .def_readonly("high", &Interval::high);

  m.def("wilson_interval", &wilson_interval, py::arg("successes"), py::arg("trials"),
        py::arg("level") = 0.95);
}
