#include "pdeplan/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pdeplan {

namespace {

void require_decision_state(const Graph& graph, const DistanceField& distances, VertexId state) {
  graph.check_vertex(state);
  if (state == distances.goal) {
    throw std::invalid_argument("decision state equals the goal");
  }
}

double true_q(const Graph& graph, const DistanceField& distances, VertexId state, VertexId y) {
  return graph.edge_cost(state, y) + distances[y];
}

}  // namespace

ActionGap action_gap(const Graph& graph, const DistanceField& distances, VertexId state) {
  require_decision_state(graph, distances, state);
  const auto nb = graph.neighbors(state);
  if (nb.empty()) throw std::invalid_argument("action_gap: isolated state");

  double best = kInfiniteGap;
  for (VertexId y : nb) best = std::min(best, true_q(graph, distances, state, y));

  ActionGap result;
  double runner_up = kInfiniteGap;
  for (VertexId y : nb) {
    const double q = true_q(graph, distances, state, y);
    if (q == best) {
      result.true_best.push_back(y);
    } else {
      runner_up = std::min(runner_up, q);
    }
  }
  result.gap = runner_up == kInfiniteGap ? kInfiniteGap : runner_up - best;
  return result;
}

double local_error(const Graph& graph, const DistanceField& distances, const ValueField& field,
                   VertexId state) {
  require_decision_state(graph, distances, state);
  double eps = 0.0;
  for (VertexId y : graph.neighbors(state)) {
    eps = std::max(eps, std::abs(field[y] - distances[y]));
  }
  return eps;
}

KendallResult neighbour_kendall_tau(const Graph& graph, const DistanceField& distances,
                                    const ValueField& field, VertexId state) {
  require_decision_state(graph, distances, state);
  const auto nb = graph.neighbors(state);
  const int d = static_cast<int>(nb.size());
  if (d < 2) throw std::invalid_argument("neighbour_kendall_tau: degree below 2");

  const double eps = local_error(graph, distances, field, state);
  KendallResult result;
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      const double qi = true_q(graph, distances, state, nb[static_cast<std::size_t>(i)]);
      const double qj = true_q(graph, distances, state, nb[static_cast<std::size_t>(j)]);
      if (std::abs(qi - qj) <= 2.0 * eps) ++result.small_gap_pairs;
      if (qi == qj) continue;  // true ties are never inversions
      // Surrogate order with identifier tie-break: i precedes j unless the
      // surrogate Q strictly favours j (ids ascend with the index).
      const double si = graph.edge_cost(state, nb[static_cast<std::size_t>(i)]) +
                        field[nb[static_cast<std::size_t>(i)]];
      const double sj = graph.edge_cost(state, nb[static_cast<std::size_t>(j)]) +
                        field[nb[static_cast<std::size_t>(j)]];
      const bool true_i_first = qi < qj;
      const bool surr_i_first = si <= sj;  // surrogate tie resolves to the smaller id
      if (true_i_first != surr_i_first) ++result.inversions;
    }
  }
  result.tau = 1.0 - 4.0 * static_cast<double>(result.inversions) /
                         (static_cast<double>(d) * static_cast<double>(d - 1));
  result.bound_ok = result.inversions <= result.small_gap_pairs;
  return result;
}

MethodDecision audit_decision(const Graph& graph, const DistanceField& distances,
                              const ValueField& field, VertexId state) {
  require_decision_state(graph, distances, state);
  const auto gap = action_gap(graph, distances, state);

  MethodDecision decision;
  decision.chosen = greedy_step(graph, field, distances.goal, state);
  decision.in_true_best = std::binary_search(gap.true_best.begin(), gap.true_best.end(),
                                             decision.chosen);
  double best_q = kInfiniteGap;
  for (VertexId y : graph.neighbors(state)) {
    best_q = std::min(best_q, true_q(graph, distances, state, y));
  }
  decision.beta_true_gap = true_q(graph, distances, state, decision.chosen) - best_q;
  decision.eps = local_error(graph, distances, field, state);
  decision.half_gap_certified = half_gap_test(decision.eps, gap.gap);
  if (graph.degree(state) >= 2) {
    const auto kendall = neighbour_kendall_tau(graph, distances, field, state);
    decision.tau = kendall.tau;
    decision.tau_defined = true;
    decision.inversions = kendall.inversions;
    decision.small_gap_pairs = kendall.small_gap_pairs;
  }
  return decision;
}

DecisionRecord build_decision_record(const Graph& graph, const DistanceField& distances,
                                     const ValueField& harmonic_field,
                                     const ValueField& amle_field, VertexId state) {
  DecisionRecord record;
  record.state = state;
  record.goal = distances.goal;
  record.degree = graph.degree(state);
  auto gap = action_gap(graph, distances, state);
  record.true_best = std::move(gap.true_best);
  record.action_gap = gap.gap;
  record.tied_true_best = record.true_best.size() > 1;
  record.geometry = geometry_classify(graph, distances, state);
  record.harmonic = audit_decision(graph, distances, harmonic_field, state);
  record.amle = audit_decision(graph, distances, amle_field, state);
  record.harmonic_inversion = !record.tied_true_best && !record.harmonic.in_true_best;
  record.amle_correction = record.harmonic_inversion && record.amle.in_true_best;
  record.certified_correction = record.harmonic_inversion && record.amle.half_gap_certified;
  return record;
}

CertifiedRollout certify_rollout(const Graph& graph, const DistanceField& distances,
                                 const ValueField& field, VertexId start) {
  CertifiedRollout result;
  result.rollout = rollout(graph, field, distances.goal, start);
  result.certified = true;
  for (std::size_t i = 0; i + 1 < result.rollout.visited.size(); ++i) {
    const VertexId state = result.rollout.visited[i];
    if (state == distances.goal) continue;
    CertifiedStep step;
    step.state = state;
    step.eps = local_error(graph, distances, field, state);
    step.gap = action_gap(graph, distances, state).gap;
    step.pass = half_gap_test(step.eps, step.gap);
    result.certified = result.certified && step.pass;
    result.steps.push_back(step);
  }
  return result;
}

FillCertificate amle_fill_certificate(const Graph& graph, const BoundaryCondition& boundary,
                                      const DistanceField& distances, VertexId start,
                                      double eps_lab, double lipschitz,
                                      const ValueField* amle_field) {
  if (!graph.unit_cost()) {
    throw std::invalid_argument("fill-distance certificate requires a unit-cost graph");
  }
  ValueField solved;
  if (amle_field == nullptr) {
    solved = solve_amle(graph, boundary);
    amle_field = &solved;
  }
  const auto hops = hops_to_labelled(graph, boundary.labelled());

  FillCertificate cert;
  cert.rollout = rollout(graph, *amle_field, boundary.goal(), start, &boundary);
  cert.passes = true;
  for (std::size_t i = 0; i + 1 < cert.rollout.visited.size(); ++i) {
    const VertexId state = cert.rollout.visited[i];
    if (state == boundary.goal()) continue;
    FillCertificateStep step;
    step.state = state;
    step.fill = 0;
    for (VertexId y : graph.neighbors(state)) {
      step.fill = std::max(step.fill, hops[static_cast<std::size_t>(y)]);
    }
    step.gap = action_gap(graph, distances, state).gap;
    const double bound = eps_lab + 2.0 * lipschitz * static_cast<double>(step.fill);
    step.slack = step.gap == kInfiniteGap ? kInfiniteGap : step.gap / 2.0 - bound;
    step.pass = step.gap == kInfiniteGap || bound < step.gap / 2.0;
    cert.passes = cert.passes && step.pass;
    cert.steps.push_back(step);
  }
  return cert;
}

AntiAdmissibility harmonic_anti_admissibility(const Graph& graph,
                                              const BoundaryCondition& boundary,
                                              const HarmonicMeasureField& measures,
                                              const DistanceField& distances, VertexId state,
                                              const ValueField* harmonic_field) {
  require_decision_state(graph, distances, state);
  if (!graph.unit_cost()) {
    throw std::invalid_argument("anti-admissibility search requires a unit-cost graph");
  }
  const auto gap = action_gap(graph, distances, state);

  // Measure-form value at v: sum_z omega_v(z) Y(z).
  const auto reconstructed = [&](VertexId v) {
    double h = 0.0;
    const auto row = measures.row(v);
    for (std::size_t j = 0; j < measures.boundary().size(); ++j) {
      h += row[j] * boundary.label_of(measures.boundary()[j]);
    }
    return h;
  };

  AntiAdmissibility result;
  for (VertexId b : graph.neighbors(state)) {
    if (std::binary_search(gap.true_best.begin(), gap.true_best.end(), b)) continue;
    const double hb = reconstructed(b);
    double margin = kInfiniteGap;  // min over true-best a of h(a) - h(b)
    for (VertexId a : gap.true_best) margin = std::min(margin, reconstructed(a) - hb);
    if (margin > 0.0 && (!result.fires || margin > result.margin)) {
      result.fires = true;
      result.witness = b;
      result.margin = margin;
    }
  }

  if (harmonic_field != nullptr) {
    result.q_form_checked = true;
    double best_true_q = kInfiniteGap;
    for (VertexId a : gap.true_best) {
      best_true_q = std::min(best_true_q, graph.edge_cost(state, a) + (*harmonic_field)[a]);
    }
    for (VertexId b : graph.neighbors(state)) {
      if (std::binary_search(gap.true_best.begin(), gap.true_best.end(), b)) continue;
      if (graph.edge_cost(state, b) + (*harmonic_field)[b] < best_true_q) {
        result.q_form_fires = true;
        break;
      }
    }
  }
  return result;
}

LocalSeparation local_separation(const Graph& graph, const DistanceField& distances,
                                 const ValueField& harmonic_field, const ValueField& amle_field,
                                 const BoundaryCondition& /*boundary*/, VertexId state) {
  require_decision_state(graph, distances, state);
  const auto gap = action_gap(graph, distances, state);

  LocalSeparation sep;
  const double eps_amle = local_error(graph, distances, amle_field, state);
  sep.clause_amle_half_gap = half_gap_test(eps_amle, gap.gap);

  double best_true_q = kInfiniteGap;
  for (VertexId a : gap.true_best) {
    best_true_q = std::min(best_true_q, graph.edge_cost(state, a) + harmonic_field[a]);
  }
  for (VertexId b : graph.neighbors(state)) {
    if (std::binary_search(gap.true_best.begin(), gap.true_best.end(), b)) continue;
    if (graph.edge_cost(state, b) + harmonic_field[b] < best_true_q) {
      sep.clause_harmonic_anti = true;
      break;
    }
  }
  sep.separated = sep.clause_amle_half_gap && sep.clause_harmonic_anti;
  sep.harmonic_choice = greedy_step(graph, harmonic_field, distances.goal, state);
  sep.amle_choice = greedy_step(graph, amle_field, distances.goal, state);
  return sep;
}

ExtremaScan strict_extrema_scan(const Graph& graph, const BoundaryCondition& boundary,
                                const ValueField& field) {
  ExtremaScan scan;
  double value_scale = 1.0;
  for (double v : field.values) value_scale = std::max(value_scale, std::abs(v));
  // Rounding guard: depths below a few ulps of the value scale are not
  // numerically meaningful relative to the reported residual.
  const double slack = 1e-12 * value_scale;

  for (VertexId x = 0; x < graph.vertex_count(); ++x) {
    if (boundary.is_labelled(x) || graph.degree(x) == 0) continue;
    double lo = kInfiniteGap;
    double hi = -kInfiniteGap;
    for (VertexId y : graph.neighbors(x)) {
      lo = std::min(lo, field[y]);
      hi = std::max(hi, field[y]);
    }
    if (lo > field[x]) {
      scan.extrema.push_back({x, lo - field[x], true});
    } else if (hi < field[x]) {
      scan.extrema.push_back({x, field[x] - hi, false});
    }
  }
  for (const auto& e : scan.extrema) {
    if (e.depth > field.terminal_residual_inf + slack) scan.verdict = false;
  }
  return scan;
}

BadTailReport bad_tail_diagnostic(std::span<const BadTailInput> records, double theta,
                                  double alpha, double c0) {
  if (!(alpha > 0.0) || !(c0 > 0.0)) throw std::invalid_argument("alpha and C0 must be positive");
  if (theta >= 1.0) throw std::invalid_argument("theta must be below 1");

  long long used = 0;
  long long bad = 0;
  double mean_eps_alpha = 0.0;
  BadTailReport report;
  report.hypothesis_ok = true;
  for (const auto& rec : records) {
    if (rec.degree < 2) continue;
    ++used;
    if (rec.tau <= theta) ++bad;
    mean_eps_alpha += std::pow(rec.eps, alpha);
    const double pairs = 0.5 * static_cast<double>(rec.degree) *
                         static_cast<double>(rec.degree - 1);
    const double cdf_at_2eps = static_cast<double>(rec.small_gap_pairs) / pairs;
    if (cdf_at_2eps > c0 * std::pow(2.0 * rec.eps, alpha) + 1e-12) {
      report.hypothesis_ok = false;
    }
  }
  if (used == 0) throw std::invalid_argument("bad_tail_diagnostic: no degree >= 2 records");
  mean_eps_alpha /= static_cast<double>(used);

  report.lhs_mass = static_cast<double>(bad) / static_cast<double>(used);
  report.rhs_bound = std::pow(2.0, alpha + 1.0) * c0 * mean_eps_alpha / (1.0 - theta);
  report.holds = report.hypothesis_ok && report.lhs_mass <= report.rhs_bound + 1e-12;
  return report;
}

SubdivisionCheck subdivision_margin_check(const Graph& graph, const BoundaryCondition& boundary,
                                          VertexId state, VertexId branch_a, VertexId branch_b,
                                          std::span<const int> ks, double tolerance) {
  if (!graph.has_edge(state, branch_a) || !graph.has_edge(state, branch_b)) {
    throw std::invalid_argument("subdivision check: branches must be neighbours of the state");
  }

  const auto margin_at = [&](int k) {
    const auto sub = subdivide(graph, k);

    std::vector<VertexId> labelled;
    std::vector<double> labels;
    for (std::size_t i = 0; i < boundary.labelled().size(); ++i) {
      labelled.push_back(sub.vertex_image[static_cast<std::size_t>(boundary.labelled()[i])]);
      labels.push_back(static_cast<double>(k) * boundary.labels()[i]);  // metric scaling
    }
    const BoundaryCondition scaled(sub.vertex_image[static_cast<std::size_t>(boundary.goal())],
                                   std::move(labelled), std::move(labels),
                                   sub.graph.vertex_count());

    const auto harmonic = solve_harmonic(sub.graph, scaled, 1e-7);
    const auto amle = solve_amle(sub.graph, scaled, 400000, 1e-10);

    SubdivisionMargin row;
    row.k = k;
    const VertexId image_state = sub.vertex_image[static_cast<std::size_t>(state)];
    const VertexId toward_a = sub.first_vertex_toward(state, branch_a);
    const VertexId toward_b = sub.first_vertex_toward(state, branch_b);
    row.harmonic_q_diff = harmonic[toward_a] - harmonic[toward_b];
    row.amle_q_diff = amle[toward_a] - amle[toward_b];
    const auto original_branch_of = [&](VertexId pick) -> VertexId {
      for (VertexId y : graph.neighbors(state)) {
        if (sub.first_vertex_toward(state, y) == pick) return y;
      }
      return -1;
    };
    row.harmonic_branch = original_branch_of(greedy_step(sub.graph, harmonic, scaled.goal(),
                                                         image_state));
    row.amle_branch = original_branch_of(greedy_step(sub.graph, amle, scaled.goal(), image_state));
    return row;
  };

  const SubdivisionMargin reference = margin_at(1);
  SubdivisionCheck check;
  for (int k : ks) {
    check.rows.push_back(k == 1 ? reference : margin_at(k));
    const auto& row = check.rows.back();
    if (std::abs(row.harmonic_q_diff - reference.harmonic_q_diff) > tolerance ||
        std::abs(row.amle_q_diff - reference.amle_q_diff) > tolerance) {
      check.k_independent = false;
    }
  }
  return check;
}

}  // namespace pdeplan
