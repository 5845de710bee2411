// pdeplan — command-line front end: worked-example regression, single solves
// and rollouts, the experiment grids, audits, and the adversarial search.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pdeplan/harness.hpp"
#include "pdeplan/io.hpp"
#include "pdeplan/rng.hpp"

namespace {

using namespace pdeplan;

int g_failures = 0;

void check(bool ok, const std::string& what) {
  std::printf("[%s] %s\n", ok ? "ok" : "FAIL", what.c_str());
  if (!ok) ++g_failures;
}

struct GridOptions {
  std::vector<std::string> layouts{"medium", "large"};
  std::vector<int> refines{4, 8};
  std::vector<double> label_fractions{0.02, 0.08};
  std::vector<std::uint64_t> seeds{54, 55, 56};
  int pairs = 128;
  int sweeps = 0;
  double tol = 0.0;
  double relax = 0.0;
  int threads = 0;
  bool per_pair_goals = false;

  GridSpec spec() const {
    GridSpec grid;
    grid.layouts = layouts;
    grid.refines = refines;
    grid.label_fractions = label_fractions;
    grid.seeds = seeds;
    grid.eval_pairs = pairs;
    grid.budget = SolverBudget{sweeps, tol, relax};
    grid.per_pair_goals = per_pair_goals;
    return grid;
  }
};

void add_grid_options(CLI::App* cmd, GridOptions& options) {
  cmd->add_option("--layouts,--layout", options.layouts, "layout names or mask files");
  cmd->add_option("--refines,--refine", options.refines, "refinement factors");
  cmd->add_option("--label-fractions,--label-fraction", options.label_fractions,
                  "label fractions in (0,1]");
  cmd->add_option("--seeds,--seed", options.seeds, "configuration seeds");
  cmd->add_option("--pairs", options.pairs, "evaluation pairs per configuration");
  cmd->add_option("--sweeps", options.sweeps, "solver sweep budget (0 = method default)");
  cmd->add_option("--tol", options.tol, "solver tolerance (0 = method default)");
  cmd->add_option("--relax", options.relax, "finite-p relaxation (0 = default 0.05)");
  cmd->add_option("--threads", options.threads, "worker threads (0 = hardware)");
  cmd->add_flag("--per-pair-goals", options.per_pair_goals,
                "sample a fresh goal per evaluation pair (one solve per pair)");
}

struct InstanceOptions {
  std::string graph_file;
  std::string layout;
  int refine = 4;
  double label_fraction = 0.05;
  std::uint64_t seed = 54;
  std::string boundary_file;
  long long goal = -1;
  std::string method = "amle";
  int sweeps = 0;
  double tol = 0.0;
  double relax = 0.0;
  int pairs = 128;
};

void add_instance_options(CLI::App* cmd, InstanceOptions& options) {
  cmd->add_option("--graph", options.graph_file, "edge-list file ('n m' header, 'u v [cost]')");
  cmd->add_option("--layout", options.layout, "builtin layout name or mask file");
  cmd->add_option("--refine", options.refine, "layout refinement factor");
  cmd->add_option("--label-fraction", options.label_fraction, "label fraction in (0,1]");
  cmd->add_option("--seed", options.seed, "sampling seed");
  cmd->add_option("--boundary", options.boundary_file, "boundary override file ('vertex value')");
  cmd->add_option("--goal", options.goal, "goal vertex (edge-list instances)");
  cmd->add_option("--method", options.method,
                  "surrogate: harmonic | p=<v> | amle | nearest | oracle");
  cmd->add_option("--sweeps", options.sweeps, "solver sweep budget (0 = method default)");
  cmd->add_option("--tol", options.tol, "solver tolerance (0 = method default)");
  cmd->add_option("--relax", options.relax, "finite-p relaxation (0 = default)");
  cmd->add_option("--pairs", options.pairs, "evaluation pairs (layout instances)");
}

struct BuiltInstance {
  Graph graph;
  DistanceField distances;
  BoundaryCondition boundary;
  VertexId goal = 0;
};

BuiltInstance build_instance(const InstanceOptions& options) {
  BuiltInstance inst;
  if (!options.graph_file.empty()) {
    inst.graph = parse_edge_list(load_text_file(options.graph_file));
    inst.goal = options.goal >= 0 ? static_cast<VertexId>(options.goal) : 0;
    inst.distances = shortest_path_distances(inst.graph, inst.goal);
    if (!options.boundary_file.empty()) {
      inst.boundary = parse_boundary_override(load_text_file(options.boundary_file), inst.goal,
                                              inst.graph.vertex_count());
    } else {
      inst.boundary = sample_boundary(inst.graph, inst.distances, options.label_fraction,
                                      derive_seed(options.seed, "cli|labels"));
    }
    return inst;
  }
  if (options.layout.empty()) {
    throw CLI::ValidationError("instance", "provide --graph or --layout");
  }
  ExperimentConfig config;
  config.layout = options.layout;
  config.refine = options.refine;
  config.label_fraction = options.label_fraction;
  config.seed = options.seed;
  config.eval_pairs = options.pairs;
  const auto data = build_case(config);
  inst.graph = data->graph;
  inst.distances = data->distances;
  inst.boundary = data->boundary;
  inst.goal = data->goal;
  return inst;
}

void emit_or_print(const std::vector<ReportTable>& tables, const std::string& out_dir) {
  if (!out_dir.empty()) {
    emit_reports(tables, out_dir);
    std::printf("reports written to %s\n", out_dir.c_str());
  }
  for (const auto& table : tables) {
    std::printf("\n== %s ==\n", table.name.c_str());
    for (const auto& column : table.columns) std::printf("%s  ", column.c_str());
    std::printf("\n");
    for (const auto& row : table.rows) {
      for (const auto& cell : row) std::printf("%s  ", cell.c_str());
      std::printf("\n");
    }
  }
}

int run_g7() {
  const auto inst = builtin_g7();
  const auto& e = inst.expected;
  const auto distances = shortest_path_distances(inst.graph, e.goal);

  const auto harmonic = solve_harmonic(inst.graph, inst.boundary, 1e-9);
  const auto amle = solve_amle(inst.graph, inst.boundary, 200000, 1e-10);
  const auto measures = harmonic_measure(inst.graph, inst.boundary.labelled());

  check(std::abs(harmonic[e.branch_long] - e.harmonic_at_branch_long.value()) < 1e-9,
        "harmonic value at branch " + std::to_string(e.original_label[e.branch_long]) + " = " +
            e.harmonic_at_branch_long.str());
  check(std::abs(harmonic[e.branch_short] - e.harmonic_at_branch_short.value()) < 1e-9,
        "harmonic value at branch " + std::to_string(e.original_label[e.branch_short]) + " = " +
            e.harmonic_at_branch_short.str());
  check(std::abs(amle[e.branch_short] - e.amle_at_branch_short.value()) < 1e-8,
        "midrange value at branch " + std::to_string(e.original_label[e.branch_short]) + " = " +
            e.amle_at_branch_short.str());
  check(std::abs(amle[e.branch_long] - e.amle_at_branch_long.value()) < 1e-8,
        "midrange value at branch " + std::to_string(e.original_label[e.branch_long]) + " = " +
            e.amle_at_branch_long.str());
  check(std::abs(measures.omega(e.branch_long, e.far_label) - e.omega_long_far.value()) < 1e-9,
        "hitting weight omega_long(far) = " + e.omega_long_far.str());
  check(std::abs(measures.omega(e.branch_short, e.far_label) - e.omega_short_far.value()) < 1e-9,
        "hitting weight omega_short(far) = " + e.omega_short_far.str());
  check(greedy_step(inst.graph, harmonic, e.goal, e.decision_state) == e.branch_long,
        "harmonic greedy step at the decision state picks the long branch");
  check(greedy_step(inst.graph, amle, e.goal, e.decision_state) == e.branch_short,
        "midrange greedy step at the decision state picks the short branch");

  const auto gap = action_gap(inst.graph, distances, e.decision_state);
  check(gap.gap == e.action_gap.value() && gap.true_best == std::vector<VertexId>{e.branch_short},
        "action gap at the decision state = " + e.action_gap.str());
  check(std::abs(local_error(inst.graph, distances, amle, e.decision_state) -
                 e.eps_amle.value()) < 1e-8,
        "midrange local error = " + e.eps_amle.str());
  check(std::abs(local_error(inst.graph, distances, harmonic, e.decision_state) -
                 e.eps_harmonic.value()) < 1e-9,
        "harmonic local error = " + e.eps_harmonic.str());
  return g_failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse goal-conditioned value completion on graphs with greedy-planner audits"};
  app.require_subcommand(1);
  std::string out_dir;

  // ---- g7
  auto* g7 = app.add_subcommand("g7", "exact worked-example regression");

  // ---- solve / rollout
  InstanceOptions solve_options;
  auto* solve_cmd = app.add_subcommand("solve", "solve one instance and export the value field");
  add_instance_options(solve_cmd, solve_options);
  solve_cmd->add_option("--out", out_dir, "output directory");

  InstanceOptions rollout_options;
  long long rollout_start = -1;
  auto* rollout_cmd =
      app.add_subcommand("rollout", "greedy rollouts over one instance (record lines)");
  add_instance_options(rollout_cmd, rollout_options);
  rollout_cmd->add_option("--start", rollout_start, "single start vertex (default: all)");
  rollout_cmd->add_option("--out", out_dir, "output directory");

  // ---- grid commands
  GridOptions phase_grid;
  int resamples = 10000;
  auto* phase = app.add_subcommand("phase-diagram", "paired success grid over the desk layouts");
  add_grid_options(phase, phase_grid);
  phase->add_option("--resamples", resamples, "bootstrap resamples");
  phase->add_option("--out", out_dir, "report output directory");

  GridOptions ordering_grid;
  auto* ordering = app.add_subcommand("ordering-audit", "decision-scope ordering metrics");
  add_grid_options(ordering, ordering_grid);
  ordering->add_option("--out", out_dir, "report output directory");

  GridOptions mechanism_grid;
  auto* mechanism = app.add_subcommand("mechanism-audit", "geometry/inversion mechanism metrics");
  add_grid_options(mechanism, mechanism_grid);
  mechanism->add_option("--out", out_dir, "report output directory");

  GridOptions failure_grid;
  auto* failures = app.add_subcommand("decompose-failures", "interior vs boundary-touching split");
  add_grid_options(failures, failure_grid);
  failures->add_option("--out", out_dir, "report output directory");

  GridOptions psweep_grid;
  std::vector<std::string> p_values{"2", "4", "inf"};
  auto* psweep = app.add_subcommand("p-sweep", "family sweep across exponents");
  add_grid_options(psweep, psweep_grid);
  psweep->add_option("--p-values", p_values, "exponents (numbers or 'inf')");
  psweep->add_option("--out", out_dir, "report output directory");

  GridOptions iter_grid;
  iter_grid.refines = {8};
  iter_grid.seeds = {54, 55};
  std::vector<int> budgets{50, 200, 1000, 5000};
  auto* iter = app.add_subcommand("amle-iter-audit", "midrange sweep-budget audit");
  add_grid_options(iter, iter_grid);
  iter->add_option("--budgets", budgets, "ascending sweep budgets");
  iter->add_option("--out", out_dir, "report output directory");

  GridOptions baseline_grid;
  auto* baseline = app.add_subcommand("baselines", "nearest-label and oracle reference runs");
  add_grid_options(baseline, baseline_grid);
  baseline->add_option("--out", out_dir, "report output directory");

  std::vector<std::string> lattice_sizes{"4x4"};
  int search_budget = 2000;
  std::uint64_t search_seed = 20260510ull;
  auto* search = app.add_subcommand("adversarial-search",
                                    "random lattice search for harmonic-better witnesses");
  search->add_option("--sizes", lattice_sizes, "lattice sizes, e.g. 4x4 5x4");
  search->add_option("--budget", search_budget, "candidate budget");
  search->add_option("--seed", search_seed, "search seed");
  search->add_option("--out", out_dir, "report output directory");

  std::vector<int> subdivision_ks{1, 2, 4, 8, 16};
  auto* subdivide_cmd =
      app.add_subcommand("subdivide-verify", "margin stability under uniform subdivision");
  subdivide_cmd->add_option("--ks", subdivision_ks, "subdivision factors");
  subdivide_cmd->add_option("--out", out_dir, "report output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (g7->parsed()) return run_g7();

    if (solve_cmd->parsed()) {
      const auto inst = build_instance(solve_options);
      const auto field =
          solve_with_method(inst.graph, inst.boundary, inst.distances,
                            MethodSpec::parse(solve_options.method),
                            SolverBudget{solve_options.sweeps, solve_options.tol,
                                         solve_options.relax});
      const auto text = format_value_field(field);
      if (out_dir.empty()) {
        std::fputs(text.c_str(), stdout);
      } else {
        std::filesystem::create_directories(out_dir);
        write_text_file(std::filesystem::path(out_dir) / "value_field.txt", text);
        std::printf("value field written to %s/value_field.txt\n", out_dir.c_str());
      }
      return 0;
    }

    if (rollout_cmd->parsed()) {
      const auto inst = build_instance(rollout_options);
      const auto field =
          solve_with_method(inst.graph, inst.boundary, inst.distances,
                            MethodSpec::parse(rollout_options.method),
                            SolverBudget{rollout_options.sweeps, rollout_options.tol,
                                         rollout_options.relax});
      std::string lines;
      if (rollout_start >= 0) {
        const auto r = rollout(inst.graph, field, inst.goal,
                               static_cast<VertexId>(rollout_start), &inst.boundary);
        lines = format_rollout_record(r) + "\n";
      } else {
        const auto basin = basin_partition(inst.graph, field, inst.goal, &inst.boundary);
        for (const auto& r : basin.outcomes) lines += format_rollout_record(r) + "\n";
        std::printf("failure rate %.6f\n", basin.failure_rate);
      }
      std::fputs(lines.c_str(), stdout);
      if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        write_text_file(std::filesystem::path(out_dir) / "rollouts.txt", lines);
      }
      return 0;
    }

    if (phase->parsed()) {
      const auto diagram =
          run_phase_diagram(phase_grid.spec(), {MethodSpec{"harmonic", 0}, MethodSpec{"amle", 0}},
                            resamples, 99, phase_grid.threads);
      for (const auto& [name, stats] : diagram.per_method) {
        std::printf("%-9s success %.4f +- %.4f  bootstrap95 [%.4f, %.4f]", name.c_str(),
                    stats.mean, stats.sd, stats.bootstrap_ci.low, stats.bootstrap_ci.high);
        if (stats.wilson) {
          std::printf("  wilson95 [%.4f, %.4f]", stats.wilson->low, stats.wilson->high);
        }
        std::printf("\n");
      }
      if (diagram.amle_vs_harmonic) {
        std::printf("paired lift %+.2f pp, bootstrap95 [%+.2f, %+.2f]\n",
                    diagram.amle_vs_harmonic->mean, diagram.amle_vs_harmonic->ci.low,
                    diagram.amle_vs_harmonic->ci.high);
      }
      emit_or_print({make_rollout_grid_table(diagram.results),
                     make_rollout_cells_table(diagram.results)},
                    out_dir);
      return 0;
    }

    if (ordering->parsed()) {
      const auto diagram = run_phase_diagram(
          ordering_grid.spec(), {MethodSpec{"harmonic", 0}, MethodSpec{"amle", 0}}, 2000, 99,
          ordering_grid.threads);
      const std::vector<AuditSummary> audits{ordering_audit(diagram.results, "all"),
                                             ordering_audit(diagram.results, "eval_rollouts")};
      emit_or_print({make_ordering_table(audits)}, out_dir);
      return 0;
    }

    if (mechanism->parsed()) {
      const auto diagram = run_phase_diagram(
          mechanism_grid.spec(), {MethodSpec{"harmonic", 0}, MethodSpec{"amle", 0}}, 2000, 99,
          mechanism_grid.threads);
      emit_or_print({make_mechanism_table(mechanism_audit(diagram.results))}, out_dir);
      return 0;
    }

    if (failures->parsed()) {
      const auto diagram = run_phase_diagram(
          failure_grid.spec(), {MethodSpec{"harmonic", 0}, MethodSpec{"amle", 0}}, 2000, 99,
          failure_grid.threads);
      emit_or_print({make_failure_table(failure_decomposition(diagram.results))}, out_dir);
      return 0;
    }

    if (psweep->parsed()) {
      std::vector<double> ps;
      for (const auto& text : p_values) {
        ps.push_back(text == "inf" ? std::numeric_limits<double>::infinity() : std::stod(text));
      }
      const auto sweep = p_family_sweep(psweep_grid.spec(), ps, true, psweep_grid.threads);
      emit_or_print({make_p_sweep_table(sweep), make_solver_audit_table(sweep),
                     make_p_family_table(sweep)},
                    out_dir);
      return 0;
    }

    if (iter->parsed()) {
      const auto rows = amle_iteration_audit(iter_grid.spec(), budgets, iter_grid.threads);
      emit_or_print({make_iteration_table(rows)}, out_dir);
      return 0;
    }

    if (baseline->parsed()) {
      const auto results = baselines(baseline_grid.spec(), baseline_grid.threads);
      emit_or_print({make_baselines_table(results)}, out_dir);
      return 0;
    }

    if (search->parsed()) {
      std::vector<std::pair<int, int>> sizes;
      for (const auto& text : lattice_sizes) {
        const auto x = text.find('x');
        if (x == std::string::npos) throw CLI::ValidationError("sizes", "expected RxC, e.g. 4x4");
        sizes.emplace_back(std::stoi(text.substr(0, x)), std::stoi(text.substr(x + 1)));
      }
      const auto result = adversarial_search(sizes, search_budget, search_seed);
      std::printf("tested %lld candidates, %zu witnesses\n", result.candidates_tested,
                  result.witnesses.size());
      if (result.witnesses.empty()) {
        std::printf("no witnesses at this budget (reported, not failed)\n");
      }
      std::vector<ReportTable> tables{make_adversarial_table(result)};
      emit_or_print(tables, out_dir);
      if (!out_dir.empty()) {
        for (std::size_t i = 0; i < result.witnesses.size(); ++i) {
          const auto& w = result.witnesses[i];
          std::string dump = format_edge_list(w.candidate.graph);
          dump += "# goal " + std::to_string(w.candidate.boundary.goal()) + "\n";
          for (std::size_t j = 0; j < w.candidate.boundary.labelled().size(); ++j) {
            dump += std::to_string(w.candidate.boundary.labelled()[j]) + " " +
                    fmt_general(w.candidate.boundary.labels()[j]) + "\n";
          }
          dump += "# harmonic\n" + format_value_field(w.harmonic_field);
          dump += "# amle\n" + format_value_field(w.amle_field);
          write_text_file(std::filesystem::path(out_dir) /
                              ("witness_" + std::to_string(i) + ".txt"),
                          dump);
        }
      }
      return 0;
    }

    if (subdivide_cmd->parsed()) {
      const auto inst = builtin_g7();
      const auto& e = inst.expected;
      const auto check_result =
          subdivision_margin_check(inst.graph, inst.boundary, e.decision_state, e.branch_long,
                                   e.branch_short, subdivision_ks);
      emit_or_print({make_subdivision_table(check_result, e.branch_long, e.branch_short)},
                    out_dir);
      std::printf("k-independent: %s\n", check_result.k_independent ? "yes" : "no");
      return check_result.k_independent ? 0 : 1;
    }
  } catch (const std::exception& error) {
    std::fprintf(stderr, "error: %s\n", error.what());
    return 1;
  }
  return 0;
}
