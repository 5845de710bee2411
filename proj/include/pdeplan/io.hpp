// io.hpp — text interchange: edge lists, layout files, boundary overrides,
// value-field exports, per-rollout record lines, decision-record columns, and
// the report tables (aligned text plus a JSON document per table).
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pdeplan/certificates.hpp"
#include "pdeplan/graph.hpp"
#include "pdeplan/instances.hpp"
#include "pdeplan/planner.hpp"
#include "pdeplan/solvers.hpp"

namespace pdeplan {

std::string load_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

// First line "n m", then m lines "u v [cost]".
Graph parse_edge_list(const std::string& text);
std::string format_edge_list(const Graph& graph);

// Builtin layout name ("medium" | "large") or a path to a mask file.
MazeLayout load_layout(const std::string& name_or_path);

// Lines "vertex value"; the goal must be one of the listed vertices.
BoundaryCondition parse_boundary_override(const std::string& text, VertexId goal,
                                          VertexId vertex_count);

// "vertex value" per line under a short metadata header.
std::string format_value_field(const ValueField& field);

// start, outcome tag, steps, cycle vertices (comma separated, '-' if none),
// boundary-touching flag.
std::string format_rollout_record(const RolloutResult& result);

std::string format_decision_records(const std::vector<DecisionRecord>& records);

struct ReportTable {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  friend bool operator==(const ReportTable&, const ReportTable&) = default;
};

// name.txt (aligned columns) and name.json under the directory.
void write_report_table(const ReportTable& table, const std::filesystem::path& directory);
ReportTable read_report_table_json(const std::filesystem::path& file);

void emit_reports(const std::vector<ReportTable>& tables, const std::filesystem::path& directory);

// Deterministic numeric formatting used throughout report emission.
std::string fmt_fixed(double value, int digits = 6);
std::string fmt_general(double value);

}  // namespace pdeplan
