#include "pdeplan/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace pdeplan {

std::string load_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

Graph parse_edge_list(const std::string& text) {
  std::istringstream in(text);
  long long n = 0;
  long long m = 0;
  if (!(in >> n >> m)) throw std::invalid_argument("edge list: missing 'n m' header");
  std::vector<std::pair<VertexId, VertexId>> edges;
  std::vector<double> costs;
  bool weighted = false;
  std::string line;
  std::getline(in, line);  // finish header line
  while (static_cast<long long>(edges.size()) < m && std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    long long u = 0;
    long long v = 0;
    if (!(row >> u >> v)) throw std::invalid_argument("edge list: malformed edge line");
    double cost = 0.0;
    if (row >> cost) {
      weighted = true;
      costs.resize(edges.size(), 1.0);
      costs.push_back(cost);
    } else if (weighted) {
      costs.push_back(1.0);
    }
    edges.emplace_back(static_cast<VertexId>(u), static_cast<VertexId>(v));
  }
  if (static_cast<long long>(edges.size()) != m) {
    throw std::invalid_argument("edge list: fewer edges than declared");
  }
  return Graph::build(static_cast<VertexId>(n), edges, weighted ? costs : std::vector<double>{});
}

std::string format_edge_list(const Graph& graph) {
  std::ostringstream out;
  out << graph.vertex_count() << " " << graph.edge_count() << "\n";
  const auto edges = graph.edges();
  const auto costs = graph.edge_costs();
  for (std::size_t i = 0; i < edges.size(); ++i) {
    out << edges[i].first << " " << edges[i].second;
    if (!costs.empty()) out << " " << fmt_general(costs[i]);
    out << "\n";
  }
  return out.str();
}

MazeLayout load_layout(const std::string& name_or_path) {
  if (name_or_path == "medium" || name_or_path == "large") {
    return parse_layout(builtin_layout(name_or_path));
  }
  return parse_layout(load_text_file(name_or_path));
}

BoundaryCondition parse_boundary_override(const std::string& text, VertexId goal,
                                          VertexId vertex_count) {
  std::istringstream in(text);
  std::vector<VertexId> labelled;
  std::vector<double> labels;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    long long v = 0;
    double y = 0.0;
    if (!(row >> v >> y)) continue;
    labelled.push_back(static_cast<VertexId>(v));
    labels.push_back(y);
  }
  return BoundaryCondition(goal, std::move(labelled), std::move(labels), vertex_count);
}

std::string format_value_field(const ValueField& field) {
  std::ostringstream out;
  out << "# method " << method_name(field.method, field.p) << "\n";
  out << "# sweeps " << field.sweeps_used << "\n";
  out << "# residual " << fmt_general(field.terminal_residual_inf) << "\n";
  for (std::size_t v = 0; v < field.values.size(); ++v) {
    out << v << " " << fmt_general(field.values[v]) << "\n";
  }
  return out.str();
}

std::string format_rollout_record(const RolloutResult& result) {
  std::ostringstream out;
  out << result.start << " ";
  switch (result.outcome) {
    case Outcome::kReached:
      out << "reached";
      break;
    case Outcome::kLoop:
      out << "loop";
      break;
    case Outcome::kOverrun:
      out << "overrun";
      break;
  }
  out << " " << result.steps << " ";
  if (result.cycle.empty()) {
    out << "-";
  } else {
    for (std::size_t i = 0; i < result.cycle.size(); ++i) {
      if (i) out << ",";
      out << result.cycle[i];
    }
  }
  out << " " << (result.boundary_touching ? 1 : 0);
  return out.str();
}

std::string format_decision_records(const std::vector<DecisionRecord>& records) {
  std::ostringstream out;
  out << "state goal degree action_gap tied n_plus n_zero n_minus "
         "harm_choice harm_eps harm_tau harm_inversions harm_small_gap "
         "amle_choice amle_eps amle_tau amle_inversions amle_small_gap "
         "harm_inverted amle_corrected certified\n";
  for (const auto& r : records) {
    out << r.state << " " << r.goal << " " << r.degree << " "
        << (r.action_gap == kInfiniteGap ? "inf" : fmt_general(r.action_gap)) << " "
        << (r.tied_true_best ? 1 : 0) << " " << r.geometry.n_plus << " " << r.geometry.n_zero
        << " " << r.geometry.n_minus << " " << r.harmonic.chosen << " "
        << fmt_general(r.harmonic.eps) << " " << fmt_general(r.harmonic.tau) << " "
        << r.harmonic.inversions << " " << r.harmonic.small_gap_pairs << " " << r.amle.chosen
        << " " << fmt_general(r.amle.eps) << " " << fmt_general(r.amle.tau) << " "
        << r.amle.inversions << " " << r.amle.small_gap_pairs << " "
        << (r.harmonic_inversion ? 1 : 0) << " " << (r.amle_correction ? 1 : 0) << " "
        << (r.certified_correction ? 1 : 0) << "\n";
  }
  return out.str();
}

std::string fmt_fixed(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, value);
  return buf;
}

std::string fmt_general(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

void write_report_table(const ReportTable& table, const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);

  // Aligned text rendering.
  std::vector<std::size_t> width(table.columns.size());
  for (std::size_t c = 0; c < table.columns.size(); ++c) width[c] = table.columns[c].size();
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) {
      throw std::invalid_argument("report table '" + table.name + "': ragged row");
    }
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream text;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    text << (c ? "  " : "");
    text << table.columns[c] << std::string(width[c] - table.columns[c].size(), ' ');
  }
  text << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      text << (c ? "  " : "");
      text << row[c] << std::string(width[c] - row[c].size(), ' ');
    }
    text << "\n";
  }
  write_text_file(directory / (table.name + ".txt"), text.str());

  nlohmann::json doc;
  doc["table"] = table.name;
  doc["columns"] = table.columns;
  doc["rows"] = table.rows;
  write_text_file(directory / (table.name + ".json"), doc.dump(2) + "\n");
}

ReportTable read_report_table_json(const std::filesystem::path& file) {
  const auto doc = nlohmann::json::parse(load_text_file(file));
  ReportTable table;
  table.name = doc.at("table").get<std::string>();
  table.columns = doc.at("columns").get<std::vector<std::string>>();
  table.rows = doc.at("rows").get<std::vector<std::vector<std::string>>>();
  return table;
}

void emit_reports(const std::vector<ReportTable>& tables,
                  const std::filesystem::path& directory) {
  for (const auto& table : tables) write_report_table(table, directory);
}

}  // namespace pdeplan
