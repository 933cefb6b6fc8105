#include "cleki/concept_graph.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "cleki/errors.hpp"
#include "delimited.hpp"

namespace cleki {

ConceptGraph load_concept_edges(const std::string& path, IdMap& concept_ids) {
  auto in = detail::open_or_throw(path);

  std::string line;
  size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    header = detail::split_fields(line);
    if (!header.empty()) break;
  }
  ConceptGraph graph;
  if (header.empty()) {
    graph.n_concepts = concept_ids.size();
    return graph;
  }
  if (!detail::is_header_row(header))
    throw DataError(path + ": header row required in concept-edge file");

  std::set<std::tuple<int, int, int>> seen;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = detail::split_fields(line);
    if (fields.empty()) continue;
    if (fields.size() < 3)
      throw DataError(path + ": expected (src, dst, kind) at line " + std::to_string(line_no));

    long long raw_src, raw_dst;
    if (!detail::parse_ll(fields[0], raw_src) || !detail::parse_ll(fields[1], raw_dst) ||
        raw_src < 0 || raw_dst < 0)
      throw DataError(path + ": bad concept id at line " + std::to_string(line_no));
    if (raw_src == raw_dst)
      throw DataError(path + ": self-edge rejected at line " + std::to_string(line_no));

    EdgeKind kind;
    if (fields[2] == "prerequisite") {
      kind = EdgeKind::prerequisite;
    } else if (fields[2] == "similarity") {
      kind = EdgeKind::similarity;
    } else {
      throw DataError(path + ": unknown edge kind '" + fields[2] + "' at line " +
                      std::to_string(line_no));
    }

    int src = concept_ids.add(raw_src);
    int dst = concept_ids.add(raw_dst);
    if (kind == EdgeKind::similarity && src > dst) std::swap(src, dst);
    if (seen.emplace(src, dst, static_cast<int>(kind)).second)
      graph.edges.push_back({src, dst, kind});
  }
  graph.n_concepts = concept_ids.size();
  return graph;
}

BoolMatrix build_adjacency(const ConceptGraph& graph, PrereqFlow flow) {
  BoolMatrix a(graph.n_concepts);
  for (int i = 0; i < a.n; ++i) a.at(i, i) = 1;  // every concept aggregates itself
  for (const auto& e : graph.edges) {
    if (e.kind == EdgeKind::similarity) {
      a.at(e.src, e.dst) = 1;
      a.at(e.dst, e.src) = 1;
    } else if (flow == PrereqFlow::dependent_from_prereq) {
      a.at(e.dst, e.src) = 1;  // dependent attends to its prerequisite
    } else {
      a.at(e.src, e.dst) = 1;
    }
  }
  return a;
}

BoolMatrix build_mask(const ConceptGraph& graph) {
  BoolMatrix m(graph.n_concepts);
  for (const auto& e : graph.edges) {
    m.at(e.src, e.dst) = 1;
    m.at(e.dst, e.src) = 1;
  }
  for (int i = 0; i < m.n; ++i) m.at(i, i) = 0;
  return m;
}

std::vector<std::vector<int>> neighbor_lists(const BoolMatrix& adjacency) {
  std::vector<std::vector<int>> nbrs(adjacency.n);
  for (int i = 0; i < adjacency.n; ++i)
    for (int j = 0; j < adjacency.n; ++j)
      if (adjacency.at(i, j)) nbrs[i].push_back(j);
  return nbrs;
}

void write_concept_edges(const std::string& path, const ConceptGraph& graph,
                         const IdMap& concept_ids) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  out << "src,dst,kind\n";
  for (const auto& e : graph.edges)
    out << concept_ids.to_raw[e.src] << ',' << concept_ids.to_raw[e.dst] << ','
        << (e.kind == EdgeKind::prerequisite ? "prerequisite" : "similarity") << '\n';
}

Bundle load_bundle(const std::string& logs_path, const std::string& q_path,
                   const std::string& graph_path, const LogSchema& schema) {
  LoadedLogs loaded = load_response_logs(logs_path, schema);
  IdMap concept_ids;
  QMatrix q = load_q_matrix(q_path, loaded.exercise_ids, concept_ids);
  ConceptGraph graph = load_concept_edges(graph_path, concept_ids);

  Bundle bundle;
  bundle.data = assemble_dataset(std::move(loaded), std::move(q), std::move(concept_ids));
  graph.n_concepts = bundle.data.n_concepts;
  bundle.data.q.n_concepts = bundle.data.n_concepts;
  bundle.graph = std::move(graph);
  return bundle;
}

}  // namespace cleki
