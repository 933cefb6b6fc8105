// Expert concept dependency map: typed edges (directed prerequisite,
// undirected similarity), the derived asymmetric aggregation adjacency,
// and the association mask used by the similarity step.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cleki/data.hpp"

namespace cleki {

enum class EdgeKind { prerequisite, similarity };

struct ConceptEdge {
  int src = 0;
  int dst = 0;
  EdgeKind kind = EdgeKind::prerequisite;

  bool operator==(const ConceptEdge&) const = default;
};

struct ConceptGraph {
  int n_concepts = 0;
  std::vector<ConceptEdge> edges;  // canonical: similarity stored once with src < dst
};

// Square binary matrix over concepts.
struct BoolMatrix {
  int n = 0;
  std::vector<uint8_t> v;

  BoolMatrix() = default;
  explicit BoolMatrix(int size) : n(size), v(static_cast<size_t>(size) * size, 0) {}
  uint8_t& at(int i, int j) { return v[static_cast<size_t>(i) * n + j]; }
  uint8_t at(int i, int j) const { return v[static_cast<size_t>(i) * n + j]; }
};

// Which way prerequisite information flows in aggregation. The default makes
// the dependent concept attend to its prerequisites: A[dependent][prereq] = 1.
enum class PrereqFlow { dependent_from_prereq, prereq_from_dependent };

// Loads (src, dst, kind) rows; header row required. Rejects self-edges,
// canonicalizes similarity pairs, and deduplicates. Extends concept_ids.
ConceptGraph load_concept_edges(const std::string& path, IdMap& concept_ids);

// Aggregation adjacency with self-loops: A[i][j] = 1 means node i aggregates
// from node j. Similarity edges are symmetric, prerequisite edges one-way.
BoolMatrix build_adjacency(const ConceptGraph& graph,
                           PrereqFlow flow = PrereqFlow::dependent_from_prereq);

// Association mask: M[i][j] = 1 iff i != j and some edge (either type, either
// direction) connects them. Zero diagonal.
BoolMatrix build_mask(const ConceptGraph& graph);

// Row-wise neighbor lists of an adjacency matrix, ascending.
std::vector<std::vector<int>> neighbor_lists(const BoolMatrix& adjacency);

void write_concept_edges(const std::string& path, const ConceptGraph& graph,
                         const IdMap& concept_ids);

// Bundled load of the full input triple with a shared, consistent id space.
struct Bundle {
  Dataset data;
  ConceptGraph graph;
};
Bundle load_bundle(const std::string& logs_path, const std::string& q_path,
                   const std::string& graph_path, const LogSchema& schema = {});

}  // namespace cleki
