#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "gcde/matrix.hpp"

namespace gcde::io {

/// Matrix text format: a "<rows> <cols>" header line, then one line per row
/// with space-separated decimals. '#' starts a comment line; blank lines
/// are ignored. Writers emit 17 significant digits, so write/parse
/// round-trips are exact at double precision.
Matrix load_matrix(const std::string& path);
void save_matrix(const Matrix& m, const std::string& path);

/// Graph text format: "nodes <N>", optional flag lines "self_loops" /
/// "normalize", then one "u v" edge per line (0-indexed, undirected,
/// duplicates collapsed).
struct GraphFile {
  std::size_t node_count = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  bool self_loops = false;
  bool normalize = false;
};

GraphFile parse_graph_file(const std::string& path);

/// Dense symmetric adjacency from a parsed graph: symmetrized 0/1 edges,
/// then A+I when self_loops, then D^{-1/2} A D^{-1/2} when normalize.
/// A zero-degree node under normalize is a ValidationError.
Matrix adjacency_from_graph(const GraphFile& g);

Matrix load_graph(const std::string& path);

/// Loss history format: one "epoch loss" pair per line.
void save_loss_history(const std::vector<double>& losses,
                       const std::string& path);
std::vector<double> load_loss_history(const std::string& path);

/// %.17g rendering shared by all writers.
std::string format_double(double v);

}  // namespace gcde::io
