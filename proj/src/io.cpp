#include "gcde/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "gcde/errors.hpp"

namespace gcde::io {
namespace {

std::string at(const std::string& path, std::size_t line) {
  return path + ":" + std::to_string(line);
}

bool is_blank_or_comment(const std::string& line) {
  for (char ch : line) {
    if (ch == '#') return true;
    if (!std::isspace(static_cast<unsigned char>(ch))) return false;
  }
  return true;
}

// Pulls the next content line; returns false at end of file.
bool next_content_line(std::istream& in, std::string& line,
                       std::size_t& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    if (!is_blank_or_comment(line)) return true;
  }
  return false;
}

std::ifstream open_for_read(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError(path + ": cannot open for reading");
  }
  return in;
}

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw ParseError(path + ": cannot open for writing");
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Matrix load_matrix(const std::string& path) {
  std::ifstream in = open_for_read(path);
  std::string line;
  std::size_t line_no = 0;

  if (!next_content_line(in, line, line_no)) {
    throw ParseError(at(path, line_no) + ": missing \"<rows> <cols>\" header");
  }
  std::size_t rows = 0, cols = 0;
  {
    std::istringstream header(line);
    std::string extra;
    if (!(header >> rows >> cols) || rows == 0 || cols == 0 ||
        (header >> extra)) {
      throw ParseError(at(path, line_no) +
                       ": expected \"<rows> <cols>\" header, got \"" + line +
                       "\"");
    }
  }

  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!next_content_line(in, line, line_no)) {
      throw ParseError(at(path, line_no) + ": expected " +
                       std::to_string(rows) + " data rows, found " +
                       std::to_string(i));
    }
    std::istringstream row(line);
    for (std::size_t j = 0; j < cols; ++j) {
      if (!(row >> m(i, j))) {
        throw ParseError(at(path, line_no) + ": row has fewer than " +
                         std::to_string(cols) + " numeric entries");
      }
    }
    std::string extra;
    if (row >> extra) {
      throw ParseError(at(path, line_no) + ": row has more than " +
                       std::to_string(cols) + " entries");
    }
  }
  if (next_content_line(in, line, line_no)) {
    throw ParseError(at(path, line_no) + ": trailing content after " +
                     std::to_string(rows) + " data rows");
  }
  return m;
}

void save_matrix(const Matrix& m, const std::string& path) {
  std::ofstream out = open_for_write(path);
  out << m.rows() << ' ' << m.cols() << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j != 0) out << ' ';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
  if (!out) {
    throw ParseError(path + ": write failed");
  }
}

GraphFile parse_graph_file(const std::string& path) {
  std::ifstream in = open_for_read(path);
  std::string line;
  std::size_t line_no = 0;

  if (!next_content_line(in, line, line_no)) {
    throw ParseError(at(path, line_no) + ": missing \"nodes <N>\" header");
  }
  GraphFile g;
  {
    std::istringstream header(line);
    std::string keyword, extra;
    if (!(header >> keyword >> g.node_count) || keyword != "nodes" ||
        g.node_count == 0 || (header >> extra)) {
      throw ParseError(at(path, line_no) +
                       ": expected \"nodes <N>\" header, got \"" + line +
                       "\"");
    }
  }

  std::set<std::pair<std::size_t, std::size_t>> seen;
  while (next_content_line(in, line, line_no)) {
    std::istringstream body(line);
    std::string first;
    body >> first;
    if (first == "self_loops" || first == "normalize") {
      std::string extra;
      if (body >> extra) {
        throw ParseError(at(path, line_no) + ": flag line \"" + first +
                         "\" takes no arguments");
      }
      (first == "self_loops" ? g.self_loops : g.normalize) = true;
      continue;
    }
    std::size_t u = 0, v = 0;
    std::istringstream edge(line);
    std::string extra;
    if (!(edge >> u >> v) || (edge >> extra)) {
      throw ParseError(at(path, line_no) + ": expected \"u v\" edge, got \"" +
                       line + "\"");
    }
    if (u >= g.node_count || v >= g.node_count) {
      throw ParseError(at(path, line_no) + ": node id out of range for " +
                       std::to_string(g.node_count) + " nodes");
    }
    // Undirected: store each edge once, smaller endpoint first.
    const std::pair<std::size_t, std::size_t> key = std::minmax(u, v);
    if (seen.insert(key).second) {
      g.edges.push_back(key);
    }
  }
  return g;
}

Matrix adjacency_from_graph(const GraphFile& g) {
  if (g.node_count == 0) {
    throw ValidationError("graph: node count must be >= 1");
  }
  Matrix a(g.node_count, g.node_count);
  for (const auto& [u, v] : g.edges) {
    a(u, v) = 1.0;
    a(v, u) = 1.0;
  }
  if (g.self_loops) {
    for (std::size_t i = 0; i < g.node_count; ++i) a(i, i) += 1.0;
  }
  if (g.normalize) {
    Vector degree(g.node_count);
    for (std::size_t i = 0; i < g.node_count; ++i) {
      double deg = 0.0;
      for (std::size_t j = 0; j < g.node_count; ++j) deg += a(i, j);
      if (deg <= 0.0) {
        throw ValidationError(
            "graph: node " + std::to_string(i) +
            " has degree 0; cannot normalize (add self_loops or an edge)");
      }
      degree[i] = deg;
    }
    // a / sqrt(d_i * d_j) keeps entries like 1/sqrt(2)^2 exact.
    for (std::size_t i = 0; i < g.node_count; ++i) {
      for (std::size_t j = 0; j < g.node_count; ++j) {
        a(i, j) /= std::sqrt(degree[i] * degree[j]);
      }
    }
  }
  return a;
}

Matrix load_graph(const std::string& path) {
  return adjacency_from_graph(parse_graph_file(path));
}

void save_loss_history(const std::vector<double>& losses,
                       const std::string& path) {
  std::ofstream out = open_for_write(path);
  for (std::size_t epoch = 0; epoch < losses.size(); ++epoch) {
    out << epoch << ' ' << format_double(losses[epoch]) << '\n';
  }
  if (!out) {
    throw ParseError(path + ": write failed");
  }
}

std::vector<double> load_loss_history(const std::string& path) {
  std::ifstream in = open_for_read(path);
  std::vector<double> losses;
  std::string line;
  std::size_t line_no = 0;
  while (next_content_line(in, line, line_no)) {
    std::istringstream row(line);
    std::size_t epoch = 0;
    double loss = 0.0;
    std::string extra;
    if (!(row >> epoch >> loss) || (row >> extra) || epoch != losses.size()) {
      throw ParseError(at(path, line_no) +
                       ": expected \"<epoch> <loss>\" with consecutive "
                       "epochs, got \"" + line + "\"");
    }
    losses.push_back(loss);
  }
  return losses;
}

}  // namespace gcde::io
