#include "febaa/graph.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "febaa/error.hpp"

namespace febaa {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool is_skippable(std::string_view line) {
  line = trim(line);
  return line.empty() || line.front() == '#';
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  return out;
}

template <typename T>
bool parse_number(std::string_view token, T& value) {
  token = trim(token);
  if (token.empty()) return false;
  if (token.front() == '+') token.remove_prefix(1);
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  return ec == std::errc() && ptr == end;
}

std::vector<std::pair<NodeId, NodeId>> read_directed_edges(
    const std::filesystem::path& path, std::size_t num_nodes) {
  auto in = open_input(path);
  std::vector<std::pair<NodeId, NodeId>> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_skippable(line)) continue;
    std::istringstream tokens{std::string(trim(line))};
    std::string a, b, extra;
    std::uint64_t u = 0, v = 0;
    if (!(tokens >> a >> b) || (tokens >> extra) || !parse_number(a, u) ||
        !parse_number(b, v)) {
      throw ParseError(path.string(), line_no,
                       "malformed edge line, expected two non-negative integers");
    }
    if (u >= num_nodes || v >= num_nodes) {
      throw ParseError(path.string(), line_no,
                       "node index out of range (" + std::to_string(std::max(u, v)) +
                           " >= " + std::to_string(num_nodes) + ")");
    }
    pairs.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
  }
  return pairs;
}

}  // namespace

std::string format_double(double value) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

std::vector<Edge> symmetrize_edges(std::span<const std::pair<NodeId, NodeId>> directed) {
  std::vector<Edge> edges;
  edges.reserve(directed.size());
  for (const auto& [a, b] : directed) edges.push_back(Edge::make(a, b));
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

AttributedGraph::AttributedGraph(Matrix features, std::vector<Edge> edges,
                                 std::optional<std::vector<Label>> labels)
    : features_(std::move(features)),
      edges_(std::move(edges)),
      labels_(std::move(labels)) {
  const std::size_t n = features_.rows();
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const Edge& e = edges_[i];
    if (e.u > e.v)
      throw Error(ErrorCode::kInvalidArgument, "edge is not canonical (u > v)");
    if (e.v >= n)
      throw Error(ErrorCode::kInvalidArgument, "node index out of range");
    if (i > 0 && !(edges_[i - 1] < e))
      throw Error(ErrorCode::kInvalidArgument, "edge list is not sorted and unique");
  }
  if (labels_) {
    if (labels_->size() != n) {
      throw Error(ErrorCode::kInvalidArgument,
                  "label count " + std::to_string(labels_->size()) +
                      " does not match node count " + std::to_string(n));
    }
    std::size_t classes = 0;
    for (Label y : *labels_) classes = std::max<std::size_t>(classes, y + 1);
    num_classes_ = classes;
  }
}

AttributedGraph AttributedGraph::from_directed(
    Matrix features, std::span<const std::pair<NodeId, NodeId>> directed,
    std::optional<std::vector<Label>> labels) {
  return AttributedGraph(std::move(features), symmetrize_edges(directed),
                         std::move(labels));
}

AttributedGraph AttributedGraph::with_features(Matrix features) const {
  if (features.rows() != features_.rows() || features.cols() != features_.cols())
    throw Error(ErrorCode::kInvalidArgument, "with_features: shape mismatch");
  AttributedGraph copy = *this;
  copy.features_ = std::move(features);
  return copy;
}

AttributedGraph AttributedGraph::with_edges(std::vector<Edge> edges) const {
  return AttributedGraph(features_, std::move(edges), labels_);
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_skippable(line)) continue;
    std::size_t count = 0;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      const auto token = rest.substr(0, comma);
      double v = 0.0;
      if (!parse_number(token, v))
        throw ParseError(path.string(), line_no,
                         "malformed value '" + std::string(trim(token)) + "'");
      values.push_back(v);
      ++count;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (rows == 0) {
      cols = count;
    } else if (count != cols) {
      throw ParseError(path.string(), line_no,
                       "ragged row: expected " + std::to_string(cols) +
                           " values, found " + std::to_string(count));
    }
    ++rows;
  }
  Matrix m(rows, cols);
  std::copy(values.begin(), values.end(), m.values().begin());
  return m;
}

std::vector<Label> read_labels(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<Label> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_skippable(line)) continue;
    Label y = 0;
    if (!parse_number(std::string_view(line), y))
      throw ParseError(path.string(), line_no, "malformed label, expected a class index");
    labels.push_back(y);
  }
  return labels;
}

AttributedGraph load_graph(const std::filesystem::path& edges_path,
                           const std::filesystem::path& features_path,
                           const std::optional<std::filesystem::path>& labels_path) {
  Matrix features = read_matrix_csv(features_path);
  const auto directed = read_directed_edges(edges_path, features.rows());
  std::optional<std::vector<Label>> labels;
  if (labels_path) {
    labels = read_labels(*labels_path);
    if (labels->size() != features.rows()) {
      throw Error(ErrorCode::kParse,
                  labels_path->string() + ": expected " +
                      std::to_string(features.rows()) + " labels, found " +
                      std::to_string(labels->size()));
    }
  }
  return AttributedGraph::from_directed(std::move(features), directed, std::move(labels));
}

AttributedGraph symmetrize(const AttributedGraph& graph) {
  std::vector<std::pair<NodeId, NodeId>> pairs;
  pairs.reserve(graph.edges().size());
  for (const Edge& e : graph.edges()) pairs.emplace_back(e.v, e.u);
  return graph.with_edges(symmetrize_edges(pairs));
}

CsrMatrix normalized_adjacency(std::size_t num_nodes, std::span<const Edge> edges) {
  std::vector<std::size_t> degree(num_nodes, 1);
  for (const Edge& e : edges) {
    if (e.is_self_loop()) continue;
    ++degree[e.u];
    ++degree[e.v];
  }
  std::vector<double> inv_sqrt(num_nodes);
  for (std::size_t i = 0; i < num_nodes; ++i)
    inv_sqrt[i] = 1.0 / std::sqrt(static_cast<double>(degree[i]));

  std::vector<std::vector<std::uint32_t>> neighbours(num_nodes);
  for (std::size_t i = 0; i < num_nodes; ++i)
    neighbours[i].push_back(static_cast<std::uint32_t>(i));
  for (const Edge& e : edges) {
    if (e.is_self_loop()) continue;
    neighbours[e.u].push_back(e.v);
    neighbours[e.v].push_back(e.u);
  }

  std::vector<std::size_t> row_ptr(num_nodes + 1, 0);
  std::vector<std::uint32_t> cols;
  std::vector<double> vals;
  for (std::size_t i = 0; i < num_nodes; ++i) {
    auto& row = neighbours[i];
    std::sort(row.begin(), row.end());
    for (std::uint32_t j : row) {
      cols.push_back(j);
      vals.push_back(inv_sqrt[i] * inv_sqrt[j]);
    }
    row_ptr[i + 1] = cols.size();
  }
  return CsrMatrix(num_nodes, std::move(row_ptr), std::move(cols), std::move(vals));
}

GraphStats stats(const AttributedGraph& graph) {
  GraphStats s;
  s.num_nodes = graph.num_nodes();
  s.num_features = graph.num_features();
  s.num_edges = graph.edges().size();
  s.num_self_loops = static_cast<std::size_t>(
      std::count_if(graph.edges().begin(), graph.edges().end(),
                    [](const Edge& e) { return e.is_self_loop(); }));
  s.num_classes = graph.num_classes();
  if (graph.labels()) {
    s.class_histogram.assign(*s.num_classes, 0);
    for (Label y : *graph.labels()) ++s.class_histogram[y];
  }
  return s;
}

std::string ingest_report_json(const AttributedGraph& graph) {
  const GraphStats s = stats(graph);
  nlohmann::ordered_json report;
  report["valid"] = true;
  report["num_nodes"] = s.num_nodes;
  report["num_features"] = s.num_features;
  report["num_edges"] = s.num_edges;
  report["num_directed_edges"] = 2 * (s.num_edges - s.num_self_loops) + s.num_self_loops;
  report["num_self_loops"] = s.num_self_loops;
  if (s.num_classes) {
    report["num_classes"] = *s.num_classes;
    report["class_histogram"] = s.class_histogram;
  } else {
    report["num_classes"] = nullptr;
    report["class_histogram"] = nullptr;
  }
  return report.dump(2) + "\n";
}

void write_features_csv(const Matrix& features, const std::filesystem::path& path) {
  auto out = open_output(path);
  for (std::size_t i = 0; i < features.rows(); ++i) {
    const auto row = features.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ',';
      out << format_double(row[j]);
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

void write_edges(std::span<const Edge> edges, const std::filesystem::path& path) {
  auto out = open_output(path);
  for (const Edge& e : edges) out << e.u << ' ' << e.v << '\n';
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

void write_labels(std::span<const Label> labels, const std::filesystem::path& path) {
  auto out = open_output(path);
  for (Label y : labels) out << y << '\n';
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

}  // namespace febaa
