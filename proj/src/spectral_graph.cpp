#include "maco/spectral_graph.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace maco {

FactorGraph::FactorGraph(int n_nodes) {
  if (n_nodes < 0) throw Error(ErrorKind::InvalidGraph, "negative node count");
  adjacency_ = Adjacency::Zero(n_nodes, n_nodes);
}

FactorGraph::FactorGraph(Adjacency adjacency, std::vector<std::string> labels)
    : adjacency_(std::move(adjacency)), labels_(std::move(labels)) {
  if (adjacency_.rows() != adjacency_.cols()) throw Error(ErrorKind::InvalidGraph, "adjacency is not square");
  const auto n = adjacency_.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (adjacency_(i, i) != 0) throw Error(ErrorKind::InvalidGraph, "self-loop at node " + std::to_string(i));
    for (Eigen::Index j = 0; j < n; ++j) {
      const int x = adjacency_(i, j);
      if (x != 0 && x != 1) throw Error(ErrorKind::InvalidGraph, "adjacency entries must be 0/1");
      if (x != adjacency_(j, i)) throw Error(ErrorKind::InvalidGraph, "adjacency is not symmetric");
    }
  }
  if (!labels_.empty() && static_cast<Eigen::Index>(labels_.size()) != n) {
    throw Error(ErrorKind::InvalidGraph, "label count does not match node count");
  }
}

FactorGraph FactorGraph::from_edges(int n_nodes, const std::vector<std::pair<int, int>>& edges) {
  FactorGraph g(n_nodes);
  for (auto [u, v] : edges) {
    if (u == v) throw Error(ErrorKind::InvalidGraph, "self-loop at node " + std::to_string(u));
    g.add_edge(u, v);
  }
  return g;
}

void FactorGraph::check_index(int i) const {
  if (i < 0 || i >= n_nodes()) {
    throw Error(ErrorKind::IndexOutOfRange, "node " + std::to_string(i) + " outside [0, " + std::to_string(n_nodes()) + ")");
  }
}

bool FactorGraph::has_edge(int i, int j) const {
  check_index(i);
  check_index(j);
  return adjacency_(i, j) != 0;
}

bool FactorGraph::add_edge(int i, int j) {
  check_index(i);
  check_index(j);
  if (i == j || adjacency_(i, j) != 0) return false;
  adjacency_(i, j) = adjacency_(j, i) = 1;
  return true;
}

int FactorGraph::degree(int i) const {
  check_index(i);
  return adjacency_.row(i).sum();
}

std::vector<int> FactorGraph::neighbors(int i) const {
  check_index(i);
  std::vector<int> out;
  for (int j = 0; j < n_nodes(); ++j)
    if (adjacency_(i, j) != 0) out.push_back(j);
  return out;
}

std::size_t FactorGraph::n_edges() const { return static_cast<std::size_t>(adjacency_.sum() / 2); }

std::vector<std::pair<int, int>> FactorGraph::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < n_nodes(); ++i)
    for (int j = i + 1; j < n_nodes(); ++j)
      if (adjacency_(i, j) != 0) out.emplace_back(i, j);
  return out;
}

bool FactorGraph::is_connected() const {
  const int n = n_nodes();
  if (n == 0) return true;
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int w = 0; w < n; ++w) {
      if (adjacency_(u, w) != 0 && !seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = 1;
        ++count;
        stack.push_back(w);
      }
    }
  }
  return count == n;
}

FactorGraph read_edge_list(std::istream& in) {
  std::string line;
  std::optional<FactorGraph> g;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first) || first[0] == '#') continue;
    if (!g) {
      int n = -1;
      if (first != "n" || !(ls >> n) || n < 0) {
        throw Error(ErrorKind::Io, "edge list must start with 'n <n_nodes>' (line " + std::to_string(line_no) + ")");
      }
      g.emplace(n);
      continue;
    }
    int u = 0, v = 0;
    try {
      std::size_t used = 0;
      u = std::stoi(first, &used);
      if (used != first.size()) throw std::invalid_argument(first);
    } catch (const std::exception&) {
      throw Error(ErrorKind::Io, "bad node id on line " + std::to_string(line_no));
    }
    if (!(ls >> v)) throw Error(ErrorKind::Io, "missing endpoint on line " + std::to_string(line_no));
    if (u == v) throw Error(ErrorKind::InvalidGraph, "self-loop on line " + std::to_string(line_no));
    g->add_edge(u, v);
  }
  if (!g) throw Error(ErrorKind::Io, "empty edge list");
  return *g;
}

FactorGraph read_edge_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  return read_edge_list(in);
}

void write_edge_list(std::ostream& out, const FactorGraph& g) {
  out << "n " << g.n_nodes() << '\n';
  for (auto [u, v] : g.edges()) out << u << ' ' << v << '\n';
}

FiedlerResult fiedler(const FactorGraph& g, double zero_tol) {
  if (g.n_nodes() < 2) throw Error(ErrorKind::TooSmall, "Fiedler vector needs at least 2 nodes");
  const auto spec = sym_eig(laplacian<double>(g));
  FiedlerResult out;
  out.lambda2 = spec.values(1) < zero_tol ? 0.0 : spec.values(1);
  out.vector = spec.vectors.col(1);
  return out;
}

double connectivity_gain(const Eigen::Ref<const Eigen::VectorXd>& f, int i, int j) {
  if (i < 0 || j < 0 || i >= f.size() || j >= f.size()) {
    throw Error(ErrorKind::IndexOutOfRange, "index outside Fiedler vector of size " + std::to_string(f.size()));
  }
  const double d = f(i) - f(j);
  return d * d;
}

std::pair<int, int> greedy_edge(const FactorGraph& g) {
  const auto f = fiedler(g).vector;
  std::pair<int, int> best{-1, -1};
  double best_gain = -1.0;
  for (int i = 0; i < g.n_nodes(); ++i) {
    for (int j = i + 1; j < g.n_nodes(); ++j) {
      if (g.has_edge(i, j)) continue;
      const double gain = connectivity_gain(f, i, j);
      if (gain > best_gain) {
        best_gain = gain;
        best = {i, j};
      }
    }
  }
  if (best.first < 0) throw Error(ErrorKind::Degenerate, "graph is complete; no edge to add");
  return best;
}

double algebraic_connectivity(const FactorGraph& g) { return fiedler(g).lambda2; }

std::vector<int> bfs_distances(const FactorGraph& g, int source) {
  if (source < 0 || source >= g.n_nodes()) throw Error(ErrorKind::IndexOutOfRange, "BFS source outside graph");
  std::vector<int> dist(static_cast<std::size_t>(g.n_nodes()), -1);
  std::vector<int> queue{source};
  dist[static_cast<std::size_t>(source)] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const int u = queue[head];
    for (int w : g.neighbors(u)) {
      if (dist[static_cast<std::size_t>(w)] >= 0) continue;
      dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(u)] + 1;
      queue.push_back(w);
    }
  }
  return dist;
}

}  // namespace maco
