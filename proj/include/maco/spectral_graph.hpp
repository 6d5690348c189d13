#ifndef MACO_SPECTRAL_GRAPH_HPP
#define MACO_SPECTRAL_GRAPH_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "maco/errors.hpp"

namespace maco {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Undirected simple graph over the states of one agent, stored dense.
///
/// The adjacency matrix is symmetric, 0/1 valued and has a zero diagonal;
/// every constructor and mutator keeps it that way.
class FactorGraph {
 public:
  using Adjacency = Eigen::MatrixXi;

  FactorGraph() = default;
  explicit FactorGraph(int n_nodes);
  explicit FactorGraph(Adjacency adjacency, std::vector<std::string> labels = {});

  static FactorGraph from_edges(int n_nodes, const std::vector<std::pair<int, int>>& edges);

  int n_nodes() const noexcept { return static_cast<int>(adjacency_.rows()); }
  const Adjacency& adjacency() const noexcept { return adjacency_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  bool has_edge(int i, int j) const;
  /// Inserts i-j. Self-loops are ignored (returns false); so are existing edges.
  bool add_edge(int i, int j);

  int degree(int i) const;
  Eigen::VectorXi degrees() const { return adjacency_.rowwise().sum(); }
  std::vector<int> neighbors(int i) const;
  std::size_t n_edges() const;
  std::vector<std::pair<int, int>> edges() const;

  bool is_connected() const;

  friend bool operator==(const FactorGraph& a, const FactorGraph& b) {
    return a.adjacency_ == b.adjacency_;
  }

 private:
  void check_index(int i) const;

  Adjacency adjacency_;
  std::vector<std::string> labels_;
};

/// Plain-text edge list: a header line "n <n_nodes>", then one "u v" pair per
/// line (0-indexed). Blank lines and lines starting with '#' are skipped.
FactorGraph read_edge_list(std::istream& in);
FactorGraph read_edge_list_file(const std::string& path);
void write_edge_list(std::ostream& out, const FactorGraph& g);

// ---------------------------------------------------------------------------
// Laplacians

template <typename Scalar = double>
MatrixX<Scalar> laplacian(const FactorGraph& g) {
  const MatrixX<Scalar> a = g.adjacency().cast<Scalar>();
  MatrixX<Scalar> l = -a;
  l.diagonal() = a.rowwise().sum();
  return l;
}

/// D^{-1/2} (D - A) D^{-1/2}. Throws IsolatedNode for a zero-degree node.
template <typename Scalar = double>
MatrixX<Scalar> normalized_laplacian(const FactorGraph& g) {
  const Eigen::VectorXi deg = g.degrees();
  for (int i = 0; i < deg.size(); ++i) {
    if (deg(i) == 0) throw Error(ErrorKind::IsolatedNode, "node " + std::to_string(i) + " has degree 0");
  }
  const VectorX<Scalar> inv_sqrt = deg.cast<Scalar>().cwiseSqrt().cwiseInverse();
  return inv_sqrt.asDiagonal() * laplacian<Scalar>(g) * inv_sqrt.asDiagonal();
}

// ---------------------------------------------------------------------------
// Dense symmetric eigensolver

template <typename Scalar>
struct Spectrum {
  VectorX<Scalar> values;   // ascending
  MatrixX<Scalar> vectors;  // column k pairs with values(k)

  Eigen::Index size() const noexcept { return values.size(); }
};

template <typename Scalar>
struct EigOptions {
  Scalar offdiag_tol = Scalar(1e-11);
  int max_sweeps = 100;
  Scalar symmetry_tol = Scalar(1e-12);
  /// Eigenvalues closer than this are treated as tied when ordering pairs.
  Scalar tie_tol = Scalar(1e-9);
  /// Entries with magnitude below this are skipped by the sign convention.
  Scalar sign_tol = Scalar(1e-9);
};

namespace detail {

template <typename Scalar>
void normalize_sign(Eigen::Ref<VectorX<Scalar>> v, Scalar tol) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > tol) {
      if (v(i) < 0) v = -v;
      return;
    }
  }
}

template <typename Scalar>
bool lexicographic_less(const MatrixX<Scalar>& vecs, Eigen::Index a, Eigen::Index b) {
  for (Eigen::Index i = 0; i < vecs.rows(); ++i) {
    if (vecs(i, a) < vecs(i, b)) return true;
    if (vecs(i, b) < vecs(i, a)) return false;
  }
  return false;
}

}  // namespace detail

/// Cyclic Jacobi eigendecomposition of a dense symmetric matrix.
///
/// Output is deterministic: eigenpairs ascend by eigenvalue, runs of tied
/// eigenvalues are ordered lexicographically by eigenvector, and each
/// eigenvector's first entry above `sign_tol` is positive.
template <typename Derived>
Spectrum<typename Derived::Scalar> sym_eig(const Eigen::MatrixBase<Derived>& m,
                                           const EigOptions<typename Derived::Scalar>& opts = {}) {
  using Scalar = typename Derived::Scalar;
  using std::abs;
  using std::sqrt;

  if (m.rows() != m.cols()) throw Error(ErrorKind::NotSymmetric, "matrix is not square");
  const Eigen::Index n = m.rows();
  MatrixX<Scalar> a = m;
  if (n > 0 && (a - a.transpose()).cwiseAbs().maxCoeff() > opts.symmetry_tol) {
    throw Error(ErrorKind::NotSymmetric, "asymmetry exceeds tolerance");
  }
  MatrixX<Scalar> v = MatrixX<Scalar>::Identity(n, n);

  auto off_norm = [&a, n] {
    Scalar s(0);
    for (Eigen::Index q = 0; q < n; ++q)
      for (Eigen::Index p = 0; p < q; ++p) s += a(p, q) * a(p, q);
    return sqrt(Scalar(2) * s);
  };

  int sweep = 0;
  for (; off_norm() >= opts.offdiag_tol; ++sweep) {
    if (sweep == opts.max_sweeps) {
      throw Error(ErrorKind::NoConvergence, "Jacobi budget of " + std::to_string(opts.max_sweeps) + " sweeps exhausted");
    }
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const Scalar apq = a(p, q);
        if (apq == Scalar(0)) continue;
        const Scalar theta = (a(q, q) - a(p, p)) / (Scalar(2) * apq);
        const Scalar t = (theta >= 0 ? Scalar(1) : Scalar(-1)) / (abs(theta) + sqrt(theta * theta + Scalar(1)));
        const Scalar c = Scalar(1) / sqrt(t * t + Scalar(1));
        const Scalar s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const Scalar akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const Scalar apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = Scalar(0);
        for (Eigen::Index k = 0; k < n; ++k) {
          const Scalar vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  for (Eigen::Index k = 0; k < n; ++k) detail::normalize_sign<Scalar>(v.col(k), opts.sign_tol);

  const VectorX<Scalar> diag = a.diagonal();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index(0));
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) { return diag(x) < diag(y); });
  for (std::size_t lo = 0; lo < order.size();) {
    std::size_t hi = lo + 1;
    while (hi < order.size() && diag(order[hi]) - diag(order[hi - 1]) <= opts.tie_tol) ++hi;
    std::stable_sort(order.begin() + static_cast<std::ptrdiff_t>(lo), order.begin() + static_cast<std::ptrdiff_t>(hi),
                     [&](Eigen::Index x, Eigen::Index y) { return detail::lexicographic_less<Scalar>(v, x, y); });
    lo = hi;
  }

  Spectrum<Scalar> out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = diag(order[static_cast<std::size_t>(k)]);
    out.vectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fiedler vector and covering heuristics

struct FiedlerResult {
  double lambda2 = 0.0;
  Eigen::VectorXd vector;
};

/// Second-smallest eigenpair of the (unnormalized) Laplacian.
/// λ₂ is reported as exactly 0 when it falls below `zero_tol`.
FiedlerResult fiedler(const FactorGraph& g, double zero_tol = 1e-9);

/// First-order estimate (f_i - f_j)^2 of the λ₂ increase from adding edge i-j.
double connectivity_gain(const Eigen::Ref<const Eigen::VectorXd>& f, int i, int j);

/// The non-adjacent pair with the largest connectivity_gain under the Fiedler
/// vector of L(g); equals (argmin f, argmax f) whenever those are not already
/// adjacent. Ties go to the lexicographically smallest (i, j) with i < j.
std::pair<int, int> greedy_edge(const FactorGraph& g);

/// λ₂ of L(g).
double algebraic_connectivity(const FactorGraph& g);

/// Hop distances from `source`; -1 for unreachable nodes.
std::vector<int> bfs_distances(const FactorGraph& g, int source);

}  // namespace maco

#endif  // MACO_SPECTRAL_GRAPH_HPP
