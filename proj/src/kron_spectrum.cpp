#include "maco/kron_spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>

namespace maco {
namespace {

constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

std::uint64_t saturating_product(std::span<const int> dims) {
  std::uint64_t p = 1;
  for (int d : dims) {
    const auto ud = static_cast<std::uint64_t>(d);
    if (ud != 0 && p > kSaturated / ud) return kSaturated;
    p *= ud;
  }
  return p;
}

double factor_a(const FactorSpectrumSet& fs, std::size_t i, int k) {
  // Exact normalized-Laplacian eigenvalues lie in [0, 2]; clamp round-off.
  const double lambda = std::clamp(fs.spectra[i].values(k), 0.0, 2.0);
  return 1.0 - lambda;
}

bool index_less(const std::vector<int>& a, const std::vector<int>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

void sort_candidates(std::vector<JointEigenCandidate>& cs) {
  std::stable_sort(cs.begin(), cs.end(), [](const JointEigenCandidate& x, const JointEigenCandidate& y) {
    if (x.mu != y.mu) return x.mu < y.mu;
    return index_less(x.multi_index, y.multi_index);
  });
}

// Depth-first enumeration of multi-indices with a lower bound on mu:
// with partial product P of (1 - lambda) and partial degree product D,
// any completion satisfies mu >= (1 - |P|) * D * prod(min remaining degree),
// because every remaining factor contributes |1 - lambda| <= 1.
class BoundedSearch {
 public:
  BoundedSearch(const FactorSpectrumSet& fs) : fs_(fs), idx_(fs.n_factors(), 0) {
    const std::size_t n = fs.n_factors();
    min_deg_suffix_.assign(n + 1, 1.0);
    for (std::size_t i = n; i-- > 0;) min_deg_suffix_[i] = min_deg_suffix_[i + 1] * fs.sorted_degrees[i](0);
  }

  template <typename Visit, typename Threshold>
  void run(Visit&& visit, Threshold&& threshold) {
    recurse(0, 1.0, 1.0, visit, threshold);
  }

 private:
  template <typename Visit, typename Threshold>
  void recurse(std::size_t depth, double p, double d, Visit& visit, Threshold& threshold) {
    const std::size_t n = fs_.n_factors();
    if (depth == n) {
      visit((1.0 - p) * d, idx_);
      return;
    }
    const double bound = std::max(0.0, 1.0 - std::abs(p)) * d * min_deg_suffix_[depth];
    if (bound > threshold()) return;
    for (int k = 0; k < fs_.dims[depth]; ++k) {
      idx_[depth] = k;
      recurse(depth + 1, p * factor_a(fs_, depth, k), d * fs_.sorted_degrees[depth](k), visit, threshold);
    }
  }

  const FactorSpectrumSet& fs_;
  std::vector<int> idx_;
  std::vector<double> min_deg_suffix_;
};

}  // namespace

std::uint64_t FactorSpectrumSet::joint_size() const noexcept { return saturating_product(dims); }

FactorSpectrumSet factor_spectra(std::span<const FactorGraph> graphs) {
  FactorSpectrumSet fs;
  for (const auto& g : graphs) {
    fs.spectra.push_back(sym_eig(normalized_laplacian<double>(g)));
    Eigen::VectorXd deg = g.degrees().cast<double>();
    std::sort(deg.begin(), deg.end());
    fs.sorted_degrees.push_back(std::move(deg));
    fs.dims.push_back(g.n_nodes());
  }
  return fs;
}

double estimate_mu(const FactorSpectrumSet& fs, std::span<const int> multi_index) {
  if (multi_index.size() != fs.n_factors()) throw Error(ErrorKind::IndexOutOfRange, "multi-index arity mismatch");
  double p = 1.0, d = 1.0;
  for (std::size_t i = 0; i < fs.n_factors(); ++i) {
    const int k = multi_index[i];
    if (k < 0 || k >= fs.dims[i]) throw Error(ErrorKind::IndexOutOfRange, "eigenpair index outside factor");
    p *= factor_a(fs, i, k);
    d *= fs.sorted_degrees[i](k);
  }
  return (1.0 - p) * d;
}

std::vector<JointEigenCandidate> estimate_joint_spectrum(const FactorSpectrumSet& fs, const KronOptions& opts) {
  const std::uint64_t total = fs.joint_size();
  if (total > opts.joint_cap) {
    throw Error(ErrorKind::Overflow, "joint size " + std::to_string(total) + " exceeds cap " + std::to_string(opts.joint_cap));
  }
  std::vector<JointEigenCandidate> out;
  out.reserve(static_cast<std::size_t>(total));
  std::vector<int> idx(fs.n_factors(), 0);
  for (std::uint64_t flat = 0; flat < total; ++flat) {
    idx = decompose_index(flat, fs.dims);
    out.push_back({estimate_mu(fs, idx), idx});
  }
  sort_candidates(out);
  return out;
}

std::vector<JointEigenCandidate> estimate_joint_fiedler(const FactorSpectrumSet& fs, const KronOptions& opts) {
  const std::uint64_t total = fs.joint_size();
  if (fs.n_factors() == 0 || total < 2) throw Error(ErrorKind::Degenerate, "need at least two joint candidates");

  // Pass 1: the two smallest mu values (with multiplicity).
  double best1 = std::numeric_limits<double>::infinity();
  double best2 = best1;
  BoundedSearch search(fs);
  search.run(
      [&](double mu, const std::vector<int>&) {
        if (mu < best1) {
          best2 = best1;
          best1 = mu;
        } else if (mu < best2) {
          best2 = mu;
        }
      },
      [&] { return best2; });

  // Pass 2: everything tied with the second position.
  std::vector<JointEigenCandidate> ties;
  const double hi = best2 + opts.tie_tol;
  search.run(
      [&](double mu, const std::vector<int>& idx) {
        if (std::abs(mu - best2) <= opts.tie_tol) {
          ties.push_back({mu, idx});
          if (ties.size() > opts.joint_cap) throw Error(ErrorKind::Overflow, "Fiedler tie set exceeds cap");
        }
      },
      [&] { return hi; });

  if (ties.size() == total && std::abs(best1 - best2) <= opts.tie_tol) {
    throw Error(ErrorKind::Degenerate, "all candidates share one mu value");
  }
  sort_candidates(ties);
  return ties;
}

Eigen::VectorXd candidate_vector(const FactorSpectrumSet& fs, const JointEigenCandidate& c, const KronOptions& opts) {
  const std::uint64_t total = fs.joint_size();
  if (total > opts.joint_cap) throw Error(ErrorKind::Overflow, "candidate vector exceeds joint cap");
  if (c.multi_index.size() != fs.n_factors()) throw Error(ErrorKind::IndexOutOfRange, "multi-index arity mismatch");
  Eigen::VectorXd v = Eigen::VectorXd::Ones(1);
  for (std::size_t i = 0; i < fs.n_factors(); ++i) {
    const int k = c.multi_index[i];
    if (k < 0 || k >= fs.dims[i]) throw Error(ErrorKind::IndexOutOfRange, "eigenpair index outside factor");
    const Eigen::VectorXd f = fs.spectra[i].vectors.col(k);
    Eigen::VectorXd next(v.size() * f.size());
    for (Eigen::Index a = 0; a < v.size(); ++a) next.segment(a * f.size(), f.size()) = v(a) * f;
    v = std::move(next);
  }
  return v;
}

std::uint64_t joint_index(std::span<const int> per_agent, std::span<const int> dims) {
  if (per_agent.size() != dims.size()) throw Error(ErrorKind::IndexOutOfRange, "index arity mismatch");
  std::uint64_t flat = 0;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (per_agent[i] < 0 || per_agent[i] >= dims[i]) {
      throw Error(ErrorKind::IndexOutOfRange, "component " + std::to_string(i) + " = " + std::to_string(per_agent[i]) +
                                                  " outside dim " + std::to_string(dims[i]));
    }
    const auto d = static_cast<std::uint64_t>(dims[i]);
    if (flat > (kSaturated - static_cast<std::uint64_t>(per_agent[i])) / d) throw Error(ErrorKind::Overflow, "joint index overflows 64 bits");
    flat = flat * d + static_cast<std::uint64_t>(per_agent[i]);
  }
  return flat;
}

std::vector<int> decompose_index(std::uint64_t flat, std::span<const int> dims) {
  if (flat >= saturating_product(dims)) throw Error(ErrorKind::IndexOutOfRange, "flat index " + std::to_string(flat) + " outside joint space");
  std::vector<int> out(dims.size(), 0);
  for (std::size_t i = dims.size(); i-- > 0;) {
    const auto d = static_cast<std::uint64_t>(dims[i]);
    out[i] = static_cast<int>(flat % d);
    flat /= d;
  }
  return out;
}

namespace {

std::vector<std::uint64_t> expand_target(std::span<const Eigen::VectorXd> fv, const std::vector<std::vector<double>>& choices,
                                         double target, double tol, std::uint64_t cap) {
  const std::size_t n = fv.size();
  std::vector<int> dims;
  for (const auto& v : fv) dims.push_back(static_cast<int>(v.size()));
  std::set<std::uint64_t> out;

  auto product_at = [&](const std::vector<int>& idx) {
    double p = 1.0;
    for (std::size_t i = 0; i < n; ++i) p *= fv[i](idx[i]);
    return p;
  };

  auto push_checked = [&](std::uint64_t flat) {
    out.insert(flat);
    if (out.size() > cap) throw Error(ErrorKind::Overflow, "extremum tie set exceeds cap");
  };

  if (std::abs(target) <= tol) {
    // Zero-valued extremum: scan directly when small, otherwise take every
    // joint index having a (near-)zero factor entry.
    const std::uint64_t total = saturating_product(dims);
    if (total <= cap) {
      for (std::uint64_t flat = 0; flat < total; ++flat) {
        if (std::abs(product_at(decompose_index(flat, dims)) - target) <= tol) push_checked(flat);
      }
      return {out.begin(), out.end()};
    }
    for (std::size_t z = 0; z < n; ++z) {
      std::vector<std::vector<int>> sets(n);
      for (std::size_t i = 0; i < n; ++i) {
        for (int j = 0; j < dims[i]; ++j) {
          if (i != z || std::abs(fv[i](j)) <= tol) sets[i].push_back(j);
        }
      }
      if (sets[z].empty()) continue;
      std::uint64_t count = 1;
      for (const auto& s : sets) {
        if (count > cap / std::max<std::uint64_t>(1, s.size())) throw Error(ErrorKind::Overflow, "extremum tie set exceeds cap");
        count *= s.size();
      }
      std::vector<std::size_t> pos(n, 0);
      std::vector<int> idx(n);
      for (std::uint64_t c = 0; c < count; ++c) {
        for (std::size_t i = 0; i < n; ++i) idx[i] = sets[i][pos[i]];
        push_checked(joint_index(idx, dims));
        for (std::size_t i = n; i-- > 0;) {
          if (++pos[i] < sets[i].size()) break;
          pos[i] = 0;
        }
      }
    }
    return {out.begin(), out.end()};
  }

  // Non-zero extremum: every 2^n combination of per-factor extremes whose
  // product hits the target expands to the cartesian product of factor
  // entries equal (within tol) to the chosen extremes.
  std::vector<std::size_t> combo(n, 0);
  while (true) {
    double p = 1.0;
    for (std::size_t i = 0; i < n; ++i) p *= choices[i][combo[i]];
    if (std::abs(p - target) <= tol) {
      std::vector<std::vector<int>> sets(n);
      std::uint64_t count = 1;
      for (std::size_t i = 0; i < n; ++i) {
        for (int j = 0; j < dims[i]; ++j)
          if (std::abs(fv[i](j) - choices[i][combo[i]]) <= tol) sets[i].push_back(j);
        if (count > cap / std::max<std::uint64_t>(1, sets[i].size())) throw Error(ErrorKind::Overflow, "extremum tie set exceeds cap");
        count *= sets[i].size();
      }
      std::vector<std::size_t> pos(n, 0);
      std::vector<int> idx(n);
      for (std::uint64_t c = 0; c < count; ++c) {
        for (std::size_t i = 0; i < n; ++i) idx[i] = sets[i][pos[i]];
        if (std::abs(product_at(idx) - target) <= tol) push_checked(joint_index(idx, dims));
        for (std::size_t i = n; i-- > 0;) {
          if (++pos[i] < sets[i].size()) break;
          pos[i] = 0;
        }
      }
    }
    std::size_t i = n;
    while (i-- > 0) {
      if (++combo[i] < choices[i].size()) break;
      combo[i] = 0;
    }
    if (i == static_cast<std::size_t>(-1)) break;
  }
  return {out.begin(), out.end()};
}

}  // namespace

Extrema kron_extrema(std::span<const Eigen::VectorXd> factor_vectors, double tol, std::uint64_t cap) {
  const std::size_t n = factor_vectors.size();
  if (n == 0) throw Error(ErrorKind::Degenerate, "no factor vectors");
  std::vector<std::vector<double>> choices(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& v = factor_vectors[i];
    if (v.size() == 0) throw Error(ErrorKind::Degenerate, "empty factor vector");
    const double lo = v.minCoeff(), hi = v.maxCoeff();
    choices[i] = {lo};
    if (hi != lo) choices[i].push_back(hi);
  }
  double gmax = -std::numeric_limits<double>::infinity();
  double gmin = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> combo(n, 0);
  while (true) {
    double p = 1.0;
    for (std::size_t i = 0; i < n; ++i) p *= choices[i][combo[i]];
    gmax = std::max(gmax, p);
    gmin = std::min(gmin, p);
    std::size_t i = n;
    while (i-- > 0) {
      if (++combo[i] < choices[i].size()) break;
      combo[i] = 0;
    }
    if (i == static_cast<std::size_t>(-1)) break;
  }
  Extrema out;
  out.max = expand_target(factor_vectors, choices, gmax, tol, cap);
  out.min = expand_target(factor_vectors, choices, gmin, tol, cap);
  return out;
}

Extrema kron_extrema(const FactorSpectrumSet& fs, const JointEigenCandidate& c, double tol, const KronOptions& opts) {
  if (c.multi_index.size() != fs.n_factors()) throw Error(ErrorKind::IndexOutOfRange, "multi-index arity mismatch");
  std::vector<Eigen::VectorXd> fv;
  for (std::size_t i = 0; i < fs.n_factors(); ++i) {
    const int k = c.multi_index[i];
    if (k < 0 || k >= fs.dims[i]) throw Error(ErrorKind::IndexOutOfRange, "eigenpair index outside factor");
    fv.push_back(fs.spectra[i].vectors.col(k));
  }
  return kron_extrema(fv, tol, opts.joint_cap);
}

FactorGraph kronecker_graph(std::span<const FactorGraph> graphs) {
  Eigen::MatrixXi a = Eigen::MatrixXi::Ones(1, 1);
  for (const auto& g : graphs) {
    const auto& b = g.adjacency();
    Eigen::MatrixXi next(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      for (Eigen::Index j = 0; j < a.cols(); ++j) next.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    a = std::move(next);
  }
  if (graphs.empty()) return FactorGraph(0);
  return FactorGraph(std::move(a));
}

void write_candidates_csv(std::ostream& out, std::span<const JointEigenCandidate> candidates) {
  const std::size_t n = candidates.empty() ? 0 : candidates.front().multi_index.size();
  out << "mu";
  for (std::size_t i = 1; i <= n; ++i) out << ",k_" << i;
  out << '\n';
  const auto old_prec = out.precision(17);
  for (const auto& c : candidates) {
    out << c.mu;
    for (int k : c.multi_index) out << ',' << (k + 1);
    out << '\n';
  }
  out.precision(old_prec);
}

}  // namespace maco
