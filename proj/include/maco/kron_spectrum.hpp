#ifndef MACO_KRON_SPECTRUM_HPP
#define MACO_KRON_SPECTRUM_HPP

// Laplacian spectrum of a Kronecker product graph G_1 ⊗ ... ⊗ G_n estimated
// from the normalized-Laplacian spectra and degree lists of its factors:
//
//   mu_{k_1..k_n} = [1 - prod_i (1 - lambda_{k_i})] * prod_i d_{k_i}
//   v_{k_1..k_n}  = v_{k_1} ⊗ ... ⊗ v_{k_n}
//
// where lambda_k / v_k is the k-th eigenpair of the factor's normalized
// Laplacian and d_k its k-th smallest degree. The estimate is exact when
// every factor is regular.
//
// Joint states are flattened mixed-radix with factor 0 most significant, which
// matches the entry order of the Kronecker product.

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "maco/spectral_graph.hpp"

namespace maco {

struct FactorSpectrumSet {
  std::vector<Spectrum<double>> spectra;       // normalized Laplacian, per factor
  std::vector<Eigen::VectorXd> sorted_degrees;  // ascending, per factor
  std::vector<int> dims;

  std::size_t n_factors() const noexcept { return dims.size(); }
  /// Product of dims; saturates at UINT64_MAX.
  std::uint64_t joint_size() const noexcept;
};

FactorSpectrumSet factor_spectra(std::span<const FactorGraph> graphs);

/// A joint eigenpair estimate. `multi_index` holds 0-based per-factor
/// eigenpair positions; CSV and console output print them 1-based.
struct JointEigenCandidate {
  double mu = 0.0;
  std::vector<int> multi_index;

  friend bool operator==(const JointEigenCandidate&, const JointEigenCandidate&) = default;
};

struct KronOptions {
  std::uint64_t joint_cap = 10'000'000;
  double tie_tol = 1e-9;
};

double estimate_mu(const FactorSpectrumSet& fs, std::span<const int> multi_index);

/// All prod(dims) candidates sorted by (mu, multi_index). Overflow above the cap.
std::vector<JointEigenCandidate> estimate_joint_spectrum(const FactorSpectrumSet& fs, const KronOptions& opts = {});

/// Candidates tied (within tie_tol) with the second entry of the sorted
/// candidate list. Uses a bounded depth-first search, so it works for joint
/// spaces far beyond the materialization cap.
std::vector<JointEigenCandidate> estimate_joint_fiedler(const FactorSpectrumSet& fs, const KronOptions& opts = {});

Eigen::VectorXd candidate_vector(const FactorSpectrumSet& fs, const JointEigenCandidate& c, const KronOptions& opts = {});

std::uint64_t joint_index(std::span<const int> per_agent, std::span<const int> dims);
std::vector<int> decompose_index(std::uint64_t flat, std::span<const int> dims);

struct Extrema {
  std::vector<std::uint64_t> min;  // ascending flat joint indices
  std::vector<std::uint64_t> max;
};

/// Joint indices whose entry of ⊗ factor_vectors lies within `tol` of the
/// global minimum / maximum, found from per-factor extremes without
/// materializing the product.
Extrema kron_extrema(std::span<const Eigen::VectorXd> factor_vectors, double tol, std::uint64_t cap = 10'000'000);
Extrema kron_extrema(const FactorSpectrumSet& fs, const JointEigenCandidate& c, double tol, const KronOptions& opts = {});

/// Explicit Kronecker product graph (adjacency A_1 ⊗ ... ⊗ A_n).
FactorGraph kronecker_graph(std::span<const FactorGraph> graphs);

/// CSV with header "mu,k_1,...,k_n"; k printed 1-based.
void write_candidates_csv(std::ostream& out, std::span<const JointEigenCandidate> candidates);

}  // namespace maco

#endif  // MACO_KRON_SPECTRUM_HPP
