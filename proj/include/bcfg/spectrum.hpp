#pragma once

#include "bcfg/potential.hpp"
#include "bcfg/types.hpp"

#include <vector>

// Spectral analysis at configurations on the trivial branch: the n x n
// matrix B governing perturbations along the weighted axis, the block
// decomposition of the full second-derivative matrix, inertia indices,
// and the bifurcation instants s* = -mu / U predicted by the eigenvalues
// mu < -U of M^{-1}B.

namespace bcfg {

// A configuration lying on the trivial branch: every body has zero
// coordinate on the weighted axis 0.  For d = 3 this is a planar
// configuration in {0} x R^2; for d = 2 a collinear one on {0} x R.
// Must be collision-free, normalized (|q|_M^2 = 1) and centered.
class PlanarConfiguration {
  public:
    PlanarConfiguration(const Configuration& base, const Masses& m);

    const Configuration& base() const { return base_; }
    int n() const { return base_.n(); }
    int d() const { return base_.d(); }

  private:
    Configuration base_;
};

// Distinct eigenvalues of M^{-1}B at a trivial-branch central configuration,
// in decreasing order, excluding the zero eigenvalue carried by (1,...,1).
struct SpectrumReport {
    std::vector<double> mu;    // mu[0] > mu[1] > ... > mu[k-1]
    std::vector<int> alpha;    // multiplicities; sum = n - 1
    int l = -1;                // 0-based index of the cluster equal to -U
    double potential = 0.0;    // U at the configuration

    int k() const { return static_cast<int>(mu.size()); }
};

// Signature of a symmetric form: counts of negative / zero / positive
// eigenvalues relative to a tolerance.
struct InertiaTriple {
    int minus = 0;
    int zero = 0;
    int plus = 0;

    int total() const { return minus + zero + plus; }
    bool operator==(const InertiaTriple&) const = default;
};

// A predicted bifurcation instant s* = -mu / U > 1 generated by an
// eigenvalue mu < -U of M^{-1}B.
struct BifurcationCandidate {
    double s_star = 0.0;
    int multiplicity = 0;
    double eigenvalue = 0.0;  // the generating mu
};

// Pairwise-coupling matrix with b_ij = m_i m_j / r_ij^3 off the diagonal
// and b_ii = -sum_{j != i} b_ij.  Symmetric, rows sum to zero.
Eigen::MatrixXd b_matrix(const PlanarConfiguration& qh, const Masses& m);

// In-plane block of the second-derivative matrix, in axis-major ordering
// (all axis-1 coordinates first, then axis-2).  Size (d-1)n square.  The
// 2x2 pair blocks (d = 3) have trace -m_i m_j / r_ij^3.
Eigen::MatrixXd d_matrix(const PlanarConfiguration& qh, const Masses& m);

// Permutation matrix P sending body-major coordinates (q_1, ..., q_n) to
// axis-major ones (x_1..x_n, y_1..y_n[, z_1..z_n]); conjugating the full
// second-derivative matrix by P yields blockdiag(B, D) at trivial-branch
// configurations.
Eigen::MatrixXd axis_major_permutation(int n, int d);

// Eigenvalue signature of a symmetric matrix: counts < -tol, within tol,
// and > tol.
InertiaTriple inertia_indices(const Eigen::MatrixXd& a, double tol);

// Default inertia tolerance: 1e-9 * (largest absolute eigenvalue).
InertiaTriple inertia_indices(const Eigen::MatrixXd& a);

// Eigen-decomposes M^{-1}B, removes the zero eigenvalue carried by
// (1,...,1), clusters the remaining n-1 eigenvalues into distinct values
// with multiplicities, and locates the cluster equal to -U.  Requires qh
// to be a central configuration.
SpectrumReport cluster_spectrum(const PlanarConfiguration& qh, const Masses& m);

// Inertia of the transverse block M^{-1}B + sU restricted to the
// complement of (1,...,1), computed from the clustered spectrum by
// counting signs of mu_j + s U.
InertiaTriple normal_inertia_at(const SpectrumReport& report, double s);

// Inertia of the in-plane block M^{-1}D + U I restricted to the tangent
// space of the sphere within the plane (translations and the radial
// direction removed).  Independent of s; the zero count is at least 1 for
// d = 3 (rotational symmetry).
InertiaTriple planar_inertia(const PlanarConfiguration& qh, const Masses& m);

// One candidate per distinct eigenvalue strictly below -U, sorted by
// increasing s_star; empty when no eigenvalue lies below -U.
std::vector<BifurcationCandidate> bifurcation_candidates(const SpectrumReport& report);

// floor((n - 1 - alpha) / beta) with alpha the total multiplicity of
// clusters >= -U and beta the largest candidate multiplicity; 0 when the
// candidate list is empty.
int bifurcation_lower_bound(const SpectrumReport& report);

// Mass-orthonormal eigenvectors of M^{-1}B for the candidate's eigenvalue
// cluster, embedded as ambient flat vectors supported on axis 0.  These
// span the kernel of the transverse Hessian block at s = s_star and seed
// branch switching.
std::vector<Eigen::VectorXd> candidate_kernel_directions(
    const PlanarConfiguration& qh, const Masses& m, const BifurcationCandidate& cand);

}  // namespace bcfg
