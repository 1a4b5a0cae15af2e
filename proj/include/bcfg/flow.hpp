#pragma once

#include "bcfg/spectrum.hpp"

#include <functional>

// Symmetry-reduced Hessian forms along the trivial branch and the spectral
// flow that certifies bifurcation: an admissible path of symmetric forms
// contributes flow ι⁻(left) − ι⁻(right), and a nonzero flow forces a
// bifurcation instant inside the interval.

namespace bcfg {

// A symmetric quadratic form restricted to a subspace W, represented in
// mass-conjugated coordinates: `matrix` is the form in an orthonormal
// basis of W, and `basis` holds that basis as columns (length n*d, in
// sqrt-mass coordinates).
struct TangentForm {
    Eigen::MatrixXd matrix;
    Eigen::MatrixXd basis;
    Eigen::VectorXd sqrt_mass;

    int dim() const { return static_cast<int>(matrix.rows()); }
};

// Null directions of the Hessian family generated by continuous symmetry
// (and any persistent in-plane degeneracy).  Basis vectors are ambient
// flat vectors, mass-orthonormal, annihilating H_s for every s.
struct SymmetryKernel {
    enum class Source { rotation_generator, planar_hessian_kernel };

    std::vector<Eigen::VectorXd> basis;
    Source source = Source::rotation_generator;

    int dim() const { return static_cast<int>(basis.size()); }
};

// A path s -> symmetric form on the reduced space, over [s_a, s_b].
struct ReducedHessianPath {
    std::function<TangentForm(double)> evaluator;
    double s_a = 0.0;
    double s_b = 0.0;
};

// Report produced by certify_bifurcation.
struct BifurcationCertificate {
    int flow = 0;
    std::vector<BifurcationCandidate> candidates;  // all candidates of the spectrum
    int candidates_in_interval = 0;
    int lower_bound = 0;
    double s_a = 0.0;        // endpoints actually used (after any nudge)
    double s_b = 0.0;
    bool nudged = false;
};

// The Hessian form h(v) = <(M^{-1}D^2U + U S-hat)v, v>_M restricted to the
// tangent space of the S-sphere (center-of-mass and radial directions
// removed).  Requires q to be a solution of the balanced equation.
TangentForm full_hessian_form(const Configuration& q, const Masses& m, double s);

// Infinitesimal generator of rotations in the {0} x R^2 plane: per-body
// (0, -z_i, y_i), mass-normalized.  Defined for d = 3; throws ZeroVector
// when the configuration lies entirely on the weighted axis.
Eigen::VectorXd rotation_generator(const Configuration& q, const Masses& m);

// Mass-orthonormal basis of the s-independent Hessian kernel at a
// trivial-branch configuration: for d = 3 the kernel of the in-plane block
// (contains the rotation generator; dimension = in-plane nullity), for
// d = 2 the empty kernel (no continuous symmetry survives s > 1).
SymmetryKernel symmetry_kernel(const PlanarConfiguration& qh, const Masses& m);

// The form restricted to the mass-orthogonal complement of the kernel
// span.  Throws KernelMismatch when a kernel vector fails to annihilate
// the form.
TangentForm reduced_hessian(const TangentForm& form, const SymmetryKernel& kernel,
                            const Masses& m);

// ι⁻ at the left endpoint minus ι⁻ at the right endpoint.  Throws
// NotAdmissible when either endpoint form is degenerate.
int spectral_flow(const ReducedHessianPath& path);

// Builds the reduced path over the interval for the trivial branch through
// qh, computes the flow, and cross-checks it against the candidate
// multiplicities inside the interval.  Endpoints falling within 1e-6 of a
// candidate instant are nudged by 1e-4 and the nudge is recorded.
BifurcationCertificate certify_bifurcation(const PlanarConfiguration& qh,
                                           const Masses& m, double s_a, double s_b);

}  // namespace bcfg
