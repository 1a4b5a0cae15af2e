#include "bcfg/spectrum.hpp"

#include <cmath>

namespace bcfg {

namespace {

// Gap below which two eigenvalues are treated as one cluster.  Symmetric
// configurations produce exactly-degenerate eigenvalues perturbed only by
// rounding, so the threshold is tight.
double cluster_gap(double potential) {
    return 1e-7 * std::max(1.0, std::abs(potential));
}

// Orthonormal basis of the complement of the (orthonormal) columns of c
// inside R^rows, obtained from a full Householder QR of [c | I].
Eigen::MatrixXd orthogonal_complement(const Eigen::MatrixXd& c) {
    const Eigen::Index rows = c.rows(), cols = c.cols();
    Eigen::MatrixXd full(rows, cols + rows);
    full.leftCols(cols) = c;
    full.rightCols(rows) = Eigen::MatrixXd::Identity(rows, rows);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(full);
    Eigen::MatrixXd q = qr.householderQ();
    return q.rightCols(rows - cols);
}

}  // namespace

PlanarConfiguration::PlanarConfiguration(const Configuration& base, const Masses& m)
    : base_(base) {
    if (m.n() != base.n())
        throw DimensionMismatch("mass count does not match body count");
    for (int i = 0; i < base.n(); ++i)
        if (std::abs(base.coords()[i * base.d()]) >= 1e-12)
            throw ValidationError(
                "trivial-branch configuration must have zero axis-0 coordinates "
                "(body " + std::to_string(i) + " violates)");
    require_collision_free(base);
    const SParameter one(1.0);
    const double nrm2 = s_norm2(base.coords(), m, one, base.d());
    if (std::abs(nrm2 - 1.0) > 1e-8)
        throw NotNormalized("trivial-branch configuration must satisfy |q|_M^2 = 1");
    if (center_of_mass(base, m).norm() > 1e-8)
        throw ValidationError("trivial-branch configuration must be centered");
}

Eigen::MatrixXd b_matrix(const PlanarConfiguration& qh, const Masses& m) {
    const Configuration& q = qh.base();
    require_collision_free(q);
    const int n = q.n();
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const double r = q.distance(i, j);
            const double bij = m[i] * m[j] / (r * r * r);
            b(i, j) = bij;
            b(i, i) -= bij;
        }
    }
    return b;
}

Eigen::MatrixXd d_matrix(const PlanarConfiguration& qh, const Masses& m) {
    const Configuration& q = qh.base();
    require_collision_free(q);
    const int n = q.n(), d = q.d(), p = d - 1;
    Eigen::MatrixXd dm = Eigen::MatrixXd::Zero(p * n, p * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const Eigen::VectorXd diff = q.body(i) - q.body(j);
            const double r = diff.norm();
            // In-plane unit vector; axis 0 components vanish on the
            // trivial branch.
            const Eigen::VectorXd u = diff.tail(p) / r;
            const double c = m[i] * m[j] / (r * r * r);
            for (int a = 0; a < p; ++a) {
                for (int bax = 0; bax < p; ++bax) {
                    const double entry =
                        c * ((a == bax ? 1.0 : 0.0) - 3.0 * u[a] * u[bax]);
                    dm(a * n + i, bax * n + j) += entry;
                    dm(a * n + i, bax * n + i) -= entry;
                }
            }
        }
    }
    return dm;
}

Eigen::MatrixXd axis_major_permutation(int n, int d) {
    Eigen::MatrixXd perm = Eigen::MatrixXd::Zero(n * d, n * d);
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < d; ++a) perm(a * n + i, i * d + a) = 1.0;
    return perm;
}

InertiaTriple inertia_indices(const Eigen::MatrixXd& a, double tol) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
    InertiaTriple out;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const double ev = es.eigenvalues()[i];
        if (ev < -tol)
            ++out.minus;
        else if (ev > tol)
            ++out.plus;
        else
            ++out.zero;
    }
    return out;
}

InertiaTriple inertia_indices(const Eigen::MatrixXd& a) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
    const double scale =
        es.eigenvalues().size() ? es.eigenvalues().cwiseAbs().maxCoeff() : 0.0;
    return inertia_indices(a, 1e-9 * std::max(1.0, scale));
}

SpectrumReport cluster_spectrum(const PlanarConfiguration& qh, const Masses& m) {
    const Configuration& q = qh.base();
    {
        const Eigen::VectorXd res = balanced_residual(q, m, SParameter(1.0));
        if (res.norm() >= 1e-8)
            throw NotASolution("cluster_spectrum requires a central configuration "
                               "(residual norm " + std::to_string(res.norm()) + ")");
    }
    const int n = q.n();
    const double u = total_potential(q, m);

    // Symmetrize M^{-1}B by conjugation with M^{1/2} and deflate the known
    // zero eigenvector M^{1/2}(1,...,1) before clustering; the zero mode
    // carries no spectral information.
    Eigen::VectorXd sqm(n);
    for (int i = 0; i < n; ++i) sqm[i] = std::sqrt(m[i]);
    const Eigen::MatrixXd b = b_matrix(qh, m);
    const Eigen::MatrixXd bs =
        sqm.cwiseInverse().asDiagonal() * b * sqm.cwiseInverse().asDiagonal();
    Eigen::MatrixXd ones = sqm / sqm.norm();
    const Eigen::MatrixXd basis = orthogonal_complement(ones);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        basis.transpose() * bs * basis, Eigen::EigenvaluesOnly);

    // Eigen returns increasing order; the report stores decreasing.
    std::vector<double> evs(es.eigenvalues().data(),
                            es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(evs.begin(), evs.end(), std::greater<double>());

    SpectrumReport report;
    report.potential = u;
    const double gap = cluster_gap(u);
    for (double ev : evs) {
        if (!report.mu.empty() && std::abs(report.mu.back() - ev) < gap) {
            ++report.alpha.back();
            continue;
        }
        report.mu.push_back(ev);
        report.alpha.push_back(1);
    }
    // Average each cluster so the stored value is rounding-insensitive.
    {
        std::size_t at = 0;
        for (std::size_t c = 0; c < report.mu.size(); ++c) {
            double sum = 0.0;
            for (int r = 0; r < report.alpha[c]; ++r) sum += evs[at++];
            report.mu[c] = sum / report.alpha[c];
        }
    }

    // Locate the cluster equal to -U.  This equality is a theorem for
    // trivial-branch central configurations, so failure signals bad input.
    int best = -1;
    double bestgap = std::numeric_limits<double>::infinity();
    for (int c = 0; c < report.k(); ++c) {
        const double g = std::abs(report.mu[static_cast<std::size_t>(c)] + u);
        if (g < bestgap) {
            bestgap = g;
            best = c;
        }
    }
    if (best < 0 || bestgap >= 1e-6 * std::abs(u))
        throw SpectrumInvariantViolation(
            "no eigenvalue cluster matches -U (closest gap " +
            std::to_string(bestgap) + ")");
    report.l = best;

    const int mult_at_minus_u = report.alpha[static_cast<std::size_t>(best)];
    if (q.d() == 3 && mult_at_minus_u < 2)
        throw SpectrumInvariantViolation(
            "planar configuration: multiplicity at -U is " +
            std::to_string(mult_at_minus_u) + ", expected >= 2");
    if (q.d() == 3 && n >= 4 && report.l == report.k() - 1)
        throw SpectrumInvariantViolation(
            "planar configuration with n >= 4 must have an eigenvalue below -U");
    return report;
}

InertiaTriple normal_inertia_at(const SpectrumReport& report, double s) {
    if (!(s >= 1.0)) throw ValidationError("normal_inertia_at requires s >= 1");
    const double u = report.potential;
    const double tol = 1e-9 * std::max(1.0, s * std::abs(u));
    InertiaTriple out;
    for (int c = 0; c < report.k(); ++c) {
        const double shifted = report.mu[static_cast<std::size_t>(c)] + s * u;
        if (shifted < -tol)
            out.minus += report.alpha[static_cast<std::size_t>(c)];
        else if (shifted > tol)
            out.plus += report.alpha[static_cast<std::size_t>(c)];
        else
            out.zero += report.alpha[static_cast<std::size_t>(c)];
    }
    return out;
}

InertiaTriple planar_inertia(const PlanarConfiguration& qh, const Masses& m) {
    const Configuration& q = qh.base();
    const int n = q.n(), d = q.d(), p = d - 1;
    const double u = total_potential(q, m);

    Eigen::VectorXd sqm(p * n);
    for (int a = 0; a < p; ++a)
        for (int i = 0; i < n; ++i) sqm[a * n + i] = std::sqrt(m[i]);

    const Eigen::MatrixXd dm = d_matrix(qh, m);
    Eigen::MatrixXd sym = sqm.cwiseInverse().asDiagonal() * dm *
                          sqm.cwiseInverse().asDiagonal();
    sym += u * Eigen::MatrixXd::Identity(p * n, p * n);

    // Constraints in conjugated coordinates: one translation per in-plane
    // axis plus the radial direction (the configuration itself).
    Eigen::MatrixXd cons(p * n, p + 1);
    for (int a = 0; a < p; ++a) {
        Eigen::VectorXd t = Eigen::VectorXd::Zero(p * n);
        t.segment(a * n, n) = sqm.segment(a * n, n);
        cons.col(a) = t / t.norm();
    }
    {
        Eigen::VectorXd radial(p * n);
        for (int a = 0; a < p; ++a)
            for (int i = 0; i < n; ++i)
                radial[a * n + i] = sqm[a * n + i] * q.coords()[i * d + (a + 1)];
        cons.col(p) = radial / radial.norm();
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(cons);
    Eigen::MatrixXd qfac = qr.householderQ();
    // Re-orthonormalized constraint block, then its complement.
    const Eigen::MatrixXd basis = orthogonal_complement(qfac.leftCols(p + 1));
    return inertia_indices(basis.transpose() * sym * basis);
}

std::vector<BifurcationCandidate> bifurcation_candidates(const SpectrumReport& report) {
    std::vector<BifurcationCandidate> out;
    const double u = report.potential;
    for (int c = report.k() - 1; c > report.l; --c) {
        BifurcationCandidate cand;
        cand.eigenvalue = report.mu[static_cast<std::size_t>(c)];
        cand.multiplicity = report.alpha[static_cast<std::size_t>(c)];
        cand.s_star = -cand.eigenvalue / u;
        out.push_back(cand);
    }
    std::sort(out.begin(), out.end(),
              [](const BifurcationCandidate& a, const BifurcationCandidate& b) {
                  return a.s_star < b.s_star;
              });
    return out;
}

int bifurcation_lower_bound(const SpectrumReport& report) {
    if (report.l == report.k() - 1) return 0;
    int alpha = 0;
    for (int c = 0; c <= report.l; ++c)
        alpha += report.alpha[static_cast<std::size_t>(c)];
    int beta = 0;
    for (int c = report.l + 1; c < report.k(); ++c)
        beta = std::max(beta, report.alpha[static_cast<std::size_t>(c)]);
    const int n = 1 + [&] {
        int total = 0;
        for (int a : report.alpha) total += a;
        return total;
    }();
    return (n - 1 - alpha) / beta;
}

std::vector<Eigen::VectorXd> candidate_kernel_directions(
    const PlanarConfiguration& qh, const Masses& m, const BifurcationCandidate& cand) {
    const Configuration& q = qh.base();
    const int n = q.n(), d = q.d();
    Eigen::VectorXd sqm(n);
    for (int i = 0; i < n; ++i) sqm[i] = std::sqrt(m[i]);
    const Eigen::MatrixXd b = b_matrix(qh, m);
    const Eigen::MatrixXd bs =
        sqm.cwiseInverse().asDiagonal() * b * sqm.cwiseInverse().asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(bs);

    const double gap = cluster_gap(total_potential(q, m));
    std::vector<Eigen::VectorXd> out;
    for (Eigen::Index c = 0; c < es.eigenvalues().size(); ++c) {
        if (std::abs(es.eigenvalues()[c] - cand.eigenvalue) >= gap) continue;
        // Back to mass coordinates; unit mass norm is inherited from the
        // unit Euclidean norm of the conjugated eigenvector.
        const Eigen::VectorXd v = sqm.cwiseInverse().cwiseProduct(es.eigenvectors().col(c));
        Eigen::VectorXd ambient = Eigen::VectorXd::Zero(n * d);
        for (int i = 0; i < n; ++i) ambient[i * d] = v[i];
        out.push_back(ambient);
    }
    if (out.empty())
        throw SpectrumInvariantViolation(
            "no eigenvector matches the candidate eigenvalue");
    return out;
}

}  // namespace bcfg
