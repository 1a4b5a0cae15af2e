#include "bcfg/flow.hpp"

#include <cmath>

namespace bcfg {

namespace {

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

TangentForm full_hessian_form(const Configuration& q, const Masses& m, double s) {
    const int n = q.n(), d = q.d();
    const SParameter sp(s);
    {
        const Eigen::VectorXd res = balanced_residual(q, m, sp);
        if (res.norm() >= 1e-8)
            throw NotASolution("full_hessian_form requires a solution (residual " +
                               std::to_string(res.norm()) + ")");
    }
    const double u = total_potential(q, m);
    const Eigen::VectorXd mm = m.repeated(d);
    const Eigen::VectorXd sqm = mm.cwiseSqrt();
    const Eigen::VectorXd shat = sp.hat_diagonal(n, d);

    // Conjugate M^{-1}D^2U + U S-hat by M^{1/2}; S-hat and M commute, so
    // the result is symmetric and isospectral to the original operator.
    Eigen::MatrixXd sym = sqm.cwiseInverse().asDiagonal() * potential_hessian(q, m) *
                          sqm.cwiseInverse().asDiagonal();
    sym += (u * shat).asDiagonal();

    // Constraint directions in conjugated coordinates: the d translations
    // and the S-radial direction S-hat q.
    Eigen::MatrixXd cons(n * d, d + 1);
    for (int a = 0; a < d; ++a) {
        Eigen::VectorXd t = Eigen::VectorXd::Zero(n * d);
        for (int i = 0; i < n; ++i) t[i * d + a] = sqm[i * d + a];
        cons.col(a) = t / t.norm();
    }
    {
        Eigen::VectorXd radial = sqm.cwiseProduct(shat.cwiseProduct(q.coords()));
        cons.col(d) = radial / radial.norm();
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(cons);
    Eigen::MatrixXd qfac = qr.householderQ();
    const Eigen::MatrixXd basis = orthogonal_complement(qfac.leftCols(d + 1));

    TangentForm out;
    out.matrix = basis.transpose() * sym * basis;
    out.basis = basis;
    out.sqrt_mass = sqm;
    return out;
}

Eigen::VectorXd rotation_generator(const Configuration& q, const Masses& m) {
    if (q.d() != 3)
        throw ValidationError("rotation_generator requires d = 3");
    const int n = q.n();
    Eigen::VectorXd gen = Eigen::VectorXd::Zero(n * 3);
    for (int i = 0; i < n; ++i) {
        gen[i * 3 + 1] = -q.coords()[i * 3 + 2];
        gen[i * 3 + 2] = q.coords()[i * 3 + 1];
    }
    const double nrm2 = gen.cwiseProduct(m.repeated(3)).dot(gen);
    if (!(nrm2 > 1e-24))
        throw ZeroVector("configuration lies on the weighted axis; "
                         "the rotation orbit is singular");
    return gen / std::sqrt(nrm2);
}

SymmetryKernel symmetry_kernel(const PlanarConfiguration& qh, const Masses& m) {
    SymmetryKernel out;
    if (qh.d() == 2) {
        // S = diag(s, 1) with s > 1 admits no continuous symmetry.
        out.source = SymmetryKernel::Source::rotation_generator;
        return out;
    }
    const Configuration& q = qh.base();
    const int n = q.n(), p = 2;
    const double u = total_potential(q, m);

    // Eigen-decompose the in-plane block on the tangent-within-plane space
    // and keep the null directions (the same reduction as planar_inertia).
    Eigen::VectorXd sqm(p * n);
    for (int a = 0; a < p; ++a)
        for (int i = 0; i < n; ++i) sqm[a * n + i] = std::sqrt(m[i]);
    const Eigen::MatrixXd dm = d_matrix(qh, m);
    Eigen::MatrixXd sym = sqm.cwiseInverse().asDiagonal() * dm *
                          sqm.cwiseInverse().asDiagonal();
    sym += u * Eigen::MatrixXd::Identity(p * n, p * n);

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
                radial[a * n + i] = sqm[a * n + i] * q.coords()[i * 3 + (a + 1)];
        cons.col(p) = radial / radial.norm();
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(cons);
    Eigen::MatrixXd qfac = qr.householderQ();
    const Eigen::MatrixXd basis = orthogonal_complement(qfac.leftCols(p + 1));
    const Eigen::MatrixXd reduced = basis.transpose() * sym * basis;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(reduced);
    const double scale = es.eigenvalues().cwiseAbs().maxCoeff();
    const double tol = 1e-9 * std::max(1.0, scale);
    for (Eigen::Index c = 0; c < es.eigenvalues().size(); ++c) {
        if (std::abs(es.eigenvalues()[c]) > tol) continue;
        // Lift from the reduced basis to in-plane sqrt-mass coordinates,
        // then to an ambient mass-coordinate flat vector.
        const Eigen::VectorXd w = basis * es.eigenvectors().col(c);
        Eigen::VectorXd ambient = Eigen::VectorXd::Zero(n * 3);
        for (int a = 0; a < p; ++a)
            for (int i = 0; i < n; ++i)
                ambient[i * 3 + (a + 1)] = w[a * n + i] / sqm[a * n + i];
        out.basis.push_back(ambient);
    }
    if (out.basis.empty())
        throw SpectrumInvariantViolation(
            "planar configuration has no in-plane null direction; expected at "
            "least the rotation generator");
    out.source = out.basis.size() == 1 ? SymmetryKernel::Source::rotation_generator
                                       : SymmetryKernel::Source::planar_hessian_kernel;
    return out;
}

TangentForm reduced_hessian(const TangentForm& form, const SymmetryKernel& kernel,
                            const Masses& m) {
    if (kernel.basis.empty()) return form;
    const double form_scale = std::max(1.0, form.matrix.cwiseAbs().maxCoeff());

    // Express each kernel vector in the form's orthonormal basis and check
    // that it annihilates the form there.
    Eigen::MatrixXd kcols(form.basis.rows(),
                          static_cast<Eigen::Index>(kernel.basis.size()));
    for (std::size_t kidx = 0; kidx < kernel.basis.size(); ++kidx) {
        const Eigen::VectorXd w =
            form.sqrt_mass.cwiseProduct(kernel.basis[kidx]);
        kcols.col(static_cast<Eigen::Index>(kidx)) = w;
        const Eigen::VectorXd in_basis = form.basis.transpose() * w;
        // The kernel vector must lie inside W and in ker of the form.
        const double outside = (w - form.basis * in_basis).norm();
        const double image = (form.matrix * in_basis).norm();
        if (outside > 1e-8 * w.norm() || image >= 1e-6 * form_scale)
            throw KernelMismatch(
                "kernel vector " + std::to_string(kidx) +
                " does not annihilate the form (|Hv| = " + std::to_string(image) +
                ", out-of-space " + std::to_string(outside) + ")");
    }

    Eigen::MatrixXd kin(form.dim(), kcols.cols());
    for (Eigen::Index c = 0; c < kcols.cols(); ++c)
        kin.col(c) = form.basis.transpose() * kcols.col(c);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(kin);
    Eigen::MatrixXd qfac = qr.householderQ();
    const Eigen::MatrixXd complement = orthogonal_complement(qfac.leftCols(kin.cols()));

    TangentForm out;
    out.matrix = complement.transpose() * form.matrix * complement;
    out.basis = form.basis * complement;
    out.sqrt_mass = form.sqrt_mass;
    return out;
}

int spectral_flow(const ReducedHessianPath& path) {
    const TangentForm left = path.evaluator(path.s_a);
    const TangentForm right = path.evaluator(path.s_b);
    const InertiaTriple il = inertia_indices(left.matrix);
    const InertiaTriple ir = inertia_indices(right.matrix);
    if (il.zero > 0)
        throw NotAdmissible("left endpoint s = " + std::to_string(path.s_a) +
                            " is degenerate (nullity " + std::to_string(il.zero) + ")");
    if (ir.zero > 0)
        throw NotAdmissible("right endpoint s = " + std::to_string(path.s_b) +
                            " is degenerate (nullity " + std::to_string(ir.zero) + ")");
    return il.minus - ir.minus;
}

BifurcationCertificate certify_bifurcation(const PlanarConfiguration& qh,
                                           const Masses& m, double s_a, double s_b) {
    if (!(s_a >= 1.0) || !(s_b > s_a))
        throw ValidationError("certify_bifurcation requires 1 <= s_a < s_b");
    const SpectrumReport report = cluster_spectrum(qh, m);
    const std::vector<BifurcationCandidate> cands = bifurcation_candidates(report);
    const SymmetryKernel kernel = symmetry_kernel(qh, m);

    BifurcationCertificate cert;
    cert.candidates = cands;
    cert.lower_bound = bifurcation_lower_bound(report);
    cert.s_a = s_a;
    cert.s_b = s_b;

    // Admissibility demands non-degenerate endpoints.  s = 1 is always
    // degenerate (the -U cluster of the normal block crosses zero there),
    // so an interval starting at 1 is shifted just inside the balanced
    // regime; endpoints on (or within 1e-6 of) a candidate instant are
    // nudged as well.
    if (cert.s_a <= 1.0 + 1e-9) {
        cert.s_a = 1.0 + 1e-3;
        cert.nudged = true;
        if (!(cert.s_b > cert.s_a))
            throw ValidationError("certify_bifurcation: interval collapses after "
                                  "nudging s_a off the degenerate value 1");
    }
    for (const BifurcationCandidate& c : cands) {
        if (std::abs(cert.s_a - c.s_star) < 1e-6) {
            cert.s_a -= 1e-4;
            if (cert.s_a < 1.0) cert.s_a = c.s_star + 1e-4;
            cert.nudged = true;
        }
        if (std::abs(cert.s_b - c.s_star) < 1e-6) {
            cert.s_b += 1e-4;
            cert.nudged = true;
        }
    }

    ReducedHessianPath path;
    path.s_a = cert.s_a;
    path.s_b = cert.s_b;
    path.evaluator = [&qh, &m, &kernel](double s) {
        return reduced_hessian(full_hessian_form(qh.base(), m, s), kernel, m);
    };
    cert.flow = spectral_flow(path);

    for (const BifurcationCandidate& c : cands)
        if (c.s_star > cert.s_a && c.s_star < cert.s_b)
            cert.candidates_in_interval += c.multiplicity;
    if (cert.flow != cert.candidates_in_interval)
        throw SpectrumInvariantViolation(
            "spectral flow " + std::to_string(cert.flow) +
            " does not match candidate multiplicity " +
            std::to_string(cert.candidates_in_interval) + " inside the interval");
    return cert;
}

}  // namespace bcfg
