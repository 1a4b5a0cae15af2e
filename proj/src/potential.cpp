#include "bcfg/potential.hpp"

#include <cmath>

namespace bcfg {

double total_potential(const Configuration& q, const Masses& m) {
    require_collision_free(q);
    double u = 0.0;
    for (int i = 0; i < q.n(); ++i)
        for (int j = i + 1; j < q.n(); ++j) u += m[i] * m[j] / q.distance(i, j);
    return u;
}

Eigen::VectorXd potential_gradient(const Configuration& q, const Masses& m) {
    require_collision_free(q);
    const int n = q.n(), d = q.d();
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n * d);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const Eigen::VectorXd diff = q.body(j) - q.body(i);
            const double r = diff.norm();
            const Eigen::VectorXd f = (m[i] * m[j] / (r * r * r)) * diff;
            g.segment(i * d, d) += f;
            g.segment(j * d, d) -= f;
        }
    }
    return g;
}

Eigen::MatrixXd potential_hessian(const Configuration& q, const Masses& m) {
    require_collision_free(q);
    const int n = q.n(), d = q.d();
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n * d, n * d);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const Eigen::VectorXd diff = q.body(i) - q.body(j);
            const double r = diff.norm();
            const Eigen::VectorXd u = diff / r;
            const Eigen::MatrixXd dij =
                (m[i] * m[j] / (r * r * r)) *
                (Eigen::MatrixXd::Identity(d, d) - 3.0 * u * u.transpose());
            h.block(i * d, j * d, d, d) = dij;
            h.block(j * d, i * d, d, d) = dij;
            h.block(i * d, i * d, d, d) -= dij;
            h.block(j * d, j * d, d, d) -= dij;
        }
    }
    return h;
}

double s_inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Masses& m,
               const SParameter& s, int d) {
    const Eigen::Index len = static_cast<Eigen::Index>(m.n()) * d;
    if (a.size() != len || b.size() != len)
        throw DimensionMismatch("s_inner: expected vectors of length " +
                                std::to_string(len));
    const Eigen::VectorXd w =
        m.repeated(d).cwiseProduct(s.hat_diagonal(m.n(), d));
    return a.cwiseProduct(w).dot(b);
}

double s_norm2(const Eigen::VectorXd& a, const Masses& m, const SParameter& s, int d) {
    return s_inner(a, a, m, s, d);
}

Eigen::VectorXd center_of_mass(const Configuration& q, const Masses& m) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(q.d());
    for (int i = 0; i < q.n(); ++i) c += m[i] * q.body(i);
    return c / m.total();
}

Configuration normalize_to_sphere(const Configuration& q, const Masses& m,
                                  const SParameter& s) {
    const double nrm2 = s_norm2(q.coords(), m, s, q.d());
    if (!(nrm2 > 0.0))
        throw ZeroConfiguration("cannot normalize the zero configuration");
    return Configuration(q.n(), q.d(), q.coords() / std::sqrt(nrm2));
}

Eigen::VectorXd balanced_residual(const Configuration& q, const Masses& m,
                                  const SParameter& s) {
    const double nrm2 = s_norm2(q.coords(), m, s, q.d());
    if (std::abs(nrm2 - 1.0) > 1e-6)
        throw NotNormalized("balanced_residual: |q|_S^2 = " + std::to_string(nrm2) +
                            ", expected 1");
    return balanced_residual_raw(q, m, s.value());
}

namespace {

// S-hat diagonal without the s >= 1 validation; Newton iterates may briefly
// cross below 1 while converging onto the s_min boundary.
Eigen::VectorXd shat_diag_unchecked(double s, int n, int d) {
    Eigen::VectorXd diag = Eigen::VectorXd::Ones(n * d);
    for (int i = 0; i < n; ++i) diag[i * d] = s;
    return diag;
}

}  // namespace

Eigen::VectorXd balanced_residual_raw(const Configuration& q, const Masses& m,
                                      double s) {
    const double u = total_potential(q, m);
    const Eigen::VectorXd g = potential_gradient(q, m);
    const Eigen::VectorXd minv = m.repeated(q.d()).cwiseInverse();
    const Eigen::VectorXd shat = shat_diag_unchecked(s, q.n(), q.d());
    return minv.cwiseProduct(g) + u * shat.cwiseProduct(q.coords());
}

Eigen::MatrixXd balanced_residual_jacobian(const Configuration& q, const Masses& m,
                                           double s) {
    const int n = q.n(), d = q.d();
    const double u = total_potential(q, m);
    const Eigen::VectorXd g = potential_gradient(q, m);
    const Eigen::VectorXd minv = m.repeated(d).cwiseInverse();
    const Eigen::VectorXd shat = shat_diag_unchecked(s, n, d);
    Eigen::MatrixXd jac = minv.asDiagonal() * potential_hessian(q, m);
    jac += (u * shat).asDiagonal();
    // U depends on q, so the U S-hat q term contributes (S-hat q) (grad U)^T.
    jac += shat.cwiseProduct(q.coords()) * g.transpose();
    return jac;
}

}  // namespace bcfg
