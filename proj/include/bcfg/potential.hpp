#pragma once

#include "bcfg/types.hpp"

// The Newtonian potential U, its first two derivatives, the S-weighted
// geometry of the configuration sphere, and the balanced-configuration
// residual
//
//     F(q, s) = M^{-1} grad U(q) + U(q) S-hat q,
//
// whose zeros on the sphere |q|_S^2 = 1 are exactly the balanced
// configurations (the multiplier lambda = U(q)/|q|_S^2 collapses to U on
// the sphere).

namespace bcfg {

// U(q) = sum_{i<j} m_i m_j / r_ij.  Homogeneous of degree -1.
double total_potential(const Configuration& q, const Masses& m);

// grad U(q); block i equals sum_{j != i} m_i m_j (q_j - q_i) / r_ij^3.
// Blocks sum to zero (translation invariance) and <grad U, q> = -U (Euler).
Eigen::VectorXd potential_gradient(const Configuration& q, const Masses& m);

// Full (n*d)x(n*d) second derivative assembled from the pair blocks
//     D_ij = (m_i m_j / r_ij^3) (I - 3 u_ij u_ij^T),   u_ij = (q_i - q_j)/r_ij,
// with D_ii = -sum_{j != i} D_ij.  Symmetric; block rows sum to zero.
Eigen::MatrixXd potential_hessian(const Configuration& q, const Masses& m);

// Weighted scalar product <a, b>_S = sum_i m_i <S a_i, b_i>.
double s_inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Masses& m,
               const SParameter& s, int d);

// |a|_S^2 shorthand.
double s_norm2(const Eigen::VectorXd& a, const Masses& m, const SParameter& s, int d);

// Mass-weighted mean of the body positions.
Eigen::VectorXd center_of_mass(const Configuration& q, const Masses& m);

// q / |q|_S: projection onto the configuration sphere |q|_S^2 = 1.
// Expects the center of mass at the origin; direction is preserved.
Configuration normalize_to_sphere(const Configuration& q, const Masses& m,
                                  const SParameter& s);

// F(q, s) = M^{-1} grad U + U S-hat q.  Requires |q|_S^2 = 1 (within 1e-6).
Eigen::VectorXd balanced_residual(const Configuration& q, const Masses& m,
                                  const SParameter& s);

// F(q, s) without the normalization precondition.  Newton iterates pass
// through states slightly off the sphere; the solvers pull them back.
Eigen::VectorXd balanced_residual_raw(const Configuration& q, const Masses& m,
                                      double s);

// dF/dq = M^{-1} D^2 U + U S-hat + (S-hat q)(grad U)^T.
Eigen::MatrixXd balanced_residual_jacobian(const Configuration& q, const Masses& m,
                                           double s);

}  // namespace bcfg
