#include "bcfg/continuation.hpp"

#include <cmath>

namespace bcfg {

namespace {

// F(q, s) on flat coordinates.  Unlike balanced_residual this does not
// require |q|_S = 1: corrector iterates drift off the sphere by more than
// the public check tolerates, and the augmented system pulls them back.
Eigen::VectorXd raw_residual(const Eigen::VectorXd& qf, double s, const Masses& m,
                             int n, int d) {
    return balanced_residual_raw(Configuration(n, d, qf), m, s);
}

// dF/dq from potential.cpp plus dF/ds = U (dS-hat/ds) q, whose only
// nonzero entries sit on axis 0.
void raw_jacobian(const Eigen::VectorXd& qf, double s, const Masses& m, int n,
                  int d, Eigen::MatrixXd& dfdq, Eigen::VectorXd& dfds) {
    const Configuration q(n, d, qf);
    dfdq = balanced_residual_jacobian(q, m, s);
    const double u = total_potential(q, m);
    dfds = Eigen::VectorXd::Zero(n * d);
    for (int i = 0; i < n; ++i) dfds[i * d] = u * qf[i * d];
}

// Mass-weighted gauge row freezing rotations about the weighted axis,
// anchored at a reference configuration.  Empty for d = 2.
Eigen::VectorXd gauge_row(const Eigen::VectorXd& anchor_q, const Masses& m, int n,
                          int d) {
    const Eigen::VectorXd gen =
        rotation_generator(Configuration(n, d, anchor_q), m);
    return m.repeated(d).cwiseProduct(gen);
}

int sign_of(double v) { return v > 1e-14 ? 1 : (v < -1e-14 ? -1 : 0); }

struct NewtonResult {
    Eigen::VectorXd x;
    int iterations = 0;
};

// Damped least-squares Newton shared by the bordered corrector, the
// fixed-s solver, and the pinned switch: residual/Jacobian supplied as
// callables, backtracking on the residual norm.
template <typename ResFn, typename JacFn>
NewtonResult damped_solve(Eigen::VectorXd x, const ResFn& residual, const JacFn& jacobian,
                          const ContinuationSettings& settings) {
    Eigen::VectorXd g = residual(x);
    double gnorm = g.norm();
    for (int it = 0; it < settings.max_newton_iters; ++it) {
        if (gnorm < settings.newton_tol) return {x, it};
        const Eigen::MatrixXd jac = jacobian(x);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(jac);
        if (qr.rank() < jac.cols())
            throw SingularSystem("corrector Jacobian is rank-deficient (rank " +
                                 std::to_string(qr.rank()) + " of " +
                                 std::to_string(jac.cols()) + ")");
        const Eigen::VectorXd dx = qr.solve(-g);
        double t = 1.0;
        bool accepted = false;
        for (int half = 0; half < 16; ++half) {
            try {
                const Eigen::VectorXd xt = x + t * dx;
                const Eigen::VectorXd gt = residual(xt);
                if (gt.norm() < gnorm) {
                    x = xt;
                    g = gt;
                    gnorm = gt.norm();
                    accepted = true;
                    break;
                }
            } catch (const CollisionError&) {
                // shrink past the collision and keep searching
            }
            t *= 0.5;
        }
        if (!accepted)
            throw NoConvergence("line search stalled at residual " +
                                std::to_string(gnorm));
    }
    if (gnorm < settings.newton_tol)
        return {x, settings.max_newton_iters};
    throw NoConvergence("Newton iteration cap reached at residual " +
                        std::to_string(gnorm));
}

NewtonResult corrector(const Eigen::VectorXd& x0, const Eigen::VectorXd& anchor,
                       double delta, const ContinuationSettings& settings,
                       const Masses& m, int n, int d) {
    auto res = [&](const Eigen::VectorXd& x) {
        return augmented_residual(x, anchor, delta, m, n, d);
    };
    auto jac = [&](const Eigen::VectorXd& x) {
        return augmented_jacobian(x, anchor, m, n, d);
    };
    return damped_solve(x0, res, jac, settings);
}

// Solves F(q, s_fixed) = 0 in q alone, with the rotation gauge anchored at
// gauge_anchor for d = 3.
NewtonResult fixed_s_solve(const Eigen::VectorXd& q0, double s_fixed,
                           const Eigen::VectorXd& gauge_anchor,
                           const ContinuationSettings& settings, const Masses& m,
                           int n, int d) {
    const int nd = n * d;
    const bool gauged = (d == 3);
    Eigen::VectorXd grow;
    if (gauged) grow = gauge_row(gauge_anchor, m, n, d);
    auto res = [&](const Eigen::VectorXd& q) {
        Eigen::VectorXd out(nd + (gauged ? 1 : 0));
        out.head(nd) = raw_residual(q, s_fixed, m, n, d);
        if (gauged) out[nd] = grow.dot(q - gauge_anchor);
        return out;
    };
    auto jac = [&](const Eigen::VectorXd& q) {
        Eigen::MatrixXd dfdq;
        Eigen::VectorXd dfds;
        raw_jacobian(q, s_fixed, m, n, d, dfdq, dfds);
        Eigen::MatrixXd out(nd + (gauged ? 1 : 0), nd);
        out.topRows(nd) = dfdq;
        if (gauged) out.row(nd) = grow.transpose();
        return out;
    };
    return damped_solve(q0, res, jac, settings);
}

struct ClassifiedPoint {
    InertiaTriple inertia;
    PointClass cls = PointClass::saddle;
};

ClassifiedPoint classify_impl(const Configuration& q, double s, const Masses& m) {
    const int n = q.n(), d = q.d();
    TangentForm form = full_hessian_form(q, m, s);

    // Rotations surviving at this s: for s > 1 only the one fixing the
    // weighted axis (d = 3; none for d = 2).  Within 1e-8 of s = 1 the
    // full rotation algebra returns and the point is classified as the
    // s -> 1 limit central configuration: the restored modes carry
    // eigenvalues of order (s - 1) U, indistinguishable from zero at the
    // boundary landing distance of 1e-9.
    const bool at_limit = (s <= 1.0 + 1e-8);
    std::vector<std::pair<int, int>> planes;
    if (d == 3) {
        planes.push_back({1, 2});
        if (at_limit) {
            planes.push_back({0, 1});
            planes.push_back({0, 2});
        }
    } else if (at_limit) {
        planes.push_back({0, 1});
    }

    const Eigen::VectorXd w = m.repeated(d);
    std::vector<Eigen::VectorXd> gens;
    for (const auto& [a, b] : planes) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(n * d);
        for (int i = 0; i < n; ++i) {
            v[i * d + a] = -q.coords()[i * d + b];
            v[i * d + b] = q.coords()[i * d + a];
        }
        // Mass-orthogonal Gram-Schmidt; degenerate generators (bodies on
        // the rotation axis) drop out.
        for (const Eigen::VectorXd& u : gens)
            v -= u * w.cwiseProduct(u).dot(v);
        const double nr = std::sqrt(w.cwiseProduct(v).dot(v));
        if (nr > 1e-10) gens.push_back(v / nr);
    }
    if (!gens.empty()) {
        SymmetryKernel kernel;
        kernel.basis = std::move(gens);
        kernel.source = SymmetryKernel::Source::rotation_generator;
        form = reduced_hessian(form, kernel, m);
    }
    ClassifiedPoint out;
    out.inertia = inertia_indices(form.matrix);
    if (out.inertia.zero > 0)
        out.cls = PointClass::degenerate;
    else if (out.inertia.minus == 0)
        out.cls = PointClass::local_minimum;
    else
        out.cls = PointClass::saddle;
    return out;
}

// Re-centers, re-projects onto the sphere, and assembles the diagnostics
// of a converged point.  Both corrections must be negligible: a true
// solution of F = 0 is centered and normalized automatically.
BranchPoint make_branch_point(const Eigen::VectorXd& qf, double s,
                              const ContinuationSettings& settings, const Masses& m,
                              int n, int d) {
    Configuration q(n, d, qf);
    const Eigen::VectorXd com = center_of_mass(q, m);
    for (int i = 0; i < n; ++i) q.coords().segment(i * d, d) -= com;
    const SParameter sp(s);
    const double nrm = std::sqrt(s_norm2(q.coords(), m, sp, d));
    if (com.norm() >= 1e-8 || std::abs(nrm - 1.0) >= 1e-8)
        throw NoConvergence("converged point drifted off the manifold (center " +
                            std::to_string(com.norm()) + ", radius error " +
                            std::to_string(std::abs(nrm - 1.0)) + ")");
    q.coords() /= nrm;

    BranchPoint bp{q, s};
    bp.potential = total_potential(q, m);
    bp.residual_norm = balanced_residual(q, m, sp).norm();
    if (bp.residual_norm >= settings.newton_tol)
        throw NoConvergence("post-correction residual " +
                            std::to_string(bp.residual_norm) + " exceeds tolerance");
    const ClassifiedPoint cp = classify_impl(q, s, m);
    bp.inertia = cp.inertia;
    bp.classification = cp.cls;
    return bp;
}

Eigen::VectorXd flat(const BranchPoint& p) {
    Eigen::VectorXd x(p.q.coords().size() + 1);
    x.head(p.q.coords().size()) = p.q.coords();
    x[p.q.coords().size()] = p.s;
    return x;
}

double point_segment_distance(const Eigen::VectorXd& x, const Eigen::VectorXd& a,
                              const Eigen::VectorXd& b) {
    const Eigen::VectorXd ab = b - a;
    const double len2 = ab.squaredNorm();
    double t = len2 > 0.0 ? (x - a).dot(ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return (x - (a + t * ab)).norm();
}

}  // namespace

const char* to_string(PointClass c) {
    switch (c) {
        case PointClass::local_minimum: return "local_minimum";
        case PointClass::saddle: return "saddle";
        case PointClass::degenerate: return "degenerate";
    }
    return "?";
}

const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::turning_point: return "turning_point";
        case EventKind::start_bifurcation: return "start_bifurcation";
        case EventKind::collision_stop: return "collision_stop";
        case EventKind::s_bound: return "s_bound";
        case EventKind::max_steps: return "max_steps";
        case EventKind::loop_closed: return "loop_closed";
        case EventKind::newton_failure: return "newton_failure";
    }
    return "?";
}

Eigen::VectorXd augmented_residual(const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& anchor, double delta,
                                   const Masses& m, int n, int d) {
    const int nd = n * d;
    if (x.size() != nd + 1 || anchor.size() != nd + 1)
        throw DimensionMismatch("augmented state must have length n*d + 1");
    const bool gauged = (d == 3);
    Eigen::VectorXd out(nd + 1 + (gauged ? 1 : 0));
    out.head(nd) = raw_residual(x.head(nd), x[nd], m, n, d);
    out[nd] = (x - anchor).squaredNorm() - delta * delta;
    if (gauged)
        out[nd + 1] =
            gauge_row(anchor.head(nd), m, n, d).dot(x.head(nd) - anchor.head(nd));
    return out;
}

Eigen::MatrixXd augmented_jacobian(const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& anchor, const Masses& m,
                                   int n, int d) {
    const int nd = n * d;
    if (x.size() != nd + 1 || anchor.size() != nd + 1)
        throw DimensionMismatch("augmented state must have length n*d + 1");
    const bool gauged = (d == 3);
    Eigen::MatrixXd dfdq;
    Eigen::VectorXd dfds;
    raw_jacobian(x.head(nd), x[nd], m, n, d, dfdq, dfds);
    Eigen::MatrixXd out(nd + 1 + (gauged ? 1 : 0), nd + 1);
    out.topLeftCorner(nd, nd) = dfdq;
    out.topRightCorner(nd, 1) = dfds;
    out.row(nd) = 2.0 * (x - anchor).transpose();
    if (gauged) {
        out.row(nd + 1).head(nd) = gauge_row(anchor.head(nd), m, n, d).transpose();
        out(nd + 1, nd) = 0.0;
    }
    return out;
}

BranchPoint damped_newton(const Eigen::VectorXd& x0, const Eigen::VectorXd& anchor,
                          double delta, const ContinuationSettings& settings,
                          const Masses& m, int n, int d) {
    const NewtonResult r = corrector(x0, anchor, delta, settings, m, n, d);
    return make_branch_point(r.x.head(n * d), r.x[n * d], settings, m, n, d);
}

Eigen::VectorXd tangent_vector(const Eigen::VectorXd& x, const Masses& m, int n,
                               int d, const Eigen::VectorXd* previous) {
    const int nd = n * d;
    const bool gauged = (d == 3);
    Eigen::MatrixXd dfdq;
    Eigen::VectorXd dfds;
    raw_jacobian(x.head(nd), x[nd], m, n, d, dfdq, dfds);
    Eigen::MatrixXd jac(nd + (gauged ? 1 : 0), nd + 1);
    jac.topLeftCorner(nd, nd) = dfdq;
    jac.topRightCorner(nd, 1) = dfds;
    if (gauged) {
        jac.row(nd).head(nd) = gauge_row(x.head(nd), m, n, d).transpose();
        jac(nd, nd) = 0.0;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac, Eigen::ComputeFullV);
    const Eigen::VectorXd& sv = svd.singularValues();
    // One singular value vanishes structurally (the curve tangent); a
    // second near-zero value flags a bifurcation point on the branch.
    if (sv.size() >= 2 && sv[sv.size() - 2] < 1e-8 * sv[0])
        throw AmbiguousTangent("null space is multi-dimensional at s = " +
                               std::to_string(x[nd]));
    Eigen::VectorXd t = svd.matrixV().col(nd);
    t.normalize();
    const double orient = previous ? t.dot(*previous) : t[nd];
    if (orient < 0.0) t = -t;
    return t;
}

double symmetry_distance(const Configuration& a, const Configuration& b,
                         const Masses& m) {
    if (a.d() != b.d() || a.n() != b.n())
        throw DimensionMismatch("symmetry_distance: incompatible configurations");
    const Eigen::VectorXd mm = m.repeated(a.d());
    const double na = a.coords().cwiseProduct(mm).dot(a.coords());
    const double nb = b.coords().cwiseProduct(mm).dot(b.coords());
    if (a.d() == 2) {
        const double cross = a.coords().cwiseProduct(mm).dot(b.coords());
        return std::sqrt(std::max(0.0, na + nb - 2.0 * cross));
    }
    // Minimize |R(theta) a - b|_M over rotations in the {0} x R^2 plane:
    // the cross term is x-part + A cos(theta) + B sin(theta), maximized at
    // sqrt(A^2 + B^2).
    double xpart = 0.0, aa = 0.0, bb = 0.0;
    for (int i = 0; i < a.n(); ++i) {
        const double mi = m[i];
        const double ya = a.coords()[i * 3 + 1], za = a.coords()[i * 3 + 2];
        const double yb = b.coords()[i * 3 + 1], zb = b.coords()[i * 3 + 2];
        xpart += mi * a.coords()[i * 3] * b.coords()[i * 3];
        aa += mi * (ya * yb + za * zb);
        bb += mi * (ya * zb - za * yb);
    }
    const double best = xpart + std::sqrt(aa * aa + bb * bb);
    return std::sqrt(std::max(0.0, na + nb - 2.0 * best));
}

std::pair<BranchPoint, BranchPoint> branch_switch(const PlanarConfiguration& qh,
                                                  double s_star,
                                                  const Eigen::VectorXd& kernel_dir,
                                                  const ContinuationSettings& settings,
                                                  const Masses& m) {
    const Configuration& base = qh.base();
    const int n = base.n(), d = base.d(), nd = n * d;
    if (kernel_dir.size() != nd)
        throw DimensionMismatch("kernel direction has wrong length");
    const Eigen::VectorXd qhat = base.coords();
    // Near the pitchfork a fixed-s Newton that has not fully collapsed back
    // onto the trivial branch can sit at amplitude ~ tol/sigma_min, far
    // above the residual tolerance; only amplitudes commensurate with the
    // intended displacement count as off-branch.
    const double off_branch_tol =
        std::max(10.0 * settings.newton_tol, 0.1 * settings.epsilon_switch);
    bool fell_back = false;

    auto displaced_guess = [&](double eps, double s) {
        Configuration g(n, d, qhat + eps * kernel_dir);
        return normalize_to_sphere(g, m, SParameter(s)).coords();
    };
    // The anchor is the trivial-branch point at the *same* s as the first
    // off-branch point, so the seed tangent (first - anchor) points along
    // the amplitude direction instead of diving down the trivial branch.
    auto finish = [&](const Eigen::VectorXd& qf, double s)
        -> std::pair<BranchPoint, BranchPoint> {
        BranchPoint first = make_branch_point(qf, s, settings, m, n, d);
        BranchPoint anchor = make_branch_point(qhat, s, settings, m, n, d);
        return {anchor, first};
    };

    // Fixed-parameter attempts: displace along the kernel, offset s, and
    // solve F(q, s) = 0 at frozen s.  Near the bifurcation the off-branch
    // basin can be tiny, so the sign/offset ladder is tried first and a
    // pinned-amplitude solve (below) is kept as fallback.
    for (double scale : {1.0, 10.0}) {
        for (const auto& [sig, tau] : std::initializer_list<std::pair<double, double>>{
                 {1.0, 1.0}, {-1.0, 1.0}, {1.0, -1.0}, {-1.0, -1.0}}) {
            const double s_try = s_star + tau * settings.delta_s_switch;
            if (s_try < std::max(1.0, settings.s_min) || s_try > settings.s_max)
                continue;
            try {
                const Eigen::VectorXd q0 =
                    displaced_guess(sig * scale * settings.epsilon_switch, s_try);
                const NewtonResult r =
                    fixed_s_solve(q0, s_try, qhat, settings, m, n, d);
                const Configuration qr(n, d, r.x);
                if (symmetry_distance(qr, base, m) > off_branch_tol)
                    return finish(r.x, s_try);
                fell_back = true;
            } catch (const Error&) {
                // try the next rung
            }
        }
    }

    // Pinned-amplitude fallback: treat s as unknown and pin the component
    // of q - q-hat along the kernel direction to epsilon.  The bordered
    // system is well-conditioned right at the pitchfork, where the
    // fixed-parameter solve keeps collapsing back to the trivial branch.
    const Eigen::VectorXd pin_row = m.repeated(d).cwiseProduct(kernel_dir);
    const bool gauged = (d == 3);
    Eigen::VectorXd grow;
    if (gauged) grow = gauge_row(qhat, m, n, d);
    // Pin at least one arclength step of amplitude, or the first predictor
    // lands deep inside the trivial basin and the trace collapses.
    const double base_eps = std::max(settings.epsilon_switch, settings.delta);
    for (double scale : {1.0, 10.0}) {
        const double eps = scale * base_eps;
        auto res = [&](const Eigen::VectorXd& x) {
            Eigen::VectorXd out(nd + 1 + (gauged ? 1 : 0));
            out.head(nd) = raw_residual(x.head(nd), x[nd], m, n, d);
            out[nd] = pin_row.dot(x.head(nd) - qhat) - eps;
            if (gauged) out[nd + 1] = grow.dot(x.head(nd) - qhat);
            return out;
        };
        auto jac = [&](const Eigen::VectorXd& x) {
            Eigen::MatrixXd dfdq;
            Eigen::VectorXd dfds;
            raw_jacobian(x.head(nd), x[nd], m, n, d, dfdq, dfds);
            Eigen::MatrixXd out(nd + 1 + (gauged ? 1 : 0), nd + 1);
            out.topLeftCorner(nd, nd) = dfdq;
            out.topRightCorner(nd, 1) = dfds;
            out.row(nd).head(nd) = pin_row.transpose();
            out(nd, nd) = 0.0;
            if (gauged) {
                out.row(nd + 1).head(nd) = grow.transpose();
                out(nd + 1, nd) = 0.0;
            }
            return out;
        };
        try {
            Eigen::VectorXd x0(nd + 1);
            x0.head(nd) = displaced_guess(eps, s_star);
            x0[nd] = s_star;
            const NewtonResult r = damped_solve(x0, res, jac, settings);
            const Configuration qr(n, d, r.x.head(nd));
            if (r.x[nd] >= std::max(1.0, settings.s_min) &&
                symmetry_distance(qr, base, m) > off_branch_tol)
                return finish(r.x.head(nd), r.x[nd]);
            fell_back = true;
        } catch (const Error&) {
            // fall through
        }
    }

    if (fell_back)
        throw FellBackToTrivial("all switch attempts converged to the trivial "
                                "branch at s* = " + std::to_string(s_star));
    throw NoConvergence("branch switch failed to converge at s* = " +
                        std::to_string(s_star));
}

Branch trace_branch(const BranchPoint& anchor, const BranchPoint& first,
                    const ContinuationSettings& settings, const Masses& m) {
    const int n = first.q.n(), d = first.q.d(), nd = n * d;
    const double delta0 = settings.delta;
    const double delta_floor = delta0 / 16.0;

    Branch branch;
    branch.points.push_back(first);
    branch.points.front().arclength = 0.0;

    Eigen::VectorXd x_cur = flat(first);
    Eigen::VectorXd prev_t = x_cur - flat(anchor);
    if (prev_t.norm() > 0.0) prev_t.normalize();
    double delta = delta0;
    double arclen = 0.0;
    int last_sign = 0;
    int streak = 0;

    auto record = [&](EventKind kind) {
        branch.events.push_back(
            {static_cast<int>(branch.points.size()) - 1, kind});
    };

    // Lands the final point exactly on an s bound by a frozen-s solve
    // started from `guess`; falls back to just stopping when that fails.
    auto land_on_bound = [&](double s_land, const Eigen::VectorXd& guess) {
        try {
            const NewtonResult r =
                fixed_s_solve(guess, s_land, x_cur.head(nd), settings, m, n, d);
            const Configuration qc(n, d, r.x);
            if (qc.min_separation() > settings.collision_tol) {
                BranchPoint bp = make_branch_point(r.x, s_land, settings, m, n, d);
                arclen += (flat(bp) - x_cur).norm();
                bp.arclength = arclen;
                branch.points.push_back(bp);
            }
        } catch (const Error&) {
            // keep the last interior point as the endpoint
        }
        record(EventKind::s_bound);
    };

    for (int step = 0; step < settings.max_steps; ++step) {
        const Eigen::VectorXd t = tangent_vector(x_cur, m, n, d, &prev_t);
        branch.points.back().tangent_s = t[nd];
        const int cs = sign_of(t[nd]);
        if (cs != 0 && last_sign != 0 && cs != last_sign)
            record(EventKind::turning_point);
        if (cs != 0) last_sign = cs;

        // Predictor/corrector with step halving on corrector failure.
        Eigen::VectorXd x_new;
        int iters = 0;
        while (true) {
            const Eigen::VectorXd x_pred = x_cur + delta * t;
            try {
                const NewtonResult r =
                    corrector(x_pred, x_cur, delta, settings, m, n, d);
                x_new = r.x;
                iters = r.iterations;
                break;
            } catch (const Error&) {
                if (delta * 0.5 >= delta_floor) {
                    delta *= 0.5;
                    streak = 0;
                    continue;
                }
                record(EventKind::newton_failure);
                return branch;
            }
        }

        // Parameter bounds: land exactly on the bound and stop.  At
        // s_min = 1 the d = 3 problem regains full rotational symmetry, so
        // the landing value stays a hair above it.
        const double lo = settings.s_min + 1e-9, hi = settings.s_max - 1e-9;
        if (x_new[nd] <= lo || x_new[nd] >= hi) {
            Eigen::VectorXd guess = x_new.head(nd);
            land_on_bound(x_new[nd] <= lo ? lo : hi, guess);
            return branch;
        }

        {
            const Configuration qc(n, d, x_new.head(nd));
            if (qc.min_separation() <= settings.collision_tol) {
                record(EventKind::collision_stop);
                return branch;
            }
        }

        std::optional<BranchPoint> accepted;
        try {
            accepted = make_branch_point(x_new.head(nd), x_new[nd], settings, m, n, d);
        } catch (const Error&) {
            record(EventKind::newton_failure);
            return branch;
        }
        BranchPoint& bp = *accepted;
        const Eigen::VectorXd x_acc = flat(bp);
        arclen += (x_acc - x_cur).norm();
        bp.arclength = arclen;
        branch.points.push_back(bp);

        // Loop closure: either an exact revisit of an earlier point
        // (s and shape within 1e-6), or proximity to an earlier polyline
        // segment.  Re-passes are phase-shifted by a fraction of the step
        // length, which the segment test absorbs; a trailing arclength
        // window is excluded so the test cannot see its own recent steps.
        {
            const double cutoff = arclen - 10.0 * delta0;
            bool closed = false;
            const auto& pts = branch.points;
            for (std::size_t j = 0; j + 1 < pts.size() && !closed; ++j) {
                if (pts[j].arclength > cutoff) break;
                if (std::abs(pts[j].s - bp.s) < 1e-6 &&
                    symmetry_distance(pts[j].q, bp.q, m) < 1e-6)
                    closed = true;
                if (pts[j + 1].arclength <= cutoff &&
                    point_segment_distance(x_acc, flat(pts[j]), flat(pts[j + 1])) <
                        delta0 / 10.0)
                    closed = true;
            }
            if (closed) {
                record(EventKind::loop_closed);
                return branch;
            }
        }

        // Step adaptation: recover after halvings once the corrector is
        // comfortable again, never exceeding the nominal step.
        if (iters <= 3) {
            if (++streak >= 3 && delta < delta0) {
                delta = std::min(2.0 * delta, delta0);
                streak = 0;
            }
        } else {
            streak = 0;
        }

        prev_t = t;
        x_cur = x_acc;
    }
    record(EventKind::max_steps);
    return branch;
}

BranchPoint solve_at_fixed_s(const Configuration& guess, double s,
                             const ContinuationSettings& settings, const Masses& m) {
    const int n = guess.n(), d = guess.d();
    const NewtonResult sol =
        fixed_s_solve(guess.coords(), s, guess.coords(), settings, m, n, d);
    return make_branch_point(sol.x, s, settings, m, n, d);
}

std::vector<int> detect_turning_points(const Branch& branch,
                                       const ContinuationSettings& settings,
                                       const Masses& m) {
    std::vector<int> out;
    const auto& pts = branch.points;
    if (pts.size() < 3) return out;
    const int n = pts.front().q.n(), d = pts.front().q.d(), nd = n * d;
    int last_sign = 0;
    int last_idx = -1;
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const int cs = sign_of(pts[k].tangent_s);
        if (cs == 0) continue;
        if (last_sign != 0 && cs != last_sign && last_idx >= 0) {
            // One bisection step on the predictor: march half the gap from
            // the earlier bracket point and see which side the fold is on.
            int refined = static_cast<int>(k);
            try {
                const Eigen::VectorXd xa = flat(pts[static_cast<std::size_t>(last_idx)]);
                const Eigen::VectorXd xb = flat(pts[k]);
                Eigen::VectorXd dir = xb - xa;
                const double gap = dir.norm();
                if (gap > 0.0) {
                    dir /= gap;
                    const Eigen::VectorXd ta = tangent_vector(xa, m, n, d, &dir);
                    const NewtonResult mid =
                        corrector(xa + 0.5 * gap * ta, xa, 0.5 * gap, settings, m, n, d);
                    const Eigen::VectorXd tm = tangent_vector(mid.x, m, n, d, &ta);
                    if (sign_of(tm[nd]) == sign_of(ta[nd]))
                        refined = static_cast<int>(k);
                    else
                        refined = last_idx;
                }
            } catch (const Error&) {
                // keep the unrefined bracket index
            }
            out.push_back(refined);
        }
        last_sign = cs;
        last_idx = static_cast<int>(k);
    }
    return out;
}

PointClass classify_point(const BranchPoint& point, const Masses& m) {
    return classify_impl(point.q, point.s, m).cls;
}

InertiaTriple branch_point_inertia(const BranchPoint& point, const Masses& m) {
    return classify_impl(point.q, point.s, m).inertia;
}

}  // namespace bcfg
