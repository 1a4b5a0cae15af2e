#pragma once

#include "bcfg/flow.hpp"
#include "bcfg/spectrum.hpp"

#include <optional>
#include <string>
#include <utility>

// Pseudo-arclength continuation of the balanced-configuration family
// F(q, s) = 0: predictor/corrector tracing with a damped Newton corrector,
// branch switching along transverse kernel directions at bifurcation
// instants, turning-point detection, and solution classification.

namespace bcfg {

struct ContinuationSettings {
    double delta = 0.01;           // arclength step
    double newton_tol = 1e-11;
    int max_newton_iters = 50;
    int max_steps = 20000;
    double s_min = 1.0;
    double s_max = 10.0;
    double collision_tol = 1e-6;   // min pair separation along a branch
    double epsilon_switch = 1e-3;  // kernel displacement at switching
    double delta_s_switch = 1e-3;  // parameter offset at switching
    bool probe_turning_points = false;  // seeded random probe at folds
    unsigned seed = 0;

    bool operator==(const ContinuationSettings&) const = default;
};

enum class PointClass { local_minimum, saddle, degenerate };

const char* to_string(PointClass c);

// A converged solution (q, s) with diagnostics.  `inertia` refers to the
// symmetry-reduced Hessian on the sphere tangent space.
struct BranchPoint {
    Configuration q;
    double s = 0.0;
    double potential = 0.0;
    double residual_norm = 0.0;
    InertiaTriple inertia;
    double arclength = 0.0;
    double tangent_s = 0.0;  // s-component of the outgoing unit tangent
    PointClass classification = PointClass::saddle;
};

enum class EventKind {
    turning_point,
    start_bifurcation,
    collision_stop,
    s_bound,
    max_steps,
    loop_closed,
    newton_failure,
};

const char* to_string(EventKind k);

struct BranchEvent {
    int index = 0;
    EventKind kind = EventKind::turning_point;
};

// An ordered run of branch points plus the events met while tracing.
struct Branch {
    std::vector<BranchPoint> points;
    std::vector<BranchEvent> events;
    std::optional<std::pair<std::string, double>> parent;  // (id, s_star)
};

// Residual of the bordered continuation system at x = (q_flat, s):
// F(q, s), the arclength equation |x - anchor|^2 - delta^2, and (d = 3
// only) the rotation gauge row anchored at the anchor configuration.
Eigen::VectorXd augmented_residual(const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& anchor, double delta,
                                   const Masses& m, int n, int d);

// Analytic Jacobian of augmented_residual with respect to x.
Eigen::MatrixXd augmented_jacobian(const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& anchor, const Masses& m,
                                   int n, int d);

// Damped (backtracking) Newton on the bordered system, started at x0 and
// anchored at `anchor`.  The converged point is re-centered and
// re-projected onto the sphere; both corrections must be negligible.
BranchPoint damped_newton(const Eigen::VectorXd& x0, const Eigen::VectorXd& anchor,
                          double delta, const ContinuationSettings& settings,
                          const Masses& m, int n, int d);

// Unit null vector of the gauged Jacobian at x, oriented along `previous`
// (first step: toward increasing s).  Throws AmbiguousTangent when the
// null space is multi-dimensional, which flags a bifurcation point.
Eigen::VectorXd tangent_vector(const Eigen::VectorXd& x, const Masses& m, int n,
                               int d, const Eigen::VectorXd* previous);

// Leaves the trivial branch at a candidate instant: displaces qh along
// kernel_dir, solves nearby, and certifies the result is off-branch.
// Returns the trivial-branch anchor and the first off-branch point.
std::pair<BranchPoint, BranchPoint> branch_switch(const PlanarConfiguration& qh,
                                                  double s_star,
                                                  const Eigen::VectorXd& kernel_dir,
                                                  const ContinuationSettings& settings,
                                                  const Masses& m);

// Predictor/corrector loop seeded by (anchor, first).  Terminates on the
// s bounds, collision threshold, max_steps, repeated corrector failure, or
// loop closure; the reason is recorded as an event, not an error.
Branch trace_branch(const BranchPoint& anchor, const BranchPoint& first,
                    const ContinuationSettings& settings, const Masses& m);

// Solves F(q, s) = 0 at frozen s from the given initial guess, with the
// rotation gauge anchored at the guess for d = 3.  Used by the seeded
// turning-point probe and by callers polishing imported configurations.
BranchPoint solve_at_fixed_s(const Configuration& guess, double s,
                             const ContinuationSettings& settings, const Masses& m);

// Indices where the s-component of the tangent changes sign, each refined
// by one bisection step on the predictor.
std::vector<int> detect_turning_points(const Branch& branch,
                                       const ContinuationSettings& settings,
                                       const Masses& m);

// local_minimum iff the reduced Hessian has no negative and no zero
// eigenvalues; degenerate iff it has a zero one; saddle otherwise.
PointClass classify_point(const BranchPoint& point, const Masses& m);

// Reduced-Hessian inertia underlying classify_point.
InertiaTriple branch_point_inertia(const BranchPoint& point, const Masses& m);

// Distance between two configurations modulo the continuous symmetry:
// for d = 3 the minimum mass-distance over rotations in the {0} x R^2
// plane, for d = 2 the plain mass-distance.
double symmetry_distance(const Configuration& a, const Configuration& b,
                         const Masses& m);

}  // namespace bcfg
