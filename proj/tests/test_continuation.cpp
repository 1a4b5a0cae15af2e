#include <doctest.h>

#include "bcfg/continuation.hpp"
#include "bcfg/scenario.hpp"

#include <cmath>
#include <random>

using namespace bcfg;

namespace {

Masses unit_masses(int n) { return Masses(std::vector<double>(n, 1.0)); }

const double kSquareInstant = 4.0 * std::sqrt(2.0) / (2.0 * std::sqrt(2.0) + 1.0);

// The square preset embedded into the extended unknown x = (q, s).
Eigen::VectorXd square_state(double s) {
    Masses m = unit_masses(4);
    PlanarConfiguration sq = preset_configuration("square", m, 3);
    Eigen::VectorXd x(13);
    x.head(12) = sq.base().coords();
    x[12] = s;
    return x;
}

}  // namespace

TEST_CASE("augmented jacobian matches finite differences") {
    Masses m = unit_masses(4);
    const int n = 4, d = 3;

    // A generic point near, but not on, the trivial branch.
    Eigen::VectorXd x = square_state(1.6);
    std::mt19937 rng(5);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int k = 0; k < 12; ++k) x[k] += 0.01 * gauss(rng);
    Eigen::VectorXd anchor = square_state(1.55);
    const double delta = 0.08;

    const Eigen::MatrixXd jac = augmented_jacobian(x, anchor, m, n, d);
    const Eigen::VectorXd f0 = augmented_residual(x, anchor, delta, m, n, d);
    REQUIRE(jac.rows() == f0.size());
    REQUIRE(jac.cols() == x.size());

    const double h = 1e-6;
    Eigen::MatrixXd fd(jac.rows(), jac.cols());
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        Eigen::VectorXd xp = x, xm = x;
        xp[k] += h;
        xm[k] -= h;
        fd.col(k) = (augmented_residual(xp, anchor, delta, m, n, d) -
                     augmented_residual(xm, anchor, delta, m, n, d)) /
                    (2 * h);
    }
    CHECK((jac - fd).norm() < 1e-5 * jac.norm());
}

TEST_CASE("augmented residual components") {
    Masses m = unit_masses(4);
    const int n = 4, d = 3;
    Eigen::VectorXd x = square_state(1.3);
    Eigen::VectorXd anchor = x;
    const double delta = 0.05;

    // On the trivial branch the balanced residual vanishes; at the anchor
    // the arclength equation reads -delta^2.
    Eigen::VectorXd f = augmented_residual(x, anchor, delta, m, n, d);
    CHECK(f.head(12).norm() < 1e-12);
    CHECK(f[12] == doctest::Approx(-delta * delta).epsilon(1e-12));
    // d = 3 appends one rotation-gauge row, zero at the anchor itself.
    REQUIRE(f.size() == 14);
    CHECK(std::abs(f[13]) < 1e-14);
}

TEST_CASE("tangent on the trivial branch is the pure-s direction") {
    Masses m = unit_masses(4);
    Eigen::VectorXd x = square_state(1.2);
    const Eigen::VectorXd t = tangent_vector(x, m, 4, 3, nullptr);
    REQUIRE(t.size() == 13);
    CHECK(t.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(t[12] == doctest::Approx(1.0).epsilon(1e-8));  // oriented upward
    CHECK(t.head(12).norm() < 1e-7);
}

TEST_CASE("tangent orientation follows the previous direction") {
    Masses m = unit_masses(4);
    Eigen::VectorXd x = square_state(1.2);
    Eigen::VectorXd down = Eigen::VectorXd::Zero(13);
    down[12] = -1.0;
    const Eigen::VectorXd t = tangent_vector(x, m, 4, 3, &down);
    CHECK(t[12] == doctest::Approx(-1.0).epsilon(1e-8));
}

TEST_CASE("damped newton recovers a nearby branch point") {
    Masses m = unit_masses(4);
    ContinuationSettings settings;

    Eigen::VectorXd anchor = square_state(1.2);
    Eigen::VectorXd t = Eigen::VectorXd::Zero(13);
    t[12] = 1.0;
    const double delta = 0.01;
    Eigen::VectorXd x0 = anchor + delta * t;

    BranchPoint p = damped_newton(x0, anchor, delta, settings, m, 4, 3);
    CHECK(p.s == doctest::Approx(1.21).epsilon(1e-6));
    CHECK(p.residual_norm < settings.newton_tol);
    CHECK(s_norm2(p.q.coords(), m, SParameter(p.s), 3) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("solve at fixed s returns to the trivial branch") {
    Masses m = unit_masses(4);
    ContinuationSettings settings;
    PlanarConfiguration sq = preset_configuration("square", m, 3);

    // Perturb mildly off-plane; away from any instant the only nearby
    // solution is the trivial one.
    Configuration guess = sq.base();
    std::mt19937 rng(17);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int k = 0; k < 12; ++k) guess.coords()[k] += 0.005 * gauss(rng);

    BranchPoint p = solve_at_fixed_s(guess, 2.5, settings, m);
    CHECK(p.s == doctest::Approx(2.5));
    CHECK(p.residual_norm < settings.newton_tol);
    double axis0 = 0.0;
    for (int i = 0; i < 4; ++i) axis0 = std::max(axis0, std::abs(p.q.coords()[i * 3]));
    CHECK(axis0 < 1e-9);
    CHECK(symmetry_distance(p.q, sq.base(), m) < 1e-9);
}

TEST_CASE("branch switch leaves the trivial branch at the instant") {
    Masses m = unit_masses(4);
    PlanarConfiguration sq = preset_configuration("square", m, 3);
    SpectrumReport rep = cluster_spectrum(sq, m);
    auto cands = bifurcation_candidates(rep);
    REQUIRE(cands.size() == 1);
    auto kernel = candidate_kernel_directions(sq, m, cands[0]);
    REQUIRE(kernel.size() == 1);

    ContinuationSettings settings;
    auto [anchor, first] = branch_switch(sq, cands[0].s_star, kernel[0], settings, m);

    // The anchor is the trivial-branch point at the same frozen s as the
    // accepted off-branch solve, so the seed tangent is pure amplitude.
    CHECK(anchor.s == first.s);
    CHECK(std::abs(anchor.s - cands[0].s_star) < 2e-3);
    CHECK(symmetry_distance(anchor.q, sq.base(), m) < 1e-9);
    CHECK(anchor.residual_norm < 1e-10);
    CHECK(first.residual_norm < settings.newton_tol);
    // The first point is genuinely off-branch: it has axis-0 structure.
    double axis0 = 0.0;
    for (int i = 0; i < 4; ++i)
        axis0 = std::max(axis0, std::abs(first.q.coords()[i * 3]));
    CHECK(axis0 > 1e-5);
    CHECK(symmetry_distance(first.q, anchor.q, m) > 1e-5);
    // Switching happens at frozen s slightly off the instant.
    CHECK(std::abs(first.s - cands[0].s_star) <=
          doctest::Approx(settings.delta_s_switch).epsilon(0.5));
}

TEST_CASE("branch switch with no non-trivial family falls back to trivial") {
    // The equilateral triangle has no eigenvalue below -U, hence no
    // bifurcation instant and nothing to switch onto: every attempt,
    // including the pinned-amplitude rescue, collapses back.
    Masses m = unit_masses(3);
    const std::vector<double> tri = {0.0, 1.0,  0.0,   //
                                     0.0, -0.5, 0.866, //
                                     0.0, -0.5, -0.866};
    PlanarConfiguration qh = preset_configuration("explicit", m, 3, tri);
    CHECK(bifurcation_candidates(cluster_spectrum(qh, m)).empty());

    Eigen::VectorXd v = Eigen::VectorXd::Zero(9);
    v[0] = 1.0 / std::sqrt(2.0);
    v[3] = -1.0 / std::sqrt(2.0);  // axis-0 supported, mass-orthonormal
    ContinuationSettings settings;
    CHECK_THROWS_AS(branch_switch(qh, 2.0, v, settings, m), FellBackToTrivial);
}

TEST_CASE("branch switch at a wrong instant rescues onto the real family") {
    // Called far from the true instant, the amplitude-pinned fallback lets
    // s drift and still lands on the genuine non-trivial family.
    Masses m = unit_masses(4);
    PlanarConfiguration sq = preset_configuration("square", m, 3);
    SpectrumReport rep = cluster_spectrum(sq, m);
    auto cands = bifurcation_candidates(rep);
    auto kernel = candidate_kernel_directions(sq, m, cands[0]);

    ContinuationSettings settings;
    auto [anchor, first] = branch_switch(sq, 3.0, kernel[0], settings, m);
    CHECK(first.residual_norm < settings.newton_tol);
    CHECK(symmetry_distance(first.q, anchor.q, m) > 1e-4);
    // The family only exists below the true instant.
    CHECK(first.s < cands[0].s_star);
    CHECK(first.s > 1.0);
}

TEST_CASE("trace stops at the configured s bound") {
    Masses m = unit_masses(4);
    PlanarConfiguration sq = preset_configuration("square", m, 3);
    SpectrumReport rep = cluster_spectrum(sq, m);
    auto cands = bifurcation_candidates(rep);
    auto kernel = candidate_kernel_directions(sq, m, cands[0]);

    ContinuationSettings settings;
    settings.s_min = 1.3;  // stop well before the tetrahedron limit
    auto [anchor, first] = branch_switch(sq, cands[0].s_star, kernel[0], settings, m);
    Branch branch = trace_branch(anchor, first, settings, m);

    REQUIRE(!branch.points.empty());
    REQUIRE(!branch.events.empty());
    CHECK(branch.events.back().kind == EventKind::s_bound);
    CHECK(branch.points.back().s == doctest::Approx(1.3).epsilon(1e-6));

    // Branch hygiene: residuals at tolerance, arclength increasing, steps
    // bounded by delta, every point on its sphere.
    double prev_arc = -1.0;
    for (const auto& p : branch.points) {
        CHECK(p.residual_norm < settings.newton_tol);
        CHECK(p.arclength > prev_arc);
        CHECK(s_norm2(p.q.coords(), m, SParameter(p.s), 3) ==
              doctest::Approx(1.0).epsilon(1e-10));
        prev_arc = p.arclength;
    }
    CHECK(branch.points.back().arclength <=
          settings.delta * (static_cast<double>(branch.points.size()) + 1));
}

TEST_CASE("classification along the trivial square branch") {
    Masses m = unit_masses(4);
    ContinuationSettings settings;
    PlanarConfiguration sq = preset_configuration("square", m, 3);

    // Below the instant the normal block still carries a negative direction.
    BranchPoint below = solve_at_fixed_s(sq.base(), 1.2, settings, m);
    CHECK(below.classification == PointClass::saddle);
    CHECK(branch_point_inertia(below, m).minus == 1);

    // Above it the trivial branch is a local minimum.
    BranchPoint above = solve_at_fixed_s(sq.base(), 2.0, settings, m);
    CHECK(above.classification == PointClass::local_minimum);
    CHECK(branch_point_inertia(above, m) == InertiaTriple{0, 0, 7});

    // At the instant itself the reduced hessian is singular.
    BranchPoint at = solve_at_fixed_s(sq.base(), kSquareInstant, settings, m);
    CHECK(at.classification == PointClass::degenerate);
}

TEST_CASE("symmetry distance is rotation-invariant for d = 3") {
    Masses m = unit_masses(4);
    PlanarConfiguration sq = preset_configuration("square", m, 3);
    Configuration q = sq.base();

    const double th = 1.1;
    Eigen::VectorXd rotated = q.coords();
    for (int i = 0; i < 4; ++i) {
        const double y = q.coords()[i * 3 + 1], z = q.coords()[i * 3 + 2];
        rotated[i * 3 + 1] = std::cos(th) * y - std::sin(th) * z;
        rotated[i * 3 + 2] = std::sin(th) * y + std::cos(th) * z;
    }
    Configuration qr(4, 3, rotated);
    CHECK(symmetry_distance(q, qr, m) < 1e-12);
    CHECK(symmetry_distance(q, qr, m) >= 0.0);

    // A genuinely different shape keeps a positive distance.
    Eigen::VectorXd stretched = q.coords() * 1.1;
    CHECK(symmetry_distance(q, Configuration(4, 3, stretched), m) > 1e-3);
}

TEST_CASE("symmetry distance in the plane is the plain mass distance") {
    Masses m = unit_masses(4);
    PlanarConfiguration col = preset_configuration("collinear", m, 2);
    Configuration q = col.base();

    Eigen::VectorXd shifted = q.coords();
    shifted[0] += 0.01;
    Configuration qs(4, 2, shifted);
    const double expect = std::sqrt(1.0) * 0.01;  // unit mass, one entry
    CHECK(symmetry_distance(q, qs, m) == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("event and class names") {
    CHECK(std::string(to_string(PointClass::local_minimum)) == "local_minimum");
    CHECK(std::string(to_string(PointClass::saddle)) == "saddle");
    CHECK(std::string(to_string(PointClass::degenerate)) == "degenerate");
    CHECK(std::string(to_string(EventKind::turning_point)) == "turning_point");
    CHECK(std::string(to_string(EventKind::start_bifurcation)) ==
          "start_bifurcation");
    CHECK(std::string(to_string(EventKind::collision_stop)) == "collision_stop");
    CHECK(std::string(to_string(EventKind::s_bound)) == "s_bound");
    CHECK(std::string(to_string(EventKind::max_steps)) == "max_steps");
    CHECK(std::string(to_string(EventKind::loop_closed)) == "loop_closed");
    CHECK(std::string(to_string(EventKind::newton_failure)) == "newton_failure");
}

TEST_CASE("max steps terminates a trace cleanly") {
    Masses m = unit_masses(4);
    PlanarConfiguration sq = preset_configuration("square", m, 3);
    SpectrumReport rep = cluster_spectrum(sq, m);
    auto cands = bifurcation_candidates(rep);
    auto kernel = candidate_kernel_directions(sq, m, cands[0]);

    ContinuationSettings settings;
    settings.max_steps = 5;
    auto [anchor, first] = branch_switch(sq, cands[0].s_star, kernel[0], settings, m);
    Branch branch = trace_branch(anchor, first, settings, m);
    CHECK(branch.points.size() <= 6);  // first point plus max_steps
    REQUIRE(!branch.events.empty());
    CHECK(branch.events.back().kind == EventKind::max_steps);
}
