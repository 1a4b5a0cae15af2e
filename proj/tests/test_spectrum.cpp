#include <doctest.h>

#include "bcfg/scenario.hpp"
#include "bcfg/spectrum.hpp"

#include <cmath>
#include <random>

using namespace bcfg;

namespace {

Masses unit_masses(int n) { return Masses(std::vector<double>(n, 1.0)); }

// Normalized square in the {0} x R^2 plane: circumradius 1/2, |q|_M^2 = 1.
PlanarConfiguration normalized_square(const Masses& m) {
    return preset_configuration("square", m, 3);
}

// Two bodies on axis 1 at (0, +-1/sqrt 2): the smallest trivial-branch case.
PlanarConfiguration two_body_planar() {
    const double y0 = 1.0 / std::sqrt(2.0);
    Eigen::VectorXd c(4);
    c << 0.0, y0, 0.0, -y0;
    return PlanarConfiguration(Configuration(2, 2, c), unit_masses(2));
}

}  // namespace

TEST_CASE("planar configuration rejects off-plane and unnormalized input") {
    Masses m = unit_masses(2);

    Eigen::VectorXd off(4);
    off << 0.1, 0.7, -0.1, -0.7;  // nonzero axis-0 coordinates
    CHECK_THROWS_AS(PlanarConfiguration(Configuration(2, 2, off), m), Error);

    Eigen::VectorXd big(4);
    big << 0.0, 1.0, 0.0, -1.0;  // |q|_M^2 = 2
    CHECK_THROWS_AS(PlanarConfiguration(Configuration(2, 2, big), m), Error);
}

TEST_CASE("b-matrix closed form on the normalized square") {
    // Side length 1/sqrt 2, diagonal 1: adjacent couplings 2 sqrt 2 and
    // diagonal couplings 1.
    Masses m = unit_masses(4);
    PlanarConfiguration sq = normalized_square(m);
    const Eigen::MatrixXd b = b_matrix(sq, m);

    CHECK((b - b.transpose()).norm() < 1e-12);
    CHECK((b * Eigen::VectorXd::Ones(4)).norm() < 1e-10);

    const double adjacent = 2.0 * std::sqrt(2.0);
    std::vector<double> offdiag;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            if (i != j) offdiag.push_back(b(i, j));
    std::sort(offdiag.begin(), offdiag.end());
    // 12 off-diagonal entries: 4 at the diagonal coupling 1, 8 at 2 sqrt 2.
    for (int k = 0; k < 4; ++k) CHECK(offdiag[k] == doctest::Approx(1.0).epsilon(1e-12));
    for (int k = 4; k < 12; ++k)
        CHECK(offdiag[k] == doctest::Approx(adjacent).epsilon(1e-12));
}

TEST_CASE("two-body b-matrix and empty candidate list") {
    Masses m = unit_masses(2);
    PlanarConfiguration qh = two_body_planar();

    // r = sqrt 2, so the coupling is 1/(2 sqrt 2) and U = 1/sqrt 2.
    const double coupling = 1.0 / (2.0 * std::sqrt(2.0));
    const Eigen::MatrixXd b = b_matrix(qh, m);
    CHECK(b(0, 1) == doctest::Approx(coupling).epsilon(1e-13));
    CHECK(b(0, 0) == doctest::Approx(-coupling).epsilon(1e-13));

    SpectrumReport rep = cluster_spectrum(qh, m);
    CHECK(rep.k() == 1);
    CHECK(rep.l == 0);
    CHECK(rep.mu[0] == doctest::Approx(-rep.potential).epsilon(1e-12));
    CHECK(rep.alpha[0] == 1);
    // No eigenvalue below -U: nothing bifurcates from the two-body branch.
    CHECK(bifurcation_candidates(rep).empty());
    CHECK(bifurcation_lower_bound(rep) == 0);
}

TEST_CASE("permuted hessian equals blockdiag(B, D)") {
    Masses m4 = unit_masses(4);
    Masses m5 = unit_masses(5);
    std::vector<PlanarConfiguration> cases;
    cases.push_back(normalized_square(m4));
    cases.push_back(preset_configuration("triangle_center", m4, 3));
    cases.push_back(preset_configuration("square_center", m5, 3));
    cases.push_back(preset_configuration("collinear", m4, 2));
    cases.push_back(two_body_planar());

    for (const auto& qh : cases) {
        const int n = qh.n(), d = qh.d();
        Masses m = unit_masses(n);
        const Eigen::MatrixXd hess = potential_hessian(qh.base(), m);
        const Eigen::MatrixXd perm = axis_major_permutation(n, d);
        const Eigen::MatrixXd conj = perm * hess * perm.transpose();

        Eigen::MatrixXd block = Eigen::MatrixXd::Zero(n * d, n * d);
        block.topLeftCorner(n, n) = b_matrix(qh, m);
        block.bottomRightCorner((d - 1) * n, (d - 1) * n) = d_matrix(qh, m);

        CHECK((conj - block).norm() < 1e-12 * std::max(1.0, hess.norm()));
    }
}

TEST_CASE("axis-major permutation is a permutation matrix") {
    for (auto [n, d] : {std::pair{3, 2}, std::pair{4, 3}, std::pair{5, 3}}) {
        const Eigen::MatrixXd perm = axis_major_permutation(n, d);
        CHECK((perm * perm.transpose() -
               Eigen::MatrixXd::Identity(n * d, n * d))
                  .norm() < 1e-15);
        CHECK(perm.cwiseAbs().sum() == doctest::Approx(n * d));
    }
}

TEST_CASE("d-matrix pair blocks have trace -coupling for d = 3") {
    Masses m = unit_masses(4);
    PlanarConfiguration sq = normalized_square(m);
    const Eigen::MatrixXd dm = d_matrix(sq, m);
    const Eigen::MatrixXd b = b_matrix(sq, m);
    const int n = 4;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            // Axis-major layout: the (i, j) in-plane pair block has entries
            // at rows {i, n+i} and columns {j, n+j}.
            const double tr = dm(i, j) + dm(n + i, n + j);
            CHECK(tr == doctest::Approx(-b(i, j)).epsilon(1e-12));
        }
}

TEST_CASE("inertia indices with explicit tolerance") {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
    a.diagonal() << -2.0, 1e-15, 3.0;
    InertiaTriple t = inertia_indices(a, 1e-12);
    CHECK(t.minus == 1);
    CHECK(t.zero == 1);
    CHECK(t.plus == 1);
    CHECK(t.total() == 3);

    // Tolerance wide enough to swallow everything.
    InertiaTriple all = inertia_indices(a, 10.0);
    CHECK(all.zero == 3);
}

TEST_CASE("square spectrum in closed form") {
    // mu = -U with multiplicity 2 and mu = -8 sqrt 2 with multiplicity 1;
    // U = 4 sqrt 2 + 2.
    Masses m = unit_masses(4);
    SpectrumReport rep = cluster_spectrum(normalized_square(m), m);

    const double u = 4.0 * std::sqrt(2.0) + 2.0;
    CHECK(rep.potential == doctest::Approx(u).epsilon(1e-13));
    REQUIRE(rep.k() == 2);
    CHECK(rep.mu[0] == doctest::Approx(-u).epsilon(1e-12));
    CHECK(rep.alpha[0] == 2);
    CHECK(rep.l == 0);
    CHECK(rep.mu[1] == doctest::Approx(-8.0 * std::sqrt(2.0)).epsilon(1e-12));
    CHECK(rep.alpha[1] == 1);

    auto cands = bifurcation_candidates(rep);
    REQUIRE(cands.size() == 1);
    const double s_star = 4.0 * std::sqrt(2.0) / (2.0 * std::sqrt(2.0) + 1.0);
    CHECK(std::abs(cands[0].s_star - s_star) < 1e-10);
    CHECK(cands[0].multiplicity == 1);
    CHECK(bifurcation_lower_bound(rep) == 1);
}

TEST_CASE("cluster spectrum invariants across presets") {
    struct Case {
        const char* tag;
        int n, d;
    };
    for (Case c : {Case{"square", 4, 3}, Case{"triangle_center", 4, 3},
                   Case{"square_center", 5, 3}, Case{"collinear", 4, 2},
                   Case{"collinear", 5, 2}}) {
        Masses m = unit_masses(c.n);
        PlanarConfiguration qh = preset_configuration(c.tag, m, c.d);
        SpectrumReport rep = cluster_spectrum(qh, m);

        int total = 0;
        for (int a : rep.alpha) total += a;
        CHECK(total == c.n - 1);
        for (int j = 1; j < rep.k(); ++j) CHECK(rep.mu[j] < rep.mu[j - 1]);
        REQUIRE(rep.l >= 0);
        CHECK(std::abs(rep.mu[rep.l] + rep.potential) < 1e-8 * rep.potential);
        // Rotation forces multiplicity >= 2 in the planar case; the
        // collinear -U eigenvector is the configuration itself.
        CHECK(rep.alpha[rep.l] >= (c.d == 3 ? 2 : 1));
    }
}

TEST_CASE("cluster spectrum rejects non-central input") {
    // A planar but non-central configuration: isoceles triangle.
    Masses m = unit_masses(3);
    Eigen::VectorXd c(9);
    c << 0.0, 0.45, 0.0, 0.0, -0.35, 0.4, 0.0, -0.1, -0.4;
    Eigen::VectorXd com = Eigen::VectorXd::Zero(3);
    for (int i = 0; i < 3; ++i) com += c.segment(i * 3, 3) / 3.0;
    for (int i = 0; i < 3; ++i) c.segment(i * 3, 3) -= com;
    c /= std::sqrt(c.squaredNorm());
    CHECK_THROWS_AS(
        cluster_spectrum(PlanarConfiguration(Configuration(3, 3, c), m), m),
        NotASolution);
}

TEST_CASE("normal inertia from the clustered spectrum") {
    Masses m = unit_masses(4);
    SpectrumReport rep = cluster_spectrum(normalized_square(m), m);
    const double s_star = 4.0 * std::sqrt(2.0) / (2.0 * std::sqrt(2.0) + 1.0);

    // Below the instant the single low eigenvalue is still negative.
    CHECK(normal_inertia_at(rep, 1.2) == InertiaTriple{1, 0, 2});
    // At the instant it sits at zero.
    CHECK(normal_inertia_at(rep, s_star) == InertiaTriple{0, 1, 2});
    // Above it everything is positive.
    CHECK(normal_inertia_at(rep, 2.0) == InertiaTriple{0, 0, 3});
    CHECK(normal_inertia_at(rep, 1.0) == InertiaTriple{1, 2, 0});
}

TEST_CASE("planar inertia of the presets") {
    Masses m4 = unit_masses(4);
    Masses m5 = unit_masses(5);
    CHECK(planar_inertia(normalized_square(m4), m4) == InertiaTriple{0, 1, 4});
    CHECK(planar_inertia(preset_configuration("triangle_center", m4, 3), m4) ==
          InertiaTriple{2, 1, 2});
    CHECK(planar_inertia(preset_configuration("square_center", m5, 3), m5) ==
          InertiaTriple{0, 1, 6});
    CHECK(planar_inertia(preset_configuration("collinear", m4, 2), m4) ==
          InertiaTriple{0, 0, 2});
}

TEST_CASE("five-body candidates and lower bound") {
    Masses m = unit_masses(5);
    SpectrumReport rep =
        cluster_spectrum(preset_configuration("square_center", m, 3), m);
    auto cands = bifurcation_candidates(rep);
    REQUIRE(cands.size() == 2);
    CHECK(cands[0].s_star < cands[1].s_star);  // sorted ascending
    CHECK(cands[0].s_star == doctest::Approx(1.2336).epsilon(1e-4));
    CHECK(cands[1].s_star == doctest::Approx(2.5548).epsilon(1e-4));
    CHECK(bifurcation_lower_bound(rep) == 2);

    // Every candidate comes from an eigenvalue strictly below -U.
    for (const auto& c : cands) {
        CHECK(c.eigenvalue < -rep.potential);
        CHECK(c.s_star == doctest::Approx(-c.eigenvalue / rep.potential));
        CHECK(c.s_star > 1.0);
    }
}

TEST_CASE("collinear candidates for equal masses") {
    Masses m = unit_masses(4);
    SpectrumReport rep =
        cluster_spectrum(preset_configuration("collinear", m, 2), m);
    auto cands = bifurcation_candidates(rep);
    REQUIRE(cands.size() == 2);
    CHECK(cands[0].s_star == doctest::Approx(2.40497).epsilon(1e-4));
    CHECK(cands[1].s_star == doctest::Approx(4.15418).epsilon(1e-4));
}

TEST_CASE("candidate kernel directions") {
    Masses m = unit_masses(4);
    PlanarConfiguration sq = normalized_square(m);
    SpectrumReport rep = cluster_spectrum(sq, m);
    auto cands = bifurcation_candidates(rep);
    REQUIRE(cands.size() == 1);

    auto kernel = candidate_kernel_directions(sq, m, cands[0]);
    REQUIRE(kernel.size() == 1);
    const Eigen::VectorXd& v = kernel[0];
    REQUIRE(v.size() == 12);

    // Supported on axis 0 only.
    for (int i = 0; i < 4; ++i) {
        CHECK(v[i * 3 + 1] == 0.0);
        CHECK(v[i * 3 + 2] == 0.0);
    }

    // Mass-normalized eigenvector of M^{-1}B at the generating eigenvalue.
    Eigen::VectorXd x(4);
    for (int i = 0; i < 4; ++i) x[i] = v[i * 3];
    CHECK(x.squaredNorm() == doctest::Approx(1.0).epsilon(1e-12));  // unit masses
    const Eigen::VectorXd bx = b_matrix(sq, m) * x;
    CHECK((bx - cands[0].eigenvalue * x).norm() < 1e-10);

    // The square's kernel mode is the alternating tilt.
    std::vector<double> signs(x.data(), x.data() + 4);
    std::sort(signs.begin(), signs.end());
    CHECK(signs[0] == doctest::Approx(-0.5).epsilon(1e-10));
    CHECK(signs[3] == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("kernel directions for an unequal-mass collinear configuration") {
    Masses m({0.2, 0.2, 1.0, 1.0});
    PlanarConfiguration qh = preset_configuration("collinear", m, 2);
    SpectrumReport rep = cluster_spectrum(qh, m);
    auto cands = bifurcation_candidates(rep);
    REQUIRE(cands.size() == 2);
    CHECK(cands[0].s_star == doctest::Approx(1.91897).epsilon(1e-4));
    CHECK(cands[1].s_star == doctest::Approx(4.96707).epsilon(1e-4));

    for (const auto& cand : cands) {
        auto kernel = candidate_kernel_directions(qh, m, cand);
        REQUIRE(kernel.size() == 1);
        const Eigen::VectorXd& v = kernel[0];
        // Mass-orthonormal: sum_i m_i v_i0^2 = 1.
        double nrm2 = 0.0;
        for (int i = 0; i < 4; ++i) {
            nrm2 += m[i] * v[i * 2] * v[i * 2];
            CHECK(v[i * 2 + 1] == 0.0);
        }
        CHECK(nrm2 == doctest::Approx(1.0).epsilon(1e-12));
    }
}
