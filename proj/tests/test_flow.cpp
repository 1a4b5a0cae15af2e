#include <doctest.h>

#include "bcfg/flow.hpp"
#include "bcfg/scenario.hpp"

#include <cmath>

using namespace bcfg;

namespace {

Masses unit_masses(int n) { return Masses(std::vector<double>(n, 1.0)); }

const double kSquareInstant = 4.0 * std::sqrt(2.0) / (2.0 * std::sqrt(2.0) + 1.0);

}  // namespace

TEST_CASE("full hessian form on the sphere tangent space") {
    Masses m = unit_masses(4);
    PlanarConfiguration sq = preset_configuration("square", m, 3);

    for (double s : {1.2, 2.0}) {
        TangentForm form = full_hessian_form(sq.base(), m, s);
        // n d minus d translations minus the radial direction.
        CHECK(form.dim() == 12 - 3 - 1);
        CHECK((form.matrix - form.matrix.transpose()).norm() <
              1e-10 * std::max(1.0, form.matrix.norm()));
        // Basis columns are orthonormal in conjugated coordinates.
        const Eigen::MatrixXd gram = form.basis.transpose() * form.basis;
        CHECK((gram - Eigen::MatrixXd::Identity(form.dim(), form.dim())).norm() <
              1e-12);
    }
}

TEST_CASE("rotation generator lies in the hessian kernel for all s") {
    Masses m = unit_masses(4);
    PlanarConfiguration sq = preset_configuration("square", m, 3);
    const Eigen::VectorXd gen = rotation_generator(sq.base(), m);

    // Mass-normalized.
    double nrm2 = 0.0;
    for (int i = 0; i < 4; ++i) nrm2 += m[i] * gen.segment(i * 3, 3).squaredNorm();
    CHECK(nrm2 == doctest::Approx(1.0).epsilon(1e-12));
    // No component on the weighted axis, tangent to each circle.
    for (int i = 0; i < 4; ++i) {
        CHECK(gen[i * 3] == 0.0);
        CHECK(std::abs(gen.segment(i * 3, 3).dot(sq.base().body(i))) < 1e-14);
    }

    for (double s : {1.2, 2.0, 4.0}) {
        TangentForm form = full_hessian_form(sq.base(), m, s);
        // Project the generator into the tangent basis and apply the form:
        // h(gen, .) must vanish identically.
        Eigen::VectorXd conj(12);
        for (int k = 0; k < 12; ++k) conj[k] = form.sqrt_mass[k] * gen[k];
        const Eigen::VectorXd coeff = form.basis.transpose() * conj;
        CHECK(coeff.norm() == doctest::Approx(1.0).epsilon(1e-10));
        CHECK((form.matrix * coeff).norm() < 1e-9);
    }
}

TEST_CASE("rotation generator requires off-axis mass") {
    Masses m = unit_masses(2);
    Eigen::VectorXd c(6);
    c << 0.5, 0.0, 0.0, -0.5, 0.0, 0.0;  // both bodies on the weighted axis
    CHECK_THROWS_AS(rotation_generator(Configuration(2, 3, c), m), ZeroVector);
}

TEST_CASE("symmetry kernel dimension by ambient dimension") {
    Masses m = unit_masses(4);

    SymmetryKernel planar =
        symmetry_kernel(preset_configuration("square", m, 3), m);
    CHECK(planar.dim() == 1);
    CHECK(planar.source == SymmetryKernel::Source::rotation_generator);

    SymmetryKernel collinear =
        symmetry_kernel(preset_configuration("collinear", m, 2), m);
    CHECK(collinear.dim() == 0);
}

TEST_CASE("reduced hessian drops the kernel and rejects non-kernel vectors") {
    Masses m = unit_masses(4);
    PlanarConfiguration sq = preset_configuration("square", m, 3);
    SymmetryKernel kernel = symmetry_kernel(sq, m);

    for (double s : {1.2, 2.0, 4.0}) {
        TangentForm form = full_hessian_form(sq.base(), m, s);
        TangentForm red = reduced_hessian(form, kernel, m);
        CHECK(red.dim() == form.dim() - kernel.dim());
    }

    // A generic tangent vector is not in the kernel.
    SymmetryKernel bogus;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(12);
    v[1] = 1.0;
    v[4] = -1.0;  // in-plane, zero center of mass
    double nrm2 = 0.0;
    for (int i = 0; i < 4; ++i) nrm2 += m[i] * v.segment(i * 3, 3).squaredNorm();
    bogus.basis.push_back(v / std::sqrt(nrm2));
    TangentForm form = full_hessian_form(sq.base(), m, 1.5);
    CHECK_THROWS_AS(reduced_hessian(form, bogus, m), KernelMismatch);
}

TEST_CASE("spectral flow across the square instant") {
    Masses m = unit_masses(4);
    PlanarConfiguration sq = preset_configuration("square", m, 3);

    // One eigenvalue crosses at s* = 1.4776: flow 1 across, 0 away from it.
    BifurcationCertificate across = certify_bifurcation(sq, m, 1.05, 2.0);
    CHECK(across.flow == 1);
    CHECK(across.candidates_in_interval == 1);
    CHECK(across.lower_bound == 1);
    CHECK_FALSE(across.nudged);
    CHECK(across.s_a == doctest::Approx(1.05));

    CHECK(certify_bifurcation(sq, m, 2.0, 5.0).flow == 0);
    CHECK(certify_bifurcation(sq, m, 1.05, 1.2).flow == 0);
}

TEST_CASE("endpoints on a candidate instant are nudged") {
    Masses m = unit_masses(4);
    PlanarConfiguration sq = preset_configuration("square", m, 3);

    BifurcationCertificate cert =
        certify_bifurcation(sq, m, kSquareInstant, 2.0);
    CHECK(cert.nudged);
    CHECK(cert.s_a < kSquareInstant - 1e-5);  // pushed below the instant
    CHECK(cert.flow == 1);  // the crossing stays inside the interval

    // s_a at the central-configuration limit is degenerate (restored
    // rotations) and gets pushed inward.
    BifurcationCertificate from_one = certify_bifurcation(sq, m, 1.0, 2.0);
    CHECK(from_one.nudged);
    CHECK(from_one.s_a >= 1.0 + 1e-4);
    CHECK(from_one.flow == 1);
}

TEST_CASE("five-body flow counts both crossings") {
    Masses m = unit_masses(5);
    PlanarConfiguration qh = preset_configuration("square_center", m, 3);

    BifurcationCertificate cert = certify_bifurcation(qh, m, 1.05, 3.0);
    CHECK(cert.flow == 2);
    CHECK(cert.candidates_in_interval == 2);
    CHECK(cert.lower_bound == 2);

    // Between the two instants only one crossing is to the left.
    CHECK(certify_bifurcation(qh, m, 1.5, 3.0).flow == 1);
}

TEST_CASE("collinear flow with no continuous symmetry") {
    Masses m = unit_masses(4);
    PlanarConfiguration qh = preset_configuration("collinear", m, 2);

    BifurcationCertificate cert = certify_bifurcation(qh, m, 1.05, 5.0);
    CHECK(cert.flow == 2);
    CHECK(cert.candidates_in_interval == 2);
}

TEST_CASE("flow equals candidate multiplicity across every scenario") {
    struct Case {
        const char* tag;
        int n, d;
    };
    for (Case c : {Case{"square", 4, 3}, Case{"triangle_center", 4, 3},
                   Case{"square_center", 5, 3}, Case{"collinear", 4, 2}}) {
        Masses m = unit_masses(c.n);
        PlanarConfiguration qh = preset_configuration(c.tag, m, c.d);
        SpectrumReport rep = cluster_spectrum(qh, m);
        auto cands = bifurcation_candidates(rep);
        REQUIRE(!cands.empty());

        const double hi = cands.back().s_star + 0.5;
        BifurcationCertificate cert = certify_bifurcation(qh, m, 1.001, hi);
        int mult = 0;
        for (const auto& cand : cands) mult += cand.multiplicity;
        CHECK(cert.flow == mult);
        CHECK(cert.candidates_in_interval == static_cast<int>(cands.size()));
        CHECK(cert.lower_bound <= static_cast<int>(cands.size()));
    }
}

TEST_CASE("spectral flow rejects degenerate endpoints") {
    // A custom path whose left endpoint form is singular.
    ReducedHessianPath path;
    path.s_a = 0.0;
    path.s_b = 1.0;
    path.evaluator = [](double s) {
        TangentForm f;
        f.matrix = Eigen::MatrixXd::Zero(2, 2);
        f.matrix(0, 0) = s;  // zero eigenvalue at s = 0
        f.matrix(1, 1) = 1.0;
        f.basis = Eigen::MatrixXd::Identity(2, 2);
        f.sqrt_mass = Eigen::VectorXd::Ones(2);
        return f;
    };
    CHECK_THROWS_AS(spectral_flow(path), NotAdmissible);

    // Shifting the left endpoint off the degeneracy gives flow 0.
    path.s_a = 0.5;
    CHECK(spectral_flow(path) == 0);

    // A crossing inside the interval is counted with its sign.
    path.evaluator = [](double s) {
        TangentForm f;
        f.matrix = Eigen::MatrixXd::Zero(2, 2);
        f.matrix(0, 0) = 0.75 - s;  // positive to negative at s = 0.75
        f.matrix(1, 1) = 1.0;
        f.basis = Eigen::MatrixXd::Identity(2, 2);
        f.sqrt_mass = Eigen::VectorXd::Ones(2);
        return f;
    };
    CHECK(spectral_flow(path) == -1);
}

TEST_CASE("certificate interval validation") {
    Masses m = unit_masses(4);
    PlanarConfiguration sq = preset_configuration("square", m, 3);
    CHECK_THROWS_AS(certify_bifurcation(sq, m, 2.0, 1.5), ValidationError);
    CHECK_THROWS_AS(certify_bifurcation(sq, m, 0.5, 1.5), ValidationError);
}
