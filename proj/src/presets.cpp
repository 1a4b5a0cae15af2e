#include "bcfg/scenario.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <numbers>

namespace bcfg {

namespace {

// Newton polish of the central-configuration equation F(q, 1) = 0 using
// minimal-norm SVD steps.  At s = 1 the Jacobian carries the full
// rotational degeneracy (rank deficiency up to 3 for d = 3), which the
// pseudo-inverse absorbs without a gauge row.
Configuration polish_central(Configuration q, const Masses& m) {
    const SParameter one(1.0);
    auto recenter = [&](Configuration& c) {
        const Eigen::VectorXd com = center_of_mass(c, m);
        for (int i = 0; i < c.n(); ++i) c.coords().segment(i * c.d(), c.d()) -= com;
        c = normalize_to_sphere(c, m, one);
    };
    recenter(q);

    Eigen::VectorXd f = balanced_residual_raw(q, m, 1.0);
    for (int iter = 0; iter < 80 && f.norm() >= 1e-12; ++iter) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(balanced_residual_jacobian(q, m, 1.0),
                                              Eigen::ComputeThinU |
                                                  Eigen::ComputeThinV);
        svd.setThreshold(1e-10);
        const Eigen::VectorXd step = svd.solve(-f);

        double t = 1.0;
        bool accepted = false;
        for (int bt = 0; bt < 24; ++bt, t *= 0.5) {
            Configuration trial(q.n(), q.d(), q.coords() + t * step);
            try {
                recenter(trial);
                const Eigen::VectorXd f_trial = balanced_residual_raw(trial, m, 1.0);
                if (f_trial.norm() < f.norm()) {
                    q = trial;
                    f = f_trial;
                    accepted = true;
                    break;
                }
            } catch (const Error&) {
                // collision or degenerate trial: shorten the step
            }
        }
        if (!accepted) break;
    }
    if (f.norm() >= 1e-11)
        throw NoConvergence("preset polish stalled at residual " +
                            std::to_string(f.norm()));
    return q;
}

// Places `count` bodies of common mass `mass` on a circle of mass-
// normalized radius in the plane spanned by axes 1 and 2 (d = 3), starting
// at angle `phase`.
void ring_into(Eigen::VectorXd& coords, int count, double mass, double phase,
               int d) {
    const double r = 1.0 / std::sqrt(count * mass);
    for (int k = 0; k < count; ++k) {
        const double theta = phase + 2.0 * std::numbers::pi * k / count;
        coords[k * d + 1] = r * std::cos(theta);
        coords[k * d + 2] = r * std::sin(theta);
    }
}

void require_equal_outer(const Masses& m, int count, const std::string& tag) {
    for (int i = 1; i < count; ++i)
        if (std::abs(m[i] - m[0]) > 1e-12 * m[0])
            throw ValidationError("preset '" + tag + "' requires the first " +
                                  std::to_string(count) + " masses to be equal");
}

}  // namespace

std::vector<std::pair<std::string, std::string>> preset_catalog() {
    return {
        {"square", "four equal masses at the vertices of a square (d = 3)"},
        {"triangle_center",
         "three equal masses at the vertices of an equilateral triangle plus "
         "one at the barycenter (d = 3)"},
        {"square_center",
         "four equal masses at the vertices of a square plus one at the "
         "barycenter (d = 3)"},
        {"collinear",
         "Moulton configuration on the weighted axis' complement, mass order "
         "as listed (d = 2)"},
        {"explicit",
         "coordinates supplied in the scenario file, Newton-polished onto "
         "the trivial branch"},
    };
}

PlanarConfiguration preset_configuration(const std::string& tag, const Masses& m,
                                         int dimension,
                                         const std::vector<double>& coords) {
    const int n = m.n();
    auto expect = [&](int want_n, int want_d) {
        if (n != want_n)
            throw ValidationError("preset '" + tag + "' needs " +
                                  std::to_string(want_n) + " masses, got " +
                                  std::to_string(n));
        if (dimension != want_d)
            throw ValidationError("preset '" + tag + "' needs dimension " +
                                  std::to_string(want_d));
    };

    Eigen::VectorXd flat;
    if (tag == "square") {
        expect(4, 3);
        require_equal_outer(m, 4, tag);
        flat = Eigen::VectorXd::Zero(4 * 3);
        ring_into(flat, 4, m[0], std::numbers::pi / 4.0, 3);
    } else if (tag == "triangle_center") {
        expect(4, 3);
        require_equal_outer(m, 3, tag);
        flat = Eigen::VectorXd::Zero(4 * 3);
        ring_into(flat, 3, m[0], std::numbers::pi / 2.0, 3);
    } else if (tag == "square_center") {
        expect(5, 3);
        require_equal_outer(m, 4, tag);
        flat = Eigen::VectorXd::Zero(5 * 3);
        ring_into(flat, 4, m[0], std::numbers::pi / 4.0, 3);
    } else if (tag == "collinear") {
        if (dimension != 2)
            throw ValidationError("preset 'collinear' needs dimension 2");
        flat = Eigen::VectorXd::Zero(n * 2);
        for (int i = 0; i < n; ++i) flat[i * 2 + 1] = i - 0.5 * (n - 1);
    } else if (tag == "explicit") {
        if (static_cast<int>(coords.size()) != n * dimension)
            throw ValidationError(
                "explicit preset needs " + std::to_string(n * dimension) +
                " coordinates, got " + std::to_string(coords.size()));
        flat = Eigen::Map<const Eigen::VectorXd>(coords.data(), coords.size());
    } else {
        throw ValidationError("unknown preset '" + tag + "'");
    }

    const Configuration polished =
        polish_central(Configuration(n, dimension, flat), m);
    return PlanarConfiguration(polished, m);
}

}  // namespace bcfg
