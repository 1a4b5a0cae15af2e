#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

// Core value types shared by every module: masses, configurations, the
// scale parameter s, and the exception hierarchy.  All coordinate vectors
// are flat and body-major: body i occupies entries [i*d, i*d + d).  The
// weighted coordinate axis is always axis 0.

namespace bcfg {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct CollisionError : Error {
    explicit CollisionError(const std::string& msg) : Error(msg) {}
};
struct DimensionMismatch : Error {
    explicit DimensionMismatch(const std::string& msg) : Error(msg) {}
};
struct ZeroConfiguration : Error {
    explicit ZeroConfiguration(const std::string& msg) : Error(msg) {}
};
struct NotNormalized : Error {
    explicit NotNormalized(const std::string& msg) : Error(msg) {}
};
struct SpectrumInvariantViolation : Error {
    explicit SpectrumInvariantViolation(const std::string& msg) : Error(msg) {}
};
struct NotASolution : Error {
    explicit NotASolution(const std::string& msg) : Error(msg) {}
};
struct ZeroVector : Error {
    explicit ZeroVector(const std::string& msg) : Error(msg) {}
};
struct KernelMismatch : Error {
    explicit KernelMismatch(const std::string& msg) : Error(msg) {}
};
struct NotAdmissible : Error {
    explicit NotAdmissible(const std::string& msg) : Error(msg) {}
};
struct NoConvergence : Error {
    explicit NoConvergence(const std::string& msg) : Error(msg) {}
};
struct SingularSystem : Error {
    explicit SingularSystem(const std::string& msg) : Error(msg) {}
};
struct AmbiguousTangent : Error {
    explicit AmbiguousTangent(const std::string& msg) : Error(msg) {}
};
struct FellBackToTrivial : Error {
    explicit FellBackToTrivial(const std::string& msg) : Error(msg) {}
};
struct ParseError : Error {
    explicit ParseError(const std::string& msg) : Error(msg) {}
};
struct ValidationError : Error {
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};
struct EmptyBranch : Error {
    explicit EmptyBranch(const std::string& msg) : Error(msg) {}
};

// ---------------------------------------------------------------------------
// Masses
// ---------------------------------------------------------------------------

// Point masses m_1, ..., m_n > 0.
class Masses {
  public:
    explicit Masses(std::vector<double> values) : values_(std::move(values)) {
        if (values_.size() < 2)
            throw ValidationError("need at least two bodies, got " +
                                  std::to_string(values_.size()));
        for (std::size_t i = 0; i < values_.size(); ++i)
            if (!(values_[i] > 0.0))
                throw ValidationError("mass " + std::to_string(i) +
                                      " must be positive");
    }

    int n() const { return static_cast<int>(values_.size()); }
    double operator[](int i) const { return values_[static_cast<std::size_t>(i)]; }
    const std::vector<double>& values() const { return values_; }

    double total() const {
        double t = 0.0;
        for (double m : values_) t += m;
        return t;
    }

    // Diagonal of the mass matrix M acting on flat body-major vectors,
    // i.e. each mass repeated d times.
    Eigen::VectorXd repeated(int d) const {
        Eigen::VectorXd out(n() * d);
        for (int i = 0; i < n(); ++i)
            for (int a = 0; a < d; ++a) out[i * d + a] = values_[static_cast<std::size_t>(i)];
        return out;
    }

  private:
    std::vector<double> values_;
};

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

// Positions of n bodies in dimension d (2 or 3), stored as a flat
// body-major coordinate vector.
class Configuration {
  public:
    Configuration(int n, int d, Eigen::VectorXd coords)
        : n_(n), d_(d), coords_(std::move(coords)) {
        if (d_ != 2 && d_ != 3)
            throw ValidationError("dimension must be 2 or 3, got " + std::to_string(d_));
        if (n_ < 2) throw ValidationError("need at least two bodies");
        if (coords_.size() != static_cast<Eigen::Index>(n_) * d_)
            throw DimensionMismatch("coordinate vector has length " +
                                    std::to_string(coords_.size()) + ", expected " +
                                    std::to_string(n_ * d_));
    }

    int n() const { return n_; }
    int d() const { return d_; }
    const Eigen::VectorXd& coords() const { return coords_; }
    Eigen::VectorXd& coords() { return coords_; }

    // Position of body i as a d-vector.
    Eigen::VectorXd body(int i) const { return coords_.segment(i * d_, d_); }

    double distance(int i, int j) const {
        return (body(i) - body(j)).norm();
    }

    // Largest pairwise distance; scale reference for the collision threshold.
    double diameter() const {
        double dm = 0.0;
        for (int i = 0; i < n_; ++i)
            for (int j = i + 1; j < n_; ++j) dm = std::max(dm, distance(i, j));
        return dm;
    }

    // Smallest pairwise distance.
    double min_separation() const {
        double mn = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n_; ++i)
            for (int j = i + 1; j < n_; ++j) mn = std::min(mn, distance(i, j));
        return mn;
    }

    // Sorted pairwise distances; permutation- and rotation-invariant shape
    // fingerprint used for branch distinctness checks.
    std::vector<double> distance_fingerprint() const {
        std::vector<double> f;
        f.reserve(static_cast<std::size_t>(n_) * (n_ - 1) / 2);
        for (int i = 0; i < n_; ++i)
            for (int j = i + 1; j < n_; ++j) f.push_back(distance(i, j));
        std::sort(f.begin(), f.end());
        return f;
    }

  private:
    int n_;
    int d_;
    Eigen::VectorXd coords_;
};

// ---------------------------------------------------------------------------
// SParameter
// ---------------------------------------------------------------------------

// The scale parameter s >= 1 defining S = diag(s, 1, ..., 1).  s = 1 is the
// central-configuration limit; s > 1 the balanced regime.  The first
// coordinate axis always carries the weight.
class SParameter {
  public:
    explicit SParameter(double s) : s_(s) {
        if (!(s >= 1.0))
            throw ValidationError("s must be >= 1, got " + std::to_string(s));
    }

    double value() const { return s_; }

    // Diagonal of the block-repeated weight matrix S-hat on flat vectors:
    // (s, 1, ..., 1) per body.
    Eigen::VectorXd hat_diagonal(int n, int d) const {
        Eigen::VectorXd out = Eigen::VectorXd::Ones(n * d);
        for (int i = 0; i < n; ++i) out[i * d] = s_;
        return out;
    }

  private:
    double s_;
};

// Relative collision threshold: a configuration counts as collided when
// min r_ij < kCollisionFactor * diameter.  Keeps 1/r^3 terms within
// double-precision range and gives continuation a clean stop signal.
inline constexpr double kCollisionFactor = 1e-8;

inline void require_collision_free(const Configuration& q) {
    const double dm = q.diameter();
    const double mn = q.min_separation();
    if (!(mn > kCollisionFactor * dm))
        throw CollisionError("near-collision: min separation " + std::to_string(mn) +
                             " below threshold for diameter " + std::to_string(dm));
}

}  // namespace bcfg
