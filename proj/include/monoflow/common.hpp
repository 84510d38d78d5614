#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace monoflow {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct PropertyError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct RangeError : std::out_of_range {
    using std::out_of_range::out_of_range;
};
struct CapabilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IntegrationError : std::runtime_error {
    IntegrationError(const std::string& what, double last_good)
        : std::runtime_error(what), last_good_time(last_good) {}
    double last_good_time;
};
struct OperatorError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline bool all_finite(const Vec& v) { return v.allFinite(); }

inline void require_finite(const Vec& v, const char* what) {
    if (!v.allFinite()) throw ValidationError(std::string(what) + ": non-finite coordinate");
}

inline void require_same_dim(const Vec& a, const Vec& b, const char* what) {
    if (a.size() != b.size())
        throw DimensionError(std::string(what) + ": dims " + std::to_string(a.size()) +
                             " vs " + std::to_string(b.size()));
}

// Deterministic normal sampler (Box-Muller on mt19937_64); std::normal_distribution
// is implementation-defined, this one reproduces across toolchains.
class NormalSampler {
public:
    explicit NormalSampler(std::uint64_t seed) : rng_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // Standard-normal draw pulled back into the ball of radius `radius`.
    Vec vector_in_ball(Eigen::Index dim, double radius) {
        Vec v(dim);
        for (Eigen::Index i = 0; i < dim; ++i) v[i] = next();
        double n = v.norm();
        if (n > radius) v *= radius / n;
        return v;
    }

private:
    double uniform01() {
        // (0,1]: avoids log(0)
        return (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53;
    }
    std::mt19937_64 rng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Compensated accumulation for long telescoping sums.
class KahanSum {
public:
    void add(double x) {
        double y = x - c_;
        double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

private:
    double s_ = 0.0;
    double c_ = 0.0;
};

}  // namespace monoflow
