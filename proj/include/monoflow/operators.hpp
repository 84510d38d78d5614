#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <variant>

#include "monoflow/common.hpp"

namespace monoflow {

/// Structural tags an operator may declare. Declared, not proved: the sampled
/// checker in check_property is the falsification tool.
struct OperatorProps {
    bool monotone = false;
    std::optional<double> cocoercive;   // rho > 0
    std::optional<double> lipschitz;    // L > 0
    bool nonexpansive = false;
    std::optional<double> averaged;     // theta in (0,1]
};

struct SingletonSet {
    Vec point;
};
struct AffineSubspace {
    Vec base;
    std::vector<Vec> directions;  // orthonormal
};
struct UnknownSet {};
using PointSet = std::variant<UnknownSet, SingletonSet, AffineSubspace>;

bool set_is_known(const PointSet& s);
Vec project_onto(const PointSet& s, const Vec& x);

using EvalFn = std::function<Vec(const Vec&)>;
using JvpFn = std::function<Vec(const Vec&, const Vec&)>;

/// An evaluable map on R^n with declared structure. Immutable after
/// construction; copies share the implementation.
class OperatorSpec {
public:
    OperatorSpec() = default;
    OperatorSpec(std::string label, Eigen::Index dim, EvalFn eval, OperatorProps props,
                 PointSet zeros = UnknownSet{}, std::optional<JvpFn> jvp = std::nullopt,
                 PointSet fixed_points = UnknownSet{});

    Vec eval(const Vec& x) const;
    Vec jvp(const Vec& point, const Vec& direction) const;
    bool has_jvp() const;

    Eigen::Index dim() const;
    const std::string& label() const;
    const OperatorProps& props() const;
    const PointSet& zeros() const;
    const PointSet& fixed_points() const;

    OperatorSpec with_declared(OperatorProps extra) const;

private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
};

// Constructors of the test operators.
OperatorSpec make_rotation(double omega, Eigen::Index dim);
OperatorSpec make_rotation_map(double angle, Eigen::Index dim);
OperatorSpec make_linear(const Mat& a);
OperatorSpec make_quadratic_gradient(const Mat& q, const Vec& b);
OperatorSpec make_identity(Eigen::Index dim);
OperatorSpec make_zero(Eigen::Index dim);
OperatorSpec make_scaled_identity(double c, Eigen::Index dim);
OperatorSpec make_axis_projection(Eigen::Index dim, const std::vector<Eigen::Index>& keep);

// Structural transforms.
OperatorSpec residual(const OperatorSpec& t);
OperatorSpec relax(const OperatorSpec& t, double lambda);
OperatorSpec shift(const OperatorSpec& m, const Vec& v);
OperatorSpec resolvent_linear(const Mat& a, double eta);
OperatorSpec yosida(const Mat& a, double rho);

enum class PropertyTag { Monotone, Cocoercive, Lipschitz, Nonexpansive, Averaged };

struct PropertyCheck {
    bool pass = false;
    double worst_violation = 0.0;  // most negative slack seen (min slack)
    Eigen::Index samples = 0;
};

/// Sampled check of a declared property: `samples` pairs drawn from a seeded
/// standard normal in the ball of radius 10; pass iff slack >= -1e-10 on all.
PropertyCheck check_property(const OperatorSpec& m, PropertyTag prop, Eigen::Index samples,
                             std::uint64_t seed, std::optional<double> parameter = std::nullopt);

double spectral_norm_power_iteration(const Mat& a, int max_iter = 20000, double tol = 1e-13);

}  // namespace monoflow
