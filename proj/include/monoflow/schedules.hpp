#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "monoflow/common.hpp"

namespace monoflow {

/// Scalar coefficient of a flow: value plus (optional) first derivative.
struct ScalarFn {
    std::function<double(double)> value;
    std::function<double(double)> deriv;  // may be empty
    double domain_start = 0.0;

    double operator()(double t) const { return value(t); }
    bool has_deriv() const { return static_cast<bool>(deriv); }
};

ScalarFn constant_fn(double c);

/// Regularization function eps(t) with analytic derivatives and gamma.
class ContinuousSchedule {
public:
    enum class Family { PowerLaw, InverseLog, Constant, Tabulated };

    static ContinuousSchedule power_law(double alpha, double q, double t0);
    static ContinuousSchedule inverse_log(double t0);
    static ContinuousSchedule constant(double c, double t0);
    static ContinuousSchedule tabulated(std::vector<double> grid, std::vector<double> values);

    Family family() const { return family_; }
    double t0() const { return t0_; }
    double alpha() const { return alpha_; }
    double q() const { return q_; }

    double eps(double t) const;
    double deps(double t) const;
    double d2eps(double t) const;

    // gamma(t) = exp(int_{t0}^t eps); log form avoids overflow in bound ratios.
    double log_gamma(double t) const;
    double gamma(double t) const;

    ScalarFn as_scalar() const;
    std::string describe() const;

private:
    ContinuousSchedule() = default;
    void check_domain(double t) const;

    Family family_ = Family::Constant;
    double alpha_ = 0.0;  // PowerLaw coefficient / Constant value
    double q_ = 0.0;
    double t0_ = 1.0;
    // tabulated data
    std::vector<double> grid_, values_, cum_integral_;
};

/// (beta, delta) pair of the rescaled flow, power family:
/// beta(s) = beta_coef * s^beta_exp, delta(s) = delta_coef * s^delta_exp.
struct RescaledPair {
    double beta_coef = 1.0;
    double beta_exp = 0.0;
    double delta_coef = 1.0;
    double delta_exp = -1.0;
    double s0 = 1.0;

    double beta(double s) const;
    double dbeta(double s) const;
    double d2beta(double s) const;
    double delta(double s) const;
    double ddelta(double s) const;
    double eps_eq(double s) const;        // delta/beta
    double deps_eq(double s) const;       // d/ds (delta/beta)
    double d2eps_eq(double s) const;
    double int_delta(double s1, double s2) const;  // int_{s1}^{s2} delta

    ScalarFn beta_fn() const;
    ScalarFn delta_fn() const;
    void validate() const;
};

/// Step-size sequence alpha_k of the discrete schemes.
class DiscreteSchedule {
public:
    enum class Family { PowerStep, Critical, ConstantStep, Tabulated };

    static DiscreteSchedule power_step(double alpha, double b, double q);
    static DiscreteSchedule critical(double alpha);
    static DiscreteSchedule constant_step(double c);
    static DiscreteSchedule tabulated(std::vector<double> values);

    Family family() const { return family_; }
    double alpha() const { return alpha_; }
    double b() const { return b_; }
    double q() const { return q_; }

    double alpha_at(std::int64_t k) const;
    bool monotone_nonincreasing() const;
    std::string describe() const;

private:
    DiscreteSchedule() = default;
    Family family_ = Family::ConstantStep;
    double alpha_ = 2.0, b_ = 1.0, q_ = 1.0, c_ = 0.5;
    std::vector<double> values_;
};

enum class Verdict { Holds, Fails, Inconclusive };

std::string to_string(Verdict v);

struct ConditionVerdict {
    std::string condition;  // e.g. "vanishes", "integral-diverges", "deriv-ratio-limit"
    Verdict verdict = Verdict::Inconclusive;
    double value = 0.0;  // measured quantity (limit estimate, integral, ...)
    std::string detail;
};

struct ScheduleReport {
    std::vector<ConditionVerdict> items;
    std::optional<double> threshold;  // t1 / s1 / k1 when applicable
    bool required_ok() const;
    const ConditionVerdict* find(const std::string& condition) const;
};

/// Checks the hypotheses placed on eps: vanishing + divergent integral,
/// derivative-ratio limit, integrable derivative, sign of d/dt(deps+eps^2),
/// monotonicity, and the contextual |deps|/eps^2 limit.
ScheduleReport check_continuous_conditions(const ContinuousSchedule& s);

ScheduleReport check_pair_conditions(const RescaledPair& p, double alpha_for_growth = 0.0);

ScheduleReport check_discrete_conditions(const DiscreteSchedule& d);

/// Time rescaling t = tau(s) induced by beta, with inverse sigma and the
/// equivalent regularization eps(t) = delta(sigma(t))/beta(sigma(t)).
struct TimeRescaling {
    std::function<double(double)> tau;
    std::function<double(double)> sigma;
    ScalarFn eps;
    double t0 = 1.0;
    double s0 = 1.0;
};

TimeRescaling equivalent_epsilon(const RescaledPair& p, double t0);

}  // namespace monoflow
