#pragma once

#include <memory>
#include <optional>

#include "monoflow/operators.hpp"
#include "monoflow/schedules.hpp"

namespace monoflow {

struct OutputGrid {
    enum class Kind { Geometric, Uniform };
    Kind kind = Kind::Geometric;
    int points_per_decade = 64;
    int uniform_points = 256;

    static OutputGrid geometric(int per_decade = 64) {
        return OutputGrid{Kind::Geometric, per_decade, 0};
    }
    static OutputGrid uniform(int n) { return OutputGrid{Kind::Uniform, 0, n}; }
};

struct IntegratorConfig {
    enum class Method { AdaptiveRK45, FixedRK4 };
    Method method = Method::AdaptiveRK45;
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double fixed_step = 1e-3;  // FixedRK4 only
    std::int64_t max_steps = 50000000;
    OutputGrid grid = OutputGrid::geometric();
    bool store_dense = false;

    void validate() const;
};

/// x' = -beta(t) M(x) - delta(t) (x - v)
struct FlowProblem {
    OperatorSpec m;
    ScalarFn beta = constant_fn(1.0);
    ScalarFn delta = constant_fn(0.0);
    std::optional<Vec> anchor;  // v; default origin
    double t_start = 0.0;
    double t_end = 0.0;
    Vec x0;

    void validate() const;
    Vec v() const { return anchor ? *anchor : Vec(Vec::Zero(x0.size())); }
};

/// z'' + (alpha/s) z' + beta(s) d/ds M(z) + (dbeta + beta/s) M(z) = 0
struct SecondOrderProblem {
    OperatorSpec m;  // jvp required
    double alpha = 2.0;
    ScalarFn beta = constant_fn(1.0);
    double s_start = 1.0;
    double s_end = 1.0;
    Vec z0;
    Vec zdot0;

    void validate() const;
};

class DenseOutput;

struct Trajectory {
    std::vector<double> times;
    std::vector<Vec> states;
    std::vector<double> velocity_norms;
    std::vector<double> operator_norms;
    std::vector<double> state_norms;
    std::vector<double> phi;  // 1/2 |x - xi|^2 against the reference point below
    std::vector<double> psi;  // 1/2 |x'|^2
    std::vector<double> defects;
    Vec reference_point;  // xi used for phi
    OperatorSpec op;      // operator that generated the flow
    double accumulated_error_estimate = 0.0;
    std::int64_t steps_accepted = 0;
    std::int64_t steps_rejected = 0;
    std::shared_ptr<const DenseOutput> dense;

    Eigen::Index dim() const { return states.empty() ? 0 : states.front().size(); }
};

/// Continuous extension of the integrator over all accepted steps.
class DenseOutput {
public:
    struct Step {
        double t0, h;
        Vec c1, c2, c3, c4, c5;
    };

    explicit DenseOutput(std::vector<Step> steps) : steps_(std::move(steps)) {}
    Vec eval(double t) const;
    Vec eval_derivative(double t) const;
    double t_begin() const;
    double t_end() const;

private:
    const Step& locate(double t) const;
    std::vector<Step> steps_;
};

Trajectory integrate_flow(const FlowProblem& p, const IntegratorConfig& cfg);

Trajectory integrate_second_order(const SecondOrderProblem& p, const IntegratorConfig& cfg);

FlowProblem reduce_to_first_order(const SecondOrderProblem& p);

/// Resamples a trajectory of the plain flow at t = tau(s) on a geometric
/// s-grid; velocities transform with the factor beta(s).
Trajectory rescale_trajectory(const Trajectory& traj, const RescaledPair& p, double t0,
                              double s_end, int points_per_decade = 64);

struct LyapunovSeries {
    std::vector<double> phi;
    std::vector<double> psi;
    std::vector<double> log_gamma2_psi;
    std::vector<std::size_t> phi_bound_violations;   // indices with |x-xi| > D0 + tol
    std::vector<std::size_t> norm_bound_violations;  // indices with |x| > 2 D0 + tol
    double d0 = 0.0;
};

LyapunovSeries lyapunov_track(const Trajectory& traj, const Vec& xi,
                              const ContinuousSchedule& schedule, double tol = 1e-8);

}  // namespace monoflow
