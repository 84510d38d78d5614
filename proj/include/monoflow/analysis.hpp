#pragma once

#include "monoflow/flows.hpp"
#include "monoflow/iterations.hpp"

namespace monoflow {

enum class BoundName {
    Thm2_7_velocity,
    Thm2_7_operator,
    Thm2_8,
    Thm2_9,
    Thm2_10,
    Thm2_13_velocity,
    Thm2_13_operator,
    Thm4_5_velocity,
    Thm4_5_residual,
    Thm4_6_velocity,
    Thm4_6_residual,
};

BoundName bound_name_from_string(const std::string& s);
std::string to_string(BoundName n);

enum class SeriesKind { Velocity, Residual, OperatorNorm };

SeriesKind series_from_string(const std::string& s);

/// Explicit right-hand side of one of the rate theorems, with every constant
/// pinned at construction.
struct BoundSpec {
    BoundName name;

    double alpha = 0.0;
    double q = 0.0;
    double b = 0.0;
    double t0 = 0.0;
    double threshold = 0.0;  // t1 / s1 / k1
    double d0 = 0.0;
    double d1 = 0.0;

    // discrete initial data
    double vel_at_k1 = 0.0;        // |x_{k1} - x_{k1-1}|
    double vel0 = 0.0;             // |x_1 - x_0|
    double anchor_shift_sq = 0.0;  // |v + T(x0) - 2 x0|^2
    double anchor_gap_sq = 0.0;    // |T(x0) - v|^2

    std::optional<ContinuousSchedule> schedule;  // Thm2_7 branches
    std::optional<RescaledPair> pair;            // Thm2_13 branches
};

double compute_D0(const Vec& x0, const Vec& v, const Vec& xi);

/// sqrt(|M(x1) + eps(t1)(x1 - v)|^2 + 8 D0(x1,v,xi)^2 |deps(t1)|)
double compute_D1(const OperatorSpec& m, const ContinuousSchedule& schedule, double t1,
                  const Vec& x_at_t1, const Vec& v, const Vec& xi);

/// Same quantity expressed through (beta, delta) at s1.
double compute_D1_pair(const OperatorSpec& m, const RescaledPair& p, double s1,
                       const Vec& z_at_s1, const Vec& v, const Vec& xi);

double evaluate_bound(const BoundSpec& spec, double t_or_k);

struct BoundViolation {
    double at = 0.0;
    double observed = 0.0;
    double bound = 0.0;
    double excess = 0.0;
};

struct BoundReport {
    std::int64_t checked_points = 0;
    std::vector<BoundViolation> violations;
    double min_margin = 0.0;
    double fitted_slope = std::numeric_limits<double>::quiet_NaN();
    double slope_stderr = std::numeric_limits<double>::quiet_NaN();
    bool pass = false;
};

BoundReport check_bound_series(const std::vector<double>& xs, const std::vector<double>& values,
                               const BoundSpec& spec, SeriesKind kind);
BoundReport check_bound(const Trajectory& traj, const BoundSpec& spec, SeriesKind kind);
BoundReport check_bound(const IterateLog& log, const BoundSpec& spec, SeriesKind kind);

struct SlopeFit {
    double slope = 0.0;
    double stderr_ = 0.0;
    std::int64_t points = 0;
};

/// Least squares on (log x, log y) restricted to the window [lo, hi].
SlopeFit fit_slope(const std::vector<double>& xs, const std::vector<double>& values, double lo,
                   double hi);

/// Slope over the last two decades of the series.
SlopeFit fit_tail_slope(const std::vector<double>& xs, const std::vector<double>& values);

struct OracleReport {
    bool pass = false;
    double min_margin = std::numeric_limits<double>::infinity();
    std::int64_t checked = 0;
    std::int64_t first_violation = -1;
    double xi_final = 0.0;
    std::string bound_case;
};

/// Iterates the power-step contraction recursion with equality and checks the
/// closed-form decay bound at every index.
OracleReport recursion_oracle_A8(double q, double c, double b, double d, std::int64_t horizon,
                                 double xi1);

/// Same for the harmonic-step recursion; the three regimes split on c.
/// c == 1 accepts any b > 0 so that the validity region can be mapped.
OracleReport recursion_oracle_A9(double c, double b, double d, std::int64_t horizon, double xi1);

std::vector<std::pair<double, bool>> sweep_A9_critical(const std::vector<double>& bs, double d,
                                                       double xi1, std::int64_t horizon);

struct LimitCheck {
    bool converged = false;
    double final_distance = 0.0;
    std::optional<std::int64_t> first_index_within_tol;
};

LimitCheck limit_check(const Trajectory& traj, const Vec& target, double tol);
LimitCheck limit_check(const IterateLog& log, const Vec& target, double tol);

}  // namespace monoflow
