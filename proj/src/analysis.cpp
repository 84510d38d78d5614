#include "monoflow/analysis.hpp"

#include <cmath>

namespace monoflow {

namespace {
constexpr double kCheckTol = 1e-8;  // absolute + relative slack of the comparator
}

BoundName bound_name_from_string(const std::string& s) {
    if (s == "thm2_7_velocity") return BoundName::Thm2_7_velocity;
    if (s == "thm2_7_operator") return BoundName::Thm2_7_operator;
    if (s == "thm2_8") return BoundName::Thm2_8;
    if (s == "thm2_9") return BoundName::Thm2_9;
    if (s == "thm2_10") return BoundName::Thm2_10;
    if (s == "thm2_13_velocity") return BoundName::Thm2_13_velocity;
    if (s == "thm2_13_operator") return BoundName::Thm2_13_operator;
    if (s == "thm4_5_velocity") return BoundName::Thm4_5_velocity;
    if (s == "thm4_5_residual") return BoundName::Thm4_5_residual;
    if (s == "thm4_6_velocity") return BoundName::Thm4_6_velocity;
    if (s == "thm4_6_residual") return BoundName::Thm4_6_residual;
    throw ValidationError("unknown bound name: " + s);
}

std::string to_string(BoundName n) {
    switch (n) {
        case BoundName::Thm2_7_velocity: return "thm2_7_velocity";
        case BoundName::Thm2_7_operator: return "thm2_7_operator";
        case BoundName::Thm2_8: return "thm2_8";
        case BoundName::Thm2_9: return "thm2_9";
        case BoundName::Thm2_10: return "thm2_10";
        case BoundName::Thm2_13_velocity: return "thm2_13_velocity";
        case BoundName::Thm2_13_operator: return "thm2_13_operator";
        case BoundName::Thm4_5_velocity: return "thm4_5_velocity";
        case BoundName::Thm4_5_residual: return "thm4_5_residual";
        case BoundName::Thm4_6_velocity: return "thm4_6_velocity";
        case BoundName::Thm4_6_residual: return "thm4_6_residual";
    }
    return "?";
}

SeriesKind series_from_string(const std::string& s) {
    if (s == "velocity" || s == "vel" || s == "vel_norm") return SeriesKind::Velocity;
    if (s == "residual" || s == "res") return SeriesKind::Residual;
    if (s == "op_norm" || s == "operator" || s == "operator_norm") return SeriesKind::OperatorNorm;
    throw ValidationError("unknown series: " + s);
}

double compute_D0(const Vec& x0, const Vec& v, const Vec& xi) {
    require_same_dim(x0, v, "compute_D0");
    require_same_dim(x0, xi, "compute_D0");
    return std::max((x0 - xi).norm(), (v - xi).norm());
}

double compute_D1(const OperatorSpec& m, const ContinuousSchedule& schedule, double t1,
                  const Vec& x_at_t1, const Vec& v, const Vec& xi) {
    if (t1 < schedule.t0() * (1.0 - 1e-12))
        throw RangeError("compute_D1: t1 precedes the schedule domain");
    double d0 = compute_D0(x_at_t1, v, xi);
    Vec drive = m.eval(x_at_t1) + schedule.eps(t1) * (x_at_t1 - v);
    return std::sqrt(drive.squaredNorm() + 8.0 * d0 * d0 * std::abs(schedule.deps(t1)));
}

double compute_D1_pair(const OperatorSpec& m, const RescaledPair& p, double s1,
                       const Vec& z_at_s1, const Vec& v, const Vec& xi) {
    if (s1 < p.s0 * (1.0 - 1e-12)) throw RangeError("compute_D1_pair: s1 precedes s0");
    double d0 = compute_D0(z_at_s1, v, xi);
    Vec drive = p.beta(s1) * m.eval(z_at_s1) + p.delta(s1) * (z_at_s1 - v);
    double inner =
        drive.squaredNorm() + 8.0 * d0 * d0 * p.beta(s1) * std::abs(p.deps_eq(s1));
    return std::sqrt(inner) / p.beta(s1);
}

double evaluate_bound(const BoundSpec& spec, double x) {
    if (x < spec.threshold * (1.0 - 1e-12) - 1e-12)
        throw RangeError("evaluate_bound: argument below the theorem threshold");
    switch (spec.name) {
        case BoundName::Thm2_7_velocity:
        case BoundName::Thm2_7_operator: {
            if (!spec.schedule) throw ValidationError("Thm2_7 bound needs a schedule");
            const auto& sc = *spec.schedule;
            double t1 = spec.threshold;
            double branch_eps = std::sqrt(std::abs(sc.deps(x)) / std::abs(sc.deps(t1)));
            double branch_gamma = std::exp(sc.log_gamma(t1) - sc.log_gamma(x));
            double val = spec.d1 * std::max(branch_eps, branch_gamma);
            if (spec.name == BoundName::Thm2_7_operator) val += 2.0 * spec.d0 * sc.eps(x);
            return val;
        }
        case BoundName::Thm2_8: {
            double t1 = spec.threshold;
            return spec.d1 * std::pow(t1 / x, (spec.q + 1.0) / 2.0) +
                   2.0 * spec.alpha * spec.d0 / std::pow(x, spec.q);
        }
        case BoundName::Thm2_9:
            return spec.d1 * std::pow(spec.t0 / x, std::min(spec.alpha, 1.0)) +
                   2.0 * spec.alpha * spec.d0 / x;
        case BoundName::Thm2_10:
            return spec.d1 * std::log(spec.t0) / std::log(x) +
                   2.0 * spec.d0 / (x * std::log(x));
        case BoundName::Thm2_13_velocity:
        case BoundName::Thm2_13_operator: {
            if (!spec.pair) throw ValidationError("Thm2_13 bound needs a pair");
            const auto& p = *spec.pair;
            double s1 = spec.threshold;
            double dr = std::abs(p.deps_eq(x));
            double dr1 = std::abs(p.deps_eq(s1));
            double decay = std::exp(-p.int_delta(s1, x));
            if (spec.name == BoundName::Thm2_13_velocity) {
                double branch1 = std::sqrt(p.beta(s1) * p.beta(x)) * std::sqrt(dr / dr1);
                return spec.d1 * std::max(branch1, p.beta(x) * decay);
            }
            double branch1 = std::sqrt(p.beta(s1) / p.beta(x)) * std::sqrt(dr / dr1);
            return spec.d1 * std::max(branch1, decay) +
                   2.0 * spec.d0 * p.delta(x) / p.beta(x);
        }
        case BoundName::Thm4_5_velocity:
        case BoundName::Thm4_5_residual: {
            double k1 = spec.threshold;
            double head = (1.0 / (x + spec.b + 1.0)) *
                          std::max((k1 + spec.b) * spec.vel_at_k1,
                                   4.0 * spec.q * spec.d0 * (spec.b + 2.0) / spec.b);
            if (spec.name == BoundName::Thm4_5_velocity) return head;
            return head + 2.0 * (spec.alpha - 1.0) * spec.d0 / std::pow(x + spec.b, spec.q);
        }
        case BoundName::Thm4_6_velocity:
        case BoundName::Thm4_6_residual: {
            double a = spec.alpha;
            double head;
            if (a > 2.0) {
                head = (1.0 / (x + a + 1.0)) *
                       std::max((a + 1.0) * spec.vel0,
                                2.0 * (a - 1.0) * (a + 2.0) * spec.d0 / ((a - 2.0) * a));
            } else if (a == 2.0) {
                double inner = (2.0 * (6.0 + M_PI * M_PI) / 3.0) * spec.d0 * spec.d0 +
                               spec.anchor_shift_sq - spec.anchor_gap_sq;
                head = std::sqrt(std::max(0.0, inner)) / (x + 2.0);
            } else {
                head = (1.0 / std::pow(x + a + 1.0, a - 1.0)) *
                       std::max(std::pow(a + 1.0, a - 1.0) * spec.vel0,
                                8.0 * (a * a - 1.0) * spec.d0 /
                                    (a * a * (2.0 - a) * std::pow(a + 2.0, 2.0 - a)));
            }
            if (spec.name == BoundName::Thm4_6_velocity) return head;
            return head + 2.0 * (a - 1.0) * spec.d0 / (x + a);
        }
    }
    throw ValidationError("evaluate_bound: unhandled bound");
}

namespace {

bool is_discrete(BoundName n) {
    return n == BoundName::Thm4_5_velocity || n == BoundName::Thm4_5_residual ||
           n == BoundName::Thm4_6_velocity || n == BoundName::Thm4_6_residual;
}

bool is_residual_bound(BoundName n) {
    return n == BoundName::Thm4_5_residual || n == BoundName::Thm4_6_residual;
}

}  // namespace

BoundReport check_bound_series(const std::vector<double>& xs, const std::vector<double>& values,
                               const BoundSpec& spec, SeriesKind kind) {
    if (xs.size() != values.size())
        throw DimensionError("check_bound: series lengths disagree");
    BoundReport rep;
    rep.min_margin = std::numeric_limits<double>::infinity();
    // The printed residual recursions bound the value at index k+1 by the
    // right-hand side at k, so the residual series is compared with an offset.
    const bool residual_offset = is_discrete(spec.name) && is_residual_bound(spec.name) &&
                                 kind == SeriesKind::Residual;
    double start = spec.threshold + (residual_offset ? 1.0 : 0.0);

    std::vector<double> tail_x, tail_v;
    for (size_t i = 0; i < xs.size(); ++i) {
        double x = xs[i];
        if (x < start * (1.0 - 1e-12) - 1e-12) continue;
        double bound = evaluate_bound(spec, residual_offset ? x - 1.0 : x);
        double obs = values[i];
        ++rep.checked_points;
        double slack = bound - obs;
        rep.min_margin = std::min(rep.min_margin, slack);
        if (obs > bound + kCheckTol + kCheckTol * std::abs(bound))
            rep.violations.push_back({x, obs, bound, obs - bound});
        tail_x.push_back(x);
        tail_v.push_back(obs);
    }
    rep.pass = rep.violations.empty() && rep.checked_points > 0;
    try {
        SlopeFit sf = fit_tail_slope(tail_x, tail_v);
        rep.fitted_slope = sf.slope;
        rep.slope_stderr = sf.stderr_;
    } catch (const std::exception&) {
        // nonpositive values or too few points; slope stays NaN
    }
    return rep;
}

BoundReport check_bound(const Trajectory& traj, const BoundSpec& spec, SeriesKind kind) {
    const std::vector<double>* series = nullptr;
    switch (kind) {
        case SeriesKind::Velocity: series = &traj.velocity_norms; break;
        case SeriesKind::OperatorNorm: series = &traj.operator_norms; break;
        case SeriesKind::Residual:
            // continuous-time residual of Id - T is the operator norm itself
            series = &traj.operator_norms;
            break;
    }
    if (series->empty()) throw ValidationError("check_bound: series absent in trajectory");
    return check_bound_series(traj.times, *series, spec, kind);
}

BoundReport check_bound(const IterateLog& log, const BoundSpec& spec, SeriesKind kind) {
    const std::vector<double>* series =
        kind == SeriesKind::Velocity ? &log.vel : &log.res;
    if (kind == SeriesKind::OperatorNorm)
        throw ValidationError("check_bound: iterate logs carry vel/res series only");
    if (series->empty()) throw ValidationError("check_bound: series absent in log");
    std::vector<double> ks(log.k.begin(), log.k.end());
    return check_bound_series(ks, *series, spec, kind);
}

SlopeFit fit_slope(const std::vector<double>& xs, const std::vector<double>& values, double lo,
                   double hi) {
    if (xs.size() != values.size()) throw DimensionError("fit_slope: lengths disagree");
    std::vector<double> lx, ly;
    for (size_t i = 0; i < xs.size(); ++i) {
        if (xs[i] < lo || xs[i] > hi) continue;
        if (!(values[i] > 0.0))
            throw std::domain_error("fit_slope: nonpositive value inside window");
        lx.push_back(std::log(xs[i]));
        ly.push_back(std::log(values[i]));
    }
    const auto n = static_cast<std::int64_t>(lx.size());
    if (n < 10) throw ValidationError("fit_slope: need at least 10 points in the window");
    double mx = 0.0, my = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (sxx <= 0.0) throw ValidationError("fit_slope: degenerate abscissa");
    double slope = sxy / sxx;
    double intercept = my - slope * mx;
    double ssr = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        double r = ly[i] - intercept - slope * lx[i];
        ssr += r * r;
    }
    double se = n > 2 ? std::sqrt(ssr / static_cast<double>(n - 2) / sxx) : 0.0;
    return SlopeFit{slope, se, n};
}

SlopeFit fit_tail_slope(const std::vector<double>& xs, const std::vector<double>& values) {
    if (xs.empty()) throw ValidationError("fit_tail_slope: empty series");
    double hi = xs.back();
    double lo = std::max(xs.front(), hi / 100.0);
    return fit_slope(xs, values, lo, hi);
}

OracleReport recursion_oracle_A8(double q, double c, double b, double d, std::int64_t horizon,
                                 double xi1) {
    if (!(q > 0.0) || q >= 1.0) throw ValidationError("oracle_A8: requires 0 < q < 1");
    if (!(b > 0.0)) throw ValidationError("oracle_A8: requires b > 0");
    if (!(c > 0.0) || !(c < std::pow(b, q))) throw ValidationError("oracle_A8: requires 0 < c < b^q");
    if (d < 0.0) throw ValidationError("oracle_A8: requires d >= 0");
    if (horizon < 2) throw ValidationError("oracle_A8: horizon too small");

    std::int64_t k1 = std::max<std::int64_t>(
        1, static_cast<std::int64_t>(std::ceil(std::pow(2.0 / c, 1.0 / (1.0 - q)) - b)));
    OracleReport rep;
    rep.bound_case = "A8";
    double xi = xi1;
    double xi_k1 = xi1;
    for (std::int64_t k = 1; k < horizon; ++k) {
        double kb = static_cast<double>(k) + b;
        double xin = (1.0 - c / std::pow(kb, q)) * xi + d / (std::pow(kb, q) * (kb - 1.0));
        if (k == k1) xi_k1 = xi;  // value at index k1 before the update of this k
        if (k >= k1) {
            double bound = (1.0 / (kb + 1.0)) *
                           std::max((static_cast<double>(k1) + b) * xi_k1,
                                    2.0 * d * (b + 2.0) / (c * b));
            double margin = bound - xin;
            rep.min_margin = std::min(rep.min_margin, margin);
            ++rep.checked;
            if (margin < 0.0 && rep.first_violation < 0) rep.first_violation = k + 1;
        }
        xi = xin;
    }
    rep.xi_final = xi;
    rep.pass = rep.first_violation < 0 && rep.checked > 0;
    return rep;
}

OracleReport recursion_oracle_A9(double c, double b, double d, std::int64_t horizon, double xi1) {
    if (!(c > 0.0)) throw ValidationError("oracle_A9: requires c > 0");
    if (!(b > 0.0)) throw ValidationError("oracle_A9: requires b > 0");
    if (c != 1.0 && !(c < b)) throw ValidationError("oracle_A9: requires c < b");
    if (d < 0.0) throw ValidationError("oracle_A9: requires d >= 0");
    if (horizon < 2) throw ValidationError("oracle_A9: horizon too small");

    OracleReport rep;
    rep.bound_case = c > 1.0 ? "A9(c>1)" : (c == 1.0 ? "A9(c=1)" : "A9(0<c<1)");
    double xi = xi1;
    for (std::int64_t k = 1; k < horizon; ++k) {
        double kb = static_cast<double>(k) + b;
        double xin = (1.0 - c / kb) * xi + d / (kb * (kb - 1.0));
        double bound;
        if (c > 1.0) {
            bound = (1.0 / (kb + 1.0)) *
                    std::max((b + 1.0) * xi1, d * (b + 2.0) / ((c - 1.0) * b));
        } else if (c == 1.0) {
            bound = ((1.0 + b) * xi1 + 3.0 * d) / (kb + 1.0) +
                    3.0 * d * std::log(static_cast<double>(k)) / (kb + 1.0);
        } else {
            bound = (1.0 / std::pow(kb + 1.0, c)) *
                    (std::pow(b + 1.0, c) * xi1 +
                     d * (b + 1.0) * (b + 3.0 - c) /
                         (b * b * std::pow(b + 2.0, 1.0 - c) * (1.0 - c)));
        }
        double margin = bound - xin;
        rep.min_margin = std::min(rep.min_margin, margin);
        ++rep.checked;
        if (margin < 0.0 && rep.first_violation < 0) rep.first_violation = k + 1;
        xi = xin;
    }
    rep.xi_final = xi;
    rep.pass = rep.first_violation < 0 && rep.checked > 0;
    return rep;
}

std::vector<std::pair<double, bool>> sweep_A9_critical(const std::vector<double>& bs, double d,
                                                       double xi1, std::int64_t horizon) {
    std::vector<std::pair<double, bool>> out;
    for (double b : bs) out.emplace_back(b, recursion_oracle_A9(1.0, b, d, horizon, xi1).pass);
    return out;
}

LimitCheck limit_check(const Trajectory& traj, const Vec& target, double tol) {
    require_finite(target, "target");
    LimitCheck lc;
    if (traj.states.empty()) return lc;
    lc.final_distance = (traj.states.back() - target).norm();
    lc.converged = lc.final_distance <= tol;
    for (size_t i = 0; i < traj.states.size(); ++i) {
        if ((traj.states[i] - target).norm() <= tol) {
            lc.first_index_within_tol = static_cast<std::int64_t>(i);
            break;
        }
    }
    return lc;
}

LimitCheck limit_check(const IterateLog& log, const Vec& target, double tol) {
    require_finite(target, "target");
    LimitCheck lc;
    lc.final_distance = (log.final_state - target).norm();
    lc.converged = lc.final_distance <= tol;
    for (const auto& [k, x] : log.retained_states) {
        if ((x - target).norm() <= tol) {
            lc.first_index_within_tol = k;
            break;
        }
    }
    return lc;
}

}  // namespace monoflow
