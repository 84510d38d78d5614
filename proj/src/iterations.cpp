#include "monoflow/iterations.hpp"

#include <cmath>
#include <unordered_set>

namespace monoflow {

namespace {

// Thinning grid: first/last 100 plus indices round(1.1^j).
std::unordered_set<std::int64_t> retained_indices(std::int64_t max_iter) {
    std::unordered_set<std::int64_t> keep;
    for (std::int64_t i = 0; i <= std::min<std::int64_t>(100, max_iter); ++i) keep.insert(i);
    for (std::int64_t i = std::max<std::int64_t>(0, max_iter - 100); i <= max_iter; ++i)
        keep.insert(i);
    double g = 1.0;
    while (g <= static_cast<double>(max_iter)) {
        keep.insert(static_cast<std::int64_t>(std::llround(g)));
        g *= 1.1;
    }
    return keep;
}

// Reference fixed point for D0: explicit override, else the projection of the
// anchor onto the declared fixed-point set.
std::optional<Vec> reference_point(const OperatorSpec& t, const IterOptions& opt, const Vec& v) {
    if (opt.reference) return opt.reference;
    if (set_is_known(t.fixed_points())) return project_onto(t.fixed_points(), v);
    return std::nullopt;
}

struct Recorder {
    IterateLog log;
    std::unordered_set<std::int64_t> keep;
    bool keep_all;

    Recorder(std::int64_t max_iter, const IterOptions& opt) : keep_all(opt.keep_all_states) {
        if (!keep_all) keep = retained_indices(max_iter);
        log.k.reserve(max_iter);
        log.alpha.reserve(max_iter);
        log.vel.reserve(max_iter);
        log.res.reserve(max_iter);
    }

    void state(std::int64_t k, const Vec& x) {
        if (keep_all || keep.count(k)) log.retained_states.emplace_back(k, x);
    }
    void row(std::int64_t k, double alpha, double vel, double res) {
        log.k.push_back(k);
        log.alpha.push_back(alpha);
        log.vel.push_back(vel);
        log.res.push_back(res);
    }
};

void track_anchored_bounds(IterateLog& log, double d0, double alpha_k, double alpha_prev,
                           double vel_k, double vel_prev, double res_next, double dist_xi,
                           double t_anchor_dist, bool have_prev) {
    auto bump = [](double& worst, double slack) { worst = std::max(worst, -slack); };
    bump(log.dist_bound_violation, d0 - dist_xi);
    bump(log.anchor_bound_violation, 2.0 * d0 - t_anchor_dist);
    if (have_prev) {
        double rhs = (1.0 - alpha_k) * vel_prev + 2.0 * d0 * std::abs(alpha_k - alpha_prev);
        bump(log.vel_recursion_violation, rhs - vel_k);
    }
    double rhs_res = (1.0 - alpha_k) * vel_k + 2.0 * d0 * alpha_k;
    bump(log.res_recursion_violation, rhs_res - res_next);
}

}  // namespace

const Vec* IterateLog::state_at(std::int64_t index) const {
    for (const auto& [k_, x] : retained_states)
        if (k_ == index) return &x;
    return nullptr;
}

IterateLog banach_picard(const OperatorSpec& t, const Vec& x0, std::int64_t max_iter,
                         const IterOptions& opt) {
    if (!t.props().nonexpansive)
        throw PropertyError("banach_picard: operator not declared nonexpansive");
    require_finite(x0, "x0");
    Recorder rec(max_iter, opt);
    Vec x = x0;
    for (std::int64_t k = 0; k < max_iter; ++k) {
        Vec tx = t.eval(x);
        double res = (x - tx).norm();
        rec.state(k, x);
        Vec x1 = tx;
        rec.row(k, std::numeric_limits<double>::quiet_NaN(), (x1 - x).norm(), res);
        x.swap(x1);
        rec.log.iterations = k + 1;
        if (opt.stop_tol > 0.0 && res <= opt.stop_tol) break;
    }
    rec.state(rec.log.iterations, x);
    rec.log.final_state = x;
    return std::move(rec.log);
}

IterateLog krasnoselskii_mann(const OperatorSpec& t, const Vec& x0, const DiscreteSchedule& sched,
                              std::int64_t max_iter, const IterOptions& opt) {
    if (!t.props().nonexpansive)
        throw PropertyError("krasnoselskii_mann: operator not declared nonexpansive");
    require_finite(x0, "x0");
    Recorder rec(max_iter, opt);
    Vec x = x0;
    for (std::int64_t k = 0; k < max_iter; ++k) {
        double a = sched.alpha_at(k);
        if (a < 0.0 || a > 1.0) throw RangeError("krasnoselskii_mann: alpha_k outside [0,1]");
        Vec tx = t.eval(x);
        double res = (x - tx).norm();
        rec.state(k, x);
        Vec x1 = a * x + (1.0 - a) * tx;
        rec.row(k, a, (x1 - x).norm(), res);
        x.swap(x1);
        rec.log.iterations = k + 1;
        if (opt.stop_tol > 0.0 && res <= opt.stop_tol) break;
    }
    rec.state(rec.log.iterations, x);
    rec.log.final_state = x;
    return std::move(rec.log);
}

IterateLog halpern(const OperatorSpec& t, const Vec& x0, const Vec& v,
                   const DiscreteSchedule& sched, std::int64_t max_iter, const IterOptions& opt) {
    if (!t.props().nonexpansive)
        throw PropertyError("halpern: operator not declared nonexpansive");
    require_finite(x0, "x0");
    require_finite(v, "v");
    require_same_dim(x0, v, "halpern");

    Recorder rec(max_iter, opt);
    std::optional<Vec> xi = reference_point(t, opt, v);
    double d0 = 0.0;
    if (xi) {
        d0 = std::max((x0 - *xi).norm(), (v - *xi).norm());
        rec.log.xi = xi;
        rec.log.d0 = d0;
    }

    Vec x = x0;
    double vel_prev = 0.0, alpha_prev = 0.0;
    bool have_prev = false;
    for (std::int64_t k = 0; k < max_iter; ++k) {
        double a = sched.alpha_at(k);
        if (!(a > 0.0) || !(a < 1.0)) throw RangeError("halpern: alpha_k outside (0,1)");
        Vec tx = t.eval(x);
        double res = (x - tx).norm();
        rec.state(k, x);
        Vec x1 = a * v + (1.0 - a) * tx;
        double vel = (x1 - x).norm();
        rec.row(k, a, vel, res);
        if (xi) {
            Vec tx1 = t.eval(x1);
            double res_next = (x1 - tx1).norm();
            track_anchored_bounds(rec.log, d0, a, alpha_prev, vel, vel_prev, res_next,
                                  (x - *xi).norm(), (tx - v).norm(), have_prev);
        }
        vel_prev = vel;
        alpha_prev = a;
        have_prev = true;
        x.swap(x1);
        rec.log.iterations = k + 1;
        if (opt.stop_tol > 0.0 && res <= opt.stop_tol) break;
    }
    rec.state(rec.log.iterations, x);
    rec.log.final_state = x;
    return std::move(rec.log);
}

IterateLog halpern_averaged(const OperatorSpec& t, double lambda, const Vec& x0, const Vec& v,
                            const DiscreteSchedule& sched, std::int64_t max_iter,
                            const IterOptions& opt) {
    OperatorSpec t_lambda = relax(t, lambda);  // validates theta and lambda
    IterateLog log = halpern(t_lambda, x0, v, sched, max_iter, opt);
    // residual against the original operator: |x - T(x)| = (1/lambda)|x - T_lambda(x)|
    for (double& r : log.res) r /= lambda;
    return log;
}

BcmResult bcm_scheme(const OperatorSpec& t, double lambda, const Vec& z0,
                     const std::function<double(std::int64_t)>& beta_k, std::int64_t max_iter,
                     const IterOptions& opt) {
    if (!t.props().averaged) throw PropertyError("bcm_scheme: operator has no averagedness tag");
    double theta = *t.props().averaged;
    if (!(lambda > 0.0) || lambda > 1.0 / theta + 1e-15)
        throw RangeError("bcm_scheme: lambda outside (0, 1/theta]");
    require_finite(z0, "z0");

    BcmResult out;
    Recorder zrec(max_iter, opt), xrec(max_iter, opt);

    // reference halpern_averaged run with v = 0 and alpha_k = 1 - beta_{k+1}
    std::vector<double> alphas(static_cast<size_t>(max_iter));
    for (std::int64_t k = 0; k < max_iter; ++k) {
        double b = beta_k(k + 1);
        if (!(b > 0.0) || b > 1.0) throw RangeError("bcm_scheme: beta_k outside (0,1]");
        alphas[static_cast<size_t>(k)] = 1.0 - b;
    }
    Vec zero_v = Vec::Zero(z0.size());
    Vec x_ref = beta_k(0) * z0;

    Vec z = z0;
    Vec x = beta_k(0) * z0;
    for (std::int64_t k = 0; k < max_iter; ++k) {
        double bk = beta_k(k);
        if (!(bk > 0.0) || bk > 1.0) throw RangeError("bcm_scheme: beta_k outside (0,1]");
        double bk1 = beta_k(k + 1);

        Vec bz = bk * z;
        Vec tbz = t.eval(bz);
        Vec z1 = bz + lambda * (tbz - bz);

        zrec.state(k, z);
        zrec.row(k, bk, (z1 - z).norm(), (z - t.eval(z)).norm());

        // derived sequence x_k = beta_k z_k and its one-sequence recursion
        Vec x1_derived = bk1 * z1;
        Vec x1_recursion = bk1 * ((1.0 - lambda) * x + lambda * t.eval(x));
        out.max_reformulation_diff =
            std::max(out.max_reformulation_diff, (x1_derived - x1_recursion).norm());

        xrec.state(k, x);
        xrec.row(k, 1.0 - bk1, (x1_derived - x).norm(), (x - t.eval(x)).norm());

        // reference: x_{k+1} = alpha_k*0 + (1-alpha_k)((1-lambda)x + lambda T(x))
        double a = alphas[static_cast<size_t>(k)];
        Vec x_ref1 = a * zero_v + (1.0 - a) * ((1.0 - lambda) * x_ref + lambda * t.eval(x_ref));
        out.max_halpern_diff = std::max(out.max_halpern_diff, (x1_derived - x_ref1).norm());

        z.swap(z1);
        x = x1_derived;
        x_ref = x_ref1;
        zrec.log.iterations = xrec.log.iterations = k + 1;
    }
    zrec.state(max_iter, z);
    zrec.log.final_state = z;
    xrec.state(max_iter, x);
    xrec.log.final_state = x;
    out.z_log = std::move(zrec.log);
    out.x_log = std::move(xrec.log);
    return out;
}

IterateLog kim_ppa(const Mat& a, double eta, const Vec& x0, std::int64_t max_iter,
                   const IterOptions& opt) {
    OperatorSpec j = resolvent_linear(a, eta);
    require_finite(x0, "x0");
    if (x0.size() != a.rows()) throw DimensionError("kim_ppa: x0/matrix dims disagree");

    Recorder rec(max_iter, opt);
    Vec x = x0;          // x_k
    Vec x_prev = x0;     // x_{k-1}
    Vec y = x0;          // y_k
    for (std::int64_t k = 0; k < max_iter; ++k) {
        Vec y1 = j.eval(x);
        double res = (y1 - x).norm();
        rec.state(k, x);
        double kk = static_cast<double>(k);
        Vec x1 = y1 + (kk / (kk + 2.0)) * (y1 - y) - (kk / (kk + 2.0)) * (y - x_prev);
        rec.row(k, std::numeric_limits<double>::quiet_NaN(), (x1 - x).norm(), res);
        x_prev = x;
        x = x1;
        y = y1;
        rec.log.iterations = k + 1;
        if (opt.stop_tol > 0.0 && res <= opt.stop_tol) break;
    }
    rec.state(rec.log.iterations, x);
    rec.log.final_state = x;
    return std::move(rec.log);
}

}  // namespace monoflow
