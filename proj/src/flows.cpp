#include "monoflow/flows.hpp"

#include <algorithm>
#include <cmath>

namespace monoflow {

void IntegratorConfig::validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
        throw ValidationError("IntegratorConfig: tolerances must be positive");
    if (max_steps < 1) throw ValidationError("IntegratorConfig: max_steps must be >= 1");
    if (method == Method::FixedRK4 && !(fixed_step > 0.0))
        throw ValidationError("IntegratorConfig: fixed_step must be positive");
    if (grid.kind == OutputGrid::Kind::Geometric && grid.points_per_decade < 1)
        throw ValidationError("IntegratorConfig: points_per_decade must be >= 1");
    if (grid.kind == OutputGrid::Kind::Uniform && grid.uniform_points < 2)
        throw ValidationError("IntegratorConfig: uniform grid needs >= 2 points");
}

void FlowProblem::validate() const {
    require_finite(x0, "x0");
    if (x0.size() != m.dim()) throw DimensionError("FlowProblem: x0/operator dims disagree");
    if (anchor) {
        require_finite(*anchor, "anchor");
        if (anchor->size() != m.dim()) throw DimensionError("FlowProblem: anchor dim mismatch");
    }
    if (!(t_end > t_start)) throw ValidationError("FlowProblem: t_end must exceed t_start");
    if (t_start < beta.domain_start || t_start < delta.domain_start)
        throw RangeError("FlowProblem: t_start precedes schedule domain");
    if (!m.props().lipschitz)
        throw PropertyError("FlowProblem: operator carries no Lipschitz declaration");
}

void SecondOrderProblem::validate() const {
    require_finite(z0, "z0");
    require_finite(zdot0, "zdot0");
    if (z0.size() != m.dim() || zdot0.size() != m.dim())
        throw DimensionError("SecondOrderProblem: initial data dims disagree");
    if (!(s_start > 0.0)) throw ValidationError("SecondOrderProblem: s_start must be positive");
    if (!(s_end > s_start)) throw ValidationError("SecondOrderProblem: s_end must exceed s_start");
    if (!m.has_jvp()) throw CapabilityError("SecondOrderProblem: operator has no jvp");
    if (!beta.has_deriv()) throw CapabilityError("SecondOrderProblem: beta has no derivative");
}

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4) with PI step control and the standard continuous
// extension (quartic in theta, locally O(h^5)).

namespace {

constexpr double A21 = 1.0 / 5;
constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561,
                 A54 = -212.0 / 729;
constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176,
                 A65 = -5103.0 / 18656;
constexpr double A71 = 35.0 / 384, A73 = 500.0 / 1113, A74 = 125.0 / 192, A75 = -2187.0 / 6784,
                 A76 = 11.0 / 84;
constexpr double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9;
constexpr double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920,
                 E5 = -17253.0 / 339200, E6 = 22.0 / 525, E7 = -1.0 / 40;
constexpr double D1 = -12715105075.0 / 11282082432.0, D3 = 87487479700.0 / 32700410799.0,
                 D4 = -10690763975.0 / 1880347072.0, D5 = 701980252875.0 / 199316789632.0,
                 D6 = -1453857185.0 / 822651844.0, D7 = 69997945.0 / 29380423.0;

using Rhs = std::function<Vec(double, const Vec&)>;

Vec dense_eval_step(const DenseOutput::Step& s, double t) {
    double th = (t - s.t0) / s.h;
    double th1 = 1.0 - th;
    return s.c1 + th * (s.c2 + th1 * (s.c3 + th * (s.c4 + th1 * s.c5)));
}

Vec dense_deriv_step(const DenseOutput::Step& s, double t) {
    double th = (t - s.t0) / s.h;
    Vec d = s.c2 + (1.0 - 2.0 * th) * s.c3 + th * (2.0 - 3.0 * th) * s.c4 +
            2.0 * th * (1.0 - th) * (1.0 - 2.0 * th) * s.c5;
    return d / s.h;
}

struct OutputPoint {
    double t;
    Vec x;
    Vec xdot;    // derivative of the continuous extension
    double defect;  // |xdot - f(t,x)|
};

struct DriverResult {
    std::vector<OutputPoint> points;
    std::vector<DenseOutput::Step> dense;
    double err_accum = 0.0;
    std::int64_t naccept = 0, nreject = 0;
};

double error_norm(const Vec& e, const Vec& y0, const Vec& y1, double atol, double rtol) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < e.size(); ++i) {
        double sc = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        double q = e[i] / sc;
        acc += q * q;
    }
    return std::sqrt(acc / static_cast<double>(e.size()));
}

double initial_step(const Rhs& f, double t0, const Vec& x0, const Vec& f0, double t_end,
                    double atol, double rtol) {
    auto rms = [&](const Vec& v, const Vec& ref) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            double sc = atol + rtol * std::abs(ref[i]);
            acc += (v[i] / sc) * (v[i] / sc);
        }
        return std::sqrt(acc / static_cast<double>(v.size()));
    };
    double d0 = rms(x0, x0), d1 = rms(f0, x0);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, t_end - t0);
    Vec x1 = x0 + h0 * f0;
    Vec f1 = f(t0 + h0, x1);
    double d2 = f1.allFinite() ? rms(f1 - f0, x0) / h0 : 1.0 / h0;
    double h1;
    if (std::max(d1, d2) <= 1e-15)
        h1 = std::max(1e-6, h0 * 1e-3);
    else
        h1 = std::pow(0.01 / std::max(d1, d2), 0.2);
    return std::min({100.0 * h0, h1, t_end - t0});
}

DriverResult run_dopri5(const Rhs& f, double t0, const Vec& x0, double t_end,
                        const std::vector<double>& out_times, const IntegratorConfig& cfg) {
    DriverResult res;
    const double atol = cfg.abs_tol, rtol = cfg.rel_tol;
    const Eigen::Index n = x0.size();

    Vec y = x0;
    double t = t0;
    Vec k1 = f(t, y);
    if (!k1.allFinite()) throw OperatorError("operator returned non-finite value at start");

    size_t next_out = 0;
    auto emit = [&](const DenseOutput::Step& st) {
        while (next_out < out_times.size() &&
               out_times[next_out] <= st.t0 + st.h * (1.0 + 1e-14)) {
            double to = std::min(out_times[next_out], st.t0 + st.h);
            OutputPoint op;
            op.t = out_times[next_out];
            op.x = dense_eval_step(st, to);
            op.xdot = dense_deriv_step(st, to);
            Vec fr = f(op.t, op.x);
            op.defect = fr.allFinite() ? (op.xdot - fr).norm()
                                       : std::numeric_limits<double>::quiet_NaN();
            res.points.push_back(std::move(op));
            ++next_out;
        }
    };

    // initial output point, exact
    if (!out_times.empty() && out_times.front() <= t0 * (1.0 + 1e-14) + 1e-300) {
        OutputPoint op;
        op.t = out_times.front();
        op.x = y;
        op.xdot = k1;
        op.defect = 0.0;
        res.points.push_back(std::move(op));
        next_out = 1;
    }

    double h = initial_step(f, t0, y, k1, t_end, atol, rtol);
    double facold = 1e-4;
    bool last_rejected = false;
    Vec k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), y1(n), yerr(n);

    for (std::int64_t step = 0; step < cfg.max_steps; ++step) {
        if (t >= t_end) break;
        h = std::min(h, t_end - t);
        if (h <= 16.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t), 1.0))
            throw IntegrationError("step size underflow", t);

        bool stage_blowup = false;
        auto stage = [&](double c, const Vec& ys) -> Vec {
            if (!ys.allFinite()) {
                stage_blowup = true;
                return Vec::Zero(n);
            }
            Vec r = f(t + c * h, ys);
            if (!r.allFinite()) {
                if (ys.norm() > 1e100)
                    stage_blowup = true;  // trial state overflowed, shrink
                else
                    throw OperatorError("operator returned non-finite value");
            }
            return r;
        };

        k2 = stage(C2, y + h * (A21 * k1));
        if (!stage_blowup) k3 = stage(C3, y + h * (A31 * k1 + A32 * k2));
        if (!stage_blowup) k4 = stage(C4, y + h * (A41 * k1 + A42 * k2 + A43 * k3));
        if (!stage_blowup)
            k5 = stage(C5, y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
        if (!stage_blowup)
            k6 = stage(1.0, y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5));
        if (!stage_blowup) {
            y1 = y + h * (A71 * k1 + A73 * k3 + A74 * k4 + A75 * k5 + A76 * k6);
            k7 = stage(1.0, y1);
        }

        double err;
        if (stage_blowup || !y1.allFinite()) {
            err = 10.0;
        } else {
            yerr = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
            err = error_norm(yerr, y, y1, atol, rtol);
            if (!std::isfinite(err)) err = 10.0;
        }

        if (err <= 1.0) {
            // accept
            double fac11 = std::pow(err, 0.17);  // 0.2 - 0.04*0.75
            double fac = fac11 / std::pow(facold, 0.04);
            fac = std::clamp(fac / 0.9, 0.1, 5.0);
            double hnew = h / fac;
            if (last_rejected) hnew = std::min(hnew, h);
            facold = std::max(err, 1e-4);

            DenseOutput::Step st;
            st.t0 = t;
            st.h = h;
            st.c1 = y;
            st.c2 = y1 - y;
            st.c3 = h * k1 - st.c2;
            st.c4 = st.c2 - h * k7 - st.c3;
            st.c5 = h * (D1 * k1 + D3 * k3 + D4 * k4 + D5 * k5 + D6 * k6 + D7 * k7);
            emit(st);
            if (cfg.store_dense) res.dense.push_back(st);

            double scale_ref = atol + rtol * std::max(y.norm(), y1.norm());
            res.err_accum += err * scale_ref;

            t += h;
            y.swap(y1);
            k1.swap(k7);  // FSAL
            h = hnew;
            last_rejected = false;
            ++res.naccept;
        } else {
            double fac11 = std::pow(err, 0.17);
            h = h / std::min(5.0, fac11 / 0.9);
            last_rejected = true;
            ++res.nreject;
        }
    }
    if (t < t_end * (1.0 - 1e-12) && t < t_end - 1e-12)
        throw IntegrationError("max_steps exhausted", t);
    return res;
}

DriverResult run_fixed_rk4(const Rhs& f, double t0, const Vec& x0, double t_end,
                           const std::vector<double>& out_times, const IntegratorConfig& cfg) {
    DriverResult res;
    Vec y = x0;
    double t = t0;
    size_t next_out = 0;
    Vec f0 = f(t, y);
    if (!f0.allFinite()) throw OperatorError("operator returned non-finite value at start");
    if (!out_times.empty() && out_times.front() <= t0 + 1e-300) {
        res.points.push_back({t0, y, f0, 0.0});
        next_out = 1;
    }
    std::int64_t steps = 0;
    while (t < t_end) {
        double h = std::min(cfg.fixed_step, t_end - t);
        // land exactly on the next output point
        if (next_out < out_times.size() && out_times[next_out] > t)
            h = std::min(h, out_times[next_out] - t);
        Vec k1 = f(t, y);
        Vec k2 = f(t + h / 2, y + (h / 2) * k1);
        Vec k3 = f(t + h / 2, y + (h / 2) * k2);
        Vec k4 = f(t + h, y + h * k3);
        Vec y1 = y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
        if (!y1.allFinite()) throw IntegrationError("state became non-finite", t);
        Vec f1 = f(t + h, y1);

        DenseOutput::Step st;  // cubic Hermite (c5 = 0)
        st.t0 = t;
        st.h = h;
        st.c1 = y;
        st.c2 = y1 - y;
        st.c3 = h * k1 - st.c2;
        st.c4 = st.c2 - h * f1 - st.c3;
        st.c5 = Vec::Zero(y.size());
        if (cfg.store_dense) res.dense.push_back(st);

        t += h;
        y = y1;
        while (next_out < out_times.size() && out_times[next_out] <= t * (1.0 + 1e-14)) {
            res.points.push_back({out_times[next_out], y, f1, 0.0});
            ++next_out;
        }
        ++res.naccept;
        if (++steps > cfg.max_steps) throw IntegrationError("max_steps exhausted", t);
    }
    return res;
}

std::vector<double> build_output_grid(double t0, double t_end, const OutputGrid& g) {
    std::vector<double> out;
    if (g.kind == OutputGrid::Kind::Geometric) {
        if (!(t0 > 0.0))
            throw ValidationError("geometric output grid needs t_start > 0; use a uniform grid");
        double ratio = std::pow(10.0, 1.0 / g.points_per_decade);
        for (double t = t0; t < t_end; t *= ratio) out.push_back(t);
        out.push_back(t_end);
    } else {
        int n = g.uniform_points;
        for (int i = 0; i < n; ++i)
            out.push_back(t0 + (t_end - t0) * static_cast<double>(i) / (n - 1));
        out.back() = t_end;
    }
    return out;
}

}  // namespace

Vec DenseOutput::eval(double t) const { return dense_eval_step(locate(t), t); }
Vec DenseOutput::eval_derivative(double t) const { return dense_deriv_step(locate(t), t); }
double DenseOutput::t_begin() const { return steps_.empty() ? 0.0 : steps_.front().t0; }
double DenseOutput::t_end() const {
    return steps_.empty() ? 0.0 : steps_.back().t0 + steps_.back().h;
}

const DenseOutput::Step& DenseOutput::locate(double t) const {
    if (steps_.empty()) throw RangeError("dense output is empty");
    if (t < t_begin() - 1e-12 || t > t_end() * (1.0 + 1e-14) + 1e-12)
        throw RangeError("dense output evaluated outside integrated span");
    auto it = std::upper_bound(steps_.begin(), steps_.end(), t,
                               [](double v, const Step& s) { return v < s.t0; });
    if (it != steps_.begin()) --it;
    return *it;
}

// ---------------------------------------------------------------------------

namespace {

struct FlowSeries {
    const OperatorSpec* m;
    ScalarFn beta, delta;
    Vec v;
};

void fill_trajectory(Trajectory& tr, const DriverResult& dr, const FlowSeries& fs) {
    tr.times.reserve(dr.points.size());
    for (const auto& p : dr.points) {
        Vec mx = fs.m->eval(p.x);
        double b = fs.beta(p.t), d = fs.delta(p.t);
        Vec xdot = -b * mx - d * (p.x - fs.v);
        tr.times.push_back(p.t);
        tr.states.push_back(p.x);
        tr.velocity_norms.push_back(xdot.norm());
        tr.operator_norms.push_back(mx.norm());
        tr.state_norms.push_back(p.x.norm());
        tr.psi.push_back(0.5 * xdot.squaredNorm());
        tr.phi.push_back(0.5 * (p.x - tr.reference_point).squaredNorm());
        tr.defects.push_back(p.defect);
    }
    tr.accumulated_error_estimate = dr.err_accum;
    tr.steps_accepted = dr.naccept;
    tr.steps_rejected = dr.nreject;
}

}  // namespace

Trajectory integrate_flow(const FlowProblem& p, const IntegratorConfig& cfg) {
    p.validate();
    cfg.validate();
    Vec v = p.v();
    const OperatorSpec m = p.m;
    ScalarFn beta = p.beta, delta = p.delta;
    Rhs rhs = [m, beta, delta, v](double t, const Vec& x) {
        return Vec(-beta(t) * m.eval(x) - delta(t) * (x - v));
    };
    auto out = build_output_grid(p.t_start, p.t_end, cfg.grid);
    DriverResult dr = cfg.method == IntegratorConfig::Method::AdaptiveRK45
                          ? run_dopri5(rhs, p.t_start, p.x0, p.t_end, out, cfg)
                          : run_fixed_rk4(rhs, p.t_start, p.x0, p.t_end, out, cfg);

    Trajectory tr;
    tr.op = m;
    tr.reference_point =
        set_is_known(m.zeros()) ? project_onto(m.zeros(), v) : Vec(Vec::Zero(p.x0.size()));
    FlowSeries fs{&m, beta, delta, v};
    fill_trajectory(tr, dr, fs);
    if (cfg.store_dense) tr.dense = std::make_shared<DenseOutput>(std::move(dr.dense));
    return tr;
}

Trajectory integrate_second_order(const SecondOrderProblem& p, const IntegratorConfig& cfg) {
    p.validate();
    cfg.validate();
    const OperatorSpec m = p.m;
    const double alpha = p.alpha;
    ScalarFn beta = p.beta;
    const Eigen::Index n = p.z0.size();
    Rhs rhs = [m, alpha, beta, n](double s, const Vec& y) {
        Vec z = y.head(n), zd = y.tail(n);
        Vec mz = m.eval(z);
        Vec acc = -(alpha / s) * zd - beta(s) * m.jvp(z, zd) -
                  (beta.deriv(s) + beta(s) / s) * mz;
        Vec out(2 * n);
        out << zd, acc;
        return out;
    };
    Vec y0(2 * n);
    y0 << p.z0, p.zdot0;
    auto out = build_output_grid(p.s_start, p.s_end, cfg.grid);
    DriverResult dr = cfg.method == IntegratorConfig::Method::AdaptiveRK45
                          ? run_dopri5(rhs, p.s_start, y0, p.s_end, out, cfg)
                          : run_fixed_rk4(rhs, p.s_start, y0, p.s_end, out, cfg);

    Trajectory tr;
    tr.op = m;
    tr.reference_point =
        set_is_known(m.zeros()) ? project_onto(m.zeros(), Vec::Zero(n)) : Vec(Vec::Zero(n));
    for (const auto& pt : dr.points) {
        Vec z = pt.x.head(n), zd = pt.x.tail(n);
        tr.times.push_back(pt.t);
        tr.states.push_back(z);
        tr.velocity_norms.push_back(zd.norm());
        tr.operator_norms.push_back(m.eval(z).norm());
        tr.state_norms.push_back(z.norm());
        tr.psi.push_back(0.5 * zd.squaredNorm());
        tr.phi.push_back(0.5 * (z - tr.reference_point).squaredNorm());
        tr.defects.push_back(pt.defect);
    }
    tr.accumulated_error_estimate = dr.err_accum;
    tr.steps_accepted = dr.naccept;
    tr.steps_rejected = dr.nreject;
    if (cfg.store_dense) tr.dense = std::make_shared<DenseOutput>(std::move(dr.dense));
    return tr;
}

FlowProblem reduce_to_first_order(const SecondOrderProblem& p) {
    p.validate();
    if (!(p.alpha > 1.0)) throw RangeError("reduce_to_first_order: requires alpha > 1");
    Vec v = p.z0 + (p.s_start / (p.alpha - 1.0)) * (p.zdot0 + p.beta(p.s_start) * p.m.eval(p.z0));
    FlowProblem fp;
    fp.m = p.m;
    fp.beta = p.beta;
    double am1 = p.alpha - 1.0;
    ScalarFn delta;
    delta.value = [am1](double s) { return am1 / s; };
    delta.deriv = [am1](double s) { return -am1 / (s * s); };
    delta.domain_start = p.s_start;
    fp.delta = delta;
    fp.anchor = v;
    fp.t_start = p.s_start;
    fp.t_end = p.s_end;
    fp.x0 = p.z0;
    return fp;
}

Trajectory rescale_trajectory(const Trajectory& traj, const RescaledPair& p, double t0,
                              double s_end, int points_per_decade) {
    if (!traj.dense)
        throw CapabilityError("rescale_trajectory: trajectory has no dense output");
    TimeRescaling tr = equivalent_epsilon(p, t0);
    OutputGrid g = OutputGrid::geometric(points_per_decade);
    auto s_grid = build_output_grid(p.s0, s_end, g);

    Trajectory out;
    out.reference_point = traj.reference_point;
    out.op = traj.op;
    const bool have_op = traj.op.dim() > 0;
    for (double s : s_grid) {
        double t = tr.tau(s);
        Vec z = traj.dense->eval(t);
        Vec zdot = p.beta(s) * traj.dense->eval_derivative(t);
        out.times.push_back(s);
        out.states.push_back(z);
        out.velocity_norms.push_back(zdot.norm());
        out.state_norms.push_back(z.norm());
        out.psi.push_back(0.5 * zdot.squaredNorm());
        out.phi.push_back(0.5 * (z - out.reference_point).squaredNorm());
        if (have_op) {
            Vec mz = traj.op.eval(z);
            out.operator_norms.push_back(mz.norm());
            out.defects.push_back((zdot + p.beta(s) * mz + p.delta(s) * z).norm());
        } else {
            out.operator_norms.push_back(0.0);
            out.defects.push_back(0.0);
        }
    }
    return out;
}

LyapunovSeries lyapunov_track(const Trajectory& traj, const Vec& xi,
                              const ContinuousSchedule& schedule, double tol) {
    LyapunovSeries out;
    if (traj.states.empty()) return out;
    const Vec& x0 = traj.states.front();
    out.d0 = std::max((x0 - xi).norm(), xi.norm());
    for (size_t i = 0; i < traj.states.size(); ++i) {
        const Vec& x = traj.states[i];
        double phi = 0.5 * (x - xi).squaredNorm();
        double psi = traj.psi[i];
        out.phi.push_back(phi);
        out.psi.push_back(psi);
        double lg = 2.0 * schedule.log_gamma(traj.times[i]);
        out.log_gamma2_psi.push_back(psi > 0.0 ? lg + std::log(psi)
                                               : -std::numeric_limits<double>::infinity());
        if ((x - xi).norm() > out.d0 + tol) out.phi_bound_violations.push_back(i);
        if (x.norm() > 2.0 * out.d0 + tol) out.norm_bound_violations.push_back(i);
    }
    return out;
}

}  // namespace monoflow
