#include "monoflow/schedules.hpp"

#include <algorithm>
#include <cmath>

namespace monoflow {

ScalarFn constant_fn(double c) {
    ScalarFn f;
    f.value = [c](double) { return c; };
    f.deriv = [](double) { return 0.0; };
    f.domain_start = -std::numeric_limits<double>::infinity();
    return f;
}

// ---------------------------------------------------------------------------
// ContinuousSchedule

ContinuousSchedule ContinuousSchedule::power_law(double alpha, double q, double t0) {
    if (!(alpha > 0.0)) throw ValidationError("power_law: alpha must be positive");
    if (!(q > 0.0) || q > 1.0) throw ValidationError("power_law: q must lie in (0,1]");
    if (!(t0 > 0.0)) throw ValidationError("power_law: t0 must be positive");
    ContinuousSchedule s;
    s.family_ = Family::PowerLaw;
    s.alpha_ = alpha;
    s.q_ = q;
    s.t0_ = t0;
    return s;
}

ContinuousSchedule ContinuousSchedule::inverse_log(double t0) {
    if (!(t0 > 1.0)) throw ValidationError("inverse_log: t0 must exceed 1");
    ContinuousSchedule s;
    s.family_ = Family::InverseLog;
    s.t0_ = t0;
    return s;
}

ContinuousSchedule ContinuousSchedule::constant(double c, double t0) {
    if (!(c > 0.0)) throw ValidationError("constant: c must be positive");
    ContinuousSchedule s;
    s.family_ = Family::Constant;
    s.alpha_ = c;
    s.t0_ = t0;
    return s;
}

ContinuousSchedule ContinuousSchedule::tabulated(std::vector<double> grid,
                                                 std::vector<double> values) {
    if (grid.size() != values.size() || grid.size() < 2)
        throw ValidationError("tabulated: need matching grid/values with >= 2 nodes");
    for (size_t i = 0; i + 1 < grid.size(); ++i)
        if (!(grid[i] < grid[i + 1])) throw ValidationError("tabulated: grid must increase");
    for (double v : values)
        if (!(v > 0.0)) throw ValidationError("tabulated: values must be positive");
    ContinuousSchedule s;
    s.family_ = Family::Tabulated;
    s.t0_ = grid.front();
    s.grid_ = std::move(grid);
    s.values_ = std::move(values);
    // Integral of the piecewise-linear interpolant; trapezoid is exact here.
    s.cum_integral_.resize(s.grid_.size(), 0.0);
    for (size_t i = 1; i < s.grid_.size(); ++i) {
        double h = s.grid_[i] - s.grid_[i - 1];
        s.cum_integral_[i] =
            s.cum_integral_[i - 1] + 0.5 * h * (s.values_[i] + s.values_[i - 1]);
    }
    return s;
}

void ContinuousSchedule::check_domain(double t) const {
    if (t < t0_ * (1.0 - 1e-12)) throw RangeError("schedule evaluated before t0");
    if (family_ == Family::Tabulated && t > grid_.back() * (1.0 + 1e-12))
        throw RangeError("tabulated schedule evaluated past grid end");
}

double ContinuousSchedule::eps(double t) const {
    check_domain(t);
    switch (family_) {
        case Family::PowerLaw:
            return alpha_ / std::pow(t, q_);
        case Family::InverseLog:
            return 1.0 / (t * std::log(t));
        case Family::Constant:
            return alpha_;
        case Family::Tabulated: {
            auto it = std::upper_bound(grid_.begin(), grid_.end(), t);
            size_t i = std::min(grid_.size() - 1,
                                static_cast<size_t>(std::max<std::ptrdiff_t>(
                                    1, it - grid_.begin())));
            double w = (t - grid_[i - 1]) / (grid_[i] - grid_[i - 1]);
            w = std::clamp(w, 0.0, 1.0);
            return (1.0 - w) * values_[i - 1] + w * values_[i];
        }
    }
    return 0.0;
}

double ContinuousSchedule::deps(double t) const {
    check_domain(t);
    switch (family_) {
        case Family::PowerLaw:
            return -q_ * alpha_ / std::pow(t, q_ + 1.0);
        case Family::InverseLog: {
            double lt = std::log(t);
            double u = t * lt;
            return -(lt + 1.0) / (u * u);
        }
        case Family::Constant:
            return 0.0;
        case Family::Tabulated: {
            double h = 1e-5 * std::max(t, 1.0);
            double lo = std::max(t - h, grid_.front());
            double hi = std::min(t + h, grid_.back());
            return (eps(hi) - eps(lo)) / (hi - lo);
        }
    }
    return 0.0;
}

double ContinuousSchedule::d2eps(double t) const {
    check_domain(t);
    switch (family_) {
        case Family::PowerLaw:
            return q_ * (q_ + 1.0) * alpha_ / std::pow(t, q_ + 2.0);
        case Family::InverseLog: {
            double lt = std::log(t);
            double u = t * lt;
            double up = lt + 1.0;
            return (2.0 * up * up - lt) / (u * u * u);
        }
        case Family::Constant:
            return 0.0;
        case Family::Tabulated: {
            double h = 1e-4 * std::max(t, 1.0);
            double lo = std::max(t - h, grid_.front());
            double hi = std::min(t + h, grid_.back());
            double mid = 0.5 * (lo + hi);
            double hh = 0.5 * (hi - lo);
            return (eps(hi) - 2.0 * eps(mid) + eps(lo)) / (hh * hh);
        }
    }
    return 0.0;
}

double ContinuousSchedule::log_gamma(double t) const {
    check_domain(t);
    switch (family_) {
        case Family::PowerLaw:
            if (q_ == 1.0) return alpha_ * (std::log(t) - std::log(t0_));
            return alpha_ * (std::pow(t, 1.0 - q_) - std::pow(t0_, 1.0 - q_)) / (1.0 - q_);
        case Family::InverseLog:
            return std::log(std::log(t)) - std::log(std::log(t0_));
        case Family::Constant:
            return alpha_ * (t - t0_);
        case Family::Tabulated: {
            auto it = std::upper_bound(grid_.begin(), grid_.end(), t);
            size_t i = std::min(grid_.size() - 1,
                                static_cast<size_t>(std::max<std::ptrdiff_t>(
                                    1, it - grid_.begin())));
            double tl = grid_[i - 1];
            double partial = cum_integral_[i - 1];
            // trapezoid over the partial segment (interpolant is linear there)
            double e0 = values_[i - 1];
            double e1 = eps(t);
            return partial + 0.5 * (t - tl) * (e0 + e1);
        }
    }
    return 0.0;
}

double ContinuousSchedule::gamma(double t) const { return std::exp(log_gamma(t)); }

ScalarFn ContinuousSchedule::as_scalar() const {
    ScalarFn f;
    ContinuousSchedule self = *this;
    f.value = [self](double t) { return self.eps(t); };
    f.deriv = [self](double t) { return self.deps(t); };
    f.domain_start = t0_;
    return f;
}

std::string ContinuousSchedule::describe() const {
    switch (family_) {
        case Family::PowerLaw:
            return "power(alpha=" + std::to_string(alpha_) + ",q=" + std::to_string(q_) +
                   ",t0=" + std::to_string(t0_) + ")";
        case Family::InverseLog:
            return "invlog(t0=" + std::to_string(t0_) + ")";
        case Family::Constant:
            return "const(c=" + std::to_string(alpha_) + ")";
        case Family::Tabulated:
            return "tabulated(" + std::to_string(grid_.size()) + " nodes)";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// RescaledPair

void RescaledPair::validate() const {
    if (!(beta_coef > 0.0) || !(delta_coef > 0.0))
        throw ValidationError("RescaledPair: coefficients must be positive");
    if (!(s0 > 0.0)) throw ValidationError("RescaledPair: s0 must be positive");
}

double RescaledPair::beta(double s) const { return beta_coef * std::pow(s, beta_exp); }
double RescaledPair::dbeta(double s) const {
    return beta_coef * beta_exp * std::pow(s, beta_exp - 1.0);
}
double RescaledPair::d2beta(double s) const {
    return beta_coef * beta_exp * (beta_exp - 1.0) * std::pow(s, beta_exp - 2.0);
}
double RescaledPair::delta(double s) const { return delta_coef * std::pow(s, delta_exp); }
double RescaledPair::ddelta(double s) const {
    return delta_coef * delta_exp * std::pow(s, delta_exp - 1.0);
}
double RescaledPair::eps_eq(double s) const {
    return (delta_coef / beta_coef) * std::pow(s, delta_exp - beta_exp);
}
double RescaledPair::deps_eq(double s) const {
    double r = delta_exp - beta_exp;
    return (delta_coef / beta_coef) * r * std::pow(s, r - 1.0);
}
double RescaledPair::d2eps_eq(double s) const {
    double r = delta_exp - beta_exp;
    return (delta_coef / beta_coef) * r * (r - 1.0) * std::pow(s, r - 2.0);
}
double RescaledPair::int_delta(double s1, double s2) const {
    if (delta_exp == -1.0) return delta_coef * (std::log(s2) - std::log(s1));
    double e = delta_exp + 1.0;
    return delta_coef * (std::pow(s2, e) - std::pow(s1, e)) / e;
}
ScalarFn RescaledPair::beta_fn() const {
    RescaledPair self = *this;
    ScalarFn f;
    f.value = [self](double s) { return self.beta(s); };
    f.deriv = [self](double s) { return self.dbeta(s); };
    f.domain_start = s0;
    return f;
}
ScalarFn RescaledPair::delta_fn() const {
    RescaledPair self = *this;
    ScalarFn f;
    f.value = [self](double s) { return self.delta(s); };
    f.deriv = [self](double s) { return self.ddelta(s); };
    f.domain_start = s0;
    return f;
}

// ---------------------------------------------------------------------------
// DiscreteSchedule

DiscreteSchedule DiscreteSchedule::power_step(double alpha, double b, double q) {
    if (!(alpha > 1.0)) throw ValidationError("power_step: alpha must exceed 1");
    if (!(b > 0.0)) throw ValidationError("power_step: b must be positive");
    if (!(q > 0.0) || q > 1.0) throw ValidationError("power_step: q must lie in (0,1]");
    if (!(alpha - 1.0 < std::pow(b, q)))
        throw ValidationError("power_step: requires alpha - 1 < b^q");
    DiscreteSchedule d;
    d.family_ = Family::PowerStep;
    d.alpha_ = alpha;
    d.b_ = b;
    d.q_ = q;
    return d;
}

DiscreteSchedule DiscreteSchedule::critical(double alpha) {
    if (!(alpha > 1.0)) throw ValidationError("critical: alpha must exceed 1");
    DiscreteSchedule d;
    d.family_ = Family::Critical;
    d.alpha_ = alpha;
    return d;
}

DiscreteSchedule DiscreteSchedule::constant_step(double c) {
    if (c < 0.0 || c >= 1.0) throw ValidationError("constant_step: c must lie in [0,1)");
    DiscreteSchedule d;
    d.family_ = Family::ConstantStep;
    d.c_ = c;
    return d;
}

DiscreteSchedule DiscreteSchedule::tabulated(std::vector<double> values) {
    if (values.empty()) throw ValidationError("tabulated: empty sequence");
    for (double v : values)
        if (v < 0.0 || v > 1.0) throw ValidationError("tabulated: values must lie in [0,1]");
    DiscreteSchedule d;
    d.family_ = Family::Tabulated;
    d.values_ = std::move(values);
    return d;
}

double DiscreteSchedule::alpha_at(std::int64_t k) const {
    if (k < 0) throw RangeError("alpha_at: negative index");
    switch (family_) {
        case Family::PowerStep:
            return (alpha_ - 1.0) / std::pow(static_cast<double>(k) + b_, q_);
        case Family::Critical:
            return (alpha_ - 1.0) / (static_cast<double>(k) + alpha_);
        case Family::ConstantStep:
            return c_;
        case Family::Tabulated:
            if (static_cast<size_t>(k) >= values_.size())
                throw RangeError("alpha_at: beyond tabulated range");
            return values_[static_cast<size_t>(k)];
    }
    return 0.0;
}

bool DiscreteSchedule::monotone_nonincreasing() const {
    if (family_ != Family::Tabulated) return true;
    for (size_t i = 0; i + 1 < values_.size(); ++i)
        if (values_[i + 1] > values_[i]) return false;
    return true;
}

std::string DiscreteSchedule::describe() const {
    switch (family_) {
        case Family::PowerStep:
            return "powerstep(alpha=" + std::to_string(alpha_) + ",b=" + std::to_string(b_) +
                   ",q=" + std::to_string(q_) + ")";
        case Family::Critical:
            return "critical(alpha=" + std::to_string(alpha_) + ")";
        case Family::ConstantStep:
            return "conststep(c=" + std::to_string(c_) + ")";
        case Family::Tabulated:
            return "tabulated(" + std::to_string(values_.size()) + ")";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Condition reports

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Holds:
            return "holds";
        case Verdict::Fails:
            return "fails";
        case Verdict::Inconclusive:
            return "inconclusive";
    }
    return "?";
}

bool ScheduleReport::required_ok() const {
    for (const auto& it : items)
        if (it.detail.find("[required]") != std::string::npos && it.verdict != Verdict::Holds)
            return false;
    return true;
}

const ConditionVerdict* ScheduleReport::find(const std::string& condition) const {
    for (const auto& it : items)
        if (it.condition == condition) return &it;
    return nullptr;
}

namespace {

// Verdict for lim f = 0 from samples: last window small and nonincreasing.
ConditionVerdict numeric_limit_verdict(const std::string& name,
                                       const std::vector<double>& samples, bool required) {
    ConditionVerdict cv;
    cv.condition = name;
    const size_t w = 5;
    if (samples.size() < w) {
        cv.verdict = Verdict::Inconclusive;
        cv.detail = "too few samples";
        return cv;
    }
    double last = samples.back();
    cv.value = last;
    bool small = true, noninc = true, stable = true;
    for (size_t i = samples.size() - w; i < samples.size(); ++i) {
        if (samples[i] > 1e-4) small = false;
        if (i > samples.size() - w && samples[i] > samples[i - 1] + 1e-18) noninc = false;
        if (std::abs(samples[i] - last) > 0.01 * std::max(std::abs(last), 1e-300)) stable = false;
    }
    if (small && noninc)
        cv.verdict = Verdict::Holds;
    else if (stable && last > 1e-4)
        cv.verdict = Verdict::Fails;  // settled visibly away from zero
    else
        cv.verdict = Verdict::Inconclusive;
    cv.detail = (required ? std::string("[required] ") : std::string()) +
                "tail value " + std::to_string(last);
    return cv;
}

std::vector<double> geometric_grid(double lo, double hi, int per_decade) {
    std::vector<double> g;
    double ratio = std::pow(10.0, 1.0 / per_decade);
    for (double t = lo; t < hi; t *= ratio) g.push_back(t);
    g.push_back(hi);
    return g;
}

ConditionVerdict rule(const std::string& name, Verdict v, double value, std::string detail,
                      bool required = false) {
    ConditionVerdict cv;
    cv.condition = name;
    cv.verdict = v;
    cv.value = value;
    cv.detail = (required ? "[required] " : "") + std::move(detail);
    return cv;
}

}  // namespace

ScheduleReport check_continuous_conditions(const ContinuousSchedule& s) {
    using Family = ContinuousSchedule::Family;
    ScheduleReport rep;
    double t0 = s.t0();
    double t_hi = 1e6;
    if (s.family() == Family::Tabulated) {
        // clamp probes to the tabulated domain
        t_hi = t0;
        ContinuousSchedule probe = s;
        // last grid node is not exposed; walk up until the domain errors
        double t = t0;
        while (true) {
            double next = t * 1.05 + 1e-9;
            try {
                probe.eps(next);
            } catch (const RangeError&) {
                break;
            }
            t = next;
        }
        t_hi = t;
    }

    // eps -> 0
    switch (s.family()) {
        case Family::PowerLaw:
            rep.items.push_back(rule("eps-vanishes", Verdict::Holds, 0.0,
                                     "alpha/t^q -> 0 for q > 0", true));
            break;
        case Family::InverseLog:
            rep.items.push_back(
                rule("eps-vanishes", Verdict::Holds, 0.0, "1/(t log t) -> 0", true));
            break;
        case Family::Constant:
            rep.items.push_back(rule("eps-vanishes", Verdict::Fails, s.eps(t0),
                                     "constant regularization never vanishes", true));
            break;
        case Family::Tabulated:
            rep.items.push_back(rule("eps-vanishes", Verdict::Inconclusive, s.eps(t_hi),
                                     "tabulated data cannot certify a limit", true));
            break;
    }

    // integral of eps diverges; decided per family, quadrature is advisory only
    {
        double numeric = s.log_gamma(t_hi);  // = int_{t0}^{t_hi} eps
        switch (s.family()) {
            case Family::PowerLaw:
                rep.items.push_back(rule("integral-diverges", Verdict::Holds, numeric,
                                         "q <= 1 => divergent; partial integral to 1e6 = " +
                                             std::to_string(numeric),
                                         true));
                break;
            case Family::InverseLog:
                rep.items.push_back(rule("integral-diverges", Verdict::Holds, numeric,
                                         "log log t -> infinity", true));
                break;
            case Family::Constant:
                rep.items.push_back(
                    rule("integral-diverges", Verdict::Holds, numeric, "linear growth", true));
                break;
            case Family::Tabulated:
                rep.items.push_back(rule("integral-diverges", Verdict::Inconclusive, numeric,
                                         "truncated quadrature cannot certify divergence", true));
                break;
        }
    }

    // lim |deps|/eps = 0
    {
        std::vector<double> samples;
        for (double t : geometric_grid(t0, t_hi, 8))
            samples.push_back(std::abs(s.deps(t)) / s.eps(t));
        rep.items.push_back(numeric_limit_verdict("deriv-ratio-limit", samples, false));
    }

    // integral of |deps| finite
    {
        bool monotone = true;  // all named families are monotone; probe tabulated
        if (s.family() == Family::Tabulated) {
            for (double t : geometric_grid(t0, t_hi, 16))
                if (s.deps(t) > 1e-15) monotone = false;
        }
        if (monotone && s.family() != Family::Tabulated) {
            double total = s.eps(t0);  // telescopes to eps(t0) - lim eps
            if (s.family() == Family::Constant) total = 0.0;
            rep.items.push_back(rule("deriv-integrable", Verdict::Holds, total,
                                     "monotone family: integral telescopes"));
        } else if (monotone) {
            rep.items.push_back(rule("deriv-integrable", Verdict::Inconclusive,
                                     s.eps(t0) - s.eps(t_hi),
                                     "monotone on tabulated domain; tail unknown"));
        } else {
            rep.items.push_back(rule("deriv-integrable", Verdict::Inconclusive, 0.0,
                                     "non-monotone tabulated data"));
        }
    }

    // d/dt(deps + eps^2) keeps constant sign past t1
    {
        ConditionVerdict cv;
        cv.condition = "sign-pattern";
        switch (s.family()) {
            case Family::PowerLaw: {
                double alpha = s.alpha(), q = s.q();
                if (q < 1.0) {
                    double t1 = std::max(t0, std::pow((q + 1.0) / (2.0 * alpha), 1.0 / (1.0 - q)));
                    rep.threshold = t1;
                    cv.verdict = Verdict::Holds;
                    cv.value = -1.0;
                    cv.detail = "nonpositive for t >= t1 = " + std::to_string(t1);
                } else {
                    rep.threshold = t0;
                    if (alpha >= 1.0) {
                        cv.verdict = Verdict::Holds;
                        cv.value = -1.0;
                        cv.detail = "nonpositive from t0 (alpha >= 1)";
                    } else {
                        cv.verdict = Verdict::Holds;
                        cv.value = +1.0;
                        cv.detail = "positive from t0 (alpha < 1)";
                    }
                }
                break;
            }
            case Family::InverseLog:
                rep.threshold = t0;
                cv.verdict = Verdict::Holds;
                cv.value = +1.0;
                cv.detail = "d/dt(deps+eps^2) = 2/t^3 > 0";
                break;
            case Family::Constant:
                rep.threshold = t0;
                cv.verdict = Verdict::Holds;
                cv.value = 0.0;
                cv.detail = "identically zero";
                break;
            case Family::Tabulated: {
                // grid sign scan of d/dt(deps + eps^2) via finite differences
                auto g = [&](double t) { return s.deps(t) + s.eps(t) * s.eps(t); };
                auto grid = geometric_grid(t0, t_hi, 16);
                int sign = 0;
                double t1 = t0;
                bool constant_tail = true;
                for (size_t i = 1; i < grid.size(); ++i) {
                    double d = g(grid[i]) - g(grid[i - 1]);
                    int sg = d > 0 ? 1 : (d < 0 ? -1 : 0);
                    if (sg == 0) continue;
                    if (sign == 0)
                        sign = sg;
                    else if (sg != sign) {
                        sign = sg;
                        t1 = grid[i - 1];
                        constant_tail = true;
                    }
                    (void)constant_tail;
                }
                rep.threshold = t1;
                cv.verdict = sign != 0 ? Verdict::Holds : Verdict::Inconclusive;
                cv.value = sign;
                cv.detail = "grid scan, sign past t1 = " + std::to_string(t1);
                break;
            }
        }
        rep.items.push_back(cv);
    }

    // eps nonincreasing
    {
        bool ok = true;
        for (double t : geometric_grid(t0, t_hi, 16))
            if (s.deps(t) > 1e-15) ok = false;
        rep.items.push_back(rule("eps-nonincreasing", ok ? Verdict::Holds : Verdict::Fails, 0.0,
                                 "grid check of deps <= 0"));
    }

    // contextual: lim |deps|/eps^2 (drives nothing here, reported for reference)
    {
        std::vector<double> samples;
        for (double t : geometric_grid(t0, t_hi, 8))
            samples.push_back(std::abs(s.deps(t)) / (s.eps(t) * s.eps(t)));
        rep.items.push_back(numeric_limit_verdict("deriv-over-eps-sq-limit", samples, false));
    }

    return rep;
}

ScheduleReport check_pair_conditions(const RescaledPair& p, double alpha_for_growth) {
    p.validate();
    ScheduleReport rep;
    double r = p.delta_exp - p.beta_exp;  // exponent of delta/beta
    double s0 = p.s0;

    rep.items.push_back(rule("ratio-vanishes", r < 0.0 ? Verdict::Holds : Verdict::Fails,
                             p.eps_eq(1e6), "delta/beta ~ s^" + std::to_string(r), true));
    rep.items.push_back(rule("delta-integral-diverges",
                             p.delta_exp >= -1.0 ? Verdict::Holds : Verdict::Fails,
                             p.int_delta(s0, 1e6), "exponent " + std::to_string(p.delta_exp),
                             true));
    rep.items.push_back(rule("beta-integral-diverges",
                             p.beta_exp >= -1.0 ? Verdict::Holds : Verdict::Fails, 0.0,
                             "exponent " + std::to_string(p.beta_exp), true));

    // (1/beta)|d/ds log(delta/beta)| -> 0
    {
        std::vector<double> samples;
        for (double s : geometric_grid(s0, 1e6, 8))
            samples.push_back(std::abs(p.deps_eq(s)) / (p.beta(s) * p.eps_eq(s)));
        auto cv = numeric_limit_verdict("deriv-ratio-limit", samples, false);
        if (r == 0.0) {
            cv.verdict = Verdict::Holds;
            cv.detail = "ratio is constant; derivative vanishes";
        }
        rep.items.push_back(cv);
    }

    // integral of |d/ds(delta/beta)| finite
    rep.items.push_back(rule("ratio-deriv-integrable",
                             r <= 0.0 ? Verdict::Holds : Verdict::Fails,
                             r < 0.0 ? p.eps_eq(s0) : 0.0,
                             r <= 0.0 ? "monotone ratio: telescopes to eps_eq(s0)"
                                      : "ratio increases without bound"));

    // sign pattern of d/ds[(1/beta) d/ds(delta/beta) + (delta/beta)^2]
    {
        double c0 = p.delta_coef / p.beta_coef;
        double a_coef = r * (r - 1.0 - p.beta_exp) * c0 / p.beta_coef;
        double a_exp = r - p.beta_exp - 2.0;
        double b_coef = 2.0 * r * c0 * c0;
        double b_exp = 2.0 * r - 1.0;
        ConditionVerdict cv;
        cv.condition = "sign-pattern";
        double s1 = s0;
        if (r == 0.0) {
            cv.verdict = Verdict::Holds;
            cv.value = 0.0;
            cv.detail = "identically zero";
        } else if (a_exp == b_exp || a_coef == 0.0 || b_coef == 0.0 ||
                   (a_coef > 0.0) == (b_coef > 0.0)) {
            cv.verdict = Verdict::Holds;
            double sgn = a_coef + b_coef;
            cv.value = sgn > 0 ? 1.0 : (sgn < 0 ? -1.0 : 0.0);
            cv.detail = "single sign for all s >= s0";
        } else {
            double cross =
                std::pow(std::abs(a_coef) / std::abs(b_coef), 1.0 / (b_exp - a_exp));
            s1 = std::max(s0, cross);
            cv.verdict = Verdict::Holds;
            double hi_coef = a_exp > b_exp ? a_coef : b_coef;
            cv.value = hi_coef > 0 ? 1.0 : -1.0;
            cv.detail = "dominant term fixes sign past s1 = " + std::to_string(s1);
        }
        rep.threshold = s1;
        rep.items.push_back(cv);
    }

    // ratio nonincreasing
    rep.items.push_back(rule("ratio-nonincreasing", r <= 0.0 ? Verdict::Holds : Verdict::Fails,
                             0.0, "exponent of delta/beta is " + std::to_string(r)));

    // growth conditions used with delta = alpha/s
    if (p.delta_exp == -1.0) {
        double alpha = alpha_for_growth > 0.0 ? alpha_for_growth : p.delta_coef;
        double pe = p.beta_exp;
        rep.items.push_back(rule("s-beta-nondecreasing",
                                 pe >= -1.0 ? Verdict::Holds : Verdict::Fails, pe + 1.0,
                                 "s*beta ~ s^" + std::to_string(pe + 1.0)));
        rep.items.push_back(rule("s-beta-to-infinity",
                                 pe > -1.0 ? Verdict::Holds : Verdict::Fails, pe + 1.0,
                                 "requires exponent > 0"));
        rep.items.push_back(rule("beta-growth-bounded",
                                 pe <= alpha - 1.0 ? Verdict::Holds : Verdict::Fails, pe,
                                 "s*dbeta/beta = " + std::to_string(pe) + " vs alpha-1 = " +
                                     std::to_string(alpha - 1.0)));
        rep.items.push_back(rule("beta-convexity", Verdict::Holds, 0.0,
                                 "power beta: beta(dbeta+s*d2beta) = s*dbeta^2"));
    }

    return rep;
}

ScheduleReport check_discrete_conditions(const DiscreteSchedule& d) {
    using Family = DiscreteSchedule::Family;
    ScheduleReport rep;

    // alpha_k -> 0
    switch (d.family()) {
        case Family::PowerStep:
        case Family::Critical:
            rep.items.push_back(
                rule("alpha-vanishes", Verdict::Holds, d.alpha_at(1000000), "power decay", true));
            break;
        case Family::ConstantStep: {
            double c = d.alpha_at(0);
            rep.items.push_back(rule("alpha-vanishes", c == 0.0 ? Verdict::Holds : Verdict::Fails,
                                     c, "constant sequence", true));
            break;
        }
        case Family::Tabulated:
            rep.items.push_back(rule("alpha-vanishes", Verdict::Inconclusive, 0.0,
                                     "finite data cannot certify a limit", true));
            break;
    }

    // sum diverges; family rule plus partial-sum corroboration
    {
        KahanSum partial;
        const std::int64_t probe = 1000000;
        bool have_probe = true;
        try {
            for (std::int64_t k = 0; k < probe; ++k) partial.add(d.alpha_at(k));
        } catch (const RangeError&) {
            have_probe = false;
        }
        Verdict v = Verdict::Inconclusive;
        std::string why;
        switch (d.family()) {
            case Family::PowerStep:
                v = d.q() <= 1.0 ? Verdict::Holds : Verdict::Fails;
                why = "q <= 1 implies divergence";
                break;
            case Family::Critical:
                v = Verdict::Holds;
                why = "harmonic tail";
                break;
            case Family::ConstantStep:
                v = d.alpha_at(0) > 0.0 ? Verdict::Holds : Verdict::Fails;
                why = "constant terms";
                break;
            case Family::Tabulated:
                v = Verdict::Inconclusive;
                why = "finite data";
                break;
        }
        rep.items.push_back(rule("sum-diverges", v, have_probe ? partial.value() : 0.0,
                                 why + "; partial sum " + std::to_string(partial.value()), true));
    }

    // lim |a_{k+1}-a_k| / a_{k+1} = 0
    {
        std::vector<double> samples;
        std::int64_t k = 1;
        try {
            while (k <= 10000000) {
                double a0 = d.alpha_at(k), a1 = d.alpha_at(k + 1);
                if (a1 > 0) samples.push_back(std::abs(a1 - a0) / a1);
                k = std::max<std::int64_t>(k + 1, static_cast<std::int64_t>(k * 1.5));
            }
        } catch (const RangeError&) {
        }
        auto cv = numeric_limit_verdict("step-ratio-limit", samples, false);
        if (d.family() == Family::ConstantStep) {
            cv.verdict = Verdict::Holds;
            cv.detail = "differences identically zero";
        }
        rep.items.push_back(cv);
    }

    // sum |a_{k+1}-a_k| finite
    {
        if (d.monotone_nonincreasing() && d.family() != Family::Tabulated) {
            double limit = d.family() == Family::ConstantStep ? d.alpha_at(0) : 0.0;
            double total = d.alpha_at(0) - limit;
            rep.items.push_back(rule("step-diff-summable", Verdict::Holds, total,
                                     "monotone: telescopes to alpha_0 - lim"));
        } else {
            KahanSum sum;
            bool mono = d.monotone_nonincreasing();
            try {
                for (std::int64_t k = 0; k < 100000; ++k)
                    sum.add(std::abs(d.alpha_at(k + 1) - d.alpha_at(k)));
            } catch (const RangeError&) {
            }
            rep.items.push_back(rule("step-diff-summable",
                                     mono ? Verdict::Holds : Verdict::Inconclusive, sum.value(),
                                     "partial sum of |diff|"));
        }
    }

    // k1 threshold of the power-step rate lemma
    if (d.family() == Family::PowerStep && d.q() < 1.0) {
        double k1 = std::max(
            1.0, std::ceil(std::pow(2.0 / (d.alpha() - 1.0), 1.0 / (1.0 - d.q())) - d.b()));
        rep.threshold = k1;
    } else if (d.family() == Family::Critical) {
        rep.threshold = 1.0;
    }

    return rep;
}

TimeRescaling equivalent_epsilon(const RescaledPair& p, double t0) {
    p.validate();
    if (!(t0 > 0.0)) throw ValidationError("equivalent_epsilon: t0 must be positive");
    TimeRescaling tr;
    tr.t0 = t0;
    tr.s0 = p.s0;
    double b0 = p.beta_coef, pe = p.beta_exp, s0 = p.s0;
    if (pe == -1.0) {
        tr.tau = [=](double s) { return t0 + b0 * (std::log(s) - std::log(s0)); };
        tr.sigma = [=](double t) { return s0 * std::exp((t - t0) / b0); };
    } else {
        double e = pe + 1.0;
        tr.tau = [=](double s) { return t0 + b0 * (std::pow(s, e) - std::pow(s0, e)) / e; };
        tr.sigma = [=](double t) {
            double v = std::pow(s0, e) + e * (t - t0) / b0;
            if (v <= 0.0) throw RangeError("sigma: time before rescaled origin");
            return std::pow(v, 1.0 / e);
        };
    }
    RescaledPair pc = p;
    auto sigma = tr.sigma;
    tr.eps.value = [pc, sigma](double t) { return pc.eps_eq(sigma(t)); };
    tr.eps.deriv = [pc, sigma](double t) {
        double s = sigma(t);
        return pc.deps_eq(s) / pc.beta(s);
    };
    tr.eps.domain_start = t0;
    return tr;
}

}  // namespace monoflow
