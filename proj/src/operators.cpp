#include "monoflow/operators.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <cmath>

namespace monoflow {

namespace {
constexpr double kZeroCertTol = 1e-12;
constexpr double kSlackTol = 1e-10;
constexpr double kSampleRadius = 10.0;
}  // namespace

bool set_is_known(const PointSet& s) { return !std::holds_alternative<UnknownSet>(s); }

Vec project_onto(const PointSet& s, const Vec& x) {
    if (const auto* pt = std::get_if<SingletonSet>(&s)) return pt->point;
    if (const auto* aff = std::get_if<AffineSubspace>(&s)) {
        Vec y = aff->base;
        for (const Vec& d : aff->directions) y += d.dot(x - aff->base) * d;
        return y;
    }
    throw CapabilityError("project_onto: set is unknown");
}

struct OperatorSpec::Impl {
    std::string label;
    Eigen::Index dim = 0;
    EvalFn eval;
    std::optional<JvpFn> jvp;
    OperatorProps props;
    PointSet zeros;
    PointSet fixed_points;
};

OperatorSpec::OperatorSpec(std::string label, Eigen::Index dim, EvalFn eval, OperatorProps props,
                           PointSet zeros, std::optional<JvpFn> jvp, PointSet fixed_points) {
    if (dim <= 0) throw DimensionError("OperatorSpec: dim must be positive");
    // cocoercivity implies monotonicity and 1/rho-Lipschitz continuity
    if (props.cocoercive) {
        if (*props.cocoercive <= 0.0) throw ValidationError("cocoercive modulus must be positive");
        props.monotone = true;
        double l = 1.0 / *props.cocoercive;
        if (!props.lipschitz || *props.lipschitz > l) props.lipschitz = l;
    }
    if (props.averaged) {
        if (*props.averaged <= 0.0 || *props.averaged > 1.0)
            throw ValidationError("averagedness parameter must lie in (0,1]");
        props.nonexpansive = true;
    }
    if (props.nonexpansive && (!props.lipschitz || *props.lipschitz > 1.0)) props.lipschitz = 1.0;

    auto impl = std::make_shared<Impl>();
    impl->label = std::move(label);
    impl->dim = dim;
    impl->eval = std::move(eval);
    impl->jvp = std::move(jvp);
    impl->props = props;
    impl->zeros = std::move(zeros);
    impl->fixed_points = std::move(fixed_points);

    if (const auto* pt = std::get_if<SingletonSet>(&impl->zeros)) {
        Vec r = impl->eval(pt->point);
        if (r.norm() > kZeroCertTol * (1.0 + pt->point.norm()))
            throw ValidationError("declared singleton zero fails residual certificate");
    }
    impl_ = std::move(impl);
}

Vec OperatorSpec::eval(const Vec& x) const {
    if (!impl_) throw CapabilityError("empty OperatorSpec");
    if (x.size() != impl_->dim) throw DimensionError("eval: dimension mismatch");
    return impl_->eval(x);
}

Vec OperatorSpec::jvp(const Vec& point, const Vec& direction) const {
    if (!impl_ || !impl_->jvp) throw CapabilityError("operator has no jvp");
    require_same_dim(point, direction, "jvp");
    if (point.size() != impl_->dim) throw DimensionError("jvp: dimension mismatch");
    return (*impl_->jvp)(point, direction);
}

bool OperatorSpec::has_jvp() const { return impl_ && impl_->jvp.has_value(); }
Eigen::Index OperatorSpec::dim() const { return impl_ ? impl_->dim : 0; }
const std::string& OperatorSpec::label() const {
    static const std::string empty;
    return impl_ ? impl_->label : empty;
}
const OperatorProps& OperatorSpec::props() const {
    static const OperatorProps none;
    return impl_ ? impl_->props : none;
}
const PointSet& OperatorSpec::zeros() const {
    static const PointSet unknown = UnknownSet{};
    return impl_ ? impl_->zeros : unknown;
}
const PointSet& OperatorSpec::fixed_points() const {
    static const PointSet unknown = UnknownSet{};
    return impl_ ? impl_->fixed_points : unknown;
}

OperatorSpec OperatorSpec::with_declared(OperatorProps extra) const {
    if (!impl_) throw CapabilityError("empty OperatorSpec");
    OperatorProps merged = impl_->props;
    merged.monotone |= extra.monotone;
    merged.nonexpansive |= extra.nonexpansive;
    if (extra.cocoercive) merged.cocoercive = extra.cocoercive;
    if (extra.lipschitz) merged.lipschitz = extra.lipschitz;
    if (extra.averaged) merged.averaged = extra.averaged;
    auto self = impl_;
    return OperatorSpec(self->label, self->dim, self->eval, merged, self->zeros, self->jvp,
                        self->fixed_points);
}

double spectral_norm_power_iteration(const Mat& a, int max_iter, double tol) {
    if (a.rows() == 0) return 0.0;
    Mat ata = a.transpose() * a;
    NormalSampler rng(0x5eedULL);
    Vec v = rng.vector_in_ball(a.cols(), kSampleRadius);
    if (v.norm() == 0.0) v.setOnes();
    v.normalize();
    double lambda = 0.0;
    for (int i = 0; i < max_iter; ++i) {
        Vec w = ata * v;
        double nw = w.norm();
        if (nw == 0.0) return 0.0;
        w /= nw;
        double next = w.dot(ata * w);
        if (std::abs(next - lambda) <= tol * std::max(1.0, std::abs(next))) {
            lambda = next;
            break;
        }
        lambda = next;
        v = w;
    }
    return std::sqrt(std::max(0.0, lambda));
}

namespace {

OperatorSpec from_matrix(std::string label, const Mat& a, OperatorProps props, PointSet zeros,
                         PointSet fixed_points = UnknownSet{}) {
    Eigen::Index n = a.rows();
    return OperatorSpec(
        std::move(label), n, [a](const Vec& x) { return Vec(a * x); }, props, std::move(zeros),
        JvpFn([a](const Vec&, const Vec& d) { return Vec(a * d); }), std::move(fixed_points));
}

Mat rotation_generator_matrix(double omega, Eigen::Index dim) {
    Mat a = Mat::Zero(dim, dim);
    for (Eigen::Index i = 0; i + 1 < dim; i += 2) {
        a(i, i + 1) = -omega;
        a(i + 1, i) = omega;
    }
    return a;
}

// Orthonormal kernel basis, or nullopt when A is injective.
std::vector<Vec> kernel_basis(const Mat& a) {
    Eigen::FullPivLU<Mat> lu(a);
    lu.setThreshold(1e-10);
    Mat k = lu.kernel();
    std::vector<Vec> dirs;
    if (lu.dimensionOfKernel() == 0) return dirs;
    // Gram-Schmidt; kernel() columns are independent but not orthonormal.
    for (Eigen::Index j = 0; j < k.cols(); ++j) {
        Vec v = k.col(j);
        for (const Vec& d : dirs) v -= d.dot(v) * d;
        double n = v.norm();
        if (n > 1e-12) dirs.push_back(v / n);
    }
    return dirs;
}

PointSet kernel_point_set(const Mat& a) {
    auto dirs = kernel_basis(a);
    if (dirs.empty()) return SingletonSet{Vec::Zero(a.cols())};
    return AffineSubspace{Vec::Zero(a.cols()), std::move(dirs)};
}

}  // namespace

OperatorSpec make_rotation(double omega, Eigen::Index dim) {
    if (dim <= 0 || dim % 2 != 0) throw DimensionError("make_rotation: dim must be even positive");
    if (!std::isfinite(omega)) throw ValidationError("make_rotation: omega must be finite");
    OperatorProps props;
    props.monotone = true;  // skew-symmetric generator
    props.lipschitz = std::abs(omega);
    return from_matrix("rotation(omega=" + std::to_string(omega) + ")",
                       rotation_generator_matrix(omega, dim), props,
                       SingletonSet{Vec::Zero(dim)});
}

OperatorSpec make_rotation_map(double angle, Eigen::Index dim) {
    if (dim <= 0 || dim % 2 != 0)
        throw DimensionError("make_rotation_map: dim must be even positive");
    Mat a = Mat::Zero(dim, dim);
    double c = std::cos(angle), s = std::sin(angle);
    for (Eigen::Index i = 0; i + 1 < dim; i += 2) {
        a(i, i) = c;
        a(i, i + 1) = -s;
        a(i + 1, i) = s;
        a(i + 1, i + 1) = c;
    }
    OperatorProps props;
    props.nonexpansive = true;  // orthogonal
    props.lipschitz = 1.0;
    PointSet fix = UnknownSet{};
    if (std::abs(std::sin(angle / 2.0)) > 1e-15) fix = SingletonSet{Vec::Zero(dim)};
    return from_matrix("rotationmap(angle=" + std::to_string(angle) + ")", a, props,
                       SingletonSet{Vec::Zero(dim)}, fix);
}

OperatorSpec make_linear(const Mat& a) {
    if (a.rows() != a.cols()) throw DimensionError("make_linear: matrix must be square");
    if (!a.allFinite()) throw ValidationError("make_linear: non-finite entries");
    OperatorProps props;
    Mat sym = 0.5 * (a + a.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(sym);
    props.monotone = es.eigenvalues().minCoeff() >= -1e-12;
    props.lipschitz = spectral_norm_power_iteration(a);
    return from_matrix("linear", a, props, kernel_point_set(a));
}

OperatorSpec make_quadratic_gradient(const Mat& q, const Vec& b) {
    if (q.rows() != q.cols()) throw DimensionError("make_quadratic_gradient: Q must be square");
    if (q.rows() != b.size()) throw DimensionError("make_quadratic_gradient: Q/b dims disagree");
    double scale = std::max(1.0, q.cwiseAbs().maxCoeff());
    if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw ValidationError("make_quadratic_gradient: Q must be symmetric");
    Eigen::SelfAdjointEigenSolver<Mat> es(q);
    if (es.eigenvalues().minCoeff() < -1e-10 * scale)
        throw ValidationError("make_quadratic_gradient: Q must be PSD");

    double l = spectral_norm_power_iteration(q);
    OperatorProps props;
    props.monotone = true;
    if (l > 0.0) props.cocoercive = 1.0 / l;  // Baillon-Haddad

    // Zero set from least squares, when consistent.
    PointSet zeros = UnknownSet{};
    Vec x = q.colPivHouseholderQr().solve(b);
    if ((q * x - b).norm() <= 1e-9 * (1.0 + b.norm())) {
        auto dirs = kernel_basis(q);
        if (dirs.empty())
            zeros = SingletonSet{x};
        else
            zeros = AffineSubspace{x, std::move(dirs)};
    }
    Eigen::Index n = q.rows();
    return OperatorSpec(
        "quadgrad", n, [q, b](const Vec& x_) { return Vec(q * x_ - b); }, props, std::move(zeros),
        JvpFn([q](const Vec&, const Vec& d) { return Vec(q * d); }));
}

OperatorSpec make_identity(Eigen::Index dim) {
    OperatorProps props;
    props.monotone = true;
    props.nonexpansive = true;
    props.lipschitz = 1.0;
    props.cocoercive = 1.0;
    props.averaged = 1.0;
    return OperatorSpec(
        "identity", dim, [](const Vec& x) { return x; }, props, SingletonSet{Vec::Zero(dim)},
        JvpFn([](const Vec&, const Vec& d) { return d; }),
        AffineSubspace{Vec::Zero(dim), [dim] {
                           std::vector<Vec> dirs;
                           for (Eigen::Index i = 0; i < dim; ++i) dirs.push_back(Vec::Unit(dim, i));
                           return dirs;
                       }()});
}

OperatorSpec make_zero(Eigen::Index dim) {
    OperatorProps props;
    props.monotone = true;
    props.lipschitz = 1.0;  // any positive modulus works
    std::vector<Vec> dirs;
    for (Eigen::Index i = 0; i < dim; ++i) dirs.push_back(Vec::Unit(dim, i));
    return OperatorSpec(
        "zero", dim, [dim](const Vec&) { return Vec(Vec::Zero(dim)); }, props,
        AffineSubspace{Vec::Zero(dim), dirs},
        JvpFn([dim](const Vec&, const Vec&) { return Vec(Vec::Zero(dim)); }));
}

OperatorSpec make_scaled_identity(double c, Eigen::Index dim) {
    OperatorProps props;
    props.lipschitz = std::max(std::abs(c), 1e-30);
    props.monotone = c >= 0.0;
    props.nonexpansive = std::abs(c) <= 1.0;
    // c*Id = (1-theta)Id + theta*N with N = ((c-1+theta)/theta)Id; tight theta below
    if (c == 1.0)
        props.averaged = 1.0;
    else if (std::abs(c) <= 1.0)
        props.averaged = (1.0 - c) / 2.0;
    std::vector<Vec> all_dirs;
    for (Eigen::Index i = 0; i < dim; ++i) all_dirs.push_back(Vec::Unit(dim, i));
    PointSet zeros = c == 0.0 ? PointSet(AffineSubspace{Vec::Zero(dim), all_dirs})
                              : PointSet(SingletonSet{Vec::Zero(dim)});
    PointSet fix = (c == 1.0) ? PointSet(AffineSubspace{Vec::Zero(dim), all_dirs})
                              : PointSet(SingletonSet{Vec::Zero(dim)});
    return OperatorSpec(
        "scale(" + std::to_string(c) + ")", dim, [c](const Vec& x) { return Vec(c * x); }, props,
        std::move(zeros), JvpFn([c](const Vec&, const Vec& d) { return Vec(c * d); }),
        std::move(fix));
}

OperatorSpec make_axis_projection(Eigen::Index dim, const std::vector<Eigen::Index>& keep) {
    Mat a = Mat::Zero(dim, dim);
    std::vector<Vec> kept_dirs;
    for (Eigen::Index i : keep) {
        if (i < 0 || i >= dim) throw DimensionError("make_axis_projection: axis out of range");
        a(i, i) = 1.0;
        kept_dirs.push_back(Vec::Unit(dim, i));
    }
    OperatorProps props;
    props.monotone = true;
    props.nonexpansive = true;
    props.averaged = 0.5;  // P = (Id + reflection)/2
    props.cocoercive = 1.0;
    std::vector<Vec> zero_dirs;
    for (Eigen::Index i = 0; i < dim; ++i)
        if (a(i, i) == 0.0) zero_dirs.push_back(Vec::Unit(dim, i));
    PointSet zeros = zero_dirs.empty() ? PointSet(SingletonSet{Vec::Zero(dim)})
                                       : PointSet(AffineSubspace{Vec::Zero(dim), zero_dirs});
    PointSet fix = kept_dirs.empty() ? PointSet(SingletonSet{Vec::Zero(dim)})
                                     : PointSet(AffineSubspace{Vec::Zero(dim), kept_dirs});
    return from_matrix("projaxis", a, props, zeros, fix);
}

OperatorSpec residual(const OperatorSpec& t) {
    if (!t.props().nonexpansive)
        throw PropertyError("residual: operator is not declared nonexpansive");
    OperatorProps props;
    props.cocoercive = 0.5;
    std::optional<JvpFn> jvp;
    if (t.has_jvp())
        jvp = JvpFn([t](const Vec& p, const Vec& d) { return Vec(d - t.jvp(p, d)); });
    return OperatorSpec(
        "residual(" + t.label() + ")", t.dim(), [t](const Vec& x) { return Vec(x - t.eval(x)); },
        props, t.fixed_points(), std::move(jvp));
}

OperatorSpec relax(const OperatorSpec& t, double lambda) {
    if (!t.props().averaged) throw PropertyError("relax: operator has no declared averagedness");
    double theta = *t.props().averaged;
    if (!(lambda > 0.0) || lambda > 1.0 / theta + 1e-15)
        throw RangeError("relax: lambda must lie in (0, 1/theta]");
    OperatorProps props;
    props.nonexpansive = true;
    double lt = lambda * theta;
    if (lt < 1.0) props.averaged = lt;
    std::optional<JvpFn> jvp;
    if (t.has_jvp())
        jvp = JvpFn([t, lambda](const Vec& p, const Vec& d) {
            return Vec((1.0 - lambda) * d + lambda * t.jvp(p, d));
        });
    return OperatorSpec(
        "relax(" + t.label() + ",lambda=" + std::to_string(lambda) + ")", t.dim(),
        [t, lambda](const Vec& x) { return Vec((1.0 - lambda) * x + lambda * t.eval(x)); }, props,
        UnknownSet{}, std::move(jvp), t.fixed_points());
}

namespace {
PointSet translate_set(const PointSet& s, const Vec& v) {
    if (const auto* pt = std::get_if<SingletonSet>(&s)) return SingletonSet{pt->point - v};
    if (const auto* aff = std::get_if<AffineSubspace>(&s))
        return AffineSubspace{aff->base - v, aff->directions};
    return UnknownSet{};
}
}  // namespace

OperatorSpec shift(const OperatorSpec& m, const Vec& v) {
    if (v.size() != m.dim()) throw DimensionError("shift: dim mismatch");
    std::optional<JvpFn> jvp;
    if (m.has_jvp())
        jvp = JvpFn([m, v](const Vec& p, const Vec& d) { return m.jvp(p + v, d); });
    return OperatorSpec(
        "shift(" + m.label() + ")", m.dim(), [m, v](const Vec& z) { return m.eval(z + v); },
        m.props(), translate_set(m.zeros(), v), std::move(jvp),
        translate_set(m.fixed_points(), v));
}

OperatorSpec resolvent_linear(const Mat& a, double eta) {
    if (a.rows() != a.cols()) throw DimensionError("resolvent_linear: matrix must be square");
    if (!(eta > 0.0)) throw ValidationError("resolvent_linear: eta must be positive");
    Eigen::Index n = a.rows();
    Mat ia = Mat::Identity(n, n) + eta * a;
    Eigen::FullPivLU<Mat> lu(ia);
    if (!lu.isInvertible()) throw SolverError("resolvent_linear: I + eta*A is singular");
    Mat inv = lu.inverse();
    OperatorProps props;
    props.nonexpansive = true;
    props.averaged = 0.5;
    PointSet fix = kernel_point_set(a);
    return from_matrix("resolvent(eta=" + std::to_string(eta) + ")", inv, props, UnknownSet{},
                       fix);
}

OperatorSpec yosida(const Mat& a, double rho) {
    if (!(rho > 0.0)) throw ValidationError("yosida: rho must be positive");
    OperatorSpec j = resolvent_linear(a, rho);
    Eigen::Index n = a.rows();
    OperatorProps props;
    props.cocoercive = rho;
    return OperatorSpec(
        "yosida(rho=" + std::to_string(rho) + ")", n,
        [j, rho](const Vec& x) { return Vec((x - j.eval(x)) / rho); }, props, kernel_point_set(a),
        JvpFn([j, rho](const Vec& p, const Vec& d) { return Vec((d - j.jvp(p, d)) / rho); }));
}

PropertyCheck check_property(const OperatorSpec& m, PropertyTag prop, Eigen::Index samples,
                             std::uint64_t seed, std::optional<double> parameter) {
    if (samples < 1) throw ValidationError("check_property: samples must be >= 1");
    double rho = 0.0, l = 0.0, theta = 0.0;
    switch (prop) {
        case PropertyTag::Cocoercive:
            rho = parameter ? *parameter : m.props().cocoercive.value_or(0.0);
            if (rho <= 0.0) throw PropertyError("check_property: no cocoercivity modulus");
            break;
        case PropertyTag::Lipschitz:
            l = parameter ? *parameter : m.props().lipschitz.value_or(0.0);
            if (l <= 0.0) throw PropertyError("check_property: no Lipschitz modulus");
            break;
        case PropertyTag::Averaged:
            theta = parameter ? *parameter : m.props().averaged.value_or(0.0);
            if (theta <= 0.0 || theta > 1.0)
                throw PropertyError("check_property: no averagedness parameter");
            break;
        default:
            break;
    }

    NormalSampler rng(seed);
    double worst = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < samples; ++i) {
        Vec x = rng.vector_in_ball(m.dim(), kSampleRadius);
        Vec y = rng.vector_in_ball(m.dim(), kSampleRadius);
        Vec mx = m.eval(x), my = m.eval(y);
        Vec dx = x - y, dm = mx - my;
        double slack = 0.0;
        switch (prop) {
            case PropertyTag::Monotone:
                slack = dm.dot(dx);
                break;
            case PropertyTag::Cocoercive:
                slack = dm.dot(dx) - rho * dm.squaredNorm();
                break;
            case PropertyTag::Lipschitz:
                slack = l * dx.norm() - dm.norm();
                break;
            case PropertyTag::Nonexpansive:
                slack = dx.norm() - dm.norm();
                break;
            case PropertyTag::Averaged: {
                // T = (1-theta)Id + thetaN with N nonexpansive
                Vec dn = (dm - (1.0 - theta) * dx) / theta;
                slack = dx.norm() - dn.norm();
                break;
            }
        }
        worst = std::min(worst, slack);
    }
    return PropertyCheck{worst >= -kSlackTol, worst, samples};
}

}  // namespace monoflow
