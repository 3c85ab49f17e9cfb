#include "isoyamabe/system.hpp"

#include "isoyamabe/errors.hpp"
#include "isoyamabe/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace isoyamabe {

using expr::Expr;

DimensionConstants DimensionConstants::of(int n) {
    DimensionConstants d;
    d.n = n;
    if (n >= 3) {
        d.a_n = 4.0 * (n - 1) / (n - 2.0);
        d.p_n = 2.0 * n / (n - 2.0);
    } else {
        d.a_n = std::numeric_limits<double>::quiet_NaN();
        d.p_n = std::numeric_limits<double>::quiet_NaN();
    }
    return d;
}

double unit_sphere_volume(int k) {
    const double h = 0.5 * (k + 1);
    return 2.0 * std::pow(std::numbers::pi, h) / std::tgamma(h);
}

// ---------------------------------------------------------------------------
// Catalog

IsoparametricSystem build_sphere_linear(int n) {
    if (n < 2) throw InvalidSystem("sphere_linear needs n >= 2, got " + std::to_string(n));
    const Expr t = expr::variable();
    IsoparametricSystem sys;
    sys.name = "sphere-x1-" + std::to_string(n);
    sys.dims = DimensionConstants::of(n);
    sys.t_min = -1.0;
    sys.t_max = 1.0;
    sys.b = 1.0 - expr::pow(t, 2.0);
    sys.a = static_cast<double>(n) * t;
    sys.s = expr::literal(n * (n - 1.0));
    sys.fibervol = unit_sphere_volume(n - 1) * expr::pow(1.0 - expr::pow(t, 2.0), 0.5 * (n - 1));
    sys.kf = 0;
    sys.focal_codim_minus = n;
    sys.focal_codim_plus = n;
    return sys;
}

IsoparametricSystem build_sphere_quadratic(int m, int n) {
    if (m < 1 || n < 0 || m + n < 2) {
        throw InvalidSystem("sphere_quadratic needs m >= 1, n >= 0, m + n >= 2");
    }
    const Expr t = expr::variable();
    const int dim = m + n;
    IsoparametricSystem sys;
    sys.name = "sphere-quad-" + std::to_string(m) + "-" + std::to_string(n);
    sys.dims = DimensionConstants::of(dim);
    sys.t_min = -1.0;
    sys.t_max = 1.0;
    sys.b = 4.0 * (1.0 - expr::pow(t, 2.0));
    sys.a = (2.0 * (dim + 1)) * t + expr::literal(2.0 * (n + 1 - m));
    sys.s = expr::literal(dim * (dim - 1.0));
    const double omega = unit_sphere_volume(m - 1) * unit_sphere_volume(n);
    sys.fibervol = omega * expr::pow((1.0 + t) / 2.0, 0.5 * (m - 1)) *
                   expr::pow((1.0 - t) / 2.0, 0.5 * n);
    // M_- = {x = 0} is a great S^n (codim m); M_+ = {y = 0} is a great S^(m-1) (codim n+1).
    sys.focal_codim_minus = m;
    sys.focal_codim_plus = n + 1;
    sys.kf = std::min({m - 1, n, dim - 1});
    return sys;
}

IsoparametricSystem build_product(const IsoparametricSystem& base, double s_N, double vol_N, int dim_N) {
    if (!(vol_N > 0.0)) throw InvalidSystem("product factor volume must be positive");
    if (dim_N < 0) throw InvalidSystem("product factor dimension must be >= 0");
    if (dim_N == 0 && s_N == 0.0 && vol_N == 1.0) return base;
    IsoparametricSystem sys = base;
    std::ostringstream nm;
    nm.precision(17);
    nm << "product:" << base.name << "+s" << s_N << ",v" << vol_N << ",d" << dim_N;
    sys.name = nm.str();
    sys.dims = DimensionConstants::of(base.dims.n + dim_N);
    sys.s = base.s + expr::literal(s_N);
    sys.fibervol = base.fibervol * expr::literal(vol_N);
    sys.kf = base.kf + dim_N;
    sys.product_dim = base.product_dim + dim_N;
    return sys;
}

IsoparametricSystem build_round_product(const IsoparametricSystem& base, int m, double tau) {
    if (m < 1 || !(tau > 0.0)) throw InvalidSystem("round product needs m >= 1 and tau > 0");
    IsoparametricSystem sys =
        build_product(base, m * (m - 1.0) / tau, unit_sphere_volume(m) * std::pow(tau, 0.5 * m), m);
    std::ostringstream nm;
    nm.precision(17);
    nm << "round-product:" << base.name << ",m" << m << ",tau" << tau;
    sys.name = nm.str();
    return sys;
}

ProfileFn warped_scalar_profile(const ProfileFn& phi, double length, double s_h, int n) {
    if (n < 2) throw InvalidSystem("warped product fiber needs dimension >= 2");
    if (!(length > 0.0)) throw InvalidSystem("circle length must be positive");
    constexpr int kSamples = 1000;
    double scale = 0.0;
    for (int i = 0; i <= kSamples; ++i) {
        const double v = phi(length * i / kSamples);
        if (!(v > 0.0)) throw NonPositiveFactor("warping function must be positive on the circle");
        scale = std::max(scale, v);
    }
    if (std::fabs(phi(0.0) - phi(length)) > 1e-9 * scale) {
        throw InvalidSystem("warping function is not periodic on [0, length]");
    }
    const double q = (n + 1) / 4.0;
    const Expr lifted = expr::pow(phi, q);
    // positive 1D Laplacian: -d^2/dt^2
    const Expr lap = -expr::differentiate(expr::differentiate(lifted));
    return expr::pow(phi, -q) *
           ((4.0 * n / (n + 1.0)) * lap + s_h * expr::pow(phi, (n - 3) / 4.0));
}

// ---------------------------------------------------------------------------
// Validation

bool ValidationReport::ok() const {
    return std::all_of(checks.begin(), checks.end(), [](const ValidationCheck& c) { return c.passed; });
}

bool ValidationReport::signs_ok() const {
    for (const char* n : {"b_positive", "v_positive", "interval"}) {
        const ValidationCheck* c = find(n);
        if (c && !c->passed) return false;
    }
    return true;
}

const ValidationCheck* ValidationReport::find(const std::string& name) const {
    for (const auto& c : checks) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

double divergence_identity_residual(const IsoparametricSystem& sys, double t) {
    // a = -b' - b (log v - log(b)/2)' = -b'/2 - b v'/v
    const Expr db = expr::differentiate(sys.b);
    const Expr dv = expr::differentiate(sys.fibervol);
    const double bt = sys.b(t), vt = sys.fibervol(t);
    return sys.a(t) + 0.5 * db(t) + bt * dv(t) / vt;
}

ValidationReport validate(const IsoparametricSystem& sys, double identity_tol, int samples) {
    ValidationReport rep;
    auto add = [&rep](std::string name, bool ok, std::string detail = {}) {
        rep.checks.push_back({std::move(name), ok, std::move(detail)});
    };
    rep.proper = sys.focal_codim_minus >= 2 && sys.focal_codim_plus >= 2;

    const bool interval_ok = sys.t_min < sys.t_max && std::isfinite(sys.t_min) && std::isfinite(sys.t_max);
    add("interval", interval_ok, interval_ok ? "" : "t_min must be < t_max");
    add("metadata", sys.dims.n >= 2 && sys.kf >= 0 && sys.focal_codim_minus >= 1 && sys.focal_codim_plus >= 1,
        "dimension >= 2, kf >= 0, focal codimensions >= 1");
    if (!interval_ok) return rep;

    const double span = sys.t_max - sys.t_min;
    std::vector<double> ts(static_cast<std::size_t>(samples));
    for (int i = 0; i < samples; ++i) ts[static_cast<std::size_t>(i)] = sys.t_min + span * (i + 0.5) / samples;

    auto sample_positive = [&](const ProfileFn& f, const char* name) {
        double bmax = 0.0;
        try {
            for (double t : ts) {
                const double v = f(t);
                if (!(v > 0.0)) {
                    add(name, false, "non-positive at t = " + std::to_string(t));
                    return 0.0;
                }
                bmax = std::max(bmax, v);
            }
        } catch (const Error& e) {
            add(name, false, e.what());
            return 0.0;
        }
        add(name, true);
        return bmax;
    };
    const double bmax = sample_positive(sys.b, "b_positive");
    const double vmax = sample_positive(sys.fibervol, "v_positive");

    // Both ends of f(M) are critical values.
    try {
        const double b0 = sys.b(sys.t_min), b1 = sys.b(sys.t_max);
        const double tol = 1e-10 * std::max(bmax, 1.0);
        add("b_endpoints", std::fabs(b0) <= tol && std::fabs(b1) <= tol,
            "b(t_min) = " + std::to_string(b0) + ", b(t_max) = " + std::to_string(b1));
    } catch (const Error& e) {
        add("b_endpoints", false, e.what());
    }

    // v vanishes at an end iff that focal set has codimension >= 2.
    auto focal_check = [&](double t_end, int codim, const char* name) {
        try {
            const double v = sys.fibervol(t_end);
            const bool vanishes = std::fabs(v) <= 1e-10 * std::max(vmax, 1.0);
            const bool ok = vanishes == (codim >= 2);
            add(name, ok, "v = " + std::to_string(v) + ", codim " + std::to_string(codim));
        } catch (const Error& e) {
            add(name, false, e.what());
        }
    };
    focal_check(sys.t_min, sys.focal_codim_minus, "focal_minus");
    focal_check(sys.t_max, sys.focal_codim_plus, "focal_plus");

    try {
        bool finite = std::isfinite(sys.s(sys.t_min)) && std::isfinite(sys.s(sys.t_max));
        for (double t : ts) finite = finite && std::isfinite(sys.s(t));
        add("s_defined", finite);
    } catch (const Error& e) {
        add("s_defined", false, e.what());
    }

    try {
        const Expr db = expr::differentiate(sys.b);
        const Expr dv = expr::differentiate(sys.fibervol);
        double worst = 0.0;
        for (double t : ts) {
            const double r = sys.a(t) + 0.5 * db(t) + sys.b(t) * dv(t) / sys.fibervol(t);
            worst = std::max(worst, std::fabs(r));
            if (!std::isfinite(r)) worst = std::numeric_limits<double>::infinity();
        }
        rep.identity_residual = worst;
        std::ostringstream os;
        os << "max residual " << worst << " (tolerance " << identity_tol << ")";
        add("divergence_identity", worst < identity_tol, os.str());
    } catch (const Error& e) {
        rep.identity_residual = std::numeric_limits<double>::infinity();
        add("divergence_identity", false, e.what());
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Endpoint-aware value map t(theta), theta in [0, 1].
//
// At a simple zero of b the substitution t - t_end ~ theta^2 turns the
// integrand dt/sqrt(b) into a smooth function. With both ends singular we use
// t = t_min + span (1 - cos(pi theta))/2, which is that substitution at both ends.

namespace {

struct ValueMap {
    double lo = 0.0, hi = 1.0;
    bool sing_lo = false, sing_hi = false;

    double span() const { return hi - lo; }

    double t(double th) const {
        double v;
        if (sing_lo && sing_hi) {
            v = lo + span() * 0.5 * (1.0 - std::cos(std::numbers::pi * th));
        } else if (sing_lo) {
            v = lo + span() * th * th;
        } else if (sing_hi) {
            v = hi - span() * (1.0 - th) * (1.0 - th);
        } else {
            v = lo + span() * th;
        }
        return std::clamp(v, lo, hi);
    }

    double dt(double th) const {
        if (sing_lo && sing_hi) return span() * 0.5 * std::numbers::pi * std::sin(std::numbers::pi * th);
        if (sing_lo) return 2.0 * span() * th;
        if (sing_hi) return 2.0 * span() * (1.0 - th);
        return span();
    }

    double theta(double tv) const {
        const double x = std::clamp((tv - lo) / span(), 0.0, 1.0);
        if (sing_lo && sing_hi) return std::acos(1.0 - 2.0 * x) / std::numbers::pi;
        if (sing_lo) return std::sqrt(x);
        if (sing_hi) return 1.0 - std::sqrt(1.0 - x);
        return x;
    }
};

bool endpoint_is_simple_zero(const IsoparametricSystem& sys, double t_end, double scale) {
    const double b_end = sys.b(t_end);
    if (std::fabs(b_end) > 1e-10 * scale) return false;  // regular end
    double slope = std::numeric_limits<double>::infinity();
    try {
        slope = expr::differentiate(sys.b)(t_end);
    } catch (const DomainError&) {
        return true;  // zero weaker than linear; the substitution still applies
    }
    if (std::fabs(slope) <= 1e-8 * scale / (sys.t_max - sys.t_min)) {
        throw DivergentArclength("b vanishes to second order at t = " + std::to_string(t_end) +
                                 "; the level sets are not at finite distance");
    }
    return true;
}

ValueMap make_value_map(const IsoparametricSystem& sys) {
    if (!(sys.t_min < sys.t_max)) throw InvalidSystem("empty value interval");
    double scale = 0.0;
    for (int i = 0; i < 64; ++i) {
        scale = std::max(scale, std::fabs(sys.b(sys.t_min + (sys.t_max - sys.t_min) * (i + 0.5) / 64)));
    }
    ValueMap m;
    m.lo = sys.t_min;
    m.hi = sys.t_max;
    m.sing_lo = endpoint_is_simple_zero(sys, sys.t_min, scale);
    m.sing_hi = endpoint_is_simple_zero(sys, sys.t_max, scale);
    return m;
}

double inv_sqrt_b(const IsoparametricSystem& sys, double t) {
    const double bt = sys.b(t);
    if (!(bt > 0.0)) {
        throw DivergentArclength("b is not positive at t = " + std::to_string(t));
    }
    return 1.0 / std::sqrt(bt);
}

/// Composite Gauss on the value map with panel doubling until converged.
template <class F>
double converged_coarea(const F& integrand, std::size_t panels) {
    double prev = quad::gauss_composite(integrand, 0.0, 1.0, panels);
    double prev_diff = std::numeric_limits<double>::infinity();
    for (int round = 0; round < 6; ++round) {
        panels *= 2;
        const double cur = quad::gauss_composite(integrand, 0.0, 1.0, panels);
        if (!std::isfinite(cur)) break;
        const double diff = std::fabs(cur - prev);
        const double scale = std::max(std::fabs(cur), 1e-300);
        if (diff <= 1e-12 * scale || diff <= 1e-15) return cur;
        // Cancellation in b near a focal end leaves a rounding floor; a stalled
        // difference at that level is converged, a divergent integral is not.
        if (diff <= 1e-9 * scale && diff >= 0.25 * prev_diff) return cur;
        prev_diff = diff;
        prev = cur;
    }
    throw DivergentArclength("coarea quadrature did not converge (non-transnormal data?)");
}

}  // namespace

// ---------------------------------------------------------------------------
// ArclengthSystem

struct ArclengthSystem::State {
    IsoparametricSystem src;
    ValueMap map;
    std::size_t panels = 0;
    std::vector<double> r_at;  // cumulative arclength at panel boundaries
    double R = 0.0;

    double drdtheta(double th) const {
        const double c = std::clamp(th, 1e-12, 1.0 - 1e-12);
        return map.dt(c) * inv_sqrt_b(src, map.t(c));
    }
    double theta_at(std::size_t k) const { return static_cast<double>(k) / static_cast<double>(panels); }

    std::size_t panel_of_theta(double th) const {
        const auto k = static_cast<std::size_t>(std::floor(th * static_cast<double>(panels)));
        return std::min(k, panels - 1);
    }

    double r_of_theta(double th) const {
        const std::size_t k = panel_of_theta(th);
        const double lo = theta_at(k);
        if (th <= lo) return r_at[k];
        return r_at[k] + quad::gauss_panel([this](double x) { return drdtheta(x); }, lo, th);
    }

    double theta_of_r(double r) const {
        if (r <= 0.0) return 0.0;
        if (r >= R) return 1.0;
        const std::size_t k = std::min<std::size_t>(
            static_cast<std::size_t>(std::upper_bound(r_at.begin(), r_at.end(), r) - r_at.begin()) - 1,
            panels - 1);
        double a = theta_at(k), b = theta_at(k + 1);
        double th = a + (b - a) * (r - r_at[k]) / (r_at[k + 1] - r_at[k]);
        for (int it = 0; it < 60; ++it) {
            const double f = r_of_theta(th) - r;
            if (f == 0.0) return th;
            if (f > 0.0) b = th; else a = th;
            const double step = f / drdtheta(th);
            double next = th - step;
            if (!(next > a && next < b)) next = 0.5 * (a + b);
            if (std::fabs(next - th) < 1e-16 || b - a < 1e-16) return next;
            th = next;
        }
        return th;
    }
};

const DimensionConstants& ArclengthSystem::dims() const { return st_->src.dims; }
const IsoparametricSystem& ArclengthSystem::source() const { return st_->src; }
double ArclengthSystem::R() const { return st_->R; }
double ArclengthSystem::t_of_r(double r) const { return st_->map.t(st_->theta_of_r(r)); }
double ArclengthSystem::r_of_t(double t) const { return st_->r_of_theta(st_->map.theta(t)); }
double ArclengthSystem::W(double r) const { return st_->src.fibervol(t_of_r(r)); }
double ArclengthSystem::s(double r) const { return st_->src.s(t_of_r(r)); }

double ArclengthSystem::volume() const {
    return quad::gauss_composite([this](double r) { return W(r); }, 0.0, st_->R, st_->panels);
}

ArclengthSystem to_arclength(const IsoparametricSystem& sys, int resolution) {
    if (resolution < 8) throw InvalidSystem("arclength resolution must be >= 8");
    const ValidationReport rep = validate(sys, std::numeric_limits<double>::infinity(), 200);
    if (!rep.signs_ok()) throw InvalidSystem("to_arclength: sign checks on b and v failed for " + sys.name);

    auto st = std::make_shared<ArclengthSystem::State>();
    st->src = sys;
    st->map = make_value_map(sys);
    st->panels = static_cast<std::size_t>(resolution);
    const ArclengthSystem::State& cst = *st;
    auto dr = [&cst](double th) { return cst.drdtheta(th); };

    // Refuse non-convergent arclength before tabulating it.
    converged_coarea(dr, st->panels);

    st->r_at.assign(st->panels + 1, 0.0);
    for (std::size_t k = 0; k < st->panels; ++k) {
        st->r_at[k + 1] = st->r_at[k] + quad::gauss_panel(dr, st->theta_at(k), st->theta_at(k + 1));
    }
    st->R = st->r_at.back();
    if (!(st->R > 0.0) || !std::isfinite(st->R)) throw DivergentArclength("total arclength is not finite");
    return ArclengthSystem(std::move(st));
}

double integrate(const IsoparametricSystem& sys, const ProfileFn& phi) {
    const ValueMap map = make_value_map(sys);
    auto integrand = [&](double th) {
        const double t = map.t(th);
        return phi(t) * sys.fibervol(t) * map.dt(th) * inv_sqrt_b(sys, t);
    };
    return converged_coarea(integrand, 64);
}

double total_volume(const IsoparametricSystem& sys) { return integrate(sys, expr::literal(1.0)); }

}  // namespace isoyamabe
