#include "isoyamabe/conformal.hpp"

#include "isoyamabe/errors.hpp"
#include "isoyamabe/kernels.hpp"
#include "isoyamabe/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace isoyamabe {

namespace {

void require_positive(const std::vector<double>& u, const char* what) {
    for (double x : u) {
        if (!(x > 0.0) || !std::isfinite(x)) throw NonPositiveFactor(std::string(what) + ": factor must be positive");
    }
}

std::shared_ptr<const expr::SampledCurve> spline_on_nodes(const DiscreteOperator& op, const std::vector<double>& y) {
    if (op.t_nodes.size() != op.size()) throw PreconditionFailed("operator carries no value coordinates");
    if (y.size() != op.size()) throw LengthMismatch("profile length does not match the grid");
    return std::make_shared<expr::SampledCurve>(op.t_nodes, y);
}

std::vector<double> resample(const std::shared_ptr<const expr::SampledCurve>& c, const std::vector<double>& t) {
    std::vector<double> out(t.size());
    for (std::size_t j = 0; j < t.size(); ++j) out[j] = c->eval(t[j]);
    return out;
}

}  // namespace

IsoparametricSystem conformal_system(const IsoparametricSystem& sys, const ProfileFn& u) {
    if (!sys.dims.has_yamabe_exponent()) throw UnsupportedDimension("conformal change needs dimension >= 3");
    for (int i = 0; i <= 64; ++i) {
        const double t = sys.t_min + (sys.t_max - sys.t_min) * i / 64.0;
        const double val = u(t);
        if (!(val > 0.0)) {
            std::ostringstream os;
            os << "conformal factor is not positive at t = " << t;
            throw NonPositiveFactor(os.str());
        }
    }
    const int n = sys.dims.n;
    const double p = sys.dims.p_n;
    const ProfileFn phi = expr::pow(u, p - 2.0);
    const ProfileFn dphi = expr::differentiate(phi);
    const ProfileFn du = expr::differentiate(u);
    const ProfileFn ddu = expr::differentiate(du);

    IsoparametricSystem h = sys;
    h.b = sys.b / phi;
    h.a = sys.a / phi - (0.5 * (n - 2)) * dphi * sys.b / (phi * phi);
    const ProfileFn lap_u = -(ddu * sys.b) + du * sys.a;
    h.s = expr::pow(u, 1.0 - p) * (sys.dims.a_n * lap_u + sys.s * u);
    h.fibervol = expr::pow(phi, 0.5 * (n - 1)) * sys.fibervol;
    h.name = "conformal:" + sys.name;
    return h;
}

IsoparametricSystem conformal_system(const IsoparametricSystem& sys, const DiscreteOperator& op,
                                     const std::vector<double>& u) {
    require_positive(u, "conformal_system");
    return conformal_system(sys, expr::sampled(spline_on_nodes(op, u)));
}

std::vector<double> scalar_curvature_of(const DiscreteOperator& op, const std::vector<double>& u) {
    require_positive(u, "scalar_curvature_of");
    std::vector<double> out = isoyamabe::apply(op, u);
    const double p = op.dims.p_n;
    for (std::size_t j = 0; j < out.size(); ++j) out[j] *= std::pow(u[j], 1.0 - p);
    return out;
}

double covariance_check(const DiscreteOperator& op, const DiscreteOperator& op_h, const std::vector<double>& u,
                        const std::vector<double>& v) {
    require_positive(u, "covariance_check");
    if (v.size() != op.size()) throw LengthMismatch("covariance_check: v does not match the grid");
    const double p = op.dims.p_n;
    std::vector<double> uv(u.size());
    for (std::size_t j = 0; j < u.size(); ++j) uv[j] = u[j] * v[j];
    std::vector<double> rhs = isoyamabe::apply(op, uv);
    for (std::size_t j = 0; j < u.size(); ++j) rhs[j] *= std::pow(u[j], 1.0 - p);

    const std::vector<double> v_h = resample(spline_on_nodes(op, v), op_h.t_nodes);
    const std::vector<double> rhs_h = resample(spline_on_nodes(op, rhs), op_h.t_nodes);
    const std::vector<double> lhs = isoyamabe::apply(op_h, v_h);

    const double R = op_h.grid.R;
    double worst = 0.0;
    for (std::size_t j = 0; j < lhs.size(); ++j) {
        const double r = op_h.grid.nodes[j];
        if (r < 0.1 * R || r > 0.9 * R) continue;
        worst = std::max(worst, std::fabs(lhs[j] - rhs_h[j]));
    }
    return worst;
}

double yamabe_functional(const DiscreteOperator& op, const std::vector<double>& u, double s_exp) {
    if (u.size() != op.size()) throw LengthMismatch("yamabe_functional: profile does not match the grid");
    if (kernels::max_abs(u.size(), u.data()) == 0.0) throw ZeroFunction("yamabe functional of the zero function");
    const std::vector<double> Lu = isoyamabe::apply(op, u);
    const double num = mass_dot(op, Lu, u);
    double den = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) den += std::pow(std::fabs(u[j]), s_exp) * op.mass[j];
    return num / std::pow(den, 2.0 / s_exp);
}

double operator_volume(const DiscreteOperator& op) {
    if (op.system) return total_volume(op.system->source());
    double v = 0.0;
    for (double m : op.mass) v += m;
    return v;
}

double yamabe_k_value(const DiscreteOperator& op, int k) {
    if (k < 1) throw PreconditionFailed("k must be >= 1");
    const SpectralResult sp = eigs(op, k);
    return sp.eigenvalues.back() * std::pow(operator_volume(op), 2.0 / op.dims.n);
}

}  // namespace isoyamabe
