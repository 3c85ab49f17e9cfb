#include "isoyamabe/discretize.hpp"

#include "isoyamabe/errors.hpp"
#include "isoyamabe/kernels.hpp"
#include "isoyamabe/quadrature.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace isoyamabe {

namespace {

void check_length(const DiscreteOperator& op, const std::vector<double>& u, const char* what) {
    if (u.size() != op.size()) {
        throw LengthMismatch(std::string(what) + ": expected " + std::to_string(op.size()) + " values, got " +
                             std::to_string(u.size()));
    }
}

double norm2(const std::vector<double>& x) { return std::sqrt(kernels::dot(x.size(), x.data(), x.data())); }

}  // namespace

Grid Grid::uniform(double R, int N) {
    Grid g;
    g.N = N;
    g.R = R;
    g.h = R / N;
    g.nodes.resize(N);
    g.faces.resize(N + 1);
    for (int j = 0; j < N; ++j) g.nodes[j] = (j + 0.5) * g.h;
    for (int j = 0; j <= N; ++j) g.faces[j] = j * g.h;
    g.faces[N] = R;
    return g;
}

DiscreteOperator assemble_density(const std::function<double(double)>& W, const std::function<double(double)>& s,
                                  double R, double coefficient, int N) {
    if (N < kMinGrid) throw InvalidSystem("grid below minimum " + std::to_string(kMinGrid));
    if (!(R > 0.0) || !std::isfinite(R)) throw InvalidSystem("arclength must be positive and finite");

    DiscreteOperator op;
    op.coefficient = coefficient;
    op.grid = Grid::uniform(R, N);
    const double h = op.grid.h;
    op.W_nodes.resize(N);
    op.mass.resize(N);
    op.inv_mass.resize(N);
    op.s_values.resize(N);
    for (int j = 0; j < N; ++j) {
        const double w = W(op.grid.nodes[j]);
        if (!(w > 0.0) || !std::isfinite(w)) {
            throw NonPositiveMass("density W is not positive at r = " + std::to_string(op.grid.nodes[j]));
        }
        op.W_nodes[j] = w;
        // Exact cell volume rather than w * h: the midpoint value is off by
        // O(1) relatively in the cells touching a focal end.
        op.mass[j] = quad::gauss_panel(W, op.grid.faces[j], op.grid.faces[j + 1]);
        if (!(op.mass[j] > 0.0)) {
            throw NonPositiveMass("cell volume is not positive at r = " + std::to_string(op.grid.nodes[j]));
        }
        op.inv_mass[j] = 1.0 / op.mass[j];
        op.s_values[j] = s(op.grid.nodes[j]);
    }
    op.flux.assign(N + 1, 0.0);
    for (int j = 1; j < N; ++j) op.flux[j] = coefficient * W(op.grid.faces[j]) / h;

    op.diag.resize(N);
    op.offdiag.resize(N - 1);
    for (int j = 0; j < N; ++j) op.diag[j] = (op.flux[j] + op.flux[j + 1]) * op.inv_mass[j] + op.s_values[j];
    for (int j = 0; j + 1 < N; ++j) op.offdiag[j] = -op.flux[j + 1] / std::sqrt(op.mass[j] * op.mass[j + 1]);
    return op;
}

DiscreteOperator assemble(const ArclengthSystem& sys, int N) {
    if (!sys.dims().has_yamabe_exponent()) {
        throw UnsupportedDimension("the conformal Laplacian needs dimension >= 3, got " + std::to_string(sys.dims().n));
    }
    DiscreteOperator op = assemble_density([&](double r) { return sys.W(r); }, [&](double r) { return sys.s(r); },
                                           sys.R(), sys.dims().a_n, N);
    op.dims = sys.dims();
    op.t_nodes.resize(N);
    for (int j = 0; j < N; ++j) op.t_nodes[j] = sys.t_of_r(op.grid.nodes[j]);
    op.system = sys;
    return op;
}

std::vector<double> apply(const DiscreteOperator& op, const std::vector<double>& u) {
    check_length(op, u, "apply");
    std::vector<double> out(u.size());
    kernels::flux_apply(u.size(), op.flux.data(), op.inv_mass.data(), op.s_values.data(), u.data(), out.data());
    return out;
}

double mass_dot(const DiscreteOperator& op, const std::vector<double>& u, const std::vector<double>& v) {
    check_length(op, u, "mass_dot");
    check_length(op, v, "mass_dot");
    return kernels::weighted_dot(u.size(), op.mass.data(), u.data(), v.data());
}

std::vector<double> solve_shifted(const DiscreteOperator& op, double sigma, const std::vector<double>& rhs) {
    check_length(op, rhs, "solve_shifted");
    const std::size_t n = rhs.size();
    const tridiag::Symmetric T = op.symmetric();

    // Work in the symmetric frame y = M^{1/2} u, where ||b|| / ||y|| bounds the
    // distance from sigma to the spectrum.
    std::vector<double> b(n), y(n), r(n);
    for (std::size_t j = 0; j < n; ++j) b[j] = std::sqrt(op.mass[j]) * rhs[j];
    if (!tridiag::solve(T, sigma, b.data(), y.data())) {
        throw SingularShift("zero pivot in (L - sigma) at sigma = " + std::to_string(sigma));
    }
    const double shifted_norm = T.norm() + std::fabs(sigma);
    const double bn = norm2(b);

    auto residual = [&] {
        T.multiply(y.data(), r.data());
        for (std::size_t j = 0; j < n; ++j) r[j] = b[j] - (r[j] - sigma * y[j]);
        return norm2(r);
    };
    double res = residual();
    const double tol = 1e-10 * (shifted_norm * norm2(y) + bn);
    if (res > tol) {
        std::vector<double> dy(n);
        if (tridiag::solve(T, sigma, r.data(), dy.data())) kernels::axpy(n, 1.0, dy.data(), y.data());
        res = residual();
    }
    const double yn = norm2(y);
    if (!std::isfinite(yn) || (bn > 0.0 && bn / yn < 1e3 * std::numeric_limits<double>::epsilon() * shifted_norm)) {
        throw SingularShift("sigma = " + std::to_string(sigma) + " is numerically an eigenvalue");
    }
    if (res > 1e-10 * (shifted_norm * yn + bn)) {
        throw SingularShift("ill-conditioned shift: backward error " + std::to_string(res / (shifted_norm * yn + bn)));
    }

    std::vector<double> u(n);
    for (std::size_t j = 0; j < n; ++j) u[j] = y[j] / std::sqrt(op.mass[j]);
    return u;
}

}  // namespace isoyamabe
