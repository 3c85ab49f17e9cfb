#include "isoyamabe/discretize.hpp"
#include "isoyamabe/errors.hpp"
#include "isoyamabe/spectral.hpp"
#include "isoyamabe/system_file.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace isoyamabe;
using std::numbers::pi;

namespace {

std::vector<double> sample(const DiscreteOperator& op, double (*f)(double)) {
    std::vector<double> u(op.size());
    for (std::size_t j = 0; j < u.size(); ++j) u[j] = f(op.grid.nodes[j]);
    return u;
}

double max_rel_error(const std::vector<double>& got, const std::vector<double>& want) {
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < got.size(); ++j) {
        num = std::max(num, std::fabs(got[j] - want[j]));
        den = std::max(den, std::fabs(want[j]));
    }
    return num / den;
}

}  // namespace

TEST_CASE("uniform grid") {
    const Grid g = Grid::uniform(2.0, 16);
    CHECK(g.h == doctest::Approx(0.125));
    REQUIRE(g.nodes.size() == 16);
    REQUIRE(g.faces.size() == 17);
    CHECK(g.nodes.front() > 0.0);
    CHECK(g.nodes.back() < 2.0);
    CHECK(g.faces.front() == 0.0);
    CHECK(g.faces.back() == doctest::Approx(2.0));
    CHECK(g.nodes[3] == doctest::Approx(3.5 * 0.125));
}

TEST_CASE("assembled operator invariants") {
    const auto arc = to_arclength(build_sphere_linear(3));
    const auto op = assemble(arc, 400);
    CHECK(op.size() == 400);
    CHECK(op.offdiag.size() == 399);
    CHECK(std::all_of(op.mass.begin(), op.mass.end(), [](double m) { return m > 0.0; }));
    CHECK(op.flux.front() == 0.0);
    CHECK(op.flux.back() == 0.0);

    const std::vector<double> one(op.size(), 1.0);
    const auto L1 = isoyamabe::apply(op, one);
    for (std::size_t j = 0; j < L1.size(); ++j) CHECK(std::fabs(L1[j] - op.s_values[j]) < 1e-12 * 6.0);
    for (double v : L1) CHECK(v == doctest::Approx(6.0).epsilon(1e-13));
}

TEST_CASE("assembly matches the closed-form sphere density") {
    // W(r) = 4 pi sin^2 r and a_3 = 8 on S^3, assembled directly.
    const int N = 300;
    const auto op = assemble(to_arclength(build_sphere_linear(3)), N);
    const double h = pi / N;
    auto W = [](double r) { return 4 * pi * std::sin(r) * std::sin(r); };
    auto cell = [h](int j) {  // antiderivative of 4 pi sin^2 over the cell
        auto F = [](double r) { return 2 * pi * (r - 0.5 * std::sin(2 * r)); };
        return F((j + 1) * h) - F(j * h);
    };
    for (int j = 0; j < N; ++j) {
        const double m = cell(j);
        const double Fl = j == 0 ? 0.0 : 8.0 * W(j * h) / h;
        const double Fr = j == N - 1 ? 0.0 : 8.0 * W((j + 1) * h) / h;
        CHECK(op.mass[j] == doctest::Approx(m).epsilon(1e-9));
        CHECK(op.diag[j] == doctest::Approx((Fl + Fr) / m + 6.0).epsilon(1e-9));
        if (j + 1 < N) {
            const double m1 = cell(j + 1);
            CHECK(op.offdiag[j] == doctest::Approx(-Fr / std::sqrt(m * m1)).epsilon(1e-9));
        }
    }
}

TEST_CASE("symmetric form and function-space apply agree") {
    const auto op = assemble(to_arclength(build_sphere_quadratic(2, 2)), 200);
    std::mt19937 rng(3);
    std::normal_distribution<double> g;
    std::vector<double> u(op.size());
    for (double& x : u) x = g(rng);
    const auto Lu = isoyamabe::apply(op, u);
    std::vector<double> y(op.size()), Ty(op.size());
    for (std::size_t j = 0; j < u.size(); ++j) y[j] = std::sqrt(op.mass[j]) * u[j];
    op.symmetric().multiply(y.data(), Ty.data());
    for (std::size_t j = 0; j < u.size(); ++j) {
        CHECK(Ty[j] / std::sqrt(op.mass[j]) == doctest::Approx(Lu[j]).epsilon(1e-10).scale(1.0));
    }
}

TEST_CASE("operator is self-adjoint in the mass inner product") {
    std::mt19937 rng(11);
    std::normal_distribution<double> g;
    for (const char* name : {"sphere-x1-3", "sphere-quad-2-2", "sphere-x1-5"}) {
        CAPTURE(name);
        const auto op = assemble(to_arclength(resolve_system(name)), 256);
        for (int trial = 0; trial < 5; ++trial) {
            std::vector<double> u(op.size()), v(op.size());
            for (double& x : u) x = g(rng);
            for (double& x : v) x = g(rng);
            const double a = mass_dot(op, isoyamabe::apply(op, u), v);
            const double b = mass_dot(op, u, isoyamabe::apply(op, v));
            CHECK(std::fabs(a - b) <= 1e-12 * std::max(std::fabs(a), 1.0));
        }
    }
}

TEST_CASE("first zonal harmonic on S^3 is reproduced to second order") {
    const auto arc = to_arclength(build_sphere_linear(3));
    double prev = 0.0;
    for (int N : {250, 500, 1000, 2000}) {
        const auto op = assemble(arc, N);
        const auto u = sample(op, [](double r) { return std::cos(r); });
        std::vector<double> want(u);
        for (double& x : want) x *= 30.0;
        const double err = max_rel_error(isoyamabe::apply(op, u), want);
        CAPTURE(N);
        CAPTURE(err);
        if (prev > 0.0) CHECK(prev / err > 3.5);
        prev = err;
    }
    CHECK(prev < 1e-5);
}

TEST_CASE("Neumann interval recovers integer squares") {
    auto one = [](double) { return 1.0; };
    auto zero = [](double) { return 0.0; };
    std::vector<double> err_prev;
    for (int N : {200, 400}) {
        const auto op = assemble_density(one, zero, pi, 1.0, N);
        const auto sp = eigs(op, 5);
        std::vector<double> err;
        for (int k = 0; k < 5; ++k) {
            CHECK(sp.eigenvalues[k] == doctest::Approx(double(k * k)).epsilon(1e-3).scale(1.0));
            err.push_back(std::fabs(sp.eigenvalues[k] - k * k));
        }
        if (!err_prev.empty()) {
            for (int k = 1; k < 5; ++k) CHECK(err_prev[k] / err[k] == doctest::Approx(4.0).epsilon(0.05));
        }
        err_prev = err;
    }
}

TEST_CASE("solve_shifted inverts apply") {
    const auto arc = to_arclength(build_sphere_linear(3));
    const auto op = assemble(arc, 2000);
    const auto c = sample(op, [](double r) { return std::cos(r); });
    std::vector<double> rhs(c);
    for (double& x : rhs) x *= 30.0;
    const auto u = solve_shifted(op, 0.0, rhs);
    CHECK(max_rel_error(u, c) < 1e-5);

    std::mt19937 rng(5);
    std::normal_distribution<double> g;
    std::vector<double> w(op.size());
    for (double& x : w) x = g(rng);
    for (double sigma : {-3.0, 10.0, 31.0}) {
        const auto x = solve_shifted(op, sigma, w);
        auto back = isoyamabe::apply(op, x);
        for (std::size_t j = 0; j < back.size(); ++j) back[j] -= sigma * x[j];
        CHECK(max_rel_error(back, w) < 1e-9);
    }
}

TEST_CASE("shift at an eigenvalue is singular") {
    const auto op = assemble(to_arclength(build_sphere_linear(3)), 200);
    const auto sp = eigs(op, 2);
    std::mt19937 rng(2);
    std::normal_distribution<double> g;
    std::vector<double> rhs(op.size());
    for (double& x : rhs) x = g(rng);
    CHECK_THROWS_AS(solve_shifted(op, sp.eigenvalues[1], rhs), SingularShift);
}

TEST_CASE("argument errors") {
    const auto arc = to_arclength(build_sphere_linear(3));
    CHECK_THROWS_AS(assemble(arc, kMinGrid - 1), InvalidSystem);
    const auto op = assemble(arc, kMinGrid);
    CHECK_THROWS_AS(isoyamabe::apply(op, std::vector<double>(3, 1.0)), LengthMismatch);
    CHECK_THROWS_AS(solve_shifted(op, 0.0, std::vector<double>(3, 1.0)), LengthMismatch);
    CHECK_THROWS_AS(mass_dot(op, std::vector<double>(3, 1.0), std::vector<double>(3, 1.0)), LengthMismatch);
    auto neg = [](double r) { return r - 1.0; };
    auto zero = [](double) { return 0.0; };
    CHECK_THROWS_AS(assemble_density(neg, zero, 3.0, 1.0, 32), NonPositiveMass);
}
