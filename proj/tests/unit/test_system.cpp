#include "isoyamabe/errors.hpp"
#include "isoyamabe/system.hpp"
#include "isoyamabe/system_file.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace isoyamabe;
using std::numbers::pi;

namespace {

// Trapezoid rule with many points, as an independent quadrature.
template <class F>
double fine_quadrature(F&& f, double lo, double hi, int n = 200000) {
    const double h = (hi - lo) / n;
    double acc = 0.5 * (f(lo) + f(hi));
    for (int i = 1; i < n; ++i) acc += f(lo + i * h);
    return acc * h;
}

}  // namespace

TEST_CASE("dimension constants") {
    for (int n = 3; n <= 12; ++n) {
        const auto d = DimensionConstants::of(n);
        CHECK(d.a_n > 4.0);
        CHECK(d.p_n > 2.0);
        CHECK(d.a_n == doctest::Approx(4.0 * (n - 1) / (n - 2)));
        CHECK(d.a_n * (d.p_n - 2.0) == doctest::Approx(16.0 * (n - 1) / ((n - 2.0) * (n - 2.0))));
    }
    CHECK_FALSE(DimensionConstants::of(2).has_yamabe_exponent());
}

TEST_CASE("unit sphere volumes") {
    CHECK(unit_sphere_volume(1) == doctest::Approx(2 * pi));
    CHECK(unit_sphere_volume(2) == doctest::Approx(4 * pi));
    CHECK(unit_sphere_volume(3) == doctest::Approx(2 * pi * pi));
    CHECK(unit_sphere_volume(4) == doctest::Approx(8 * pi * pi / 3));
}

TEST_CASE("linear sphere profiles") {
    const auto s3 = build_sphere_linear(3);
    CHECK(std::fabs(divergence_identity_residual(s3, 0.3)) < 1e-10);
    CHECK(total_volume(build_sphere_linear(2)) == doctest::Approx(4 * pi).epsilon(1e-10));
    for (int n = 2; n <= 6; ++n) {
        CAPTURE(n);
        const auto sys = build_sphere_linear(n);
        CHECK(total_volume(sys) == doctest::Approx(unit_sphere_volume(n)).epsilon(1e-10));
        CHECK(sys.s(0.2) == doctest::Approx(n * (n - 1.0)));
    }
    const auto rep = validate(build_sphere_linear(4));
    CHECK(rep.ok());
    CHECK(rep.proper);
    CHECK(rep.identity_residual < 1e-9);
}

TEST_CASE("quadratic sphere profiles") {
    const auto q = build_sphere_quadratic(2, 2);
    for (double t : {-0.7, 0.0, 0.4}) CHECK(q.a(t) == doctest::Approx(10 * t + 2));
    CHECK(std::fabs(divergence_identity_residual(q, 0.5)) < 1e-10);
    CHECK(std::fabs(divergence_identity_residual(q, -0.5)) < 1e-10);
    CHECK(q.dims.n == 4);
    CHECK(q.kf == 1);
    CHECK(total_volume(q) == doctest::Approx(unit_sphere_volume(4)).epsilon(1e-9));

    const auto s2 = build_sphere_quadratic(1, 1);
    CHECK(s2.dims.n == 2);
    CHECK(std::min(s2.focal_codim_minus, s2.focal_codim_plus) == 1);
    const auto rep = validate(s2);
    CHECK_FALSE(rep.proper);
    CHECK(rep.find("divergence_identity")->passed);
    CHECK(total_volume(s2) == doctest::Approx(4 * pi).epsilon(1e-9));
}

TEST_CASE("product with a round sphere") {
    const auto p = build_product(build_sphere_linear(2), 2.0, 4 * pi, 2);
    CHECK(p.dims.n == 4);
    CHECK(p.s(0.1) == doctest::Approx(4.0));
    CHECK(p.kf == 2);
    CHECK(total_volume(p) == doctest::Approx(16 * pi * pi).epsilon(1e-10));
    CHECK(validate(p).ok());

    const auto rp = build_round_product(build_sphere_linear(2), 2, 0.25);
    CHECK(rp.s(0.0) == doctest::Approx(2.0 + 2.0 / 0.25));
    CHECK(total_volume(rp) == doctest::Approx(16 * pi * pi * 0.25).epsilon(1e-10));
}

TEST_CASE("sign-corrupted sphere fails validation") {
    auto bad = build_sphere_linear(3);
    bad.a = -1.0 * bad.a;
    const auto rep = validate(bad);
    CHECK_FALSE(rep.ok());
    CHECK(rep.identity_residual > 0.1);
}

TEST_CASE("validation catches sign problems") {
    auto bad = build_sphere_linear(3);
    bad.b = expr::parse("t^2 - 1");
    const auto rep = validate(bad);
    CHECK_FALSE(rep.signs_ok());
    CHECK_THROWS_AS(to_arclength(bad), InvalidSystem);
}

TEST_CASE("arclength of the spheres") {
    for (int n = 3; n <= 5; ++n) {
        CAPTURE(n);
        const auto arc = to_arclength(build_sphere_linear(n));
        CHECK(arc.R() == doctest::Approx(pi).epsilon(1e-10));
        for (double r : {0.2, 1.0, 2.5}) {
            CHECK(arc.W(r) == doctest::Approx(unit_sphere_volume(n - 1) * std::pow(std::sin(r), n - 1)).epsilon(1e-9));
            CHECK(arc.t_of_r(r) == doctest::Approx(-std::cos(r)).epsilon(1e-10));
            CHECK(arc.r_of_t(arc.t_of_r(r)) == doctest::Approx(r).epsilon(1e-10));
        }
        CHECK(arc.t_of_r(0.0) == doctest::Approx(-1.0));
        CHECK(arc.t_of_r(arc.R()) == doctest::Approx(1.0));
    }
    const auto q = to_arclength(build_sphere_quadratic(2, 2));
    CHECK(q.R() == doctest::Approx(pi / 2).epsilon(1e-10));
}

TEST_CASE("arclength volume equals coarea volume") {
    for (const auto& name : catalog_names()) {
        CAPTURE(name);
        const auto sys = resolve_system(name);
        const auto arc = to_arclength(sys);
        CHECK(arc.volume() == doctest::Approx(total_volume(sys)).epsilon(1e-8));
    }
}

TEST_CASE("t_of_r is strictly increasing") {
    for (const auto& name : catalog_names()) {
        const auto arc = to_arclength(resolve_system(name));
        double prev = -INFINITY;
        for (int i = 0; i <= 500; ++i) {
            const double t = arc.t_of_r(arc.R() * i / 500);
            CHECK(t > prev);
            prev = t;
        }
    }
}

TEST_CASE("integrate matches arclength-side quadrature") {
    const auto s2 = build_sphere_linear(2);
    CHECK(integrate(s2, expr::literal(1.0)) == doctest::Approx(4 * pi).epsilon(1e-8));

    const auto s3 = build_sphere_linear(3);
    const auto arc = to_arclength(s3);
    const double lhs = integrate(s3, expr::parse("t^2"));
    const double rhs = fine_quadrature([&](double r) { return std::cos(r) * std::cos(r) * arc.W(r); }, 0, pi);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-8));
    CHECK(lhs == doctest::Approx(pi * pi / 2).epsilon(1e-10));
}

TEST_CASE("warped scalar profile") {
    const auto unwarped = warped_scalar_profile(expr::literal(1.0), 1.0, 2.0, 2);
    CHECK(unwarped(0.3) == doctest::Approx(2.0));
    const auto flat = warped_scalar_profile(expr::literal(3.0), 2.0, 2.0, 3);
    for (double t : {0.0, 0.5, 1.7}) CHECK(flat(t) == doctest::Approx(2.0 / 3.0));

    const double len = 2.0;
    const auto phi = expr::parse("2 + sin(2*pi*t/2)");
    const auto prof = warped_scalar_profile(phi, len, 2.0, 3);
    for (double t : {0.1, 0.45, 1.3}) {
        const double q = 1.0;  // (n + 1)/4
        auto lifted = [&](double x) { return std::pow(phi(x), q); };
        const double h = 1e-3;
        const double d2 = (-lifted(t + 2 * h) + 16 * lifted(t + h) - 30 * lifted(t) + 16 * lifted(t - h) -
                           lifted(t - 2 * h)) /
                          (12 * h * h);
        const double oracle = std::pow(phi(t), -q) * (3.0 * -d2 + 2.0 * std::pow(phi(t), 0.0));
        CHECK(std::fabs(prof(t) - oracle) < 1e-8);
    }
    CHECK_THROWS_AS(warped_scalar_profile(expr::parse("1 + t"), 1.0, 1.0, 3), InvalidSystem);
}

TEST_CASE("system files round-trip") {
    for (const auto& name : catalog_names()) {
        CAPTURE(name);
        const auto sys = resolve_system(name);
        const auto back = parse_system_file(write_system_file(sys));
        CHECK(back.dims.n == sys.dims.n);
        CHECK(back.kf == sys.kf);
        CHECK(back.focal_codim_minus == sys.focal_codim_minus);
        CHECK(back.focal_codim_plus == sys.focal_codim_plus);
        for (double t : {-0.6, 0.1, 0.8}) {
            CHECK(back.b(t) == doctest::Approx(sys.b(t)).epsilon(1e-15));
            CHECK(back.a(t) == doctest::Approx(sys.a(t)).epsilon(1e-15));
            CHECK(back.s(t) == doctest::Approx(sys.s(t)).epsilon(1e-15));
            CHECK(back.fibervol(t) == doctest::Approx(sys.fibervol(t)).epsilon(1e-15));
        }
    }
}

TEST_CASE("system file errors name the line") {
    const char* missing = "name = x\ndim = 3\ninterval = -1 1\nb = 1 - t^2\n";
    CHECK_THROWS_AS(parse_system_file(missing), SystemFileError);
    const char* unknown = "name = x\nbogus = 1\n";
    try {
        parse_system_file(unknown, "f.sys");
        FAIL("expected SystemFileError");
    } catch (const SystemFileError& e) {
        CHECK(std::string(e.what()).find("f.sys:2") != std::string::npos);
    }
    const char* bad_expr = "name = x\ndim = 3\ninterval = -1 1\nb = 1 - t^\na = 3*t\ns = 6\n"
                           "volfactor = 1 - t^2\nkf = 0\nfocal_codim = 3 3\n";
    try {
        parse_system_file(bad_expr, "g.sys");
        FAIL("expected SystemFileError");
    } catch (const SystemFileError& e) {
        CHECK(std::string(e.what()).find("g.sys:4") != std::string::npos);
    }
    const char* repeated = "name = x\nname = y\n";
    CHECK_THROWS_AS(parse_system_file(repeated), SystemFileError);
}

TEST_CASE("resolver handles names, products and errors") {
    CHECK(resolve_system("sphere-x1-5").dims.n == 5);
    CHECK(resolve_system("sphere-quad-3-2").dims.n == 5);
    const auto p = resolve_system("product:sphere-x1-2+s2,v12.566370614359172,d2");
    CHECK(p.dims.n == 4);
    const auto rp = resolve_system("round-product:sphere-x1-2,m2,tau0.5");
    CHECK(rp.s(0.0) == doctest::Approx(6.0));
    CHECK_THROWS(resolve_system("no-such-system"));
    CHECK_THROWS(resolve_system("product:sphere-x1-2+s2"));
}
