#pragma once

// One-dimensional reduction data of an isoparametric system (M, g, f) and its
// arclength canonical form.

#include "isoyamabe/expr.hpp"

#include <memory>
#include <string>
#include <vector>

namespace isoyamabe {

using ProfileFn = expr::Expr;

struct DimensionConstants {
    int n = 0;
    double a_n = 0.0;  // 4(n-1)/(n-2); NaN for n < 3
    double p_n = 0.0;  // 2n/(n-2);     NaN for n < 3

    static DimensionConstants of(int n);
    bool has_yamabe_exponent() const { return n >= 3; }
};

/// Volume of the unit k-sphere.
double unit_sphere_volume(int k);

struct IsoparametricSystem {
    std::string name;
    DimensionConstants dims;
    double t_min = -1.0;
    double t_max = 1.0;
    ProfileFn b;         // |grad f|^2 as a function of the value t
    ProfileFn a;         // Laplacian of f (nonnegative-spectrum convention)
    ProfileFn s;         // scalar curvature along level sets
    ProfileFn fibervol;  // (n-1)-volume of the level set M_t
    int kf = 0;
    int focal_codim_minus = 1;
    int focal_codim_plus = 1;
    int product_dim = 0;  // dimension of the product factor N, 0 if none
};

// Catalog ------------------------------------------------------------------

IsoparametricSystem build_sphere_linear(int n);
IsoparametricSystem build_sphere_quadratic(int m, int n);
IsoparametricSystem build_product(const IsoparametricSystem& base, double s_N, double vol_N, int dim_N);
/// base x S^m with the round metric scaled by tau (scalar curvature m(m-1)/tau).
IsoparametricSystem build_round_product(const IsoparametricSystem& base, int m, double tau);

/// Scalar curvature of the warped product (N x S^1, phi h + dt^2) as a function
/// of the circle coordinate, for phi periodic on [0, length] and dim N = n.
ProfileFn warped_scalar_profile(const ProfileFn& phi, double length, double s_h, int n);

// Validation -----------------------------------------------------------------

struct ValidationCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;
    double identity_residual = 0.0;  // max |a + b' + b (log(v/sqrt b))'| on the sample grid
    bool proper = false;              // both focal codimensions >= 2

    bool ok() const;
    /// Only the sign checks on b and v, the precondition of to_arclength.
    bool signs_ok() const;
    const ValidationCheck* find(const std::string& name) const;
};

inline constexpr double kIdentityTolerance = 1e-9;

ValidationReport validate(const IsoparametricSystem& sys, double identity_tol = kIdentityTolerance,
                          int samples = 1000);

/// Pointwise residual a + b' + b (log(v/sqrt b))' at an interior t.
double divergence_identity_residual(const IsoparametricSystem& sys, double t);

// Arclength form ---------------------------------------------------------------

/// Canonical arclength form r = int dt/sqrt(b). Immutable; copies share state.
class ArclengthSystem {
public:
    const DimensionConstants& dims() const;
    const IsoparametricSystem& source() const;
    double R() const;

    double W(double r) const;  // level volume at arclength r
    double s(double r) const;  // scalar curvature at arclength r
    double t_of_r(double r) const;
    double r_of_t(double t) const;

    /// ∫_0^R W dr, computed on an arclength grid (independent of source-side coarea).
    double volume() const;

    struct State;
    explicit ArclengthSystem(std::shared_ptr<const State> st) : st_(std::move(st)) {}

private:
    std::shared_ptr<const State> st_;
};

inline constexpr int kDefaultResolution = 256;

ArclengthSystem to_arclength(const IsoparametricSystem& sys, int resolution = kDefaultResolution);

/// ∫_M phi(f) dv_g = ∫ phi(t) v(t)/sqrt(b(t)) dt with endpoint-aware substitution.
double integrate(const IsoparametricSystem& sys, const ProfileFn& phi);
double total_volume(const IsoparametricSystem& sys);

}  // namespace isoyamabe
