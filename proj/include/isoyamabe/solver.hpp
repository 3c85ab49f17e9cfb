#pragma once

// Positive and sign-changing solutions of a_n Δu + s u = c |u|^{q-2} u on the
// discretized system, and the multiplicity arithmetic for round products.

#include "isoyamabe/discretize.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace isoyamabe {

struct NodalRecord {
    int sign_changes = 0;
    std::vector<double> nodal_levels;               // t* of each sign change
    std::pair<double, double> endpoint_values{0, 0};  // u at the first and last node
    bool endpoints_nonzero = false;
};

struct Solution {
    std::vector<double> u;
    double exponent = 2.0;
    double c = 0.0;
    double residual = 0.0;
    double functional_value = 0.0;
    NodalRecord nodal;
    int iterations = 0;
};

inline constexpr int kSubcriticalIterationCap = 10000;
inline constexpr int kNodalIterationCap = 500;

/// Upper end of the admissible exponent range for supercritical solves,
/// +inf when unbounded, NaN when only subcritical exponents are admissible.
double supercritical_exponent_bound(int n, int kf);

/// Minimizer of J^q(v) = <Lv, v> / ||v||_q^2 over positive profiles by
/// normalized inverse iteration; reported with ||u||_q = 1 so c = J^q(u).
Solution solve_subcritical(const DiscreteOperator& op, double s_exp, double tol);

struct MinimizeOptions {
    double theta = 0.5;
    int max_iterations = kNodalIterationCap;
    /// Initial factor; the normalized constant when empty.
    std::optional<std::vector<double>> seed;
    /// Try |second eigenfunction| as a seed when the first run stalls.
    bool fallback_seed = true;
};

struct SecondYamabeResult {
    std::vector<double> u_star;          // ||u_star||_p = 1
    std::vector<double> v2;              // second weighted eigenfunction at u_star
    double Y2f = 0.0;
    Solution sol;                        // v2 as a nodal solution, c = λ_2(g_{u_star})
    std::vector<double> history;         // Y_i per accepted iterate
    bool lambda2_clustered_with_lambda1 = false;
    int seed_used = 0;                   // 0 constant or caller seed, 1 fallback seed
    double theta = 0.0;                  // damping in effect at convergence
};

SecondYamabeResult minimize_second_yamabe(const DiscreteOperator& op, double tol, const MinimizeOptions& opts = {});

NodalRecord nodal_analysis(const DiscreteOperator& op, const std::vector<double>& u);

/// max_j |(Lu)_j - c |u_j|^{q-2} u_j| / (1 + ||Lu||_inf)
double residual(const DiscreteOperator& op, const std::vector<double>& u, double s_exp, double c);

struct CscCount {
    double l = 0.0;
    int i = 0;
    int count = 0;
    std::vector<double> thresholds;  // t_1 > t_2 > ...
};

/// Lower bound on the number of constant scalar curvature metrics on
/// S^m(t) x S^{2 s_half}, from l(t) = (m(m-1)/t + 2s(2s-1)) / (2s+m-1) against
/// the sphere eigenvalues A_i = i(2s+i-1).
CscCount csc_count_lower_bound(int s_half, int m, double t);

struct BifurcationCheck {
    double lhs = 0.0;  // s'
    double rhs = 0.0;  // a_n μ / (p - 2)
    double mu = 0.0;   // first nonzero restricted Laplacian eigenvalue
    bool supercritical_mass = false;
};

BifurcationCheck bifurcation_threshold_check(const DiscreteOperator& op);

}  // namespace isoyamabe
