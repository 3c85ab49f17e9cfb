#include "isoyamabe/solver.hpp"

#include "isoyamabe/conformal.hpp"
#include "isoyamabe/errors.hpp"
#include "isoyamabe/kernels.hpp"
#include "isoyamabe/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace isoyamabe {

namespace {

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(10);
    os << x;
    return os.str();
}

double lq_norm(const DiscreteOperator& op, const std::vector<double>& u, double q) {
    double acc = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) acc += std::pow(std::fabs(u[j]), q) * op.mass[j];
    return std::pow(acc, 1.0 / q);
}

void scale_to_unit(const DiscreteOperator& op, std::vector<double>& u, double q) {
    const double nrm = lq_norm(op, u, q);
    if (!(nrm > 0.0) || !std::isfinite(nrm)) throw ZeroFunction("cannot normalize the zero profile");
    for (double& x : u) x /= nrm;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::fabs(a[j] - b[j]));
    return m;
}

double first_eigenvalue(const DiscreteOperator& op) { return eigs(op, 1).eigenvalues[0]; }

void require_positive_operator(const DiscreteOperator& op) {
    const double l1 = first_eigenvalue(op);
    if (!(l1 > 0.0)) throw NotPositiveOperator("first restricted eigenvalue " + fmt(l1) + " is not positive");
}

// Rounding level of residual(op, u, ., .): a componentwise bound on the error
// of evaluating L u, in the same normalization.
double residual_floor(const DiscreteOperator& op, const std::vector<double>& u) {
    const std::size_t n = u.size();
    const std::vector<double> Lu = isoyamabe::apply(op, u);
    double worst = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double left = j > 0 ? op.flux[j] * (std::fabs(u[j]) + std::fabs(u[j - 1])) : 0.0;
        const double right = j + 1 < n ? op.flux[j + 1] * (std::fabs(u[j]) + std::fabs(u[j + 1])) : 0.0;
        worst = std::max(worst, op.inv_mass[j] * (left + right) + std::fabs(op.s_values[j] * u[j]));
    }
    return 16.0 * std::numeric_limits<double>::epsilon() * worst / (1.0 + kernels::max_abs(n, Lu.data()));
}

constexpr int kEscapeIterationCap = 2000;
constexpr double kDescentSlack = 1e-10;

struct Iterate {
    std::vector<double> u;
    double J = 0.0;
    int iterations = 0;
};

// u <- normalize_q(L^{-1}(|u|^{q-2} u)) until J and u settle.
Iterate inverse_iteration(const DiscreteOperator& op, double q, double tol, std::vector<double> u, int& budget) {
    scale_to_unit(op, u, q);
    double J = yamabe_functional(op, u, q);
    std::vector<double> rhs(u.size());
    for (int it = 1;; ++it) {
        if (budget-- <= 0) {
            throw NoConvergence("inverse iteration reached the cap of " + std::to_string(kSubcriticalIterationCap) +
                                    " iterations",
                                u);
        }
        for (std::size_t j = 0; j < u.size(); ++j) rhs[j] = std::pow(std::fabs(u[j]), q - 2.0) * u[j];
        std::vector<double> w = solve_shifted(op, 0.0, rhs);
        scale_to_unit(op, w, q);
        const double Jn = yamabe_functional(op, w, q);
        u = std::move(w);
        const double res_tol = std::max({tol, 1e-12, residual_floor(op, u)});
        const bool settled =
            std::fabs(Jn - J) < tol * (1.0 + std::fabs(J)) && residual(op, u, q, Jn) <= res_tol;
        J = Jn;
        if (settled) return {std::move(u), J, it};
    }
}

}  // namespace

double supercritical_exponent_bound(int n, int kf) {
    if (kf < 1) return std::numeric_limits<double>::quiet_NaN();
    const int d = n - kf;
    if (d > 2) return 2.0 * d / (d - 2.0);
    return std::numeric_limits<double>::infinity();
}

double residual(const DiscreteOperator& op, const std::vector<double>& u, double s_exp, double c) {
    const std::vector<double> Lu = isoyamabe::apply(op, u);
    double worst = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        worst = std::max(worst, std::fabs(Lu[j] - c * std::pow(std::fabs(u[j]), s_exp - 2.0) * u[j]));
    }
    return worst / (1.0 + kernels::max_abs(Lu.size(), Lu.data()));
}

NodalRecord nodal_analysis(const DiscreteOperator& op, const std::vector<double>& u) {
    if (u.size() != op.size()) throw LengthMismatch("nodal_analysis: profile does not match the grid");
    const double umax = kernels::max_abs(u.size(), u.data());
    if (umax == 0.0) throw ZeroFunction("nodal analysis of the zero profile");
    NodalRecord rec;
    std::size_t last = u.size();  // index of the last nonzero entry
    for (std::size_t j = 0; j < u.size(); ++j) {
        if (u[j] == 0.0) continue;
        if (last < u.size() && (u[last] > 0.0) != (u[j] > 0.0)) {
            ++rec.sign_changes;
            const double r0 = op.grid.nodes[last], r1 = op.grid.nodes[j];
            const double r_star = r0 + (r1 - r0) * u[last] / (u[last] - u[j]);
            rec.nodal_levels.push_back(op.system ? op.system->t_of_r(r_star) : r_star);
        }
        last = j;
    }
    rec.endpoint_values = {u.front(), u.back()};
    rec.endpoints_nonzero = std::fabs(u.front()) > 1e-8 * umax && std::fabs(u.back()) > 1e-8 * umax;
    return rec;
}

Solution solve_subcritical(const DiscreteOperator& op, double s_exp, double tol) {
    if (!(tol > 0.0 && tol < 1.0)) throw PreconditionFailed("tolerance must lie in (0, 1)");
    if (!(s_exp >= 2.0) || !std::isfinite(s_exp)) throw ExponentOutOfRange("exponent must be >= 2");
    if (!op.dims.has_yamabe_exponent()) throw UnsupportedDimension("positive solves need dimension >= 3");
    require_positive_operator(op);

    const int n = op.dims.n;
    const int kf = op.system ? op.system->source().kf : 0;
    if (s_exp >= op.dims.p_n) {
        const double bound = supercritical_exponent_bound(n, kf);
        if (std::isnan(bound)) {
            throw ExponentOutOfRange("exponent " + fmt(s_exp) + " >= critical " + fmt(op.dims.p_n) +
                                     " requires kf >= 1 (kf = " + std::to_string(kf) + ")");
        }
        if (!(s_exp < bound)) {
            throw ExponentOutOfRange("exponent " + fmt(s_exp) + " not below the bound " + fmt(bound) +
                                     " for n = " + std::to_string(n) + ", kf = " + std::to_string(kf));
        }
    }

    Solution sol;
    sol.exponent = s_exp;
    if (s_exp == 2.0) {
        const SpectralResult sp = eigs(op, 1);
        sol.u = sp.eigenfunctions[0];
        sol.c = sp.eigenvalues[0];
        sol.functional_value = sol.c;
        sol.iterations = 1;
    } else {
        int budget = kSubcriticalIterationCap;
        Iterate best = inverse_iteration(op, s_exp, tol, std::vector<double>(op.size(), 1.0), budget);
        // The constant profile is an exact fixed point even where it is only a
        // saddle of J; leave along the unstable direction when there is one.
        for (int round = 0; round < 4; ++round) {
            const SpectralResult lin = generalized_eigs(op, best.u, s_exp, 2);
            const double c = best.J;
            if (!(lin.eigenvalues[1] < (s_exp - 1.0) * c * (1.0 - 1e-9))) break;
            const std::vector<double>& phi = lin.eigenfunctions[1];
            const double umin = *std::min_element(best.u.begin(), best.u.end());
            const double eps = 0.5 * umin / kernels::max_abs(phi.size(), phi.data());
            bool improved = false;
            for (double sign : {1.0, -1.0}) {
                std::vector<double> start = best.u;
                kernels::axpy(start.size(), sign * eps, phi.data(), start.data());
                // Next to a bifurcation the unstable direction is nearly neutral and
                // the escape crawls; such an attempt is dropped, keeping the
                // converged critical point.
                int escape_budget = std::min(budget, kEscapeIterationCap);
                const int before = escape_budget;
                Iterate cand;
                try {
                    cand = inverse_iteration(op, s_exp, tol, std::move(start), escape_budget);
                } catch (const NoConvergence&) {
                    budget -= before;
                    continue;
                }
                budget -= before - escape_budget;
                cand.iterations += best.iterations;
                if (cand.J < best.J - tol * (1.0 + std::fabs(best.J))) {
                    best = std::move(cand);
                    improved = true;
                }
            }
            if (!improved) break;
        }
        sol.u = std::move(best.u);
        sol.c = best.J;
        sol.functional_value = best.J;
        sol.iterations = best.iterations;
    }
    sol.residual = residual(op, sol.u, s_exp, sol.c);
    sol.nodal = nodal_analysis(op, sol.u);
    if (!(*std::min_element(sol.u.begin(), sol.u.end()) > 0.0)) {
        throw NoConvergence("positive solve produced a profile with nonpositive entries", sol.u);
    }
    return sol;
}

SecondYamabeResult minimize_second_yamabe(const DiscreteOperator& op, double tol, const MinimizeOptions& opts) {
    if (!(tol > 0.0 && tol < 1.0)) throw PreconditionFailed("tolerance must lie in (0, 1)");
    if (!(opts.theta > 0.0 && opts.theta <= 1.0)) throw PreconditionFailed("damping must lie in (0, 1]");
    if (!op.dims.has_yamabe_exponent()) throw UnsupportedDimension("nodal solves need dimension >= 3");
    const int kf = op.system ? op.system->source().kf : 0;
    const int product_dim = op.system ? op.system->source().product_dim : 0;
    if (product_dim == 0 && kf < 1) {
        throw PreconditionFailed("nodal solve needs a product system or kf >= 1 (kf = " + std::to_string(kf) + ")");
    }
    require_positive_operator(op);

    const double p = op.dims.p_n;
    const double n = op.dims.n;

    struct Eval {
        SpectralResult ge;
        double Y = 0.0;
    };
    auto evaluate = [&](const std::vector<double>& u) {
        Eval e{generalized_eigs(op, u, p, 3), 0.0};
        if (e.ge.clustered[1] && e.ge.clustered[2]) {
            throw DegenerateSecondEigenvalue("λ_2 = " + fmt(e.ge.eigenvalues[1]) + " and λ_3 = " +
                                             fmt(e.ge.eigenvalues[2]) + " coincide");
        }
        const double vol = std::pow(lq_norm(op, u, p), p);
        e.Y = e.ge.eigenvalues[1] * std::pow(vol, 2.0 / n);
        return e;
    };
    auto nodal_profile = [&](const Eval& e) {
        std::vector<double> w = e.ge.eigenfunctions[1];
        scale_to_unit(op, w, p);
        return w;
    };

    auto run = [&](std::vector<double> u) {
        scale_to_unit(op, u, p);
        SecondYamabeResult res;
        Eval E = evaluate(u);
        res.history.push_back(E.Y);
        double Yprev = std::numeric_limits<double>::infinity();
        double last_du = std::numeric_limits<double>::infinity();
        std::vector<double> last_step;
        double theta = opts.theta;
        for (int it = 0;; ++it) {
            const std::vector<double> w = nodal_profile(E);
            const double lam2 = E.ge.eigenvalues[1] * std::pow(lq_norm(op, u, p), p - 2.0);
            const double res_now = residual(op, w, p, lam2);
            if (std::fabs(E.Y - Yprev) < tol * (1.0 + std::fabs(E.Y)) && last_du < std::sqrt(tol) &&
                res_now < std::max(10.0 * tol, residual_floor(op, w))) {
                res.u_star = u;
                res.v2 = E.ge.eigenfunctions[1];
                res.Y2f = E.Y;
                res.lambda2_clustered_with_lambda1 = E.ge.clustered[0];
                res.theta = theta;
                res.sol.u = w;
                res.sol.exponent = p;
                res.sol.c = lam2;
                res.sol.functional_value = E.Y;
                res.sol.residual = res_now;
                res.sol.nodal = nodal_analysis(op, w);
                res.sol.iterations = it;
                return res;
            }
            if (it >= opts.max_iterations) {
                throw NoConvergence("second Yamabe iteration reached the cap of " +
                                        std::to_string(opts.max_iterations) + " iterations",
                                    w);
            }
            std::vector<double> target(w.size());
            for (std::size_t j = 0; j < w.size(); ++j) target[j] = std::fabs(w[j]);

            // Damping only ever shrinks: halved when a step would raise Y beyond
            // the descent slack, and when a step grows while reversing the
            // previous one (an over-relaxed mode flipping sign each iteration).
            for (;;) {
                std::vector<double> cand(u.size());
                for (std::size_t j = 0; j < u.size(); ++j) {
                    const double blend = (1.0 - theta) * std::pow(u[j], p - 2.0) + theta * std::pow(target[j], p - 2.0);
                    cand[j] = std::pow(blend, 1.0 / (p - 2.0));
                }
                scale_to_unit(op, cand, p);
                Eval Ec = evaluate(cand);
                if (Ec.Y <= E.Y + kDescentSlack * (1.0 + std::fabs(E.Y))) {
                    std::vector<double> step(u.size());
                    for (std::size_t j = 0; j < u.size(); ++j) step[j] = cand[j] - u[j];
                    const double du = kernels::max_abs(step.size(), step.data());
                    if (!last_step.empty() && du > last_du &&
                        kernels::weighted_dot(step.size(), op.mass.data(), step.data(), last_step.data()) < 0.0) {
                        theta *= 0.5;
                    }
                    last_du = du;
                    last_step = std::move(step);
                    Yprev = E.Y;
                    u = std::move(cand);
                    E = std::move(Ec);
                    res.history.push_back(E.Y);
                    break;
                }
                theta *= 0.5;
                if (theta < 1e-8) throw NoConvergence("second Yamabe iteration stalled: no descent step found", w);
            }
        }
    };

    std::vector<double> seed0 = opts.seed ? *opts.seed : std::vector<double>(op.size(), 1.0);
    if (seed0.size() != op.size()) throw LengthMismatch("seed does not match the grid");
    try {
        return run(std::move(seed0));
    } catch (const NoConvergence&) {
        if (!opts.fallback_seed) throw;
        const SpectralResult sp = eigs(op, 2);
        std::vector<double> seed1(op.size());
        for (std::size_t j = 0; j < seed1.size(); ++j) seed1[j] = std::fabs(sp.eigenfunctions[1][j]);
        try {
            SecondYamabeResult r = run(std::move(seed1));
            r.seed_used = 1;
            return r;
        } catch (const NoConvergence&) {
        }
        throw;
    }
}

CscCount csc_count_lower_bound(int s_half, int m, double t) {
    if (s_half == 1) throw UnsupportedDimension("the multiplicity count is stated for S^{2s} with s >= 2");
    if (s_half < 1) throw PreconditionFailed("s_half must be >= 1");
    if (m < 2) throw PreconditionFailed("m must be >= 2");
    if (!(t > 0.0) || !std::isfinite(t)) throw PreconditionFailed("t must be positive");
    const double s = s_half;
    const double mm = m;
    auto A = [&](int i) { return i * (2.0 * s + i - 1.0); };

    CscCount out;
    out.l = (mm * (mm - 1.0) / t + 2.0 * s * (2.0 * s - 1.0)) / (2.0 * s + mm - 1.0);
    while (A(out.i + 1) < out.l) ++out.i;
    const int i = out.i;
    if (s_half == 2) {
        out.count = i + i / 2 + i / 3;
    } else {
        out.count = i + ((2 * s_half - 1) / 2) * (i / 2);
    }
    const int last = std::max(10, i + 1);
    for (int k = 1; k <= last; ++k) {
        const double den = (2.0 * s + mm - 1.0) * A(k) - 2.0 * s * (2.0 * s - 1.0);
        if (den > 0.0) out.thresholds.push_back(mm * (mm - 1.0) / den);
    }
    return out;
}

BifurcationCheck bifurcation_threshold_check(const DiscreteOperator& op) {
    if (!op.dims.has_yamabe_exponent()) throw UnsupportedDimension("threshold needs dimension >= 3");
    const auto [lo, hi] = std::minmax_element(op.s_values.begin(), op.s_values.end());
    if (*hi - *lo > 1e-10 * (1.0 + std::fabs(*hi))) {
        throw PreconditionFailed("threshold check needs constant scalar curvature");
    }
    const SpectralResult sp = eigs(op, 2);
    BifurcationCheck out;
    out.lhs = op.s_values.front();
    out.mu = (sp.eigenvalues[1] - out.lhs) / op.dims.a_n;
    out.rhs = op.dims.a_n * out.mu / (op.dims.p_n - 2.0);
    out.supercritical_mass = out.lhs > out.rhs;
    return out;
}

}  // namespace isoyamabe
