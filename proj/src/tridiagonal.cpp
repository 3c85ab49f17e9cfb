#include "isoyamabe/tridiagonal.hpp"

#include "isoyamabe/errors.hpp"
#include "isoyamabe/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace isoyamabe::tridiag {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double wt(const double* weight, std::size_t i) { return weight ? weight[i] : 1.0; }

// LU factors of A - sigma D with row interchanges, as in LAPACK's gttrf.
struct Factor {
    std::vector<double> dl, d, du, du2;
    std::vector<unsigned char> swapped;
    bool ok = true;
};

Factor factor(const General& A, double sigma, const double* D, double pivot_floor, bool perturb) {
    const std::size_t n = A.size();
    Factor F;
    F.d.resize(n);
    F.dl = A.dl;
    F.du = A.du;
    F.du2.assign(n > 2 ? n - 2 : 0, 0.0);
    F.swapped.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) F.d[i] = A.d[i] - sigma * wt(D, i);
    const double tiny = kEps * std::max(A.norm(), 1.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (std::fabs(F.d[i]) >= std::fabs(F.dl[i])) {
            if (std::fabs(F.d[i]) < pivot_floor) {
                if (!perturb) {
                    F.ok = false;
                    return F;
                }
                F.d[i] = tiny;
            }
            const double l = F.dl[i] / F.d[i];
            F.dl[i] = l;
            F.d[i + 1] -= l * F.du[i];
        } else {
            const double l = F.d[i] / F.dl[i];
            F.d[i] = F.dl[i];
            F.dl[i] = l;
            const double tmp = F.du[i];
            F.du[i] = F.d[i + 1];
            F.d[i + 1] = tmp - l * F.d[i + 1];
            if (i + 2 < n) {
                F.du2[i] = F.du[i + 1];
                F.du[i + 1] = -l * F.du[i + 1];
            }
            F.swapped[i] = 1;
        }
    }
    if (n > 0 && std::fabs(F.d[n - 1]) < pivot_floor) {
        if (!perturb) {
            F.ok = false;
            return F;
        }
        F.d[n - 1] = tiny;
    }
    return F;
}

void back_substitute(const Factor& F, double* x) {
    const std::size_t n = F.d.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (F.swapped[i]) {
            const double tmp = x[i];
            x[i] = x[i + 1];
            x[i + 1] = tmp - F.dl[i] * x[i];
        } else {
            x[i + 1] -= F.dl[i] * x[i];
        }
    }
    if (n == 0) return;
    x[n - 1] /= F.d[n - 1];
    if (n > 1) x[n - 2] = (x[n - 2] - F.du[n - 2] * x[n - 1]) / F.d[n - 2];
    for (std::size_t i = n >= 3 ? n - 3 : 0; n >= 3; --i) {
        x[i] = (x[i] - F.du[i] * x[i + 1] - F.du2[i] * x[i + 2]) / F.d[i];
        if (i == 0) break;
    }
}

double wdot(const double* weight, const std::vector<double>& x, const std::vector<double>& y) {
    return weight ? kernels::weighted_dot(x.size(), weight, x.data(), y.data())
                  : kernels::dot(x.size(), x.data(), y.data());
}

void normalize(std::vector<double>& v, const double* weight) {
    const double nrm = std::sqrt(wdot(weight, v, v));
    for (double& x : v) x /= nrm;
}

// Gershgorin enclosure of W^{-1/2} T W^{-1/2}.
void pencil_bounds(const Symmetric& T, const double* weight, double& lo, double& hi) {
    if (!weight) {
        T.bounds(lo, hi);
        return;
    }
    const std::size_t n = T.size();
    lo = std::numeric_limits<double>::infinity();
    hi = -lo;
    for (std::size_t i = 0; i < n; ++i) {
        double r = 0.0;
        if (i > 0) r += std::fabs(T.e[i - 1]) / std::sqrt(weight[i] * weight[i - 1]);
        if (i + 1 < n) r += std::fabs(T.e[i]) / std::sqrt(weight[i] * weight[i + 1]);
        const double c = T.d[i] / weight[i];
        lo = std::min(lo, c - r);
        hi = std::max(hi, c + r);
    }
}

}  // namespace

void Symmetric::bounds(double& lo, double& hi) const {
    const std::size_t n = size();
    lo = std::numeric_limits<double>::infinity();
    hi = -lo;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = (i > 0 ? std::fabs(e[i - 1]) : 0.0) + (i + 1 < n ? std::fabs(e[i]) : 0.0);
        lo = std::min(lo, d[i] - r);
        hi = std::max(hi, d[i] + r);
    }
}

double Symmetric::norm() const {
    const std::size_t n = size();
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        m = std::max(m, std::fabs(d[i]) + (i > 0 ? std::fabs(e[i - 1]) : 0.0) + (i + 1 < n ? std::fabs(e[i]) : 0.0));
    }
    return m;
}

void Symmetric::multiply(const double* x, double* y) const {
    const std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i) {
        double acc = d[i] * x[i];
        if (i > 0) acc += e[i - 1] * x[i - 1];
        if (i + 1 < n) acc += e[i] * x[i + 1];
        y[i] = acc;
    }
}

General General::from(const Symmetric& T) { return {T.e, T.d, T.e}; }

double General::norm() const {
    const std::size_t n = size();
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        m = std::max(m, std::fabs(d[i]) + (i > 0 ? std::fabs(dl[i - 1]) : 0.0) + (i + 1 < n ? std::fabs(du[i]) : 0.0));
    }
    return m;
}

void General::multiply(const double* x, double* y) const {
    const std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i) {
        double acc = d[i] * x[i];
        if (i > 0) acc += dl[i - 1] * x[i - 1];
        if (i + 1 < n) acc += du[i] * x[i + 1];
        y[i] = acc;
    }
}

std::size_t sturm_count(const Symmetric& T, double x, const double* weight) {
    const std::size_t n = T.size();
    const double pivmin = std::numeric_limits<double>::min() * std::max(1.0, T.norm() * T.norm());
    std::size_t count = 0;
    double q = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e2 = i > 0 ? T.e[i - 1] * T.e[i - 1] : 0.0;
        q = T.d[i] - x * wt(weight, i) - (i > 0 ? e2 / q : 0.0);
        if (std::fabs(q) < pivmin) q = -pivmin;
        if (q < 0.0) ++count;
    }
    return count;
}

std::vector<double> lowest_eigenvalues(const Symmetric& T, std::size_t k, const double* weight) {
    const std::size_t n = T.size();
    k = std::min(k, n);
    double glo, ghi;
    pencil_bounds(T, weight, glo, ghi);
    const double pad = kEps * std::max(std::fabs(glo), std::fabs(ghi)) * static_cast<double>(n) + 1e-300;
    glo -= pad;
    ghi += pad;

    std::vector<double> out(k);
    for (std::size_t idx = 0; idx < k; ++idx) {
        // Smallest x with count(x) > idx.
        double lo = idx > 0 ? out[idx - 1] : glo, hi = ghi;
        if (sturm_count(T, lo, weight) > idx) lo = glo;
        for (int it = 0; it < 400; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            if (hi - lo <= 2.0 * kEps * std::max(std::fabs(lo), std::fabs(hi))) break;
            if (sturm_count(T, mid, weight) > idx) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        out[idx] = 0.5 * (lo + hi);
    }
    return out;
}

std::vector<std::vector<double>> eigenvectors(const General& A, const double* D, const double* B,
                                              const std::vector<double>& lambda) {
    const std::size_t n = A.size();
    const double anorm = std::max(A.norm(), std::numeric_limits<double>::min());
    const double dnorm = D ? *std::max_element(D, D + n) : 1.0;
    const double spread = lambda.empty() ? 0.0 : std::max(std::fabs(lambda.front()), std::fabs(lambda.back()));
    const double cluster_gap = 1e-3 * std::max(spread, anorm / dnorm);

    std::vector<std::vector<double>> vecs;
    vecs.reserve(lambda.size());
    std::vector<double> av(n);
    std::size_t cluster_start = 0;

    // Relative defect max_i |(A v - λ D v)_i| / ((||A|| + |λ| ||D||) ||v||).
    auto defect = [&](const std::vector<double>& v, double lam) {
        A.multiply(v.data(), av.data());
        for (std::size_t i = 0; i < n; ++i) av[i] -= lam * wt(D, i) * v[i];
        return kernels::max_abs(n, av.data()) / ((anorm + std::fabs(lam) * dnorm) * kernels::max_abs(n, v.data()));
    };

    for (std::size_t k = 0; k < lambda.size(); ++k) {
        if (k > 0 && lambda[k] - lambda[k - 1] > cluster_gap) cluster_start = k;
        double shift = lambda[k];
        // Separate coincident shifts so each member of a cluster gets its own factorization.
        if (k > cluster_start) shift = std::max(shift, lambda[k - 1] + 10.0 * kEps * std::max(std::fabs(shift), 1.0));
        const Factor F = factor(A, shift, D, kEps * anorm, true);

        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) {
            // Deterministic start with components along every eigenvector.
            v[i] = 1.0 + 0.5 * std::sin(1.0 + 0.7 * static_cast<double>(i) + 0.3 * static_cast<double>(k));
        }
        normalize(v, B);
        bool settled = false;
        for (int it = 0; it < 8 && !settled; ++it) {
            for (std::size_t i = 0; i < n; ++i) v[i] *= wt(D, i);
            back_substitute(F, v.data());
            for (std::size_t j = cluster_start; j < k; ++j) {
                const double c = wdot(B, vecs[j], v);
                kernels::axpy(n, -c, vecs[j].data(), v.data());
            }
            normalize(v, B);
            if (it >= 2 && defect(v, lambda[k]) <= 100.0 * kEps) settled = true;
        }
        if (!settled && !(defect(v, lambda[k]) <= 1e-10)) {
            throw EigenFailure("inverse iteration did not converge for eigenvalue index " + std::to_string(k));
        }
        vecs.push_back(std::move(v));
    }
    return vecs;
}

std::vector<std::vector<double>> eigenvectors(const Symmetric& T, const std::vector<double>& lambda,
                                              const double* weight) {
    return eigenvectors(General::from(T), weight, weight, lambda);
}

bool solve(const Symmetric& T, double sigma, const double* b, double* x, double pivot_floor) {
    Factor F = factor(General::from(T), sigma, nullptr, pivot_floor, false);
    if (!F.ok) return false;
    std::copy(b, b + T.size(), x);
    back_substitute(F, x);
    return true;
}

}  // namespace isoyamabe::tridiag
