#include "isoyamabe/spectral.hpp"

#include "isoyamabe/errors.hpp"
#include "isoyamabe/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace isoyamabe {

namespace {

// Solves K v = λ B v with K = M A the stiffness matrix, which stays well
// scaled however small the weight gets.
SpectralResult pencil(const DiscreteOperator& op, std::vector<double> weight, int k, bool generalized) {
    const std::size_t n = op.size();
    if (k < 1 || static_cast<std::size_t>(k) > n) {
        throw PreconditionFailed("eigenpair count " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
    }
    tridiag::Symmetric K;
    K.d.resize(n);
    K.e.resize(n > 0 ? n - 1 : 0);
    for (std::size_t j = 0; j < n; ++j) K.d[j] = op.flux[j] + op.flux[j + 1] + op.s_values[j] * op.mass[j];
    for (std::size_t j = 0; j + 1 < n; ++j) K.e[j] = -op.flux[j + 1];

    SpectralResult res;
    res.generalized = generalized;
    res.eigenvalues = tridiag::lowest_eigenvalues(K, static_cast<std::size_t>(k), weight.data());
    // Vectors come from the function-space operator A = M^{-1} K, whose rows
    // are uniformly scaled; D = B / m keeps them B-orthogonal.
    tridiag::General A;
    A.d.resize(n);
    A.dl.resize(K.e.size());
    A.du.resize(K.e.size());
    std::vector<double> D(n);
    for (std::size_t j = 0; j < n; ++j) {
        A.d[j] = K.d[j] * op.inv_mass[j];
        D[j] = weight[j] * op.inv_mass[j];
    }
    for (std::size_t j = 0; j + 1 < n; ++j) {
        A.du[j] = K.e[j] * op.inv_mass[j];
        A.dl[j] = K.e[j] * op.inv_mass[j + 1];
    }
    auto vecs = tridiag::eigenvectors(A, D.data(), weight.data(), res.eigenvalues);

    res.eigenfunctions.resize(vecs.size());
    res.residuals.resize(vecs.size());
    for (std::size_t i = 0; i < vecs.size(); ++i) {
        std::vector<double>& v = res.eigenfunctions[i];
        v = std::move(vecs[i]);
        if (v[0] < 0.0) {
            for (double& x : v) x = -x;
        }
        const std::vector<double> Lv = isoyamabe::apply(op, v);
        double r = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            r = std::max(r, std::fabs(Lv[j] - res.eigenvalues[i] * weight[j] * op.inv_mass[j] * v[j]));
        }
        res.residuals[i] = r;
    }
    res.clustered.assign(res.eigenvalues.size(), false);
    for (std::size_t i = 0; i + 1 < res.eigenvalues.size(); ++i) {
        const double a = res.eigenvalues[i], b = res.eigenvalues[i + 1];
        if (std::fabs(b - a) <= kClusterTolerance * (1.0 + std::max(std::fabs(a), std::fabs(b)))) {
            res.clustered[i] = res.clustered[i + 1] = true;
        }
    }
    res.weight = std::move(weight);
    return res;
}

}  // namespace

double SpectralResult::inner(const std::vector<double>& x, const std::vector<double>& y) const {
    return kernels::weighted_dot(weight.size(), weight.data(), x.data(), y.data());
}

SpectralResult eigs(const DiscreteOperator& op, int k) { return pencil(op, op.mass, k, false); }

SpectralResult generalized_eigs(const DiscreteOperator& op, const std::vector<double>& u, double p, int k) {
    if (u.size() != op.size()) {
        throw LengthMismatch("generalized_eigs: weight has " + std::to_string(u.size()) + " values, expected " +
                             std::to_string(op.size()));
    }
    if (!(p > 2.0)) throw PreconditionFailed("generalized_eigs needs p > 2");
    std::vector<double> B(u.size());
    double bmax = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        if (u[j] < 0.0 || !std::isfinite(u[j])) throw PreconditionFailed("weight profile must be nonnegative");
        B[j] = std::pow(u[j], p - 2.0) * op.mass[j];
        bmax = std::max(bmax, B[j]);
    }
    if (!(bmax > 0.0)) throw ZeroWeight("weight profile vanishes identically");
    const double floor = kWeightFloor * bmax;
    for (double& b : B) b = std::max(b, floor);
    return pencil(op, std::move(B), k, true);
}

}  // namespace isoyamabe
