#pragma once

// Lowest restricted eigenpairs of the discrete conformal Laplacian, plain and
// with a nodal weight u^{p-2}.

#include "isoyamabe/discretize.hpp"

#include <vector>

namespace isoyamabe {

inline constexpr double kClusterTolerance = 1e-9;
inline constexpr double kWeightFloor = 1e-14;

struct SpectralResult {
    std::vector<double> eigenvalues;                 // ascending
    std::vector<std::vector<double>> eigenfunctions;  // function space, weight-orthonormal
    std::vector<double> weight;                      // B_jj (mass, or u^{p-2} mass after flooring)
    bool generalized = false;
    std::vector<double> residuals;  // max_j |(L v - λ B/m v)_j| per pair, function space
    std::vector<bool> clustered;    // λ_k within kClusterTolerance (1 + |λ|) of a neighbour

    std::size_t size() const { return eigenvalues.size(); }
    /// sum_j weight_j x_j y_j
    double inner(const std::vector<double>& x, const std::vector<double>& y) const;
};

SpectralResult eigs(const DiscreteOperator& op, int k);

/// L v = λ B v with B = diag(u^{p-2} m), entries floored at kWeightFloor max B.
SpectralResult generalized_eigs(const DiscreteOperator& op, const std::vector<double>& u, double p, int k);

}  // namespace isoyamabe
