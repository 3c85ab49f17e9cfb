#pragma once

// Conformal changes h = u^{p-2} g by factors constant on the level sets, and
// the conformally invariant quantities built from L.

#include "isoyamabe/discretize.hpp"

#include <vector>

namespace isoyamabe {

/// System of (M, u^{p-2} g, f) with p the critical exponent of sys's dimension;
/// u is a positive profile in t.
IsoparametricSystem conformal_system(const IsoparametricSystem& sys, const ProfileFn& u);

/// Same, for u sampled at the nodes of `op` (interpolated by a cubic spline in t).
IsoparametricSystem conformal_system(const IsoparametricSystem& sys, const DiscreteOperator& op,
                                     const std::vector<double>& u);

/// s_h at the nodes: u^{1-p} (L u).
std::vector<double> scalar_curvature_of(const DiscreteOperator& op, const std::vector<double>& u);

/// max over interior nodes of op_h (arclength in [0.1 R_h, 0.9 R_h]) of
/// |L_h v - u^{1-p} L_g(u v)|, with u, v given on the nodes of op.
double covariance_check(const DiscreteOperator& op, const DiscreteOperator& op_h, const std::vector<double>& u,
                        const std::vector<double>& v);

/// <L u, u>_m / (sum |u|^s m)^{2/s}
double yamabe_functional(const DiscreteOperator& op, const std::vector<double>& u, double s_exp);

/// λ_k vol^{2/n}: the value of the k-th invariant at the background metric.
double yamabe_k_value(const DiscreteOperator& op, int k);

/// Volume of the discretized manifold: coarea quadrature of the source system
/// when available, else the lumped mass.
double operator_volume(const DiscreteOperator& op);

}  // namespace isoyamabe
