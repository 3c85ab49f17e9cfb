#pragma once

// Cell-centred flux-form discretization of L = a_n Δ + s on the arclength
// interval, with lumped volume weights.

#include "isoyamabe/system.hpp"
#include "isoyamabe/tridiagonal.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace isoyamabe {

inline constexpr int kMinGrid = 16;

struct Grid {
    int N = 0;
    double R = 0.0;
    double h = 0.0;
    std::vector<double> nodes;  // (j + 1/2) h
    std::vector<double> faces;  // j h, size N + 1

    static Grid uniform(double R, int N);
};

struct DiscreteOperator {
    DimensionConstants dims;
    double coefficient = 0.0;  // a_n, or a synthetic factor
    Grid grid;
    std::vector<double> diag;     // symmetrized form M^{1/2} A M^{-1/2}
    std::vector<double> offdiag;  // size N - 1
    std::vector<double> mass;     // cell volumes, integral of W over [r_{j-1/2}, r_{j+1/2}]
    std::vector<double> s_values;
    std::vector<double> W_nodes;
    std::vector<double> flux;      // coefficient W(r_{j-1/2}) / h on faces; zero at both ends
    std::vector<double> inv_mass;
    std::vector<double> t_nodes;   // value coordinate of each node (empty for synthetic operators)
    std::optional<ArclengthSystem> system;

    std::size_t size() const { return diag.size(); }
    tridiag::Symmetric symmetric() const { return {diag, offdiag}; }
};

/// Throws UnsupportedDimension below dimension 3, where a_n is undefined.
DiscreteOperator assemble(const ArclengthSystem& sys, int N);

/// Operator coefficient (-(W u')'/W) + s on [0, R] for arbitrary density and
/// potential; `assemble` is this with coefficient a_n and the system's W, s.
DiscreteOperator assemble_density(const std::function<double(double)>& W, const std::function<double(double)>& s,
                                  double R, double coefficient, int N);

/// L u in function space.
std::vector<double> apply(const DiscreteOperator& op, const std::vector<double>& u);

/// Solves (L - sigma) u = rhs. Throws SingularShift when sigma is numerically
/// an eigenvalue of L.
std::vector<double> solve_shifted(const DiscreteOperator& op, double sigma, const std::vector<double>& rhs);

/// sum_j m_j u_j v_j
double mass_dot(const DiscreteOperator& op, const std::vector<double>& u, const std::vector<double>& v);

}  // namespace isoyamabe
