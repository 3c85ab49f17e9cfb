#pragma once

// Dense-free tridiagonal routines: Sturm counts, bisection, inverse
// iteration, and a partially pivoted banded solve.

#include <cstddef>
#include <vector>

namespace isoyamabe::tridiag {

/// Symmetric tridiagonal T with diagonal d (size n) and off-diagonal e (size n-1).
struct Symmetric {
    std::vector<double> d;
    std::vector<double> e;

    std::size_t size() const { return d.size(); }
    /// Gershgorin enclosure of the spectrum.
    void bounds(double& lo, double& hi) const;
    /// Infinity norm.
    double norm() const;
    void multiply(const double* x, double* y) const;
};

/// General tridiagonal matrix; row i is dl[i-1] x_{i-1} + d[i] x_i + du[i] x_{i+1}.
struct General {
    std::vector<double> dl;
    std::vector<double> d;
    std::vector<double> du;

    static General from(const Symmetric& T);
    std::size_t size() const { return d.size(); }
    double norm() const;
    void multiply(const double* x, double* y) const;
};

// The eigen routines solve pencils T x = λ W x for a positive diagonal
// weight W; a null weight means the identity.

/// Number of pencil eigenvalues strictly below x (inertia of T - x W).
std::size_t sturm_count(const Symmetric& T, double x, const double* weight = nullptr);

/// The k smallest eigenvalues, ascending, to full working precision.
std::vector<double> lowest_eigenvalues(const Symmetric& T, std::size_t k, const double* weight = nullptr);

/// Eigenvectors of A x = λ D x for ascending `lambda`, normalized and
/// reorthogonalized inside clusters in the inner product sum_i B_i x_i y_i,
/// under which the eigenvectors must be orthogonal. Throws EigenFailure when
/// inverse iteration does not settle.
std::vector<std::vector<double>> eigenvectors(const General& A, const double* D, const double* B,
                                              const std::vector<double>& lambda);

/// W-orthonormal eigenvectors of the symmetric pencil (T, W).
std::vector<std::vector<double>> eigenvectors(const Symmetric& T, const std::vector<double>& lambda,
                                              const double* weight = nullptr);

/// Solves (T - sigma) x = b by Gaussian elimination with partial pivoting.
/// Returns false when a pivot falls below `pivot_floor`.
bool solve(const Symmetric& T, double sigma, const double* b, double* x, double pivot_floor = 1e-300);

}  // namespace isoyamabe::tridiag
