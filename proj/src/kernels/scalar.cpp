#include "isoyamabe/kernels.hpp"

#include <cmath>

namespace isoyamabe::kernels::detail {

namespace {

void flux_apply_scalar(std::size_t n, const double* flux, const double* inv_mass, const double* s, const double* u,
                       double* out) {
    if (n == 0) return;
    if (n == 1) {
        out[0] = s[0] * u[0];
        return;
    }
    out[0] = inv_mass[0] * flux[1] * (u[0] - u[1]) + s[0] * u[0];
    for (std::size_t j = 1; j + 1 < n; ++j) {
        out[j] = inv_mass[j] * (flux[j] * (u[j] - u[j - 1]) + flux[j + 1] * (u[j] - u[j + 1])) + s[j] * u[j];
    }
    const std::size_t k = n - 1;
    out[k] = inv_mass[k] * flux[k] * (u[k] - u[k - 1]) + s[k] * u[k];
}

double dot_scalar(std::size_t n, const double* x, const double* y) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += x[j] * y[j];
    return acc;
}

double weighted_dot_scalar(std::size_t n, const double* w, const double* x, const double* y) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += w[j] * x[j] * y[j];
    return acc;
}

void axpy_scalar(std::size_t n, double alpha, const double* x, double* y) {
    for (std::size_t j = 0; j < n; ++j) y[j] += alpha * x[j];
}

double max_abs_scalar(std::size_t n, const double* x) {
    double m = 0.0;
    for (std::size_t j = 0; j < n; ++j) m = std::fmax(m, std::fabs(x[j]));
    return m;
}

}  // namespace

const Table kScalarTable{flux_apply_scalar, dot_scalar, weighted_dot_scalar, axpy_scalar, max_abs_scalar};

}  // namespace isoyamabe::kernels::detail
