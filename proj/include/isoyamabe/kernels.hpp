#pragma once

// Inner loops of the discrete operator and the Krylov-free iterations:
// scalar reference code plus SIMD variants selected at runtime.

#include <cstddef>

namespace isoyamabe::kernels {

enum class Backend { Scalar, Avx2, Neon };

const char* backend_name(Backend b);
bool backend_available(Backend b);

/// Backend used by the free functions below. Chosen from the CPU at first use;
/// ISOYAMABE_KERNELS=scalar|avx2|neon forces a choice.
Backend active_backend();
/// Throws std::invalid_argument when `b` is not available on this CPU.
void set_backend(Backend b);

/// out_j = inv_mass_j (F_j (u_j - u_{j-1}) + F_{j+1} (u_j - u_{j+1})) + s_j u_j,
/// with face fluxes F[0..n] and F[0] = F[n] treated as zero.
void flux_apply(std::size_t n, const double* flux, const double* inv_mass, const double* s, const double* u,
                double* out);
double dot(std::size_t n, const double* x, const double* y);
/// sum_j w_j x_j y_j
double weighted_dot(std::size_t n, const double* w, const double* x, const double* y);
/// y += alpha x
void axpy(std::size_t n, double alpha, const double* x, double* y);
double max_abs(std::size_t n, const double* x);

/// One backend's implementations, exposed for equivalence tests.
struct Table {
    void (*flux_apply)(std::size_t, const double*, const double*, const double*, const double*, double*);
    double (*dot)(std::size_t, const double*, const double*);
    double (*weighted_dot)(std::size_t, const double*, const double*, const double*);
    void (*axpy)(std::size_t, double, const double*, double*);
    double (*max_abs)(std::size_t, const double*);
};

/// nullptr when the backend is not compiled in or not supported by the CPU.
const Table* table(Backend b);

namespace detail {
extern const Table kScalarTable;
const Table* avx2_table();
const Table* neon_table();
}  // namespace detail

}  // namespace isoyamabe::kernels
