#include "isoyamabe/kernels.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)
#include <arm_neon.h>

#include <cmath>

namespace isoyamabe::kernels::detail {

namespace {

void flux_apply_neon(std::size_t n, const double* flux, const double* inv_mass, const double* s, const double* u,
                     double* out) {
    if (n < 2) {
        kScalarTable.flux_apply(n, flux, inv_mass, s, u, out);
        return;
    }
    out[0] = inv_mass[0] * flux[1] * (u[0] - u[1]) + s[0] * u[0];
    std::size_t j = 1;
    for (; j + 2 < n; j += 2) {
        const float64x2_t uc = vld1q_f64(u + j);
        float64x2_t acc = vmulq_f64(vld1q_f64(flux + j), vsubq_f64(uc, vld1q_f64(u + j - 1)));
        acc = vfmaq_f64(acc, vld1q_f64(flux + j + 1), vsubq_f64(uc, vld1q_f64(u + j + 1)));
        vst1q_f64(out + j, vfmaq_f64(vmulq_f64(vld1q_f64(s + j), uc), vld1q_f64(inv_mass + j), acc));
    }
    for (; j + 1 < n; ++j) {
        out[j] = inv_mass[j] * (flux[j] * (u[j] - u[j - 1]) + flux[j + 1] * (u[j] - u[j + 1])) + s[j] * u[j];
    }
    const std::size_t k = n - 1;
    out[k] = inv_mass[k] * flux[k] * (u[k] - u[k - 1]) + s[k] * u[k];
}

double dot_neon(std::size_t n, const double* x, const double* y) {
    float64x2_t a0 = vdupq_n_f64(0.0), a1 = vdupq_n_f64(0.0);
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        a0 = vfmaq_f64(a0, vld1q_f64(x + j), vld1q_f64(y + j));
        a1 = vfmaq_f64(a1, vld1q_f64(x + j + 2), vld1q_f64(y + j + 2));
    }
    double acc = vaddvq_f64(vaddq_f64(a0, a1));
    for (; j < n; ++j) acc += x[j] * y[j];
    return acc;
}

double weighted_dot_neon(std::size_t n, const double* w, const double* x, const double* y) {
    float64x2_t a0 = vdupq_n_f64(0.0);
    std::size_t j = 0;
    for (; j + 2 <= n; j += 2) {
        a0 = vfmaq_f64(a0, vmulq_f64(vld1q_f64(w + j), vld1q_f64(x + j)), vld1q_f64(y + j));
    }
    double acc = vaddvq_f64(a0);
    for (; j < n; ++j) acc += w[j] * x[j] * y[j];
    return acc;
}

void axpy_neon(std::size_t n, double alpha, const double* x, double* y) {
    const float64x2_t a = vdupq_n_f64(alpha);
    std::size_t j = 0;
    for (; j + 2 <= n; j += 2) vst1q_f64(y + j, vfmaq_f64(vld1q_f64(y + j), a, vld1q_f64(x + j)));
    for (; j < n; ++j) y[j] += alpha * x[j];
}

double max_abs_neon(std::size_t n, const double* x) {
    float64x2_t m = vdupq_n_f64(0.0);
    std::size_t j = 0;
    for (; j + 2 <= n; j += 2) m = vmaxq_f64(m, vabsq_f64(vld1q_f64(x + j)));
    double r = vmaxvq_f64(m);
    for (; j < n; ++j) r = std::fmax(r, std::fabs(x[j]));
    return r;
}

const Table kNeonTable{flux_apply_neon, dot_neon, weighted_dot_neon, axpy_neon, max_abs_neon};

}  // namespace

const Table* neon_table() { return &kNeonTable; }

}  // namespace isoyamabe::kernels::detail

#else

namespace isoyamabe::kernels::detail {
const Table* neon_table() { return nullptr; }
}  // namespace isoyamabe::kernels::detail

#endif
