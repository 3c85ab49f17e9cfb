#include "isoyamabe/kernels.hpp"

#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
#include <immintrin.h>

#include <cmath>

#define ISOYAMABE_AVX2 __attribute__((target("avx2,fma")))

namespace isoyamabe::kernels::detail {

namespace {

ISOYAMABE_AVX2 double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

ISOYAMABE_AVX2 void flux_apply_avx2(std::size_t n, const double* flux, const double* inv_mass, const double* s,
                                    const double* u, double* out) {
    if (n < 2) {
        kScalarTable.flux_apply(n, flux, inv_mass, s, u, out);
        return;
    }
    out[0] = inv_mass[0] * flux[1] * (u[0] - u[1]) + s[0] * u[0];
    std::size_t j = 1;
    for (; j + 4 < n; j += 4) {
        const __m256d uc = _mm256_loadu_pd(u + j);
        const __m256d ul = _mm256_loadu_pd(u + j - 1);
        const __m256d ur = _mm256_loadu_pd(u + j + 1);
        const __m256d fl = _mm256_loadu_pd(flux + j);
        const __m256d fr = _mm256_loadu_pd(flux + j + 1);
        __m256d acc = _mm256_mul_pd(fl, _mm256_sub_pd(uc, ul));
        acc = _mm256_fmadd_pd(fr, _mm256_sub_pd(uc, ur), acc);
        const __m256d r = _mm256_fmadd_pd(_mm256_loadu_pd(inv_mass + j), acc,
                                          _mm256_mul_pd(_mm256_loadu_pd(s + j), uc));
        _mm256_storeu_pd(out + j, r);
    }
    for (; j + 1 < n; ++j) {
        out[j] = inv_mass[j] * (flux[j] * (u[j] - u[j - 1]) + flux[j + 1] * (u[j] - u[j + 1])) + s[j] * u[j];
    }
    const std::size_t k = n - 1;
    out[k] = inv_mass[k] * flux[k] * (u[k] - u[k - 1]) + s[k] * u[k];
}

ISOYAMABE_AVX2 double dot_avx2(std::size_t n, const double* x, const double* y) {
    __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 8 <= n; j += 8) {
        a0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + j), _mm256_loadu_pd(y + j), a0);
        a1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + j + 4), _mm256_loadu_pd(y + j + 4), a1);
    }
    double acc = hsum(_mm256_add_pd(a0, a1));
    for (; j < n; ++j) acc += x[j] * y[j];
    return acc;
}

ISOYAMABE_AVX2 double weighted_dot_avx2(std::size_t n, const double* w, const double* x, const double* y) {
    __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 8 <= n; j += 8) {
        const __m256d p0 = _mm256_mul_pd(_mm256_loadu_pd(w + j), _mm256_loadu_pd(x + j));
        const __m256d p1 = _mm256_mul_pd(_mm256_loadu_pd(w + j + 4), _mm256_loadu_pd(x + j + 4));
        a0 = _mm256_fmadd_pd(p0, _mm256_loadu_pd(y + j), a0);
        a1 = _mm256_fmadd_pd(p1, _mm256_loadu_pd(y + j + 4), a1);
    }
    double acc = hsum(_mm256_add_pd(a0, a1));
    for (; j < n; ++j) acc += w[j] * x[j] * y[j];
    return acc;
}

ISOYAMABE_AVX2 void axpy_avx2(std::size_t n, double alpha, const double* x, double* y) {
    const __m256d a = _mm256_set1_pd(alpha);
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        _mm256_storeu_pd(y + j, _mm256_fmadd_pd(a, _mm256_loadu_pd(x + j), _mm256_loadu_pd(y + j)));
    }
    for (; j < n; ++j) y[j] += alpha * x[j];
}

ISOYAMABE_AVX2 double max_abs_avx2(std::size_t n, const double* x) {
    const __m256d sign = _mm256_set1_pd(-0.0);
    __m256d m = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) m = _mm256_max_pd(m, _mm256_andnot_pd(sign, _mm256_loadu_pd(x + j)));
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, m);
    double r = std::fmax(std::fmax(lanes[0], lanes[1]), std::fmax(lanes[2], lanes[3]));
    for (; j < n; ++j) r = std::fmax(r, std::fabs(x[j]));
    return r;
}

const Table kAvx2Table{flux_apply_avx2, dot_avx2, weighted_dot_avx2, axpy_avx2, max_abs_avx2};

}  // namespace

const Table* avx2_table() {
    __builtin_cpu_init();
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return &kAvx2Table;
    return nullptr;
}

}  // namespace isoyamabe::kernels::detail

#else

namespace isoyamabe::kernels::detail {
const Table* avx2_table() { return nullptr; }
}  // namespace isoyamabe::kernels::detail

#endif
