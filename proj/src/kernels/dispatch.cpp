#include "isoyamabe/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace isoyamabe::kernels {

namespace {

struct Active {
    Backend backend;
    const Table* table;
};

Active pick_default() {
    if (const char* env = std::getenv("ISOYAMABE_KERNELS")) {
        const std::string want(env);
        for (Backend b : {Backend::Scalar, Backend::Avx2, Backend::Neon}) {
            if (want == backend_name(b) && table(b)) return {b, table(b)};
        }
    }
    if (const Table* t = detail::avx2_table()) return {Backend::Avx2, t};
    if (const Table* t = detail::neon_table()) return {Backend::Neon, t};
    return {Backend::Scalar, &detail::kScalarTable};
}

std::atomic<const Active*>& slot() {
    static const Active initial = pick_default();
    static std::atomic<const Active*> current{&initial};
    return current;
}

const Table& current() { return *slot().load(std::memory_order_acquire)->table; }

}  // namespace

const char* backend_name(Backend b) {
    switch (b) {
        case Backend::Scalar: return "scalar";
        case Backend::Avx2: return "avx2";
        case Backend::Neon: return "neon";
    }
    return "unknown";
}

const Table* table(Backend b) {
    switch (b) {
        case Backend::Scalar: return &detail::kScalarTable;
        case Backend::Avx2: return detail::avx2_table();
        case Backend::Neon: return detail::neon_table();
    }
    return nullptr;
}

bool backend_available(Backend b) { return table(b) != nullptr; }

Backend active_backend() { return slot().load(std::memory_order_acquire)->backend; }

void set_backend(Backend b) {
    static const Active choices[] = {{Backend::Scalar, table(Backend::Scalar)},
                                     {Backend::Avx2, table(Backend::Avx2)},
                                     {Backend::Neon, table(Backend::Neon)}};
    const Active& a = choices[static_cast<int>(b)];
    if (!a.table) throw std::invalid_argument(std::string("kernel backend not available: ") + backend_name(b));
    slot().store(&a, std::memory_order_release);
}

void flux_apply(std::size_t n, const double* flux, const double* inv_mass, const double* s, const double* u,
                double* out) {
    current().flux_apply(n, flux, inv_mass, s, u, out);
}
double dot(std::size_t n, const double* x, const double* y) { return current().dot(n, x, y); }
double weighted_dot(std::size_t n, const double* w, const double* x, const double* y) {
    return current().weighted_dot(n, w, x, y);
}
void axpy(std::size_t n, double alpha, const double* x, double* y) { current().axpy(n, alpha, x, y); }
double max_abs(std::size_t n, const double* x) { return current().max_abs(n, x); }

}  // namespace isoyamabe::kernels
