#pragma once

#include <array>
#include <cstddef>

namespace isoyamabe::quad {

inline constexpr std::size_t kGaussOrder = 16;

struct GaussRule {
    std::array<double, kGaussOrder> node{};    // on (-1, 1)
    std::array<double, kGaussOrder> weight{};
};

/// 16-point Gauss-Legendre rule, computed once by Newton iteration.
const GaussRule& gauss_legendre();

/// Integral of f over [lo, hi] with a single Gauss-Legendre panel.
template <class F>
double gauss_panel(F&& f, double lo, double hi) {
    const GaussRule& g = gauss_legendre();
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    double acc = 0.0;
    for (std::size_t i = 0; i < kGaussOrder; ++i) acc += g.weight[i] * f(mid + half * g.node[i]);
    return acc * half;
}

/// Composite Gauss-Legendre on `panels` equal panels of [lo, hi].
template <class F>
double gauss_composite(F&& f, double lo, double hi, std::size_t panels) {
    const double w = (hi - lo) / static_cast<double>(panels);
    double acc = 0.0;
    for (std::size_t k = 0; k < panels; ++k) {
        acc += gauss_panel(f, lo + w * static_cast<double>(k), lo + w * static_cast<double>(k + 1));
    }
    return acc;
}

}  // namespace isoyamabe::quad
