#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <span>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "mhdbl/errors.hpp"
#include "mhdbl/stencil.hpp"

namespace mhdbl {

inline constexpr double kQuadTol = 1e-12;

// Adaptive Gauss-Kronrod (15 points) on [a, b].
template <class F>
double integrate(F&& f, double a, double b, double tol = kQuadTol) {
    if (a == b) return 0.0;
    double err = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 10, tol, &err);
    if (!std::isfinite(v)) throw SolverError("non-finite integrand");
    return v;
}

// Central finite-difference weights on 9 equispaced points, eighth order.
inline const std::array<std::array<double, 9>, 4>& central_weights() {
    static const auto table = [] {
        std::array<double, 9> x{};
        for (int m = 0; m < 9; ++m) x[m] = m - 4;
        auto w = fornberg_weights(0.0, x, 3);
        std::array<std::array<double, 9>, 4> t{};
        for (int d = 0; d <= 3; ++d)
            for (int m = 0; m < 9; ++m) t[d][m] = w[m][d];
        return t;
    }();
    return table;
}

inline constexpr double kDiffStep = 0.02;

// d^order f / dz^order at z0 by central differencing. f must be defined on
// [z0 - 4h, z0 + 4h], so closures are expected to extend smoothly past the walls.
inline double derivative(const std::function<double(double)>& f, double z0, int order, double h = kDiffStep) {
    if (order == 0) return f(z0);
    if (order < 0 || order > 3) throw ConfigError("derivative order must be 0..3");
    const auto& w = central_weights()[order];
    double acc = 0.0;
    for (int m = 0; m < 9; ++m) acc += w[m] * f(z0 + (m - 4) * h);
    return acc / std::pow(h, order);
}

// Vector-valued variant: f fills a buffer of n values at a given z.
template <class T, class F>
void derivative_vec(F&& f, double z0, int order, std::span<T> out, double h = kDiffStep) {
    const auto& w = central_weights()[order];
    std::vector<T> buf(out.size());
    std::fill(out.begin(), out.end(), T{});
    for (int m = 0; m < 9; ++m) {
        if (w[m] == 0.0) continue;
        f(z0 + (m - 4) * h, std::span<T>(buf));
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += w[m] * buf[i];
    }
    const double s = std::pow(h, order);
    for (auto& v : out) v /= s;
}

} // namespace mhdbl
