#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "mhdbl/errors.hpp"

namespace mhdbl {

// Fornberg's recursion: weights[i][m] is the weight of node i for the m-th
// derivative at x0, for m = 0..max_order.
inline std::vector<std::vector<double>> fornberg_weights(double x0, std::span<const double> nodes,
                                                         int max_order) {
    const std::size_t n = nodes.size();
    std::vector<std::vector<double>> c(n, std::vector<double>(max_order + 1, 0.0));
    double c1 = 1.0;
    double c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for (std::size_t i = 1; i < n; ++i) {
        const int mn = std::min<int>(static_cast<int>(i), max_order);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = nodes[i] - x0;
        for (std::size_t j = 0; j < i; ++j) {
            const double c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k)
                c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    return c;
}

struct StencilRow {
    int start = 0;
    int len = 0;
    std::array<double, 4> w{};

    template <class T>
    T apply(std::span<const T> f) const {
        T acc{};
        for (int m = 0; m < len; ++m) acc += w[m] * f[start + m];
        return acc;
    }
};

// First and second derivative rows on an arbitrary increasing node set.
// Interior rows are three-point centred; wall rows are one-sided, second
// order for both derivatives (four points for the second derivative).
struct Stencil1D {
    std::vector<StencilRow> d1;
    std::vector<StencilRow> d2;

    Stencil1D() = default;

    explicit Stencil1D(std::span<const double> z) {
        const int n = static_cast<int>(z.size());
        if (n < 3) throw DimensionError("stencil needs at least 3 nodes");
        d1.resize(n);
        d2.resize(n);
        auto make = [&](double x0, int start, int len, int order) {
            StencilRow r;
            r.start = start;
            r.len = len;
            auto w = fornberg_weights(x0, z.subspan(start, len), order);
            for (int m = 0; m < len; ++m) r.w[m] = w[m][order];
            return r;
        };
        const int wall_len2 = n >= 4 ? 4 : 3;
        for (int j = 0; j < n; ++j) {
            if (j == 0) {
                d1[j] = make(z[0], 0, 3, 1);
                d2[j] = make(z[0], 0, wall_len2, 2);
            } else if (j == n - 1) {
                d1[j] = make(z[j], n - 3, 3, 1);
                d2[j] = make(z[j], n - wall_len2, wall_len2, 2);
            } else {
                d1[j] = make(z[j], j - 1, 3, 1);
                d2[j] = make(z[j], j - 1, 3, 2);
            }
        }
    }

    int size() const { return static_cast<int>(d1.size()); }

    template <class T>
    void first(std::span<const T> f, std::span<T> out) const {
        for (int j = 0; j < size(); ++j) out[j] = d1[j].apply(f);
    }

    template <class T>
    void second(std::span<const T> f, std::span<T> out) const {
        for (int j = 0; j < size(); ++j) out[j] = d2[j].apply(f);
    }
};

} // namespace mhdbl
