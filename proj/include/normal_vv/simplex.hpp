#ifndef NORMAL_VV_SIMPLEX_HPP
#define NORMAL_VV_SIMPLEX_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>

namespace normal_vv {

template <std::size_t N>
using Point = std::array<double, N>;

template <std::size_t N>
struct Box {
    Point<N> lower;
    Point<N> upper;

    Point<N> project(Point<N> x) const {
        for (std::size_t j = 0; j < N; ++j)
            x[j] = std::clamp(x[j], lower[j], upper[j]);
        return x;
    }
};

struct SimplexOptions {
    int max_iterations = 5000;
    double f_tolerance = 1e-28;  // absolute spread of f over the simplex
    double x_tolerance = 1e-14;  // relative spread of the vertices
};

template <std::size_t N>
struct SimplexResult {
    Point<N> x;
    double value;
    int iterations;
    bool converged;
};

/// Nelder-Mead with every trial point projected onto a box. Non-finite
/// objective values are treated as +inf.
template <std::size_t N, typename F>
SimplexResult<N> nelder_mead(F&& f, const Point<N>& start, const Point<N>& step,
                             const Box<N>& box, const SimplexOptions& opt = {}) {
    constexpr double reflect = 1.0, expand = 2.0, contract = 0.5, shrink = 0.5;
    const auto eval = [&](const Point<N>& x) {
        const double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    std::array<Point<N>, N + 1> x;
    std::array<double, N + 1> fx;
    x[0] = box.project(start);
    for (std::size_t i = 0; i < N; ++i) {
        x[i + 1] = x[0];
        x[i + 1][i] += step[i];
        x[i + 1] = box.project(x[i + 1]);
        // stepping into a bound collapses the simplex; go the other way
        if (x[i + 1][i] == x[0][i]) {
            x[i + 1][i] -= step[i];
            x[i + 1] = box.project(x[i + 1]);
        }
    }
    for (std::size_t i = 0; i <= N; ++i)
        fx[i] = eval(x[i]);

    std::array<std::size_t, N + 1> idx;
    int it = 0;
    bool converged = false;
    for (; it < opt.max_iterations; ++it) {
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return fx[a] < fx[b]; });
        const std::size_t best = idx[0], worst = idx[N], second = idx[N - 1];

        double spread = 0.0;
        for (std::size_t i = 1; i <= N; ++i)
            for (std::size_t j = 0; j < N; ++j)
                spread = std::max(spread, std::abs(x[idx[i]][j] - x[best][j]) /
                                              std::max(1.0, std::abs(x[best][j])));
        if (std::abs(fx[worst] - fx[best]) <= opt.f_tolerance || spread <= opt.x_tolerance) {
            converged = true;
            break;
        }

        Point<N> centroid{};
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j < N; ++j)
                centroid[j] += x[idx[i]][j] / static_cast<double>(N);

        const auto along = [&](double t) {
            Point<N> p;
            for (std::size_t j = 0; j < N; ++j)
                p[j] = centroid[j] + t * (x[worst][j] - centroid[j]);
            return box.project(p);
        };

        const Point<N> xr = along(-reflect);
        const double fr = eval(xr);
        if (fr < fx[best]) {
            const Point<N> xe = along(-expand);
            const double fe = eval(xe);
            if (fe < fr) {
                x[worst] = xe;
                fx[worst] = fe;
            } else {
                x[worst] = xr;
                fx[worst] = fr;
            }
            continue;
        }
        if (fr < fx[second]) {
            x[worst] = xr;
            fx[worst] = fr;
            continue;
        }
        // outside contraction if the reflection helped at all, inside otherwise
        const bool outside = fr < fx[worst];
        const Point<N> xc = along(outside ? -contract : contract);
        const double fc = eval(xc);
        if (fc < (outside ? fr : fx[worst])) {
            x[worst] = xc;
            fx[worst] = fc;
            continue;
        }
        for (std::size_t i = 1; i <= N; ++i) {
            auto& v = x[idx[i]];
            for (std::size_t j = 0; j < N; ++j)
                v[j] = x[best][j] + shrink * (v[j] - x[best][j]);
            v = box.project(v);
            fx[idx[i]] = eval(v);
        }
    }
    const auto best = static_cast<std::size_t>(std::min_element(fx.begin(), fx.end()) - fx.begin());
    return {x[best], fx[best], it, converged};
}

} // namespace normal_vv

#endif
