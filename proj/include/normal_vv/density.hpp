#ifndef NORMAL_VV_DENSITY_HPP
#define NORMAL_VV_DENSITY_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bachelier.hpp"
#include "errors.hpp"
#include "parallel.hpp"
#include "sabr.hpp"
#include "vanna_volga.hpp"

namespace normal_vv {

struct DensityDiagnostics {
    double integral = 0.0; // trapezoid over contiguous evaluated points
    double mean = 0.0;     // trapezoid of x f(x)
    double min_value = std::numeric_limits<double>::quiet_NaN();
    int modes = 0;
    std::size_t gaps = 0;
};

struct DensityGrid {
    std::vector<double> x;
    std::vector<std::optional<double>> density; // nullopt where the price function failed
    double delta = 0.0;
    std::string source;
    DensityDiagnostics diagnostics;
};

/// Strike -> undiscounted-or-discounted call price; nullopt marks an in-band failure.
using PriceFunction = std::function<std::optional<double>(double)>;

inline constexpr double plateau_tolerance = 1e-12;

namespace detail {

// Local maxima of one contiguous run, after merging neighbours that differ
// by at most `tol` into a single plateau. Endpoints count when they are
// higher than their only neighbour.
inline int count_modes(std::span<const double> f, double tol) {
    if (f.empty())
        return 0;
    std::vector<double> levels;
    for (double v : f)
        if (levels.empty() || std::abs(v - levels.back()) > tol)
            levels.push_back(v);
    if (levels.size() == 1)
        return 1;
    int modes = 0;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        const bool above_left = i == 0 || levels[i] > levels[i - 1];
        const bool above_right = i + 1 == levels.size() || levels[i] > levels[i + 1];
        modes += above_left && above_right;
    }
    return modes;
}

} // namespace detail

/// Integral, mean, minimum and mode count. Gaps split the grid into runs;
/// integrals skip intervals that touch a gap.
inline DensityDiagnostics density_diagnostics(const DensityGrid& g) {
    DensityDiagnostics d;
    double min_value = std::numeric_limits<double>::infinity();
    std::vector<double> run;
    const auto flush = [&] {
        d.modes += detail::count_modes(run, plateau_tolerance);
        run.clear();
    };
    for (std::size_t i = 0; i < g.x.size(); ++i) {
        if (!g.density[i]) {
            ++d.gaps;
            flush();
            continue;
        }
        const double f = *g.density[i];
        min_value = std::min(min_value, f);
        run.push_back(f);
        if (i > 0 && g.density[i - 1]) {
            const double h = g.x[i] - g.x[i - 1];
            const double f0 = *g.density[i - 1];
            d.integral += 0.5 * h * (f0 + f);
            d.mean += 0.5 * h * (g.x[i - 1] * f0 + g.x[i] * f);
        }
    }
    flush();
    if (std::isfinite(min_value))
        d.min_value = min_value;
    return d;
}

/// Second strike difference of call prices:
///   f(x) = [C(x + delta) + C(x - delta) - 2 C(x)] / (DF delta^2).
inline DensityGrid density_from_prices(const PriceFunction& price, double discount,
                                       std::span<const double> grid, double delta,
                                       std::string source = {}, unsigned threads = 1) {
    if (!(delta > 0.0) || !std::isfinite(delta))
        throw DomainError("density step delta must be positive");
    if (!(discount > 0.0) || !(discount <= 1.0))
        throw DomainError("discount factor must lie in (0, 1]");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw DomainError("density grid must be strictly increasing");

    DensityGrid out;
    out.x.assign(grid.begin(), grid.end());
    out.density.resize(grid.size());
    out.delta = delta;
    out.source = std::move(source);
    parallel_for(grid.size(), threads, [&](std::size_t i) {
        const double x = grid[i];
        const auto up = price(x + delta), mid = price(x), down = price(x - delta);
        if (up && mid && down)
            out.density[i] = (*up + *down - 2.0 * *mid) / (discount * delta * delta);
    });
    out.diagnostics = density_diagnostics(out);
    return out;
}

/// Default finite-difference step: a tenth of the grid spacing.
inline double default_density_delta(std::span<const double> grid) {
    if (grid.size() < 2)
        throw DomainError("density grid needs at least two points");
    return (grid[1] - grid[0]) / 10.0;
}

inline PriceFunction vv_price_function(const PivotSet& ps) {
    return [ps](double k) -> std::optional<double> { return vv_price(ps, k); };
}

inline PriceFunction sabr_price_function(const SABRParams& p, const MarketContext& m) {
    return [p, m](double k) -> std::optional<double> {
        const double vol = sabr_normal_vol(p, m.forward, m.expiry, k);
        if (!(vol > 0.0) || !std::isfinite(vol))
            return std::nullopt;
        return bachelier_call_price(m.option(k), vol);
    };
}

inline PriceFunction flat_price_function(double vol, const MarketContext& m) {
    return [vol, m](double k) -> std::optional<double> {
        return bachelier_call_price(m.option(k), vol);
    };
}

} // namespace normal_vv

#endif
