#ifndef NORMAL_VV_SABR_HPP
#define NORMAL_VV_SABR_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>

#include "errors.hpp"
#include "parallel.hpp"
#include "simplex.hpp"
#include "vanna_volga.hpp"

namespace normal_vv {

/// Normal SABR parameters; beta is fixed at zero.
struct SABRParams {
    double alpha = 0.0; // initial normal vol
    double nu = 0.0;    // vol of vol
    double rho = 0.0;

    void validate() const {
        if (!(alpha > 0.0) || !std::isfinite(alpha))
            throw DomainError("SABR alpha must be positive");
        if (!(nu >= 0.0) || !std::isfinite(nu))
            throw DomainError("SABR nu must be non-negative");
        if (!(rho > -1.0 && rho < 1.0))
            throw DomainError("SABR rho must lie in (-1, 1)");
    }
};

inline constexpr double sabr_series_threshold = 1e-6;

inline double sabr_x(double zeta, double rho) {
    const double s = std::sqrt(1.0 - 2.0 * rho * zeta + zeta * zeta);
    const double s_minus_1 = (zeta * zeta - 2.0 * rho * zeta) / (s + 1.0);
    if (zeta >= 0.0)
        return std::log1p((zeta + s_minus_1) / (1.0 - rho));
    return std::log1p((zeta - s_minus_1) / (s - zeta + rho));
}

/// zeta / x(zeta) with x(zeta) = log((sqrt(1 - 2 rho zeta + zeta^2) - rho + zeta) / (1 - rho)).
///
/// Small |zeta| uses the Taylor series. Otherwise x is evaluated through
/// log1p, with the argument rationalised on the negative side so that neither
/// branch subtracts nearly equal numbers.
inline double sabr_zeta_ratio(double zeta, double rho) {
    if (std::abs(zeta) < sabr_series_threshold)
        return 1.0 - 0.5 * rho * zeta + (2.0 - 3.0 * rho * rho) / 12.0 * zeta * zeta;
    return zeta / sabr_x(zeta, rho);
}

/// Normal SABR implied Normal vol
///   alpha * zeta / x(zeta) * (1 + (2 - 3 rho^2) / 24 * nu^2 T),
///   zeta = nu / alpha * (F - K).
inline double sabr_normal_vol(const SABRParams& p, double forward, double expiry, double strike) {
    p.validate();
    if (!(expiry > 0.0))
        throw DomainError("expiry must be positive");
    const double zeta = p.nu / p.alpha * (forward - strike);
    const double time_term = 1.0 + (2.0 - 3.0 * p.rho * p.rho) / 24.0 * p.nu * p.nu * expiry;
    return p.alpha * sabr_zeta_ratio(zeta, p.rho) * time_term;
}

inline constexpr double sabr_rho_bound = 0.999;
inline constexpr double sabr_nu_bound = 10.0;

struct SABRFit {
    SABRParams params;
    std::array<double, 3> residuals; // model minus quoted vol per pivot
    double max_abs_residual;
    double objective;                // sum of squared residuals
    int converged_starts;
};

struct SABRFitOptions {
    std::array<double, 4> nu_starts = {0.05, 0.3, 1.0, 3.0};
    std::array<double, 3> rho_starts = {-0.5, 0.0, 0.5};
    int restarts = 4;
    SimplexOptions simplex{};
};

/// Least-squares fit of (alpha, nu, rho) to three vol quotes.
///
/// Bounded Nelder-Mead from a deterministic grid of (nu, rho) starts with
/// alpha seeded from the pivot nearest the forward through the K = F closed
/// form. Each start is restarted from its own optimum a few times to shake
/// the simplex out of premature collapse.
inline SABRFit sabr_fit(const PivotQuotes& q, const SABRFitOptions& opt = {}) {
    q.validate();
    const auto& m = q.market;
    const auto& pv = q.pivots;

    const auto model_residuals = [&](const SABRParams& p) {
        std::array<double, 3> r{};
        for (std::size_t i = 0; i < 3; ++i)
            r[i] = sabr_normal_vol(p, m.forward, m.expiry, pv[i].strike) - pv[i].vol;
        return r;
    };
    const auto objective = [&](const Point<3>& x) {
        const SABRParams p{x[0], x[1], x[2]};
        const auto r = model_residuals(p);
        return r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
    };

    const Pivot atm = *std::min_element(pv.begin(), pv.end(), [&](const Pivot& a, const Pivot& b) {
        return std::abs(a.strike - m.forward) < std::abs(b.strike - m.forward);
    });
    double max_vol = 0.0;
    for (const auto& p : pv)
        max_vol = std::max(max_vol, p.vol);

    const Box<3> bounds{{1e-8 * atm.vol, 0.0, -sabr_rho_bound},
                        {100.0 * max_vol, sabr_nu_bound, sabr_rho_bound}};

    SABRFit best{};
    best.objective = std::numeric_limits<double>::infinity();
    int converged = 0;
    for (double nu0 : opt.nu_starts) {
        for (double rho0 : opt.rho_starts) {
            const double alpha0 =
                atm.vol / (1.0 + (2.0 - 3.0 * rho0 * rho0) / 24.0 * nu0 * nu0 * m.expiry);
            Point<3> x{alpha0, nu0, rho0};
            SimplexResult<3> res{};
            bool ok = false;
            for (int r = 0; r <= opt.restarts; ++r) {
                const Point<3> step{0.05 * x[0], std::max(0.05, 0.2 * x[1]), 0.1};
                res = nelder_mead<3>(objective, x, step, bounds, opt.simplex);
                ok = ok || res.converged;
                x = res.x;
            }
            if (ok)
                ++converged;
            if (res.value < best.objective) {
                best.params = {res.x[0], res.x[1], res.x[2]};
                best.objective = res.value;
            }
        }
    }
    if (converged == 0 || !std::isfinite(best.objective))
        throw CalibrationFailure("SABR fit did not converge from any start");

    best.converged_starts = converged;
    best.residuals = model_residuals(best.params);
    best.max_abs_residual = 0.0;
    for (double r : best.residuals)
        best.max_abs_residual = std::max(best.max_abs_residual, std::abs(r));
    return best;
}

inline SmileGrid sabr_smile_grid(const SABRParams& p, const MarketContext& m,
                                 std::span<const double> strikes, unsigned threads = 1) {
    SmileGrid grid{SmileMethod::SABR, std::numeric_limits<double>::quiet_NaN(),
                   std::vector<SmilePoint>(strikes.size())};
    parallel_for(strikes.size(), threads, [&](std::size_t i) {
        grid.points[i] = {strikes[i], SmileStatus::Ok,
                          sabr_normal_vol(p, m.forward, m.expiry, strikes[i])};
    });
    return grid;
}

} // namespace normal_vv

#endif
