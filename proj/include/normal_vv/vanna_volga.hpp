#ifndef NORMAL_VV_VANNA_VOLGA_HPP
#define NORMAL_VV_VANNA_VOLGA_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bachelier.hpp"
#include "errors.hpp"
#include "implied_vol.hpp"
#include "parallel.hpp"
#include "root_finding.hpp"

namespace normal_vv {

/// Forward, expiry and discount shared by every option on one smile.
struct MarketContext {
    double forward = 0.0;
    double expiry = 1.0;
    double discount = 1.0;

    OptionSpec option(double strike, OptionKind kind = OptionKind::Call) const {
        return OptionSpec{forward, strike, expiry, discount, kind};
    }
    /// Option on the out-of-the-money side of `strike` (call at the money).
    OptionSpec otm_option(double strike) const {
        return option(strike, strike >= forward ? OptionKind::Call : OptionKind::Put);
    }
    void validate() const { option(forward).validate(); }
};

struct Pivot {
    double strike;
    double vol;
};

/// Three market quotes with strictly increasing strikes.
struct PivotQuotes {
    MarketContext market;
    std::array<Pivot, 3> pivots;

    void validate() const {
        market.validate();
        for (const auto& p : pivots)
            if (!(p.vol > 0.0) || !std::isfinite(p.vol) || !std::isfinite(p.strike))
                throw DomainError("pivot vols must be positive and finite");
        if (!(pivots[0].strike < pivots[1].strike && pivots[1].strike < pivots[2].strike))
            throw DomainError("pivot strikes must be strictly increasing");
    }
};

/// Pivot quotes plus the flat reference vol the VV expansion is built around.
/// Without an explicit reference the middle pivot vol is used.
struct PivotSet {
    PivotQuotes quotes;
    double reference_vol;

    PivotSet(PivotQuotes q, std::optional<double> reference = std::nullopt)
        : quotes(q), reference_vol(reference.value_or(q.pivots[1].vol)) {
        validate();
    }

    const MarketContext& market() const noexcept { return quotes.market; }
    const Pivot& pivot(std::size_t i) const noexcept { return quotes.pivots[i]; }

    void validate() const {
        quotes.validate();
        if (!(reference_vol > 0.0) || !std::isfinite(reference_vol))
            throw DomainError("reference vol must be positive and finite");
    }
};

struct VVWeights {
    double target_strike;
    std::array<double, 3> w;  // hedge quantities
    std::array<double, 3> y;  // strike-only interpolation weights
    double target_moneyness;
    std::array<double, 3> moneyness;
    double target_vega;
    std::array<double, 3> vega;
};

/// Lagrange basis weights of the quadratic through the three pivot strikes.
inline std::array<double, 3> interpolation_weights(const std::array<Pivot, 3>& p, double k0) {
    const double k1 = p[0].strike, k2 = p[1].strike, k3 = p[2].strike;
    if (!(k1 != k2 && k2 != k3 && k1 != k3))
        throw DomainError("pivot strikes must be distinct");
    return {
        (k2 - k0) * (k3 - k0) / ((k2 - k1) * (k3 - k1)),
        (k1 - k0) * (k3 - k0) / ((k1 - k2) * (k3 - k2)),
        (k1 - k0) * (k2 - k0) / ((k1 - k3) * (k2 - k3)),
    };
}

/// Hedge weights making the portfolio vega, vanna and volga neutral at the
/// reference vol. The Cramer solution reduces to w_i = (Y0 / Y_i) y_i.
inline VVWeights vv_weights(const PivotSet& ps, double k0) {
    ps.validate();
    const auto& m = ps.market();
    const double sigma = ps.reference_vol;
    VVWeights out{};
    out.target_strike = k0;
    out.y = interpolation_weights(ps.quotes.pivots, k0);
    out.target_moneyness = normal_moneyness(m.option(k0), sigma);
    out.target_vega = bachelier_vega(m.option(k0), sigma);
    for (std::size_t i = 0; i < 3; ++i) {
        const auto opt = m.option(ps.pivot(i).strike);
        out.moneyness[i] = normal_moneyness(opt, sigma);
        out.vega[i] = bachelier_vega(opt, sigma);
        out.w[i] = out.target_vega / out.vega[i] * out.y[i];
    }
    return out;
}

/// First-order VV smile: the quadratic through the pivots. Does not depend
/// on the reference vol.
inline double vv_smile_first_order(const PivotQuotes& q, double k0) {
    q.validate();
    const auto y = interpolation_weights(q.pivots, k0);
    return y[0] * q.pivots[0].vol + y[1] * q.pivots[1].vol + y[2] * q.pivots[2].vol;
}

inline double vv_smile_first_order(const PivotSet& ps, double k0) {
    return vv_smile_first_order(ps.quotes, k0);
}

/// Second-order VV smile. Solves
///   d0^2/(2s) u^2 + u - (P + Q/(2s)) = 0,  u = sigma0 - s,
/// for the root that is continuous through d0 = 0, written in the
/// rationalised form u = X / (s + sqrt(s^2 + d0^2 X)), X = 2 s P + Q.
inline double vv_smile_second_order(const PivotSet& ps, double k0) {
    const VVWeights wts = vv_weights(ps, k0);
    const double s = ps.reference_vol;
    double first = 0.0, q = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        const double dv = ps.pivot(i).vol - s;
        first += wts.y[i] * ps.pivot(i).vol;
        q += wts.y[i] * wts.moneyness[i] * wts.moneyness[i] * dv * dv;
    }
    const double p = first - s;
    const double x = 2.0 * s * p + q;
    const double d0 = wts.target_moneyness;
    const double disc = s * s + d0 * d0 * x;
    if (disc < 0.0)
        throw NegativeDiscriminant(k0, disc);
    return s + x / (s + std::sqrt(disc));
}

namespace detail {

/// C_mkt - C at one pivot, taken on the pivot's OTM leg. Call and put legs
/// give the same difference by parity.
inline double pivot_premium(const PivotSet& ps, std::size_t i) {
    const auto opt = ps.market().otm_option(ps.pivot(i).strike);
    return bachelier_price(opt, ps.pivot(i).vol) - bachelier_price(opt, ps.reference_vol);
}

} // namespace detail

/// VV market price C0 + sum w_i (C_i,mkt - C_i) of a call (or put) struck at k0.
/// May fall below intrinsic value; callers decide what to do with that.
inline double vv_price(const PivotSet& ps, double k0, OptionKind kind = OptionKind::Call) {
    const VVWeights wts = vv_weights(ps, k0);
    double correction = 0.0;
    for (std::size_t i = 0; i < 3; ++i)
        correction += wts.w[i] * detail::pivot_premium(ps, i);
    return bachelier_price(ps.market().option(k0, kind), ps.reference_vol) + correction;
}

enum class SmileStatus { Ok, FailedBelowIntrinsic, FailedNegativeDiscriminant };

inline const char* to_string(SmileStatus s) noexcept {
    switch (s) {
    case SmileStatus::Ok:
        return "ok";
    case SmileStatus::FailedBelowIntrinsic:
        return "failed_below_intrinsic";
    case SmileStatus::FailedNegativeDiscriminant:
        return "failed_negative_discriminant";
    }
    return "unknown";
}

struct ExactSmile {
    SmileStatus status;
    double vol;    // NaN unless status == Ok
    double price;  // VV call price at the target strike

    bool ok() const noexcept { return status == SmileStatus::Ok; }
};

/// Exact VV smile: the Normal vol implied by the VV price. The price is
/// evaluated and inverted on the OTM leg of the target strike.
inline ExactSmile vv_smile_exact(const PivotSet& ps, double k0) {
    const auto& m = ps.market();
    const OptionSpec otm = m.otm_option(k0);
    const double otm_price = vv_price(ps, k0, otm.kind);
    const double call_price = otm.kind == OptionKind::Call
                                  ? otm_price
                                  : otm_price + m.discount * (m.forward - k0);
    if (!(otm_price > 0.0))
        return {SmileStatus::FailedBelowIntrinsic, std::numeric_limits<double>::quiet_NaN(),
                call_price};
    try {
        return {SmileStatus::Ok, implied_normal_vol(otm_price, otm), call_price};
    } catch (const ArbitrageViolation&) {
        return {SmileStatus::FailedBelowIntrinsic, std::numeric_limits<double>::quiet_NaN(),
                call_price};
    }
}

struct RiskResiduals {
    double vega;   // |Y0 - sum w_i Y_i|
    double vanna;  // |Y0 d0 - sum w_i Y_i d_i|
    double volga;  // |Y0 d0^2 - sum w_i Y_i d_i^2|
    double target_vega;

    double max_relative() const noexcept {
        return std::max({vega, vanna, volga}) / target_vega;
    }
};

/// Residuals of the three risk-elimination constraints for the computed weights.
inline RiskResiduals verify_risk_elimination(const PivotSet& ps, double k0) {
    const VVWeights v = vv_weights(ps, k0);
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        const double wy = v.w[i] * v.vega[i];
        s0 += wy;
        s1 += wy * v.moneyness[i];
        s2 += wy * v.moneyness[i] * v.moneyness[i];
    }
    const double d0 = v.target_moneyness;
    return {std::abs(v.target_vega - s0), std::abs(v.target_vega * d0 - s1),
            std::abs(v.target_vega * d0 * d0 - s2), v.target_vega};
}

struct ReferenceCalibration {
    double reference_vol;
    double residual;     // VV-exact vol minus quoted vol at the fourth strike
    double bracket_lo;
    double bracket_hi;
    bool expanded;       // the default bracket had to be widened
};

struct ReferenceCalibrationOptions {
    double lo_factor = 0.2;       // bracket lower end = lo_factor * min pivot vol
    double hi_factor = 5.0;       // bracket upper end = hi_factor * max pivot vol
    double expansion = 2.0;       // one-time widening factor
    int scan_points = 64;
    double tolerance = 1e-8;
};

/// Reference vol at which VV-exact passes through a fourth quote.
///
/// The bracket is scanned on a log grid and the first sign change of the
/// residual (lowest vol first) is refined with TOMS 748. Several roots can
/// exist; the lowest-vol bracket wins. Points where the VV construction fails
/// are skipped by the scan.
inline ReferenceCalibration calibrate_reference_vol(const PivotQuotes& q, Pivot fourth,
                                                    const ReferenceCalibrationOptions& opt = {}) {
    q.validate();
    if (!(fourth.vol > 0.0) || !std::isfinite(fourth.vol))
        throw DomainError("fourth quote vol must be positive");
    for (const auto& p : q.pivots)
        if (p.strike == fourth.strike)
            throw DomainError("fourth quote strike coincides with a pivot");

    const auto residual = [&](double ref) {
        const ExactSmile s = vv_smile_exact(PivotSet(q, ref), fourth.strike);
        return s.ok() ? s.vol - fourth.vol : std::numeric_limits<double>::quiet_NaN();
    };

    double min_vol = q.pivots[0].vol, max_vol = q.pivots[0].vol;
    for (const auto& p : q.pivots) {
        min_vol = std::min(min_vol, p.vol);
        max_vol = std::max(max_vol, p.vol);
    }
    double lo = opt.lo_factor * min_vol, hi = opt.hi_factor * max_vol;

    for (int attempt = 0; attempt < 2; ++attempt) {
        const int n = std::max(2, opt.scan_points);
        double prev_x = lo, prev_r = residual(lo);
        for (int i = 1; i < n; ++i) {
            const double x = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
            const double r = residual(x);
            const bool straddles = std::isfinite(prev_r) && std::isfinite(r) &&
                                   (prev_r == 0.0 || r == 0.0 || (prev_r < 0.0) != (r < 0.0));
            if (straddles) {
                try {
                    const auto root = solve_bracketed(residual, prev_x, x, prev_r, r);
                    const double res = residual(root.root);
                    if (std::isfinite(res) && std::abs(res) <= opt.tolerance)
                        return {root.root, res, lo, hi, attempt > 0};
                } catch (const std::exception&) {
                    // construction failed inside the sub-bracket; keep scanning
                }
            }
            prev_x = x;
            prev_r = r;
        }
        if (attempt == 0) {
            lo /= opt.expansion;
            hi *= opt.expansion;
        }
    }
    throw NoRoot("no sign change of the VV residual over the reference-vol bracket", lo, hi,
                 residual(lo), residual(hi));
}

// --- grids -----------------------------------------------------------------

enum class SmileMethod { VVExact, VVFirst, VVSecond, SABR };

inline const char* to_string(SmileMethod m) noexcept {
    switch (m) {
    case SmileMethod::VVExact:
        return "vv-exact";
    case SmileMethod::VVFirst:
        return "vv-first";
    case SmileMethod::VVSecond:
        return "vv-second";
    case SmileMethod::SABR:
        return "sabr";
    }
    return "unknown";
}

struct SmilePoint {
    double strike;
    SmileStatus status;
    double vol; // NaN unless ok
};

struct SmileGrid {
    SmileMethod method;
    double reference_vol; // NaN when the method does not use one
    std::vector<SmilePoint> points;
};

/// Uniform grid min, min + step, ..., up to max (inclusive within step/1e9).
inline std::vector<double> uniform_grid(double min, double max, double step) {
    if (!(step > 0.0) || !(min < max) || !std::isfinite(min) || !std::isfinite(max))
        throw DomainError("grid needs min < max and step > 0");
    const auto n = static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
    std::vector<double> xs(n);
    for (std::size_t i = 0; i < n; ++i)
        xs[i] = min + static_cast<double>(i) * step;
    return xs;
}

/// VV smile on a strike grid for one construction method.
inline SmileGrid vv_smile_grid(const PivotSet& ps, std::span<const double> strikes,
                               SmileMethod method, unsigned threads = 1) {
    if (method == SmileMethod::SABR)
        throw DomainError("vv_smile_grid does not handle SABR");
    SmileGrid grid{method,
                   method == SmileMethod::VVFirst ? std::numeric_limits<double>::quiet_NaN()
                                                  : ps.reference_vol,
                   std::vector<SmilePoint>(strikes.size())};
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    parallel_for(strikes.size(), threads, [&](std::size_t i) {
        const double k = strikes[i];
        SmilePoint& pt = grid.points[i];
        pt = {k, SmileStatus::Ok, nan};
        switch (method) {
        case SmileMethod::VVFirst:
            pt.vol = vv_smile_first_order(ps, k);
            break;
        case SmileMethod::VVSecond:
            try {
                pt.vol = vv_smile_second_order(ps, k);
            } catch (const NegativeDiscriminant&) {
                pt.status = SmileStatus::FailedNegativeDiscriminant;
            }
            break;
        case SmileMethod::VVExact: {
            const ExactSmile s = vv_smile_exact(ps, k);
            pt.status = s.status;
            pt.vol = s.vol;
            break;
        }
        case SmileMethod::SABR:
            break;
        }
    });
    return grid;
}

} // namespace normal_vv

#endif
