#ifndef NORMAL_VV_IMPLIED_VOL_HPP
#define NORMAL_VV_IMPLIED_VOL_HPP

#include <array>
#include <cmath>
#include <numbers>

#include "bachelier.hpp"
#include "errors.hpp"

namespace normal_vv {

/// Rational approximation h(eta) = sqrt(eta) * A(eta) / B(eta) for the
/// straddle-based inversion of the Bachelier formula (Choi, Kim and Kwak).
struct InversionCoefficients {
    static constexpr std::array<double, 8> a = {
        3.994961687345134e-1, 2.100960795068497e+1, 4.980340217855084e+1,
        5.988761102690991e+2, 1.848489695437094e+3, 6.106322407867059e+3,
        2.493415285349361e+4, 1.266458051348246e+4,
    };
    static constexpr std::array<double, 10> b = {
        1.000000000000000e+0, 4.990534153589422e+1, 3.093573936743112e+1,
        1.495105008310999e+3, 1.323614537899738e+3, 1.598919697679745e+4,
        2.392008891720782e+4, 3.608817108375034e+3, -2.067719486400926e+2,
        1.174240599306013e+1,
    };
};

namespace detail {

template <std::size_t N>
constexpr double horner(const std::array<double, N>& c, double x) noexcept {
    double acc = c[N - 1];
    for (std::size_t k = N - 1; k-- > 0;)
        acc = acc * x + c[k];
    return acc;
}

inline bool is_atm(double forward, double strike) noexcept {
    constexpr double eps = 1e-14;
    return std::abs(forward - strike) <=
           eps * std::max(1.0, std::abs(forward) + std::abs(strike));
}

} // namespace detail

/// h(eta) for eta in (0, 1]; h(1) is 1 up to the approximation error.
inline double inversion_h(double eta) noexcept {
    using C = InversionCoefficients;
    return std::sqrt(eta) * detail::horner(C::a, eta) / detail::horner(C::b, eta);
}

/// Closed-form inversion at the money: sigma = C sqrt(2 pi / T) / DF.
inline double implied_normal_vol_atm(double price, const OptionSpec& spec) {
    spec.validate();
    if (spec.forward != spec.strike)
        throw DomainError("ATM inversion requires forward == strike");
    if (!(price > 0.0) || !std::isfinite(price))
        throw DomainError("ATM inversion requires a positive finite price");
    return price / spec.discount * std::sqrt(2.0 * std::numbers::pi / spec.expiry);
}

/// Implied Normal volatility of `price`, quoted for the option kind in `spec`.
///
/// The price is turned into an undiscounted straddle V = C + P via put-call
/// parity; the rational approximation in eta = theta / atanh(theta),
/// theta = (F - K) / V, gives a near machine-precision first guess which is
/// then polished by one Newton step on the out-of-the-money leg.
inline double implied_normal_vol(double price, const OptionSpec& spec) {
    spec.validate();
    if (!std::isfinite(price))
        throw ArbitrageViolation("option price is not finite");

    const double moneyness = spec.forward - spec.strike;
    const double payoff = spec.kind == OptionKind::Call ? moneyness : -moneyness;
    const double undiscounted = price / spec.discount;
    const double time_value = undiscounted - std::max(payoff, 0.0);
    if (!(time_value > 0.0))
        throw ArbitrageViolation("price does not exceed intrinsic value");

    const double straddle = 2.0 * time_value + std::abs(moneyness);
    const double scale = std::sqrt(std::numbers::pi / (2.0 * spec.expiry));

    double sigma;
    if (detail::is_atm(spec.forward, spec.strike)) {
        sigma = scale * straddle;
    } else {
        const double theta = moneyness / straddle;
        if (!(std::abs(theta) < 1.0))
            throw ArbitrageViolation("straddle ratio outside (-1, 1)");
        const double eta = theta / std::atanh(theta);
        sigma = scale * straddle * inversion_h(eta);
    }

    // Newton step on the OTM option, whose price carries all the information.
    const OptionSpec otm = spec.with_kind(moneyness > 0.0 ? OptionKind::Put : OptionKind::Call);
    const double sqrt_t = std::sqrt(spec.expiry);
    const double sd = sigma * sqrt_t;
    const double d = moneyness / sd;
    const double model = otm.kind == OptionKind::Call
                             ? moneyness * norm_cdf(d) + sd * norm_pdf(d)
                             : -moneyness * norm_cdf(-d) + sd * norm_pdf(d);
    const double vega = sqrt_t * norm_pdf(d);
    if (vega > 0.0) {
        const double polished = sigma - (model - time_value) / vega;
        if (polished > 0.0 && std::isfinite(polished))
            sigma = polished;
    }
    return sigma;
}

} // namespace normal_vv

#endif
