#ifndef NORMAL_VV_BACHELIER_HPP
#define NORMAL_VV_BACHELIER_HPP

#include <algorithm>
#include <cmath>

#include "errors.hpp"
#include "normal_distribution.hpp"

namespace normal_vv {

enum class OptionKind { Call, Put };

/// One European option on a forward. Strike, forward and normal vols all
/// share the same absolute units; negative forwards and strikes are fine.
struct OptionSpec {
    double forward = 0.0;
    double strike = 0.0;
    double expiry = 1.0;   // years
    double discount = 1.0; // P(0,T)
    OptionKind kind = OptionKind::Call;

    void validate() const {
        if (!std::isfinite(forward) || !std::isfinite(strike))
            throw DomainError("forward and strike must be finite");
        if (!(expiry > 0.0) || !std::isfinite(expiry))
            throw DomainError("expiry must be positive");
        if (!(discount > 0.0) || !(discount <= 1.0))
            throw DomainError("discount factor must lie in (0, 1]");
    }

    OptionSpec with_strike(double k) const {
        OptionSpec s = *this;
        s.strike = k;
        return s;
    }
    OptionSpec with_kind(OptionKind k) const {
        OptionSpec s = *this;
        s.kind = k;
        return s;
    }
};

struct GreekSet {
    double price = 0.0;
    double delta_forward = 0.0;
    double vega = 0.0;
    double gamma_forward = 0.0;
    double vanna_forward = 0.0;
    double volga = 0.0;
    double moneyness = 0.0;
};

namespace detail {
inline void check_vol(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw DomainError("normal volatility must be positive and finite");
}
} // namespace detail

/// Normal moneyness d = (F - K) / (sigma sqrt(T)).
inline double normal_moneyness(const OptionSpec& spec, double sigma) {
    return (spec.forward - spec.strike) / (sigma * std::sqrt(spec.expiry));
}

inline double intrinsic_value(const OptionSpec& spec) {
    const double payoff = spec.kind == OptionKind::Call ? spec.forward - spec.strike
                                                        : spec.strike - spec.forward;
    return spec.discount * std::max(payoff, 0.0);
}

/// Bachelier price of the option described by `spec`. The put branch uses the
/// mirrored closed form, which is the call formula shifted by DF (F - K).
inline double bachelier_price(const OptionSpec& spec, double sigma) {
    spec.validate();
    detail::check_vol(sigma);
    const double sd = sigma * std::sqrt(spec.expiry);
    const double d = (spec.forward - spec.strike) / sd;
    if (spec.kind == OptionKind::Call)
        return spec.discount * ((spec.forward - spec.strike) * norm_cdf(d) + sd * norm_pdf(d));
    return spec.discount * ((spec.strike - spec.forward) * norm_cdf(-d) + sd * norm_pdf(d));
}

inline double bachelier_call_price(const OptionSpec& spec, double sigma) {
    return bachelier_price(spec.with_kind(OptionKind::Call), sigma);
}

inline double bachelier_put_price(const OptionSpec& spec, double sigma) {
    return bachelier_price(spec.with_kind(OptionKind::Put), sigma);
}

/// Bachelier vega DF sqrt(T) phi(d).
inline double bachelier_vega(const OptionSpec& spec, double sigma) {
    spec.validate();
    detail::check_vol(sigma);
    return spec.discount * std::sqrt(spec.expiry) * norm_pdf(normal_moneyness(spec, sigma));
}

/// Price and forward Greeks. The second-order Greeks are written in terms of
/// vega: gamma = Y/(sigma T), volga = Y d^2/sigma, vanna = -Y d/(sqrt(T) sigma).
inline GreekSet bachelier_greeks(const OptionSpec& spec, double sigma) {
    spec.validate();
    detail::check_vol(sigma);
    const double sqrt_t = std::sqrt(spec.expiry);
    const double d = normal_moneyness(spec, sigma);
    GreekSet g;
    g.moneyness = d;
    g.price = bachelier_price(spec, sigma);
    g.delta_forward = spec.kind == OptionKind::Call ? spec.discount * norm_cdf(d)
                                                    : -spec.discount * norm_cdf(-d);
    g.vega = spec.discount * sqrt_t * norm_pdf(d);
    g.gamma_forward = g.vega / (sigma * spec.expiry);
    g.volga = g.vega * d * d / sigma;
    g.vanna_forward = -g.vega * d / (sqrt_t * sigma);
    return g;
}

/// Black-76 call, kept only as a lognormal reference for cross-checks.
inline double black76_call_price(const OptionSpec& spec, double sigma) {
    spec.validate();
    detail::check_vol(sigma);
    if (!(spec.forward > 0.0) || !(spec.strike > 0.0))
        throw DomainError("Black-76 requires positive forward and strike");
    const double sd = sigma * std::sqrt(spec.expiry);
    const double d_plus = (std::log(spec.forward / spec.strike) + 0.5 * sd * sd) / sd;
    const double d_minus = d_plus - sd;
    return spec.discount * (spec.forward * norm_cdf(d_plus) - spec.strike * norm_cdf(d_minus));
}

} // namespace normal_vv

#endif
