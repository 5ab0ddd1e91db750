// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. Usage: acceptance <path-to-normal_vv_cli>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "normal_vv/normal_vv.hpp"
#include "oracles.hpp"

using namespace normal_vv;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

const MarketContext unit_market{0.0, 1.0, 1.0};

PivotQuotes quotes(double v1, double v2, double v3) {
    return {unit_market, {{{-50.0, v1}, {0.0, v2}, {50.0, v3}}}};
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

// 1. Greeks vs central finite differences; put-call parity.
Outcome pricing_and_greeks() {
    oracle::Rng rng(20181001);
    double worst = 0.0, worst_parity = 0.0;
    for (int n = 0; n < 1000; ++n) {
        const double sigma = rng.uniform(1.0, 200.0), t = rng.uniform(0.05, 10.0);
        const double f = rng.uniform(-100.0, 100.0), df = rng.uniform(0.3, 1.0);
        const double sd = sigma * std::sqrt(t);
        const double k = f + rng.uniform(-3.0, 3.0) * sd;
        const OptionSpec s{f, k, t, df, OptionKind::Call};
        const GreekSet g = bachelier_greeks(s, sigma);

        const auto by_f = [&](double x) { return bachelier_call_price(OptionSpec{x, k, t, df}, sigma); };
        const auto by_v = [&](double v) { return bachelier_call_price(s, v); };
        const auto by_fv = [&](double x, double v) { return bachelier_call_price(OptionSpec{x, k, t, df}, v); };
        const double hf = 0.02 * sd, hv = 0.02 * sigma;

        // each Greek is compared relative to max(|Greek|, its at-the-money scale)
        const double sqrt_t = std::sqrt(t);
        const std::array<std::array<double, 3>, 5> checks{{
            {oracle::diff1(by_f, f, hf), g.delta_forward, df},
            {oracle::diff1(by_v, sigma, hv), g.vega, df * sqrt_t * inv_sqrt_2pi},
            {oracle::diff2(by_f, f, hf), g.gamma_forward, df * inv_sqrt_2pi / sd},
            {oracle::diff2(by_v, sigma, hv), g.volga, df * sqrt_t * inv_sqrt_2pi / sigma},
            {oracle::diff_xy(by_fv, f, sigma, hf, hv), g.vanna_forward, df * inv_sqrt_2pi / sigma},
        }};
        for (const auto& [fd, analytic, scale] : checks)
            worst = std::max(worst, std::abs(fd - analytic) / std::max(std::abs(analytic), scale));

        const double c = g.price, p = bachelier_put_price(s, sigma);
        worst_parity = std::max(worst_parity, std::abs(c - p - df * (f - k)) / std::max({1.0, c, p}));
    }
    return {worst <= 1e-6 && worst_parity <= 1e-13,
            fmt("max greek rel err %.3g (tol 1e-6), parity %.3g (tol 1e-13)", worst, worst_parity)};
}

// 2. Inversion round trip, each strike quoted on its OTM leg.
Outcome inversion_round_trip() {
    double worst = 0.0;
    int count = 0;
    for (double sigma : {1.0, 5.0, 25.0, 50.0, 100.0, 500.0})
        for (double t : {0.05, 0.25, 1.0, 5.0, 30.0})
            for (int i = -600; i <= 600; ++i) {
                const double d = i / 100.0, f = 0.7;
                const double k = f - d * sigma * std::sqrt(t);
                const OptionSpec s{f, k, t, 1.0, k >= f ? OptionKind::Call : OptionKind::Put};
                const double v = implied_normal_vol(bachelier_price(s, sigma), s);
                worst = std::max(worst, std::abs(v - sigma) / sigma);
                ++count;
            }
    return {worst <= 1e-10, fmt("%g points, max rel err %.3g (tol 1e-10)", count, worst)};
}

// 3. Weight system residuals and agreement with a generic 3x3 solve.
Outcome weight_system() {
    oracle::Rng rng(424242);
    double worst_res = 0.0, worst_solve = 0.0;
    for (int n = 0; n < 1000; ++n) {
        const double sigma = rng.uniform(10.0, 100.0);
        const MarketContext m{rng.uniform(-50, 50), rng.uniform(0.1, 5), rng.uniform(0.5, 1)};
        const double sd = sigma * std::sqrt(m.expiry);
        const double k1 = m.forward + rng.uniform(-2.0, -0.5) * sd;
        const double k2 = m.forward + rng.uniform(-0.3, 0.3) * sd;
        const double k3 = m.forward + rng.uniform(0.5, 2.0) * sd;
        const double k0 = m.forward + rng.uniform(-2.5, 2.5) * sd;
        const PivotSet ps({m, {{{k1, rng.uniform(20, 80)}, {k2, rng.uniform(20, 80)}, {k3, rng.uniform(20, 80)}}}},
                          sigma);
        worst_res = std::max(worst_res, verify_risk_elimination(ps, k0).max_relative());

        const auto w = vv_weights(ps, k0);
        std::array<std::array<double, 3>, 3> a{};
        const double y0 = m.discount * std::sqrt(m.expiry) * oracle::normal_pdf((m.forward - k0) / sd, 0, 1);
        const double d0 = (m.forward - k0) / sd;
        for (int i = 0; i < 3; ++i) {
            const double di = (m.forward - ps.pivot(i).strike) / sd;
            const double yi = m.discount * std::sqrt(m.expiry) * oracle::normal_pdf(di, 0, 1);
            a[0][i] = yi;
            a[1][i] = yi * di;
            a[2][i] = yi * di * di;
        }
        const auto ref = oracle::solve3(a, {y0, y0 * d0, y0 * d0 * d0});
        const double scale = std::max({1.0, std::abs(ref[0]), std::abs(ref[1]), std::abs(ref[2])});
        for (int i = 0; i < 3; ++i)
            worst_solve = std::max(worst_solve, std::abs(w.w[i] - ref[i]) / scale);
    }
    return {worst_res <= 1e-12 && worst_solve <= 1e-12,
            fmt("max residual/Y0 %.3g, max |w - solve| %.3g (tol 1e-12)", worst_res, worst_solve)};
}

// 4. Interpolation at pivots for all three constructions.
Outcome interpolation() {
    double first = 0.0, second = 0.0, exact = 0.0;
    for (const auto& q : {quotes(51, 50, 52), quotes(48, 50, 49), quotes(45, 50, 45), quotes(70, 50, 40)})
        for (double ref : {30.0, 40.0, 50.0, 60.0}) {
            const PivotSet ps(q, ref);
            for (const auto& p : q.pivots) {
                first = std::max(first, std::abs(vv_smile_first_order(ps, p.strike) - p.vol));
                second = std::max(second, std::abs(vv_smile_second_order(ps, p.strike) - p.vol));
                const auto e = vv_smile_exact(ps, p.strike);
                exact = std::max(exact, e.ok() ? std::abs(e.vol - p.vol) : INFINITY);
            }
        }
    return {first <= 1e-12 && second <= 1e-9 && exact <= 1e-9,
            fmt("first %.3g (tol 1e-12), second %.3g, exact %.3g (tol 1e-9)", first, second, exact)};
}

// 5. Convex scenario: VV-exact vs SABR inside the pivots; wings rise with the reference vol.
Outcome convex_scenario() {
    const auto q = quotes(51, 50, 52);
    const SABRFit fit = sabr_fit(q);
    double worst = 0.0;
    bool monotone = true;
    std::array<double, 2> prev_wing{-INFINITY, -INFINITY};
    for (double ref : {40.0, 45.0, 50.0, 55.0, 60.0}) {
        const PivotSet ps(q, ref);
        for (double k : uniform_grid(-50, 50, 1)) {
            const auto e = vv_smile_exact(ps, k);
            worst = std::max(worst, e.ok() ? std::abs(e.vol - sabr_normal_vol(fit.params, 0, 1, k)) : INFINITY);
        }
        const std::array<double, 2> wing{vv_smile_exact(ps, -150).vol, vv_smile_exact(ps, 150).vol};
        for (int s = 0; s < 2; ++s) {
            monotone = monotone && std::isfinite(wing[s]) && wing[s] > prev_wing[s];
            prev_wing[s] = wing[s];
        }
    }
    return {worst <= 0.5 && monotone,
            fmt("max |VV - SABR| on [-50,50] %.3g (tol 0.5); wings increasing in reference: ", worst) +
                (monotone ? "yes" : "no")};
}

// 6. Frown scenario.
Outcome frown_scenario() {
    const auto q = quotes(48, 50, 49);
    const SABRFit fit = sabr_fit(q);
    double pivot_err = 0.0;
    for (double ref : {40.0, 50.0, 60.0})
        for (const auto& p : q.pivots) {
            const auto e = vv_smile_exact(PivotSet(q, ref), p.strike);
            pivot_err = std::max(pivot_err, e.ok() ? std::abs(e.vol - p.vol) : INFINITY);
        }
    const auto strikes = uniform_grid(-150, 150, 1);
    const auto high = vv_smile_grid(PivotSet(q, 60.0), strikes, SmileMethod::VVExact);
    const auto low = vv_smile_grid(PivotSet(q, 40.0), strikes, SmileMethod::VVExact);
    bool high_fails_wide = false;
    for (const auto& p : high.points)
        high_fails_wide = high_fails_wide || (p.status == SmileStatus::FailedBelowIntrinsic && std::abs(p.strike) >= 100);
    int low_failures = 0;
    for (const auto& p : low.points)
        low_failures += p.status != SmileStatus::Ok;
    const bool pass = fit.max_abs_residual >= 0.1 && pivot_err <= 1e-9 && high_fails_wide && low_failures == 0;
    return {pass, fmt("SABR residual %.3g (>= 0.1), VV pivot err %.3g (tol 1e-9), ref-40 failures %g", fit.max_abs_residual,
                      pivot_err, low_failures) +
                      (high_fails_wide ? ", ref-60 fails at |K| >= 100" : ", ref-60 complete")};
}

// 7. Densities.
Outcome densities() {
    const auto xs = uniform_grid(-200, 200, 1);
    const auto flat = density_from_prices(flat_price_function(50.0, unit_market), 1.0, xs, 0.01);
    double flat_err = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i)
        flat_err = std::max(flat_err, std::abs(*flat.density[i] - oracle::normal_pdf(xs[i], 0.0, 50.0)));

    const auto s3 = density_from_prices(vv_price_function(PivotSet(quotes(48, 50, 49), 40.0)), 1.0, xs,
                                        default_density_delta(xs));
    const auto s4 = density_from_prices(vv_price_function(PivotSet(quotes(45, 50, 45), 30.0)), 1.0, xs,
                                        default_density_delta(xs));
    const bool pass = flat_err <= 1e-6 && s3.diagnostics.min_value >= 0.0 && s4.diagnostics.modes == 2 &&
                      std::abs(s4.diagnostics.integral - 1.0) <= 1e-3;
    return {pass, fmt("flat sup err %.3g (tol 1e-6), scenario-3 min %.3g (>= 0), ", flat_err, s3.diagnostics.min_value) +
                      fmt("scenario-4 modes %g (== 2), integral %.6f (|.-1| <= 1e-3)", s4.diagnostics.modes,
                          s4.diagnostics.integral)};
}

// 8. Four-pivot calibration.
Outcome calibration() {
    const auto q = quotes(51, 50, 52);
    const auto planted = vv_smile_exact(PivotSet(q, 55.0), 100.0);
    const auto c = calibrate_reference_vol(q, {100.0, planted.vol});
    const double err = std::abs(c.reference_vol - 55.0);
    return {err <= 1e-6, fmt("recovered %.12g, |err| %.3g (tol 1e-6)", c.reference_vol, err)};
}

// 9. SABR convexity on the bundled scenario grids (fitted models) and the
// round-trip model; self-calibration of the round-trip model.
Outcome sabr_checks() {
    struct Case {
        std::string name;
        SABRParams params;
        double lo, hi;
    };
    const SABRParams truth{50, 0.6, 0.2};
    const std::vector<Case> cases{
        {"scenario 1 fit", sabr_fit(quotes(51, 50, 52)).params, -150, 150},
        {"scenario 2 fit", sabr_fit(quotes(48, 50, 49)).params, -150, 150},
        {"scenario 3 fit", sabr_fit(quotes(48, 50, 49)).params, -200, 200},
        {"scenario 4 fit", sabr_fit(quotes(45, 50, 45)).params, -200, 200},
        {"round-trip model", truth, -150, 150},
    };
    double worst_d2 = INFINITY;
    std::string worst_case;
    SABRParams worst_params{};
    for (const auto& c : cases) {
        const auto ks = uniform_grid(c.lo, c.hi, 1);
        for (std::size_t i = 1; i + 1 < ks.size(); ++i) {
            const double d2 = sabr_normal_vol(c.params, 0, 1, ks[i + 1]) - 2 * sabr_normal_vol(c.params, 0, 1, ks[i]) +
                              sabr_normal_vol(c.params, 0, 1, ks[i - 1]);
            if (d2 < worst_d2) {
                worst_d2 = d2;
                worst_case = c.name;
                worst_params = c.params;
            }
        }
    }
    PivotQuotes q = quotes(0, 0, 0);
    for (auto& pv : q.pivots)
        pv.vol = sabr_normal_vol(truth, 0, 1, pv.strike);
    const double residual = sabr_fit(q).max_abs_residual;
    return {worst_d2 >= -1e-9 && residual < 1e-8,
            fmt("min second difference %.3g (>= -1e-9) ", worst_d2) + "on " + worst_case +
                fmt(" (nu %.3g, rho %.4g), round-trip residual %.3g (< 1e-8)", worst_params.nu, worst_params.rho,
                    residual)};
}

std::string capture(const std::string& cmd) {
    std::string out;
    std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(cmd.c_str(), "r"), pclose);
    if (!pipe)
        return "<popen failed>";
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe.get())) > 0)
        out.append(buf, n);
    return out;
}

// 10. CLI determinism on the bundled scenarios.
Outcome cli_determinism(const std::string& cli) {
    const std::string dir = NORMAL_VV_SCENARIO_DIR;
    int runs = 0, mismatches = 0;
    for (const char* file : {"scenario1_convex.json", "scenario2_frown.json", "scenario3_frown_density.json",
                             "scenario4_bimodal.json"})
        for (const char* cmd : {"vv-smile", "sabr-smile", "compare", "sabr-fit", "density"}) {
            const std::string line = "'" + cli + "' " + cmd + " '" + dir + "/" + file + "' 2>&1";
            const std::string a = capture(line), b = capture(line);
            ++runs;
            mismatches += (a != b) || a.empty();
        }
    const std::string fit = "'" + cli + "' vv-fit '" + dir + "/scenario1_convex.json' 2>&1";
    ++runs;
    mismatches += capture(fit) != capture(fit);
    return {mismatches == 0, fmt("%g command/scenario pairs run twice, %g mismatches", runs, mismatches)};
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: %s <normal_vv_cli>\n", argv[0]);
        return 2;
    }
    const std::string cli = argv[1];
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"AC1  pricing/Greeks vs finite differences, parity", pricing_and_greeks},
        {"AC2  implied-vol inversion round trip", inversion_round_trip},
        {"AC3  VV weight system", weight_system},
        {"AC4  interpolation at pivots", interpolation},
        {"AC5  convex scenario (51/50/52)", convex_scenario},
        {"AC6  frown scenario (48/50/49)", frown_scenario},
        {"AC7  risk-neutral densities", densities},
        {"AC8  four-pivot reference calibration", calibration},
        {"AC9  SABR convexity and self-calibration", sabr_checks},
        {"AC10 CLI determinism", [&] { return cli_determinism(cli); }},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("[%s] %-48s %s (%.2fs)\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs);
        failed += !o.pass;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
