#ifndef NORMAL_VV_TOOLS_CLI_HPP
#define NORMAL_VV_TOOLS_CLI_HPP

// Command-line front end. Lives in a header so the test suite can drive the
// subcommands in-process; tools/normal_vv_cli.cpp only forwards argv.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "normal_vv/normal_vv.hpp"

namespace normal_vv::cli {

using json = nlohmann::json;

enum ExitCode : int { Success = 0, Usage = 2, Numerical = 3 };

class UsageError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Numerical failure with a JSON payload for stdout.
class NumericalFailure : public std::runtime_error {
  public:
    NumericalFailure(const std::string& what, json payload)
        : std::runtime_error(what), payload_(std::move(payload)) {}
    const json& payload() const noexcept { return payload_; }

  private:
    json payload_;
};

// 12 significant digits everywhere.
inline std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

inline double round12(double x) {
    if (!std::isfinite(x))
        return x;
    return std::strtod(fmt(x).c_str(), nullptr);
}

inline json num(double x) {
    if (!std::isfinite(x))
        return nullptr;
    return round12(x);
}

inline unsigned thread_count() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("NORMAL_VV_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap > 0)
            n = std::min<unsigned>(n, static_cast<unsigned>(cap));
    }
    return n;
}

inline const char* discount_hint() {
    return "discount factor P(0,T) must satisfy 0 < DF <= 1 (DF = 0 zeroes every price; "
           "if your source quotes P(0,T) = 0 it almost certainly means DF = 1)";
}

// --- scenario files ----------------------------------------------------------

/// One market scenario: context, three pivots, optional fourth quote,
/// reference vols, strike grid and methods.
struct Scenario {
    MarketContext market;
    std::array<Pivot, 3> pivots{};
    std::vector<double> reference_vols; // empty: middle pivot vol
    std::optional<Pivot> fourth_quote;
    double grid_min = 0.0, grid_max = 0.0, grid_step = 0.0;
    std::vector<SmileMethod> methods;
    std::optional<double> density_delta;

    PivotQuotes quotes() const { return {market, pivots}; }
    std::vector<double> references() const {
        return reference_vols.empty() ? std::vector<double>{pivots[1].vol} : reference_vols;
    }
    std::vector<double> grid() const { return uniform_grid(grid_min, grid_max, grid_step); }
    bool has(SmileMethod m) const {
        return std::find(methods.begin(), methods.end(), m) != methods.end();
    }
};

inline SmileMethod parse_method(const std::string& s) {
    if (s == "vv-exact")
        return SmileMethod::VVExact;
    if (s == "vv-first")
        return SmileMethod::VVFirst;
    if (s == "vv-second")
        return SmileMethod::VVSecond;
    if (s == "sabr")
        return SmileMethod::SABR;
    throw UsageError("unknown method '" + s + "' (expected vv-exact, vv-first, vv-second, sabr)");
}

inline Scenario parse_scenario(const json& j) {
    Scenario sc;
    try {
        sc.market.forward = j.at("forward").get<double>();
        sc.market.expiry = j.at("expiry").get<double>();
        sc.market.discount = j.value("discount", 1.0);
        if (!(sc.market.discount > 0.0) || !(sc.market.discount <= 1.0))
            throw UsageError(discount_hint());
        if (!(sc.market.expiry > 0.0))
            throw UsageError("expiry must be positive");

        const auto& pv = j.at("pivots");
        if (!pv.is_array() || pv.size() != 3)
            throw UsageError("scenario needs exactly three pivots");
        for (std::size_t i = 0; i < 3; ++i)
            sc.pivots[i] = {pv[i].at("strike").get<double>(), pv[i].at("vol").get<double>()};

        if (j.contains("reference_vol")) {
            const auto& r = j.at("reference_vol");
            if (r.is_array())
                sc.reference_vols = r.get<std::vector<double>>();
            else
                sc.reference_vols = {r.get<double>()};
        }
        if (j.contains("fourth_quote"))
            sc.fourth_quote = Pivot{j["fourth_quote"].at("strike").get<double>(),
                                    j["fourth_quote"].at("vol").get<double>()};

        const auto& g = j.at("grid");
        sc.grid_min = g.at("min").get<double>();
        sc.grid_max = g.at("max").get<double>();
        sc.grid_step = g.at("step").get<double>();
        if (!(sc.grid_min < sc.grid_max) || !(sc.grid_step > 0.0))
            throw UsageError("grid needs min < max and step > 0");

        if (j.contains("methods")) {
            for (const auto& m : j.at("methods"))
                sc.methods.push_back(parse_method(m.get<std::string>()));
        } else {
            sc.methods = {SmileMethod::VVExact};
        }
        if (j.contains("density_delta"))
            sc.density_delta = j.at("density_delta").get<double>();
    } catch (const json::exception& e) {
        throw UsageError(std::string("invalid scenario: ") + e.what());
    }

    try {
        sc.quotes().validate();
        for (double r : sc.reference_vols)
            if (!(r > 0.0))
                throw DomainError("reference vols must be positive");
    } catch (const DomainError& e) {
        throw UsageError(std::string("invalid scenario: ") + e.what());
    }
    return sc;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw UsageError("cannot open scenario file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw UsageError("cannot parse scenario file '" + path + "': " + e.what());
    }
    return parse_scenario(j);
}

// --- subcommands -------------------------------------------------------------

struct OptionArgs {
    double forward = 0.0, strike = 0.0, expiry = 0.0, discount = 1.0;
    bool put = false;

    OptionSpec spec() const {
        if (!(discount > 0.0) || !(discount <= 1.0))
            throw UsageError(discount_hint());
        OptionSpec s{forward, strike, expiry, discount, put ? OptionKind::Put : OptionKind::Call};
        try {
            s.validate();
        } catch (const DomainError& e) {
            throw UsageError(e.what());
        }
        return s;
    }
};

inline void cmd_price(const OptionArgs& a, double vol, std::ostream& out) {
    const OptionSpec spec = a.spec();
    if (!(vol > 0.0))
        throw UsageError("--vol must be positive");
    const GreekSet g = bachelier_greeks(spec, vol);
    json j = {
        {"kind", a.put ? "put" : "call"},
        {"vol", num(vol)},
        {"price", num(g.price)},
        {"delta_forward", num(g.delta_forward)},
        {"vega", num(g.vega)},
        {"gamma_forward", num(g.gamma_forward)},
        {"vanna_forward", num(g.vanna_forward)},
        {"volga", num(g.volga)},
        {"moneyness", num(g.moneyness)},
    };
    out << j.dump() << '\n';
}

inline void cmd_invert(const OptionArgs& a, double price, std::ostream& out) {
    const OptionSpec spec = a.spec();
    double vol;
    const bool atm = spec.forward == spec.strike;
    try {
        vol = atm ? implied_normal_vol_atm(price, spec) : implied_normal_vol(price, spec);
    } catch (const std::exception& e) {
        throw NumericalFailure(e.what(), {{"error", "arbitrage_violation"},
                                          {"message", e.what()},
                                          {"price", num(price)},
                                          {"intrinsic", num(intrinsic_value(spec))}});
    }
    out << json{{"vol", num(vol)}, {"branch", atm ? "atm" : "rational"}}.dump() << '\n';
}

inline void write_smile_rows(std::ostream& out, const SmileGrid& g) {
    const std::string ref = std::isfinite(g.reference_vol) ? fmt(g.reference_vol) : "";
    for (const auto& p : g.points) {
        out << fmt(p.strike) << ',' << (p.status == SmileStatus::Ok ? fmt(p.vol) : "") << ','
            << to_string(g.method) << ',' << ref << ',' << to_string(p.status) << '\n';
    }
}

enum class SmileSelection { VV, SABR, Both };

inline void cmd_smile(const Scenario& sc, SmileSelection which, std::ostream& out) {
    const auto strikes = sc.grid();
    const unsigned threads = thread_count();
    out << "strike,vol,method,reference_vol,status\n";
    if (which != SmileSelection::SABR) {
        for (SmileMethod m : sc.methods) {
            if (m == SmileMethod::SABR)
                continue;
            if (m == SmileMethod::VVFirst) {
                write_smile_rows(out, vv_smile_grid(PivotSet(sc.quotes()), strikes, m, threads));
                continue;
            }
            for (double ref : sc.references())
                write_smile_rows(out, vv_smile_grid(PivotSet(sc.quotes(), ref), strikes, m, threads));
        }
    }
    if (which == SmileSelection::SABR || (which == SmileSelection::Both && sc.has(SmileMethod::SABR))) {
        const SABRFit fit = [&] {
            try {
                return sabr_fit(sc.quotes());
            } catch (const CalibrationFailure& e) {
                throw NumericalFailure(e.what(), {{"error", "calibration_failure"}, {"message", e.what()}});
            }
        }();
        write_smile_rows(out, sabr_smile_grid(fit.params, sc.market, strikes, threads));
    }
}

inline void cmd_vv_fit(const Scenario& sc, std::ostream& out) {
    if (!sc.fourth_quote)
        throw UsageError("vv-fit needs a fourth_quote in the scenario");
    try {
        const auto c = calibrate_reference_vol(sc.quotes(), *sc.fourth_quote);
        out << json{{"reference_vol", num(c.reference_vol)},
                    {"residual", num(c.residual)},
                    {"fourth_quote", {{"strike", num(sc.fourth_quote->strike)},
                                      {"vol", num(sc.fourth_quote->vol)}}},
                    {"bracket", {num(c.bracket_lo), num(c.bracket_hi)}},
                    {"expanded", c.expanded}}
                   .dump()
            << '\n';
    } catch (const NoRoot& e) {
        throw NumericalFailure(e.what(), {{"error", "no_root"},
                                          {"message", e.what()},
                                          {"bracket", {num(e.lower()), num(e.upper())}},
                                          {"residuals", {num(e.residual_lower()), num(e.residual_upper())}}});
    } catch (const DomainError& e) {
        throw UsageError(e.what());
    }
}

inline void cmd_sabr_fit(const Scenario& sc, std::ostream& out) {
    try {
        const SABRFit f = sabr_fit(sc.quotes());
        json res = json::array();
        for (std::size_t i = 0; i < 3; ++i)
            res.push_back({{"strike", num(sc.pivots[i].strike)},
                           {"vol", num(sc.pivots[i].vol)},
                           {"residual", num(f.residuals[i])}});
        out << json{{"alpha", num(f.params.alpha)},
                    {"nu", num(f.params.nu)},
                    {"rho", num(f.params.rho)},
                    {"beta", 0},
                    {"residuals", res},
                    {"max_abs_residual", num(f.max_abs_residual)},
                    {"objective", num(f.objective)}}
                   .dump()
            << '\n';
    } catch (const CalibrationFailure& e) {
        throw NumericalFailure(e.what(), {{"error", "calibration_failure"}, {"message", e.what()}});
    }
}

inline json diagnostics_json(const DensityGrid& g) {
    const auto& d = g.diagnostics;
    return {{"method", g.source}, {"delta", num(g.delta)}, {"integral", num(d.integral)},
            {"mean", num(d.mean)}, {"min", num(d.min_value)}, {"modes", d.modes},
            {"gaps", d.gaps}};
}

inline void cmd_density(const Scenario& sc, std::ostream& out, std::ostream& diag) {
    const auto xs = sc.grid();
    const double delta = sc.density_delta.value_or(default_density_delta(xs));
    const unsigned threads = thread_count();
    std::vector<DensityGrid> grids;
    const bool any_vv = std::any_of(sc.methods.begin(), sc.methods.end(),
                                    [](SmileMethod m) { return m != SmileMethod::SABR; });
    if (any_vv) {
        for (double ref : sc.references()) {
            const PivotSet ps(sc.quotes(), ref);
            grids.push_back(density_from_prices(vv_price_function(ps), sc.market.discount, xs, delta,
                                                "vv@" + fmt(ref), threads));
        }
    }
    if (sc.has(SmileMethod::SABR)) {
        try {
            const SABRFit fit = sabr_fit(sc.quotes());
            grids.push_back(density_from_prices(sabr_price_function(fit.params, sc.market),
                                                sc.market.discount, xs, delta, "sabr", threads));
        } catch (const CalibrationFailure& e) {
            throw NumericalFailure(e.what(), {{"error", "calibration_failure"}, {"message", e.what()}});
        }
    }
    out << "x,density,method\n";
    for (const auto& g : grids)
        for (std::size_t i = 0; i < g.x.size(); ++i)
            out << fmt(g.x[i]) << ',' << (g.density[i] ? fmt(*g.density[i]) : "") << ','
                << g.source << '\n';
    json d = json::array();
    for (const auto& g : grids)
        d.push_back(diagnostics_json(g));
    diag << json{{"diagnostics", d}}.dump() << '\n';
}

// --- dispatch ----------------------------------------------------------------

/// Runs one CLI invocation. `args` excludes the program name.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Normal (Bachelier) vanna-volga smiles, SABR comparator and densities",
                 "normal_vv"};
    app.require_subcommand(1);

    OptionArgs opt;
    double vol = 0.0, price = 0.0;
    const auto add_option_flags = [&](CLI::App* sub) {
        sub->add_option("--forward", opt.forward, "forward F")->required();
        sub->add_option("--strike", opt.strike, "strike K")->required();
        sub->add_option("--expiry", opt.expiry, "expiry T in years")->required();
        sub->add_option("--df", opt.discount, "discount factor P(0,T)")->required();
        sub->add_flag("--put", opt.put, "put instead of call");
    };

    auto* price_cmd = app.add_subcommand("price", "Bachelier price and Greeks as JSON");
    add_option_flags(price_cmd);
    price_cmd->add_option("--vol", vol, "normal vol (absolute units)")->required();

    auto* invert_cmd = app.add_subcommand("invert", "implied normal vol of a price");
    add_option_flags(invert_cmd);
    invert_cmd->add_option("--price", price, "option price")->required();

    std::string scenario_path, output_path, diagnostics_path;
    const auto add_scenario = [&](CLI::App* sub) {
        sub->add_option("--scenario,scenario", scenario_path, "scenario JSON file")->required();
        sub->add_option("--output,-o", output_path, "write to file instead of stdout");
    };
    auto* vv_smile = app.add_subcommand("vv-smile", "VV smile grid as CSV");
    auto* vv_fit = app.add_subcommand("vv-fit", "calibrate the reference vol to a fourth quote");
    auto* sabr_smile = app.add_subcommand("sabr-smile", "fitted Normal SABR smile grid as CSV");
    auto* sabr_fit_cmd = app.add_subcommand("sabr-fit", "fit Normal SABR to the three pivots");
    auto* density = app.add_subcommand("density", "risk-neutral density grid as CSV");
    auto* compare = app.add_subcommand("compare", "VV and SABR smile grids in one CSV");
    for (auto* sub : {vv_smile, vv_fit, sabr_smile, sabr_fit_cmd, density, compare})
        add_scenario(sub);
    density->add_option("--diagnostics", diagnostics_path,
                        "write the diagnostics JSON line here instead of stderr");

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return Success;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return Success;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return Usage;
    }

    try {
        std::ofstream file;
        if (!output_path.empty()) {
            file.open(output_path);
            if (!file)
                throw UsageError("cannot write '" + output_path + "'");
        }
        std::ostream& sink = output_path.empty() ? out : file;

        if (*price_cmd) {
            cmd_price(opt, vol, sink);
        } else if (*invert_cmd) {
            cmd_invert(opt, price, sink);
        } else {
            const Scenario sc = load_scenario(scenario_path);
            if (*vv_smile)
                cmd_smile(sc, SmileSelection::VV, sink);
            else if (*sabr_smile)
                cmd_smile(sc, SmileSelection::SABR, sink);
            else if (*compare)
                cmd_smile(sc, SmileSelection::Both, sink);
            else if (*vv_fit)
                cmd_vv_fit(sc, sink);
            else if (*sabr_fit_cmd)
                cmd_sabr_fit(sc, sink);
            else if (*density) {
                if (diagnostics_path.empty()) {
                    cmd_density(sc, sink, err);
                } else {
                    std::ofstream diag(diagnostics_path);
                    if (!diag)
                        throw UsageError("cannot write '" + diagnostics_path + "'");
                    cmd_density(sc, sink, diag);
                }
            }
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return Usage;
    } catch (const NumericalFailure& e) {
        out << e.payload().dump() << '\n';
        err << "error: " << e.what() << '\n';
        return Numerical;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return Usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return Numerical;
    }
    return Success;
}

} // namespace normal_vv::cli

#endif
