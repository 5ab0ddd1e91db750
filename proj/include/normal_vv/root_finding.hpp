#ifndef NORMAL_VV_ROOT_FINDING_HPP
#define NORMAL_VV_ROOT_FINDING_HPP

#include <cmath>
#include <cstdint>
#include <utility>

#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

namespace normal_vv {

struct RootResult {
    double root;
    std::uintmax_t iterations;
};

/// Root of f on [lo, hi] given f(lo) and f(hi) of opposite sign (TOMS 748).
template <typename F>
RootResult solve_bracketed(F&& f, double lo, double hi, double f_lo, double f_hi,
                           int bits = 50, std::uintmax_t max_iter = 200) {
    if (f_lo == 0.0)
        return {lo, 0};
    if (f_hi == 0.0)
        return {hi, 0};
    std::uintmax_t iters = max_iter;
    const auto [a, b] = boost::math::tools::toms748_solve(
        f, lo, hi, f_lo, f_hi, boost::math::tools::eps_tolerance<double>(bits), iters);
    return {0.5 * (a + b), iters};
}

} // namespace normal_vv

#endif
