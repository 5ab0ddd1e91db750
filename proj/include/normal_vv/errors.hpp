#ifndef NORMAL_VV_ERRORS_HPP
#define NORMAL_VV_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace normal_vv {

/// Invalid input to a closed-form routine (non-positive vol, expiry, DF...).
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// A price that no finite positive Normal vol can reproduce.
class ArbitrageViolation : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Second-order VV quadratic has no real root at the given strike.
class NegativeDiscriminant : public std::runtime_error {
  public:
    NegativeDiscriminant(double strike, double discriminant)
        : std::runtime_error("negative discriminant " + std::to_string(discriminant) +
                             " at strike " + std::to_string(strike)),
          strike_(strike), discriminant_(discriminant) {}

    double strike() const noexcept { return strike_; }
    double discriminant() const noexcept { return discriminant_; }

  private:
    double strike_;
    double discriminant_;
};

/// Bracketed search found no sign change of the residual.
class NoRoot : public std::runtime_error {
  public:
    NoRoot(const std::string& what, double lo, double hi, double residual_lo, double residual_hi)
        : std::runtime_error(what), lo_(lo), hi_(hi), residual_lo_(residual_lo),
          residual_hi_(residual_hi) {}

    double lower() const noexcept { return lo_; }
    double upper() const noexcept { return hi_; }
    // NaN when the construction failed at that end of the bracket.
    double residual_lower() const noexcept { return residual_lo_; }
    double residual_upper() const noexcept { return residual_hi_; }

  private:
    double lo_, hi_, residual_lo_, residual_hi_;
};

class CalibrationFailure : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace normal_vv

#endif
