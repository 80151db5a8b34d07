#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace shockctl {

/// Numerical failure carrying a stable machine-readable code
/// (e.g. "ground-root-not-bracketed", "gram-ill-conditioned").
class NumericError : public std::runtime_error {
public:
    NumericError(std::string code, const std::string& detail)
        : std::runtime_error(code + ": " + detail), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

/// Rejected input (bad parameter, violated precondition).
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Physical and scheme parameters of the controlled shock problem.
struct ProblemParams {
    double eps = 0.1;
    double L = 1.0;
    double T = 1.0;
    /// Dissipation fraction of the second phase.
    double m = 0.5;
    /// Multiplier margin kappa > 1; NaN means "use the control default".
    double kappa_mult = std::nan("");

    /// T* = 4 sqrt(3) L
    double Tstar() const { return 4.0 * std::sqrt(3.0) * L; }

    /// Phase-1 duration (T - T*)/2, or NaN below the threshold.
    double tau() const { return T > Tstar() ? 0.5 * (T - Tstar()) : std::nan(""); }

    /// Horizon left after phase 1.
    double That() const { return T - tau(); }

    void validate() const {
        if (!(eps > 0.0) || !std::isfinite(eps)) throw ValidationError("eps must be positive");
        if (!(L > 0.0) || !std::isfinite(L)) throw ValidationError("L must be positive");
        if (!(T > 0.0) || !std::isfinite(T)) throw ValidationError("T must be positive");
        if (!(m > 0.0 && m < 1.0)) throw ValidationError("m must lie in (0,1)");
        if (!std::isnan(kappa_mult) && !(kappa_mult > 1.0))
            throw ValidationError("kappa must exceed 1");
    }
};

}  // namespace shockctl
