#pragma once

#include <string>
#include <vector>

#include "shockctl/params.hpp"

namespace shockctl {

/// Rate-level version of the lower-bound inequality (the constant c is unknown,
/// so no absolute value is claimed).
struct LowerBoundReport {
    double eps = 0.0;
    double T = 0.0;
    double lambda1 = 0.0;
    /// -lambda_1 T + sqrt(2) L/eps - L/(2 eps)
    double exponent_rate = 0.0;
    /// log[(4L^2/(3 eps pi^2)) (1 + 2L^2/(pi^2 eps^2))^2]
    double prefactor_log = 0.0;
    /// -T/4 + sqrt(2) L - L/2 > 0
    bool blowup_flag = false;
};

LowerBoundReport lower_bound_rate(const ProblemParams& p);

/// Worst unit-norm datum's minimal control norm when only modes 0..K-1 have to
/// vanish at T: the largest generalized eigenvalue of (D P D, G) with
///   G_jk = (1 - e^{-(lambda_j+lambda_k)T})/(lambda_j+lambda_k),
///   P_jk = <psi_hat_j, psi_hat_k>, D = diag(e^{-lambda_k T}),
/// square-rooted. A lower estimate of C(T, eps).
double empirical_cost(const ProblemParams& p, int K, double max_condition = 1e12);

/// K = 1 closed form |psi_hat_0| e^{-lambda_0 T} sqrt(2 lambda_0/(1 - e^{-2 lambda_0 T})).
double single_mode_cost(const ProblemParams& p);

struct SweepCell {
    double eps = 0.0;
    double T = 0.0;
    double measured_cost = 0.0;
    /// Theorem-2 right-hand side over ||u0||; NaN when T <= T*
    double bound_rhs = 0.0;
    double exponent_rate = 0.0;
    bool blowup_flag = false;
    /// true when measured_cost comes from a synthesized control, false for empirical_cost
    bool synthesized = false;
};

struct SweepTrend {
    double T = 0.0;
    /// every cell blows up and exponent_rate increases strictly as eps decreases
    bool growing = false;
    /// T > T* and max/min measured cost over eps is below 2
    bool bounded = false;
    /// every synthesized cell has measured_cost <= 1.5 bound_rhs
    bool within_bound = true;
};

struct SweepOptions {
    int K = 16;
    /// modes in the empirical cost used below T*
    int K_empirical = 4;
    int n = 1024;
    std::string u0 = "bump";
    double L = 1.0;
    double m = 0.5;
};

struct CostSweep {
    std::vector<SweepCell> cells;
    std::vector<SweepTrend> trends;
};

/// Cells in row-major order (eps outer, T inner).
CostSweep sweep(const std::vector<double>& eps_grid, const std::vector<double>& T_grid, const SweepOptions& opts = {});

/// CSV eps,T,measured_cost,bound_rhs,exponent_rate,blowup_flag.
void write_sweep_csv(const std::string& path, const CostSweep& s);

}  // namespace shockctl
