#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "shockctl/biorth.hpp"
#include "shockctl/params.hpp"
#include "shockctl/spectral.hpp"

namespace shockctl {

/// Uniformly sampled stretch of a control, values at t0 + i*dt, i = 0..n.
struct Segment {
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<double> h;

    double t1() const { return t0 + dt * static_cast<double>(h.size() - 1); }
};

enum class Side { left, right };

/// Boundary control on (0,T) as contiguous piecewise-linear segments.
/// Phase boundaries sit on segment ends, so jumps there are represented exactly.
struct ControlSignal {
    std::vector<Segment> segments;
    std::vector<double> phase_boundaries;
    /// c_k used in phase 2 (index k, entry 0 unused)
    std::vector<double> coefficients;

    static ControlSignal zero(double T, double dt);
    /// constant on [0, t_switch), zero on [t_switch, T]
    static ControlSignal step(double value, double t_switch, double T, double dt);

    double t_end() const { return segments.empty() ? 0.0 : segments.back().t1(); }

    /// h(t); at a segment joint `side` picks the one-sided limit.
    double value(double t, Side side = Side::right) const;

    /// int_{a}^{b} e^{-lambda (b - s)} h(s) ds, exact for the piecewise-linear signal.
    double exp_integral(double a, double b, double lambda) const;

    /// int_a^b h(s) ds
    double integral(double a, double b) const;

    /// Trapezoid L2 norm of the samples (whole signal or a window).
    double l2_norm() const;
    double l2_norm(double a, double b) const;

    /// Largest sample step.
    double max_dt() const;

    /// (t, h) rows; joints appear twice (left then right limit).
    void samples(std::vector<double>& t, std::vector<double>& h) const;
};

/// ||a - b||_{L2(0,T)} by trapezoid on the merged breakpoints.
double l2_distance(const ControlSignal& a, const ControlSignal& b);

/// <u, psi_hat_k> for k = 0..K at one time.
struct ModeState {
    double t = 0.0;
    std::vector<double> projections;
};

/// Lemma 3.3: e^{-lambda_k (t2-t1)} start_k + int_{t1}^{t2} e^{-lambda_k (t2 - s)} h(s) ds.
double mode_update(const std::vector<EigenMode>& modes, double t1, double t2, const ModeState& start,
                   const ControlSignal& h, int k);

/// Phase-1 control h(t) = -proj0 e^{-lambda0 t}/tau on (0, tau), sampled with step <= dt_max.
ControlSignal phase1_control(const ProblemParams& p, const EigenMode& ground, double u0_proj0, double dt_max);

/// psi_hat_k sampled on nodes, one row per mode.
std::vector<std::vector<double>> sample_eigenfunctions(const ProblemParams& p, const std::vector<EigenMode>& modes,
                                                       const std::vector<double>& x);

/// Trapezoid projections <u, psi_hat_k> on the nodes.
ModeState project(const std::vector<std::vector<double>>& psi, const std::vector<double>& x,
                  const std::vector<double>& u, double t);

/// Closed-form modes at tau (Eq. (ytau)); entry 0 is exactly 0.
ModeState state_at_tau(const ProblemParams& p, const std::vector<EigenMode>& modes, const ModeState& u0_projs);

/// c_k = e^{-mu_k (1+m) That/2} y_k(tau) for k = 1..K (entry 0 is 0); checks Eqs. (ck1)-(ck2).
std::vector<double> phase2_coefficients(const ProblemParams& p, const std::vector<EigenMode>& modes,
                                        const ModeState& state_tau, double u0_norm);

/// Per-k bound (4L/(k pi sqrt(eps)) + 2 sqrt(2L)/(tau (lambda_k - lambda0))) ||u0||.
double coefficient_bound(const ProblemParams& p, const std::vector<EigenMode>& modes, int k, double u0_norm);

enum class Solver { biorth, gram };

struct SynthesisOptions {
    int K = 16;
    Solver solver = Solver::biorth;
    /// position of beta inside (S/kappa, S) for the phase-2 family
    double beta_fraction = 0.5;
    /// overrides the sampling step (<= 0 keeps min(eps/4, 1/(4 lambda_K)))
    double dt = 0.0;
};

struct SynthesisResult {
    ControlSignal signal;
    double tau = 0.0, That = 0.0, T_tilde = 0.0, kappa = 0.0;
    int K = 0;
    std::vector<EigenMode> modes;
    ModeState u0_projections;
    ModeState state_tau;
    double u0_norm = 0.0;
    double h1_norm = 0.0, h2_norm = 0.0, l2_norm = 0.0;
    /// 2 sqrt(2L)/(T - T*) ||u0|| + C e^{-C/eps} ||u0|| with fitted C
    double bound_rhs = 0.0;
    double C_fit = 0.0;
    bool bound_ok = false;
    /// phase-1 cost against the printed Eq. (cout1) form 2 sqrt(2L)/tau
    bool cout1_printed_ok = false;
    /// phase-1 cost against 2 sqrt(2L)/sqrt(tau)
    bool cout1_ok = false;
    /// max_j |predicted <u(T), psi_hat_j>| / ||u0||, j = 0..K
    double moment_residual_max = 0.0;
    /// |<u(tau), psi_hat_0>| / ||u0|| predicted from the sampled phase-1 control
    double ground_residual = 0.0;
    std::vector<double> final_modes;
    /// estimated tail energy beyond K over retained energy
    double tail_ratio = 0.0;
    /// raw family residual (rows j > 4 are dominated by e^{mu_j T~/2} roundoff)
    double family_residual_max = 0.0;
    /// int e^{mu_j t} h~ dt on the phase-2 grid and the targets -c_j (j = 0..K)
    std::vector<double> phase2_moments, phase2_targets;
    double gram_condition = 0.0;
};

/// Two-phase null control of Theorem 2.
/// x, u0: PDE nodes and samples of the initial datum.
SynthesisResult synthesize(const ProblemParams& p, const std::vector<double>& x, const std::vector<double>& u0,
                           const SynthesisOptions& opts = {});

/// C with C e^{-C/eps} = r on the decreasing branch (C > eps); NaN if r > eps/e,
/// +inf if r == 0.
double fit_decay_constant(double r, double eps);

enum class LimitShape { theorem2, optimal };

/// Theorem-2 limit h0 = -(2/(T-T*)) int u0 on t <= (T-T*)/2, or the optimal
/// inviscid control -(1/(T-L)) int u0 on t < T-L. The mass is the trapezoid
/// integral of the samples.
ControlSignal limit_control(const ProblemParams& p, const std::vector<double>& x, const std::vector<double>& u0,
                            LimitShape shape, double dt = 1e-3);

/// Synthesis report JSON {eps, L, T, tau, m, kappa, K, l2_norm, bound_rhs, moment_residual_max, ...}.
nlohmann::json synthesis_report(const ProblemParams& p, const SynthesisResult& r);

/// Writes `t,h`.
void write_control_csv(const std::string& path, const ControlSignal& h);

}  // namespace shockctl
