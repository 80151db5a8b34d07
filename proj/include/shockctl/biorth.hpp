#pragma once

#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "shockctl/params.hpp"
#include "shockctl/spectral.hpp"

namespace shockctl {

/// Complex number kept as log-magnitude and unit phase so that values far
/// outside double range can be multiplied and compared.
struct LogComplex {
    double logmag = -std::numeric_limits<double>::infinity();
    std::complex<double> phase{1.0, 0.0};

    std::complex<double> value() const { return std::exp(logmag) * phase; }
};

/// Shifted spectrum rescaled to the interval [-S/2, S/2].
struct RescaledSpectrum {
    double S = 0.0;
    double T_tilde = 0.0;
    /// eta_k = (4L^2/(pi^2 eps)) mu_k for k = 0..K
    std::vector<double> eta;
    /// mu_k for k = 0..K (unscaled)
    std::vector<double> mu;
    ProblemParams source;
    int K = 0;
};

RescaledSpectrum rescale(const ProblemParams& p, double T_tilde, int K);

/// Tenenbaum-Tucsnak multiplier data.
struct Multiplier {
    double S = 0.0;
    double kappa = 0.0;
    double beta = 0.0;
    double delta = 0.0;
    double nu = 0.0;
    /// log of the integral at z = 0, i.e. -log C_nu
    double log_norm = 0.0;
};

/// beta = S/kappa + beta_fraction (S - S/kappa); delta is the largest value
/// with nu < (4-delta) pi^2 kappa/(4S), shrunk by 1e-9 for strictness.
Multiplier make_multiplier(double S, double kappa, double beta_fraction = 0.5);

/// H_beta(z) with H_beta(0) = 1.
///
/// The integral over (-1,1) is pushed onto t = s - i c (1 - s^2) with
/// c = Re(z)/(2|z|), which turns the oscillation of exp(-i beta t z) into decay,
/// and evaluated by tanh-sinh quadrature with the maximum of the log-integrand
/// factored out.
LogComplex h_beta(const Multiplier& mult, std::complex<double> z);

/// Phi_k(z) = prod_{j != k, j <= J_max} (-iz - eta_j)/(eta_k - eta_j).
/// eta_j for j beyond the computed spectrum uses the bracket midpoint (j+1/2)^2.
LogComplex phi_k(const RescaledSpectrum& spec, int k, std::complex<double> z, int J_max);

/// Uniform grid on [-T_tilde/2, T_tilde/2] with Nt intervals.
struct TimeGrid {
    double T_tilde = 0.0;
    int Nt = 0;

    double dt() const { return T_tilde / Nt; }
    double t(int i) const { return -0.5 * T_tilde + i * dt(); }
    double weight(int i) const { return (i == 0 || i == Nt) ? 0.5 * dt() : dt(); }
};

struct BiorthOptions {
    /// Largest residual row j checked (defaults to K).
    int J = -1;
    /// Rejection threshold on max |residual|; infinity disables rejection.
    double tolerance = 1e-6;
    /// Product truncation, defaults to max(4K, 64).
    int J_max = -1;
    /// Peak-to-tail drop in log|g_k| that ends the Fourier sum.
    double tail_drop = 32.0;
    double X_limit = 2e6;
};

struct BiorthFamily {
    TimeGrid grid;
    Multiplier mult;
    int K = 0;
    int J = 0;
    /// q[k-1][i] = q_k(t_i)
    std::vector<std::vector<double>> q;
    /// residual[j][k-1]; row 0 is relative to e^{|mu_0| T~/2}
    std::vector<std::vector<double>> residual;
    double max_abs_residual = 0.0;
    /// ||q_k||_{L2}
    std::vector<double> norms;
    /// ||q_k|| mu_k exp(-3 kappa L^2/(eps T~)), the constant of Eq. (bior)
    std::vector<double> bior_constants;
    /// raw reconstruction energy outside the support [-beta/2, beta/2]
    std::vector<double> outside_energy;
    /// Fourier truncation actually used
    double X = 0.0;
    int J_max = 0;
};

BiorthFamily build_family(const RescaledSpectrum& spec, const Multiplier& mult, int K, const TimeGrid& grid,
                          const BiorthOptions& opts = {});

/// Moments int e^{mu_j t} f(t) dt by trapezoid on the grid, j over `modes`.
/// Row 0 style relative scaling is not applied here.
std::vector<double> moments(const RescaledSpectrum& spec, const std::vector<int>& modes, const TimeGrid& grid,
                            const std::vector<double>& f);

struct GramSolution {
    std::vector<double> values;
    /// condition number of the normalized Gram matrix
    double condition = 0.0;
};

/// Minimal-norm function in span{e^{mu_j t} : j in modes} whose trapezoid moments
/// against e^{mu_j t} equal the targets. Orthonormalizes the exponentials by
/// modified Gram-Schmidt with one reorthogonalization pass.
GramSolution gram_moment_solve(const RescaledSpectrum& spec, const std::vector<int>& modes,
                               const std::vector<double>& targets, const TimeGrid& grid,
                               double max_condition = 1e12);

/// Family export: one CSV per k with columns t,q_k(t).
void write_family_csv(const std::string& stem, const BiorthFamily& fam);

/// Residual export: {J, K, max_abs, entries}.
void write_residual_json(const std::string& path, const BiorthFamily& fam);

}  // namespace shockctl
