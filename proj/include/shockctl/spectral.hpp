#pragma once

#include <string>
#include <vector>

#include "shockctl/params.hpp"

namespace shockctl {

enum class Parity { ground, even, odd };

std::string to_string(Parity p);

/// One eigenpair label of the adjoint operator (L^eps)*.
///
/// For k = 0 the root variable is d = 1/2 - s with s = sqrt(1/4 - eps*lambda),
/// kept separately because s itself loses every digit of eps*lambda once it
/// drops under machine epsilon. For k >= 1 the root variable is
/// y = sqrt(eps*lambda - 1/4).
struct EigenMode {
    int k = 0;
    double lambda = 0.0;
    /// lambda - 1/(4 eps), computed without cancellation
    double mu = 0.0;
    /// Phase in (0, pi/2); NaN for the ground mode
    double theta = 0.0;
    Parity parity = Parity::ground;
    double d = 0.0;
    double s = 0.0;
    double y = 0.0;
    /// Set when d underflows and lambda0 carries no information.
    bool below_resolution = false;
};

/// Ground eigenvalue lambda0 in (0, 1/(4 eps)).
EigenMode solve_lambda0(const ProblemParams& p);

/// k-th excited eigenvalue, strictly inside its bracket
/// (1/(4eps) + k^2 pi^2 eps/(4L^2), 1/(4eps) + (k+1)^2 pi^2 eps/(4L^2)).
EigenMode solve_lambda_k(const ProblemParams& p, int k);

/// Modes 0..K with bracket and gap assertions.
std::vector<EigenMode> spectrum(const ProblemParams& p, int K);

/// Bracket endpoints of mode k >= 1 in lambda.
double bracket_lo(const ProblemParams& p, int k);
double bracket_hi(const ProblemParams& p, int k);

/// Normalized adjoint eigenfunction psi_hat = psi/(eps psi'(-L)).
///
/// Every cosh/sinh ratio is evaluated as exponentials of argument differences,
/// so nothing overflows for small eps.
class EigenFunction {
public:
    EigenFunction(const EigenMode& mode, const ProblemParams& p);

    double operator()(double x) const;
    double derivative(double x) const;

    const EigenMode& mode() const { return mode_; }

private:
    double ground(double x) const;
    double excited_phi(double x) const;
    double excited_dphi(double x) const;
    /// cosh(x/2eps)/cosh(L/2eps)
    double cosh_ratio(double x) const;

    EigenMode mode_;
    double eps_, L_;
    double omega_ = 0.0;
    double a_ = 0.0;
    double log_eps_lambda0_ = 0.0;
    double norm_ = 1.0;  // eps * phi'(-L) for excited modes
};

double eval_eigenfunction(const EigenMode& mode, const ProblemParams& p, double x);

/// ||psi_hat||_{L2(-L,L)} by adaptive Gauss-Kronrod, split at the shock;
/// asserts Eq. (0) / Eq. (k).
double norm_ratio(const EigenMode& mode, const ProblemParams& p);

/// Bound of Eq. (0) for k = 0 and Eq. (k) otherwise.
double norm_ratio_bound(int k, const ProblemParams& p);

/// Adaptive Gauss-Kronrod on [a,b] with an absolute tolerance;
/// throws "quadrature-not-converged" with the achieved error otherwise.
template <class F>
double integrate(F f, double a, double b, double abs_tol = 1e-10);

/// Spectrum CSV: k,lambda,mu,theta,parity,norm_ratio at 17 significant digits.
void write_spectrum_csv(const std::string& path, const std::vector<EigenMode>& modes,
                        const ProblemParams& p);

}  // namespace shockctl

#include "shockctl/detail/integrate.hpp"
