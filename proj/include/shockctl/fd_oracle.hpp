#pragma once

#include <vector>

#include "shockctl/params.hpp"
#include "shockctl/spectral.hpp"

namespace shockctl {

/// Lowest eigenpairs of a finite-difference (L^eps)* with Dirichlet rows.
struct OracleResult {
    /// Richardson-extrapolated eigenvalues from n and 2n-1 nodes
    std::vector<double> eigenvalues;
    /// Raw eigenvalues on n nodes
    std::vector<double> raw;
    /// Uniform nodes including both walls
    std::vector<double> x;
    /// Eigenvectors on x, scaled so eps * (discrete slope at -L) = 1
    std::vector<std::vector<double>> eigenvectors;
};

/// Independent verification oracle.
///
/// (L^eps)* psi = -(eps/w)(w psi')' with w = sech^2(x/2eps) is discretized in
/// conservative form. The symmetrized matrix factors as B^T B with B bidiagonal,
/// so the spectrum is obtained from singular values (LAPACK dbdsqr), which is
/// accurate down to the exponentially small ground eigenvalue.
OracleResult discretized_operator_oracle(const ProblemParams& p, int n, int count,
                                         bool with_vectors = false);

/// Eigenvalues of the symmetric reduction on n nodes, no extrapolation.
std::vector<double> fd_eigenvalues_symmetric(const ProblemParams& p, int n, int count);

/// Eigenvalues of the dense non-symmetric assembly on n nodes (small n only).
std::vector<double> fd_eigenvalues_nonsymmetric(const ProblemParams& p, int n, int count);

/// ||A psi_hat - lambda psi_hat|| / ((1/(4eps)) ||psi_hat||) in discrete L2
/// on n uniform nodes, A the non-symmetric assembly applied matrix-free.
double conjugation_residual(const ProblemParams& p, const EigenMode& mode, int n);

}  // namespace shockctl
