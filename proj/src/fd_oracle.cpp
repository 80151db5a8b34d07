#include "shockctl/fd_oracle.hpp"

#include <Eigen/Dense>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace shockctl {

namespace {

// log sech(u), stable for large |u|
double log_sech(double u) {
    u = std::abs(u);
    return -u - std::log1p(std::exp(-2.0 * u)) + std::log(2.0);
}

void guard(const ProblemParams& p, int n) {
    if (n < 256 || n * p.eps / p.L < 50.0) {
        std::ostringstream os;
        os << "n=" << n << " with eps=" << p.eps << " (needs n >= 256 and n*eps/L >= 50)";
        throw NumericError("grid-too-coarse", os.str());
    }
}

// Bidiagonal factor on interior nodes 1..m (m = n-2): B is (m+1) x m lower
// bidiagonal with B[c][c] = dg[c], B[c+1][c] = off[c].
struct Bidiag {
    std::vector<double> dg, off;
    double h;
};

Bidiag build_bidiag(const ProblemParams& p, int n) {
    const double eps = p.eps, L = p.L;
    const double h = 2.0 * L / (n - 1);
    const int m = n - 2;
    Bidiag b{std::vector<double>(m), std::vector<double>(m), h};
    const double le = std::log(eps);
    for (int c = 0; c < m; ++c) {
        double xj = -L + (c + 1) * h;
        double lw = 2.0 * log_sech(xj / (2.0 * eps));
        double lwl = 2.0 * log_sech((xj - 0.5 * h) / (2.0 * eps));
        double lwr = 2.0 * log_sech((xj + 0.5 * h) / (2.0 * eps));
        b.dg[c] = std::exp(0.5 * (le + lwl - lw)) / h;
        b.off[c] = -std::exp(0.5 * (le + lwr - lw)) / h;
    }
    return b;
}

// Singular values of the padded square bidiagonal; the padding contributes
// exactly one spurious zero, which is dropped.
std::vector<double> bidiag_eigs(const Bidiag& b, int count) {
    const int m = static_cast<int>(b.dg.size());
    std::vector<double> d(b.dg);
    d.push_back(0.0);
    std::vector<double> e(b.off);
    int info = LAPACKE_dbdsqr(LAPACK_COL_MAJOR, 'L', m + 1, 0, 0, 0, d.data(), e.data(), nullptr, 1, nullptr,
                              1, nullptr, 1);
    if (info != 0) {
        std::ostringstream os;
        os << "dbdsqr info=" << info;
        throw NumericError("oracle-eigensolve-failed", os.str());
    }
    std::sort(d.begin(), d.end());
    std::vector<double> ev;
    for (int i = 1; i <= count && i < static_cast<int>(d.size()); ++i) ev.push_back(d[i] * d[i]);
    return ev;
}

// Inverse iteration on the tridiagonal B^T B for an eigenvector near lambda.
std::vector<double> tridiag_vector(const Bidiag& b, double lambda) {
    const int m = static_cast<int>(b.dg.size());
    std::vector<double> diag(m), sup(m - 1);
    for (int c = 0; c < m; ++c) diag[c] = b.dg[c] * b.dg[c] + b.off[c] * b.off[c];
    for (int c = 0; c + 1 < m; ++c) sup[c] = b.off[c] * b.dg[c + 1];
    double shift = lambda * (1.0 - 1e-9) - 1e-14 * diag[m / 2];
    std::vector<double> v(m, 1.0), cp(m), dp(m);
    for (int it = 0; it < 4; ++it) {
        // Thomas solve of (S - shift) z = v
        double beta = diag[0] - shift;
        cp[0] = (m > 1 ? sup[0] : 0.0) / beta;
        dp[0] = v[0] / beta;
        for (int i = 1; i < m; ++i) {
            beta = diag[i] - shift - sup[i - 1] * cp[i - 1];
            cp[i] = (i + 1 < m ? sup[i] : 0.0) / beta;
            dp[i] = (v[i] - sup[i - 1] * dp[i - 1]) / beta;
        }
        v[m - 1] = dp[m - 1];
        for (int i = m - 2; i >= 0; --i) v[i] = dp[i] - cp[i] * v[i + 1];
        double nrm = 0.0;
        for (double z : v) nrm = std::max(nrm, std::abs(z));
        for (double& z : v) z /= nrm;
    }
    return v;
}

}  // namespace

std::vector<double> fd_eigenvalues_symmetric(const ProblemParams& p, int n, int count) {
    guard(p, n);
    return bidiag_eigs(build_bidiag(p, n), count);
}

OracleResult discretized_operator_oracle(const ProblemParams& p, int n, int count, bool with_vectors) {
    guard(p, n);
    OracleResult r;
    Bidiag b = build_bidiag(p, n);
    r.raw = bidiag_eigs(b, count);
    auto fine = bidiag_eigs(build_bidiag(p, 2 * n - 1), count);
    for (int k = 0; k < count; ++k) r.eigenvalues.push_back((4.0 * fine[k] - r.raw[k]) / 3.0);

    r.x.resize(n);
    for (int i = 0; i < n; ++i) r.x[i] = -p.L + i * b.h;
    r.x.back() = p.L;
    if (with_vectors) {
        for (int k = 0; k < count; ++k) {
            auto v = tridiag_vector(b, r.raw[k]);
            std::vector<double> psi(n, 0.0);
            for (int c = 0; c < n - 2; ++c) {
                double lw = 2.0 * log_sech(r.x[c + 1] / (2.0 * p.eps));
                psi[c + 1] = v[c] * std::exp(-0.5 * lw);
            }
            double scale = p.eps * psi[1] / b.h;
            for (double& z : psi) z /= scale;
            r.eigenvectors.push_back(std::move(psi));
        }
    }
    return r;
}

std::vector<double> fd_eigenvalues_nonsymmetric(const ProblemParams& p, int n, int count) {
    guard(p, n);
    if (n > 2000) throw ValidationError("dense non-symmetric assembly limited to n <= 2000");
    const double eps = p.eps, L = p.L;
    const double h = 2.0 * L / (n - 1);
    const int m = n - 2;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
    for (int c = 0; c < m; ++c) {
        double xj = -L + (c + 1) * h;
        double lw = 2.0 * log_sech(xj / (2.0 * eps));
        double rl = std::exp(2.0 * log_sech((xj - 0.5 * h) / (2.0 * eps)) - lw);
        double rr = std::exp(2.0 * log_sech((xj + 0.5 * h) / (2.0 * eps)) - lw);
        A(c, c) = eps * (rl + rr) / (h * h);
        if (c > 0) A(c, c - 1) = -eps * rl / (h * h);
        if (c + 1 < m) A(c, c + 1) = -eps * rr / (h * h);
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
    std::vector<double> ev;
    for (int i = 0; i < m; ++i) ev.push_back(es.eigenvalues()[i].real());
    std::sort(ev.begin(), ev.end());
    ev.resize(std::min<int>(count, m));
    return ev;
}

double conjugation_residual(const ProblemParams& p, const EigenMode& mode, int n) {
    guard(p, n);
    EigenFunction f(mode, p);
    const double eps = p.eps, L = p.L;
    const double h = 2.0 * L / (n - 1);
    std::vector<double> psi(n);
    for (int i = 0; i < n; ++i) psi[i] = f(i == n - 1 ? L : -L + i * h);
    double res = 0.0, nrm = 0.0;
    for (int j = 1; j < n - 1; ++j) {
        double xj = -L + j * h;
        double lw = 2.0 * log_sech(xj / (2.0 * eps));
        double rl = std::exp(2.0 * log_sech((xj - 0.5 * h) / (2.0 * eps)) - lw);
        double rr = std::exp(2.0 * log_sech((xj + 0.5 * h) / (2.0 * eps)) - lw);
        double Apsi = eps * (rl * (psi[j] - psi[j - 1]) - rr * (psi[j + 1] - psi[j])) / (h * h);
        double r = Apsi - mode.lambda * psi[j];
        res += r * r;
        nrm += psi[j] * psi[j];
    }
    return std::sqrt(res) / (0.25 / eps * std::sqrt(nrm));
}

}  // namespace shockctl
