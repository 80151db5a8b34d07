#include "shockctl/biorth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "shockctl/io.hpp"

namespace shockctl {

namespace {

constexpr double pi = std::numbers::pi;

double eta_at(const RescaledSpectrum& spec, int j) {
    if (j <= spec.K) return spec.eta[j];
    return (j + 0.5) * (j + 0.5);
}

}  // namespace

RescaledSpectrum rescale(const ProblemParams& p, double T_tilde, int K) {
    if (!(T_tilde > 0.0)) throw ValidationError("T_tilde must be positive");
    auto modes = spectrum(p, K);
    RescaledSpectrum r;
    r.source = p;
    r.K = K;
    r.T_tilde = T_tilde;
    const double scale = 4.0 * p.L * p.L / (pi * pi * p.eps);
    r.S = T_tilde / scale;
    for (const auto& m : modes) {
        r.mu.push_back(m.mu);
        r.eta.push_back(scale * m.mu);
    }
    auto fail = [](const std::string& what) { throw NumericError("spectrum-invariant-violation", what); };
    if (!(r.eta[0] < 0.0)) fail("eta_0 must be negative");
    for (int k = 1; k <= K; ++k) {
        if (!(r.eta[k] >= k * k && r.eta[k] <= (k + 1) * (k + 1))) fail("eta_" + std::to_string(k) + " outside [k^2,(k+1)^2]");
        for (int j = 1; j < k; ++j)
            if (!(r.eta[k] - r.eta[j] >= k * k - j * j))
                fail("rescaled gap violated for (" + std::to_string(j) + "," + std::to_string(k) + ")");
    }
    return r;
}

LogComplex phi_k(const RescaledSpectrum& spec, int k, std::complex<double> z, int J_max) {
    if (k < 1) throw ValidationError("phi_k needs k >= 1");
    if (J_max < spec.K) throw ValidationError("J_max must be at least K");
    const std::complex<double> I(0.0, 1.0);
    const double ek = eta_at(spec, k);
    LogComplex r;
    r.logmag = 0.0;
    for (int j = 0; j <= J_max; ++j) {
        if (j == k) continue;
        double ej = eta_at(spec, j);
        std::complex<double> f = (-I * z - ej) / (ek - ej);
        double a = std::abs(f);
        if (a == 0.0) {
            r.logmag = -std::numeric_limits<double>::infinity();
            return r;
        }
        r.logmag += std::log(a);
        r.phase *= f / a;
    }
    return r;
}

BiorthFamily build_family(const RescaledSpectrum& spec, const Multiplier& mult, int K, const TimeGrid& grid,
                          const BiorthOptions& opts) {
    if (K < 1 || K > spec.K) throw ValidationError("family size K must lie in [1, spectrum size]");
    if (grid.Nt < 8 || std::abs(grid.T_tilde - spec.T_tilde) > 1e-12 * spec.T_tilde)
        throw ValidationError("time grid must span the rescaled interval");
    if (!(mult.beta > mult.S / mult.kappa && mult.beta < mult.S) ||
        !(mult.nu < (4.0 - mult.delta) * pi * pi * mult.kappa / (4.0 * mult.S)))
        throw ValidationError("multiplier constraints violated");

    const ProblemParams& p = spec.source;
    const double scale = pi * pi * p.eps / (4.0 * p.L * p.L);  // t_p = scale * t
    const int J = opts.J < 0 ? K : std::min(opts.J, spec.K);
    const int J_max = opts.J_max < 0 ? std::max(4 * K, 64) : opts.J_max;
    if (J_max < spec.K) throw ValidationError("J_max must be at least K");

    BiorthFamily fam;
    fam.grid = grid;
    fam.mult = mult;
    fam.K = K;
    fam.J = J;
    fam.J_max = J_max;

    // Fourier samples g_k(x_n), x_n = n dx, extended block by block until each
    // log|g_k| has dropped tail_drop below its peak over a whole block.
    const double dx = pi / (2.0 * spec.S);
    const int block = 2048;
    std::vector<double> lf;                       // log|f(x_n)|
    std::vector<double> af;                       // arg f(x_n)
    std::vector<std::vector<double>> lg(K), ag(K);
    std::vector<double> lfk(K), peak(K, -1e300);
    for (int k = 1; k <= K; ++k) lfk[k - 1] = h_beta(mult, std::complex<double>(0.0, 0.5 * eta_at(spec, k))).logmag;

    bool done = false;
    while (!done) {
        int n0 = static_cast<int>(lf.size());
        if (n0 * dx > opts.X_limit) {
            std::ostringstream os;
            os << "|g_k| did not decay by " << opts.tail_drop << " before X=" << opts.X_limit;
            throw NumericError("fourier-truncation-failed", os.str());
        }
        for (int n = n0; n < n0 + block; ++n) {
            LogComplex f = h_beta(mult, std::complex<double>(0.5 * n * dx, 0.0));
            lf.push_back(f.logmag);
            af.push_back(std::arg(f.phase));
        }
        done = true;
        for (int k = 1; k <= K; ++k) {
            const double ek = eta_at(spec, k);
            double blockmax = -1e300;
            for (int n = n0; n < n0 + block; ++n) {
                double x = n * dx;
                double lphi = 0.0, aphi = 0.0;
                for (int j = 0; j <= J_max; ++j) {
                    if (j == k) continue;
                    double ej = eta_at(spec, j);
                    // (-ix - ej)/(ek - ej)
                    lphi += 0.5 * std::log(x * x + ej * ej) - std::log(std::abs(ek - ej));
                    aphi += std::atan2(-x, -ej) + (ek - ej < 0.0 ? pi : 0.0);
                }
                double l = lphi + lf[n] - lfk[k - 1];
                lg[k - 1].push_back(l);
                ag[k - 1].push_back(aphi + af[n]);
                peak[k - 1] = std::max(peak[k - 1], l);
                blockmax = std::max(blockmax, l);
            }
            if (blockmax > peak[k - 1] - opts.tail_drop) done = false;
        }
    }
    const int N = static_cast<int>(lf.size());
    fam.X = (N - 1) * dx;

    // weighted samples G_k[n] = w_n g_k(x_n)
    std::vector<std::vector<std::complex<double>>> G(K, std::vector<std::complex<double>>(N));
    for (int k = 0; k < K; ++k)
        for (int n = 0; n < N; ++n) {
            double w = (n == 0) ? 0.5 * dx : dx;
            G[k][n] = w * std::polar(std::exp(lg[k][n]), ag[k][n]);
        }

    // p_k(t_p) = (1/pi) Re sum_n G[n] e^{i x_n t_p}; rotation reseeded every 16 steps
    const int M = grid.Nt + 1;
    fam.q.assign(K, std::vector<double>(M, 0.0));
    for (int i = 0; i < M; ++i) {
        double tp = scale * grid.t(i);
        std::complex<double> step = std::polar(1.0, dx * tp);
        std::vector<std::complex<double>> acc(K, 0.0);
        std::complex<double> rot;
        for (int n = 0; n < N; ++n) {
            if (n % 16 == 0)
                rot = std::polar(1.0, n * dx * tp);
            else
                rot *= step;
            for (int k = 0; k < K; ++k) acc[k] += G[k][n] * rot;
        }
        for (int k = 0; k < K; ++k) fam.q[k][i] = scale * acc[k].real() / pi;
    }

    // Paley-Wiener support check on the raw reconstruction, then exact masking
    const double half = 0.5 * mult.beta / scale;
    for (int k = 0; k < K; ++k) {
        double out = 0.0, tot = 0.0;
        for (int i = 0; i < M; ++i) {
            double e = grid.weight(i) * fam.q[k][i] * fam.q[k][i];
            tot += e;
            if (std::abs(grid.t(i)) > half) out += e;
        }
        fam.outside_energy.push_back(tot > 0.0 ? out / tot : 0.0);
        for (int i = 0; i < M; ++i)
            if (std::abs(grid.t(i)) > half) fam.q[k][i] = 0.0;
    }

    // residual matrix; row 0 relative to e^{|mu_0| T~/2}
    fam.residual.assign(J + 1, std::vector<double>(K, 0.0));
    for (int j = 0; j <= J; ++j) {
        const double mu = spec.mu[j];
        for (int k = 1; k <= K; ++k) {
            double s = 0.0;
            for (int i = 0; i < M; ++i) {
                double t = grid.t(i);
                double e = (j == 0) ? std::exp(mu * t - std::abs(mu) * 0.5 * grid.T_tilde) : std::exp(mu * t);
                s += grid.weight(i) * e * fam.q[k - 1][i];
            }
            fam.residual[j][k - 1] = s - (j == k ? 1.0 : 0.0);
        }
    }
    int wj = 0, wk = 1;
    for (int j = 0; j <= J; ++j)
        for (int k = 1; k <= K; ++k)
            if (std::abs(fam.residual[j][k - 1]) > fam.max_abs_residual) {
                fam.max_abs_residual = std::abs(fam.residual[j][k - 1]);
                wj = j;
                wk = k;
            }

    const double expo = 3.0 * mult.kappa * p.L * p.L / (p.eps * grid.T_tilde);
    for (int k = 1; k <= K; ++k) {
        double n2 = 0.0;
        for (int i = 0; i < M; ++i) n2 += grid.weight(i) * fam.q[k - 1][i] * fam.q[k - 1][i];
        fam.norms.push_back(std::sqrt(n2));
        fam.bior_constants.push_back(std::sqrt(n2) * spec.mu[k] * std::exp(-expo));
    }

    if (!(fam.max_abs_residual <= opts.tolerance)) {
        std::ostringstream os;
        os << "worst entry (j,k)=(" << wj << "," << wk << ") |r|=" << fam.max_abs_residual << " > "
           << opts.tolerance;
        throw NumericError("biorth-residual-above-tolerance", os.str());
    }
    return fam;
}

std::vector<double> moments(const RescaledSpectrum& spec, const std::vector<int>& modes, const TimeGrid& grid,
                            const std::vector<double>& f) {
    std::vector<double> m;
    for (int j : modes) {
        double s = 0.0;
        for (int i = 0; i <= grid.Nt; ++i) s += grid.weight(i) * std::exp(spec.mu.at(j) * grid.t(i)) * f[i];
        m.push_back(s);
    }
    return m;
}

void write_family_csv(const std::string& stem, const BiorthFamily& fam) {
    std::vector<double> t(fam.grid.Nt + 1);
    for (int i = 0; i <= fam.grid.Nt; ++i) t[i] = fam.grid.t(i);
    for (int k = 1; k <= fam.K; ++k)
        write_columns_csv(stem + "_q" + std::to_string(k) + ".csv", {"t", "q_" + std::to_string(k) + "(t)"},
                          {t, fam.q[k - 1]});
}

void write_residual_json(const std::string& path, const BiorthFamily& fam) {
    nlohmann::json j;
    j["J"] = fam.J;
    j["K"] = fam.K;
    j["max_abs"] = fam.max_abs_residual;
    j["entries"] = fam.residual;
    write_json(path, j);
}

}  // namespace shockctl
