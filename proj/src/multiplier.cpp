#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "shockctl/biorth.hpp"

namespace shockctl {

namespace {

constexpr double pi = std::numbers::pi;

// Tanh-sinh nodes on (-1,1): s = tanh((pi/2) sinh u), u in [-4.5, 4.5].
struct TanhSinh {
    std::vector<double> s, ds, oms;
    double du = 0.0;

    TanhSinh() {
        const int n = 4001;
        const double umax = 4.5;
        du = 2.0 * umax / (n - 1);
        for (int i = 0; i < n; ++i) {
            double u = -umax + i * du;
            double a = 0.5 * pi * std::sinh(u);
            double ch = std::cosh(a);
            double sech2 = 1.0 / (ch * ch);
            s.push_back(std::tanh(a));
            ds.push_back(0.5 * pi * std::cosh(u) * sech2);
            oms.push_back(sech2);  // 1 - s^2 without cancellation
        }
    }
};

const TanhSinh& nodes() {
    static const TanhSinh ts;
    return ts;
}

// log of int_{-1}^{1} exp(-nu/(1-t^2) - i beta t z) dt, as (logmag, phase)
LogComplex raw_integral(double nu, double beta, std::complex<double> z) {
    const auto& q = nodes();
    const std::complex<double> I(0.0, 1.0);
    double az = std::abs(z);
    double c = az > 0.0 ? 0.5 * z.real() / az : 0.0;

    const size_t n = q.s.size();
    std::vector<std::complex<double>> psi(n), dt(n);
    double M = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < n; ++i) {
        double s = q.s[i], w = q.oms[i];
        std::complex<double> t(s, -c * w);
        std::complex<double> jac(1.0, 2.0 * c * s);
        // 1 - t^2 = (1-s^2)(1 + 2ics) + c^2 (1-s^2)^2
        std::complex<double> omt2 = w * jac + c * c * w * w;
        if (w == 0.0) {
            psi[i] = -std::numeric_limits<double>::infinity();
            continue;
        }
        psi[i] = -nu / omt2 - I * beta * t * z;
        dt[i] = jac * q.ds[i];
        M = std::max(M, psi[i].real());
    }
    std::complex<double> sum = 0.0;
    for (size_t i = 0; i < n; ++i) {
        if (!std::isfinite(psi[i].real())) continue;
        sum += std::exp(psi[i] - M) * dt[i];
    }
    sum *= q.du;
    LogComplex r;
    double mag = std::abs(sum);
    if (!std::isfinite(M) || !std::isfinite(mag) || mag == 0.0) {
        std::ostringstream os;
        os << "z=(" << z.real() << "," << z.imag() << ")";
        throw NumericError("multiplier-eval-overflow", os.str());
    }
    r.logmag = M + std::log(mag);
    r.phase = sum / mag;
    return r;
}

}  // namespace

Multiplier make_multiplier(double S, double kappa, double beta_fraction) {
    if (!(S > 0.0)) throw ValidationError("S must be positive");
    if (!(kappa > 1.0)) throw ValidationError("kappa must exceed 1");
    if (!(beta_fraction > 0.0 && beta_fraction < 1.0)) throw ValidationError("beta fraction must lie in (0,1)");
    Multiplier m;
    m.S = S;
    m.kappa = kappa;
    m.beta = S / kappa + beta_fraction * (S - S / kappa);
    auto F = [&](double d) { return (pi + d) * (pi + d) / m.beta - (4.0 - d) * pi * pi * kappa / (4.0 * S); };
    // F is increasing, F(0) < 0 because beta > S/kappa, F(4) > 0
    boost::uintmax_t it = 200;
    auto r = boost::math::tools::toms748_solve(F, 0.0, 4.0, boost::math::tools::eps_tolerance<double>(52), it);
    m.delta = 0.5 * (r.first + r.second) * (1.0 - 1e-9);
    m.nu = (pi + m.delta) * (pi + m.delta) / m.beta;
    m.log_norm = raw_integral(m.nu, m.beta, 0.0).logmag;
    return m;
}

LogComplex h_beta(const Multiplier& mult, std::complex<double> z) {
    LogComplex r = raw_integral(mult.nu, mult.beta, z);
    r.logmag -= mult.log_norm;
    return r;
}

}  // namespace shockctl
