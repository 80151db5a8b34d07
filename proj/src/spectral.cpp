#include "shockctl/spectral.hpp"
#include "shockctl/io.hpp"

#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace shockctl {

namespace {

constexpr double pi = std::numbers::pi;

// 1 - tanh(y) for y >= 0 without cancellation
double one_minus_tanh(double y) {
    double e = std::exp(-2.0 * y);
    return 2.0 * e / (1.0 + e);
}

// sech^2(u) via exponentials of -|u|
double sech2(double u) {
    double e = std::exp(-2.0 * std::abs(u));
    return 4.0 * e / ((1.0 + e) * (1.0 + e));
}

}  // namespace

std::string to_string(Parity p) {
    switch (p) {
        case Parity::ground: return "ground";
        case Parity::even: return "even";
        case Parity::odd: return "odd";
    }
    return "?";
}

double bracket_lo(const ProblemParams& p, int k) {
    return 0.25 / p.eps + k * k * pi * pi * p.eps / (4.0 * p.L * p.L);
}

double bracket_hi(const ProblemParams& p, int k) {
    return 0.25 / p.eps + (k + 1) * (k + 1) * pi * pi * p.eps / (4.0 * p.L * p.L);
}

EigenMode solve_lambda0(const ProblemParams& p) {
    const double eps = p.eps, L = p.L;
    const double a = std::tanh(L / (2.0 * eps));
    const double oma = one_minus_tanh(L / (2.0 * eps));

    // s = (1/2) a tanh(sL/eps) rewritten for d = 1/2 - s:
    // G(d) = d - (1/2)[(1-a) + a(1 - tanh((1/2 - d)L/eps))]
    auto G = [&](double d) {
        return d - 0.5 * (oma + a * one_minus_tanh((0.5 - d) * L / eps));
    };

    EigenMode m;
    m.k = 0;
    m.parity = Parity::ground;
    m.theta = std::nan("");

    double lo = 1e-300;
    if (G(lo) >= 0.0) {
        m.below_resolution = true;
        m.d = 0.0;
        m.s = 0.5;
        m.lambda = 0.0;
        m.mu = -0.25 / eps;
        return m;
    }

    // Between the root and d = 1/2 the function is positive by concavity;
    // walk toward 1/2 until that region is hit.
    double hi = 0.25;
    int walk = 0;
    while (G(hi) <= 0.0) {
        hi = 0.5 - 0.5 * (0.5 - hi);
        if (++walk > 60) {
            std::ostringstream os;
            os << "eps=" << eps << " L=" << L << " (needs tanh(L/2eps) L/(2eps) > 1)";
            throw NumericError("ground-root-not-bracketed", os.str());
        }
    }

    // geometric bisection brings the bracket to the root's scale
    while (hi / lo > 2.0) {
        double mid = std::sqrt(lo) * std::sqrt(hi);
        (G(mid) < 0.0 ? lo : hi) = mid;
    }
    boost::uintmax_t iters = 200;
    auto r = boost::math::tools::toms748_solve(G, lo, hi, boost::math::tools::eps_tolerance<double>(52),
                                               iters);
    double d = 0.5 * (r.first + r.second);

    m.d = d;
    m.s = 0.5 - d;
    m.lambda = d * (1.0 - d) / eps;
    m.mu = -m.s * m.s / eps;
    return m;
}

EigenMode solve_lambda_k(const ProblemParams& p, int k) {
    if (k < 1) throw ValidationError("solve_lambda_k needs k >= 1");
    const double eps = p.eps, L = p.L;
    const double a = std::tanh(L / (2.0 * eps));

    auto R = [&](double y) { return y * L / eps - 0.5 * k * pi - std::atan(2.0 * y / a); };
    double lo = k * pi * eps / (2.0 * L);
    double hi = (k + 1) * pi * eps / (2.0 * L);
    boost::uintmax_t iters = 200;
    auto r = boost::math::tools::toms748_solve(R, lo, hi, boost::math::tools::eps_tolerance<double>(53),
                                               iters);
    double y = 0.5 * (r.first + r.second);

    EigenMode m;
    m.k = k;
    m.y = y;
    m.theta = std::atan(2.0 * y / a);
    m.lambda = (y * y + 0.25) / eps;
    m.mu = y * y / eps;
    m.parity = (k % 2 == 0) ? Parity::even : Parity::odd;

    if (!(m.lambda > bracket_lo(p, k) && m.lambda < bracket_hi(p, k))) {
        std::ostringstream os;
        os << "k=" << k << " lambda=" << fmt17(m.lambda) << " outside its bracket";
        throw NumericError("spectrum-invariant-violation", os.str());
    }
    return m;
}

std::vector<EigenMode> spectrum(const ProblemParams& p, int K) {
    if (K < 1) throw ValidationError("spectrum needs K >= 1");
    p.validate();
    std::vector<EigenMode> modes;
    modes.reserve(K + 1);
    modes.push_back(solve_lambda0(p));
    for (int k = 1; k <= K; ++k) modes.push_back(solve_lambda_k(p, k));

    const auto& g = modes[0];
    if (!g.below_resolution && !(g.lambda > 0.0 && g.lambda < 0.25 / p.eps))
        throw NumericError("spectrum-invariant-violation", "ground eigenvalue outside (0, 1/(4eps))");

    const double unit = pi * pi * p.eps / (4.0 * p.L * p.L);
    for (int k = 2; k <= K; ++k) {
        for (int j = 1; j < k; ++j) {
            // in mu to avoid the common 1/(4eps) offset
            double gap = modes[k].mu - modes[j].mu;
            if (!(gap >= (k * k - j * j) * unit)) {
                std::ostringstream os;
                os << "gap violated for pair (" << j << "," << k << ")";
                throw NumericError("spectrum-invariant-violation", os.str());
            }
        }
    }
    return modes;
}

EigenFunction::EigenFunction(const EigenMode& mode, const ProblemParams& p)
    : mode_(mode), eps_(p.eps), L_(p.L) {
    a_ = std::tanh(L_ / (2.0 * eps_));
    if (mode_.k == 0) {
        if (mode_.below_resolution)
            throw NumericError("below-resolution", "ground eigenfunction unavailable when lambda0 underflows");
        log_eps_lambda0_ = std::log(mode_.d) + std::log1p(-mode_.d);
    } else {
        omega_ = mode_.y / eps_;
        norm_ = eps_ * excited_dphi(-L_);
    }
}

double EigenFunction::cosh_ratio(double x) const {
    double u = std::abs(x);
    return std::exp((u - L_) / (2.0 * eps_)) * (1.0 + std::exp(-u / eps_)) / (1.0 + std::exp(-L_ / eps_));
}

double EigenFunction::excited_phi(double x) const {
    double T = std::tanh(x / (2.0 * eps_));
    double c = std::cos(omega_ * x), s = std::sin(omega_ * x);
    if (mode_.parity == Parity::odd) return mode_.y * s + 0.5 * T * c;
    return -mode_.y * c + 0.5 * T * s;
}

double EigenFunction::excited_dphi(double x) const {
    double T = std::tanh(x / (2.0 * eps_));
    double Tp = sech2(x / (2.0 * eps_)) / (2.0 * eps_);
    double c = std::cos(omega_ * x), s = std::sin(omega_ * x);
    const double y = mode_.y, w = omega_;
    if (mode_.parity == Parity::odd) return y * w * c + 0.5 * Tp * c - 0.5 * T * w * s;
    return y * w * s + 0.5 * Tp * s + 0.5 * T * w * c;
}

// Ground mode, written for u = |x| as (A + B)/(eps lambda0) with
//   A = sinh(su/eps) sinh((L-u)/2eps) / (2 cosh^2(L/2eps) sinh(sL/eps))
//   B = s cosh(u/2eps) sinh(s(L-u)/eps) / (cosh(L/2eps) sinh^2(sL/eps))
// Both terms are nonnegative, so nothing cancels near the walls.
double EigenFunction::ground(double x) const {
    const double u = std::min(std::abs(x), L_);
    const double s = mode_.s, sig = s / eps_, e = eps_, L = L_;
    const double den2 = -std::expm1(-2.0 * sig * L);
    const double cl = 1.0 + std::exp(-L / e);

    double logA = sig * (u - L) - (L + u) / (2.0 * e) - log_eps_lambda0_;
    double A = std::exp(logA) * (-std::expm1(-2.0 * sig * u)) / den2 * (-std::expm1(-(L - u) / e)) / (cl * cl);

    double logB = (u - L) / (2.0 * e) - sig * (L + u) - log_eps_lambda0_;
    double B = 2.0 * s * std::exp(logB) * (1.0 + std::exp(-u / e)) / cl * (-std::expm1(-2.0 * sig * (L - u))) /
               (den2 * den2);
    return A + B;
}

double EigenFunction::operator()(double x) const {
    if (mode_.k == 0) return ground(x);
    return cosh_ratio(x) * excited_phi(x) / norm_;
}

double EigenFunction::derivative(double x) const {
    if (mode_.k != 0) {
        double R = cosh_ratio(x);
        double Rp = R * std::tanh(x / (2.0 * eps_)) / (2.0 * eps_);
        return (Rp * excited_phi(x) + R * excited_dphi(x)) / norm_;
    }
    // derivative of (A + B)(u), same exponent bookkeeping as ground()
    const double u = std::min(std::abs(x), L_);
    const double s = mode_.s, sig = s / eps_, e = eps_, L = L_;
    const double den2 = -std::expm1(-2.0 * sig * L);
    const double cl = 1.0 + std::exp(-L / e);

    // A' scale: e^{sig u + (L-u)/2e}/4 times C_A = 8 e^{-L/e} e^{-sig L}/(cl^2 den2) / 2
    double logA = sig * (u - L) - (L + u) / (2.0 * e) - log_eps_lambda0_;
    double ea = std::exp(-2.0 * sig * u), eb = std::exp(-(L - u) / e);
    double Ap = std::exp(logA) / (cl * cl * den2) *
                (sig * (1.0 + ea) * (1.0 - eb) - (1.0 + eb) * (1.0 - ea) / (2.0 * e));

    double logB = (u - L) / (2.0 * e) - sig * (L + u) - log_eps_lambda0_;
    double ec = std::exp(-u / e), ed = std::exp(-2.0 * sig * (L - u));
    double Bp = 2.0 * s * std::exp(logB) / (cl * den2 * den2) *
                ((1.0 - ec) * (1.0 - ed) / (2.0 * e) - sig * (1.0 + ec) * (1.0 + ed));

    double dv = Ap + Bp;
    return x < 0.0 ? -dv : dv;
}

double eval_eigenfunction(const EigenMode& mode, const ProblemParams& p, double x) {
    return EigenFunction(mode, p)(x);
}

double norm_ratio_bound(int k, const ProblemParams& p) {
    if (k == 0) return 2.0 * std::sqrt(2.0 * p.L);
    return 4.0 * p.L / (k * pi * std::sqrt(p.eps));
}

double norm_ratio(const EigenMode& mode, const ProblemParams& p) {
    EigenFunction f(mode, p);
    auto sq = [&](double x) {
        double v = f(x);
        return v * v;
    };
    double n2 = integrate(sq, -p.L, 0.0) + integrate(sq, 0.0, p.L);
    double r = std::sqrt(n2);
    if (!(r <= norm_ratio_bound(mode.k, p))) {
        std::ostringstream os;
        os << "k=" << mode.k << " ratio " << r << " exceeds " << norm_ratio_bound(mode.k, p);
        throw NumericError("norm-bound-violation", os.str());
    }
    return r;
}

void write_spectrum_csv(const std::string& path, const std::vector<EigenMode>& modes,
                        const ProblemParams& p) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open " + path);
    out << "k,lambda,mu,theta,parity,norm_ratio\n";
    for (const auto& m : modes) {
        out << m.k << ',' << fmt17(m.lambda) << ',' << fmt17(m.mu) << ','
            << (m.k == 0 ? std::string("nan") : fmt17(m.theta)) << ',' << to_string(m.parity) << ','
            << fmt17(norm_ratio(m, p)) << '\n';
    }
}

}  // namespace shockctl
