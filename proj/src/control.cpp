#include "shockctl/control.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "shockctl/io.hpp"

namespace shockctl {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double inf = std::numeric_limits<double>::infinity();

// (1 - e^{-z})/z and (1 - e^{-z}(1+z))/z^2, with their series near 0
double phi1(double z) {
    if (std::abs(z) < 1e-5) return 1.0 - z / 2.0 + z * z / 6.0;
    return -std::expm1(-z) / z;
}

double phi2(double z) {
    if (std::abs(z) < 1e-3) return 0.5 - z / 3.0 + z * z / 8.0 - z * z * z / 30.0;
    return (-std::expm1(-z) - z * std::exp(-z)) / (z * z);
}

Segment uniform_segment(double t0, double t1, double dt_max) {
    Segment s;
    s.t0 = t0;
    int n = std::max(1, static_cast<int>(std::ceil((t1 - t0) / dt_max - 1e-9)));
    s.dt = (t1 - t0) / n;
    s.h.assign(n + 1, 0.0);
    return s;
}

double seg_value(const Segment& s, double t) {
    const int n = static_cast<int>(s.h.size()) - 1;
    double r = (t - s.t0) / s.dt;
    int i = std::clamp(static_cast<int>(std::floor(r)), 0, n - 1);
    double w = std::clamp(r - i, 0.0, 1.0);
    return (1.0 - w) * s.h[i] + w * s.h[i + 1];
}

// Calls f(a, b, h(a+), h(b-)) for each linear piece of the signal inside [lo, hi].
template <class F>
void for_pieces(const ControlSignal& c, double lo, double hi, F f) {
    for (const auto& s : c.segments) {
        if (s.t1() <= lo || s.t0 >= hi) continue;
        const int n = static_cast<int>(s.h.size()) - 1;
        int i0 = std::max(0, static_cast<int>(std::floor((lo - s.t0) / s.dt)));
        for (int i = i0; i < n; ++i) {
            double a = s.t0 + i * s.dt, b = (i + 1 == n) ? s.t1() : s.t0 + (i + 1) * s.dt;
            if (b <= lo) continue;
            if (a >= hi) break;
            double ca = std::max(a, lo), cb = std::min(b, hi);
            if (cb <= ca) continue;
            double ha = s.h[i] + (s.h[i + 1] - s.h[i]) * (ca - a) / (b - a);
            double hb = s.h[i] + (s.h[i + 1] - s.h[i]) * (cb - a) / (b - a);
            f(ca, cb, ha, hb);
        }
    }
}

}  // namespace

ControlSignal ControlSignal::zero(double T, double dt) {
    ControlSignal c;
    c.segments.push_back(uniform_segment(0.0, T, dt));
    c.phase_boundaries = {T};
    return c;
}

ControlSignal ControlSignal::step(double value, double t_switch, double T, double dt) {
    if (!(t_switch > 0.0 && t_switch <= T)) throw ValidationError("step switch time must lie in (0, T]");
    ControlSignal c;
    Segment on = uniform_segment(0.0, t_switch, dt);
    std::fill(on.h.begin(), on.h.end(), value);
    c.segments.push_back(on);
    if (t_switch < T) c.segments.push_back(uniform_segment(on.t1(), T, dt));
    c.phase_boundaries = {t_switch, T};
    return c;
}

double ControlSignal::value(double t, Side side) const {
    if (segments.empty()) return 0.0;
    const size_t n = segments.size();
    for (size_t s = 0; s < n; ++s) {
        const auto& g = segments[s];
        bool last = s + 1 == n, first = s == 0;
        if (side == Side::right ? (t >= g.t0 || first) && (t < g.t1() || last)
                                : (t > g.t0 || first) && (t <= g.t1() || last))
            return seg_value(g, t);
    }
    return 0.0;
}

double ControlSignal::exp_integral(double a, double b, double lambda) const {
    double sum = 0.0;
    for_pieces(*this, a, b, [&](double sa, double sb, double ha, double hb) {
        double d = sb - sa, z = lambda * d;
        sum += std::exp(-lambda * (b - sb)) * d * (hb * phi1(z) - (hb - ha) * phi2(z));
    });
    return sum;
}

double ControlSignal::integral(double a, double b) const { return exp_integral(a, b, 0.0); }

double ControlSignal::l2_norm() const {
    double s = 0.0;
    for (const auto& g : segments)
        for (size_t i = 0; i + 1 < g.h.size(); ++i) s += 0.5 * g.dt * (g.h[i] * g.h[i] + g.h[i + 1] * g.h[i + 1]);
    return std::sqrt(s);
}

double ControlSignal::l2_norm(double a, double b) const {
    double s = 0.0;
    for_pieces(*this, a, b, [&](double sa, double sb, double ha, double hb) { s += 0.5 * (sb - sa) * (ha * ha + hb * hb); });
    return std::sqrt(s);
}

double ControlSignal::max_dt() const {
    double m = 0.0;
    for (const auto& g : segments) m = std::max(m, g.dt);
    return m;
}

void ControlSignal::samples(std::vector<double>& t, std::vector<double>& h) const {
    t.clear();
    h.clear();
    for (const auto& g : segments)
        for (size_t i = 0; i < g.h.size(); ++i) {
            t.push_back(i + 1 == g.h.size() ? g.t1() : g.t0 + i * g.dt);
            h.push_back(g.h[i]);
        }
}

double l2_distance(const ControlSignal& a, const ControlSignal& b) {
    std::vector<double> ts, hs, tb;
    a.samples(ts, hs);
    b.samples(tb, hs);
    ts.insert(ts.end(), tb.begin(), tb.end());
    std::sort(ts.begin(), ts.end());
    const double tol = 1e-12 * std::max(1.0, ts.empty() ? 1.0 : std::abs(ts.back()));
    double s = 0.0;
    for (size_t i = 0; i + 1 < ts.size(); ++i) {
        double t0 = ts[i], t1 = ts[i + 1];
        if (t1 - t0 <= tol) continue;
        double dl = a.value(t0, Side::right) - b.value(t0, Side::right);
        double dr = a.value(t1, Side::left) - b.value(t1, Side::left);
        s += 0.5 * (t1 - t0) * (dl * dl + dr * dr);
    }
    return std::sqrt(s);
}

double mode_update(const std::vector<EigenMode>& modes, double t1, double t2, const ModeState& start,
                   const ControlSignal& h, int k) {
    if (k < 0 || k >= static_cast<int>(modes.size()) || k >= static_cast<int>(start.projections.size()))
        throw ValidationError("mode index outside the available modes");
    if (!(t1 <= t2)) throw ValidationError("mode_update needs t1 <= t2");
    const double lam = modes[k].lambda;
    double dt = h.max_dt();
    if (lam * dt > 0.5) {
        std::ostringstream os;
        os << "control step " << dt << " too coarse for lambda_" << k << "=" << lam << "; need dt <= "
           << 0.5 / lam;
        throw ValidationError(os.str());
    }
    return std::exp(-lam * (t2 - t1)) * start.projections[k] + h.exp_integral(t1, t2, lam);
}

ControlSignal phase1_control(const ProblemParams& p, const EigenMode& ground, double u0_proj0, double dt_max) {
    const double tau = p.tau();
    if (!(tau > 0.0)) throw ValidationError("phase 1 needs T > T*");
    ControlSignal c;
    Segment s = uniform_segment(0.0, tau, dt_max);
    for (size_t i = 0; i < s.h.size(); ++i) {
        double t = (i + 1 == s.h.size()) ? s.t1() : i * s.dt;
        s.h[i] = -u0_proj0 * std::exp(-ground.lambda * t) / tau;
    }
    c.segments.push_back(s);
    c.phase_boundaries = {s.t1()};
    return c;
}

std::vector<std::vector<double>> sample_eigenfunctions(const ProblemParams& p, const std::vector<EigenMode>& modes,
                                                       const std::vector<double>& x) {
    std::vector<std::vector<double>> psi;
    for (const auto& m : modes) {
        EigenFunction f(m, p);
        std::vector<double> v(x.size());
        for (size_t i = 0; i < x.size(); ++i) v[i] = f(x[i]);
        psi.push_back(std::move(v));
    }
    return psi;
}

ModeState project(const std::vector<std::vector<double>>& psi, const std::vector<double>& x,
                  const std::vector<double>& u, double t) {
    ModeState s;
    s.t = t;
    std::vector<double> prod(x.size());
    for (const auto& f : psi) {
        for (size_t i = 0; i < x.size(); ++i) prod[i] = u[i] * f[i];
        s.projections.push_back(trapezoid(x, prod));
    }
    return s;
}

ModeState state_at_tau(const ProblemParams& p, const std::vector<EigenMode>& modes, const ModeState& u0_projs) {
    const double tau = p.tau();
    if (!(tau > 0.0)) throw ValidationError("state_at_tau needs T > T*");
    ModeState s;
    s.t = tau;
    const double l0 = modes[0].lambda;
    const double ground = std::exp(-l0 * tau) * u0_projs.projections[0] / tau;
    s.projections.assign(modes.size(), 0.0);
    for (size_t k = 1; k < modes.size(); ++k) {
        double gap = modes[k].lambda - l0;
        if (!(gap > 0.0)) throw NumericError("spectrum-invariant-violation", "lambda_k collides with lambda_0");
        double integral = -std::expm1(-gap * tau) / gap;
        s.projections[k] = std::exp(-modes[k].lambda * tau) * u0_projs.projections[k] - ground * integral;
    }
    return s;
}

double coefficient_bound(const ProblemParams& p, const std::vector<EigenMode>& modes, int k, double u0_norm) {
    const double tau = p.tau();
    return (4.0 * p.L / (k * pi * std::sqrt(p.eps)) +
            2.0 * std::sqrt(2.0 * p.L) / (tau * (modes[k].lambda - modes[0].lambda))) *
           u0_norm;
}

std::vector<double> phase2_coefficients(const ProblemParams& p, const std::vector<EigenMode>& modes,
                                        const ModeState& state_tau, double u0_norm) {
    const double That = p.That();
    if (!(That > p.Tstar())) throw ValidationError("phase 2 needs That > T*");
    const double center = (1.0 + p.m) * That / 2.0;
    std::vector<double> c(modes.size(), 0.0);
    for (size_t k = 1; k < modes.size(); ++k) {
        double y = state_tau.projections[k];
        double b = coefficient_bound(p, modes, static_cast<int>(k), u0_norm);
        if (!(std::abs(y) <= b * (1.0 + 1e-12))) {
            std::ostringstream os;
            os << "k=" << k << " |y_k(tau)|=" << std::abs(y) << " > " << b;
            throw NumericError("coefficient-bound-violation", os.str());
        }
        c[k] = std::exp(-modes[k].mu * center) * y;
    }
    return c;
}

double fit_decay_constant(double r, double eps) {
    if (r < 0.0 || !std::isfinite(r)) throw ValidationError("decay fit needs a finite nonnegative ratio");
    if (r == 0.0) return inf;
    if (r > eps / std::exp(1.0)) return std::nan("");
    const double lr = std::log(r);
    auto g = [&](double C) { return std::log(C) - C / eps - lr; };
    double lo = eps, hi = 2.0 * eps;
    while (g(hi) > 0.0) hi *= 2.0;
    if (g(lo) <= 0.0) return lo;
    boost::uintmax_t it = 200;
    auto root = boost::math::tools::toms748_solve(g, lo, hi, boost::math::tools::eps_tolerance<double>(50), it);
    return 0.5 * (root.first + root.second);
}

SynthesisResult synthesize(const ProblemParams& p, const std::vector<double>& x, const std::vector<double>& u0,
                           const SynthesisOptions& opts) {
    p.validate();
    if (!(p.T > p.Tstar())) throw ValidationError("synthesis needs T > T* = 4 sqrt(3) L");
    if (x.size() != u0.size() || x.size() < 3) throw ValidationError("u0 must be sampled on the PDE nodes");
    if (opts.K < 1) throw ValidationError("K must be at least 1");

    SynthesisResult r;
    r.K = opts.K;
    r.tau = p.tau();
    r.That = p.That();
    r.kappa = std::isnan(p.kappa_mult) ? std::min(1.1, std::pow(r.That / p.Tstar(), 2) * (1.0 - 1e-3)) : p.kappa_mult;
    if (!(r.kappa > 1.0 && r.That > std::sqrt(r.kappa) * p.Tstar()))
        throw ValidationError("kappa must satisfy 1 < kappa < (That/T*)^2");

    r.modes = spectrum(p, opts.K);
    const auto psi = sample_eigenfunctions(p, r.modes, x);
    r.u0_projections = project(psi, x, u0, 0.0);
    r.u0_norm = l2_norm(x, u0);

    double dt = std::min(p.eps / 4.0, 1.0 / (4.0 * r.modes.back().lambda));
    if (opts.dt > 0.0) dt = opts.dt;

    // phase 1, dissipation window
    ControlSignal h = phase1_control(p, r.modes[0], r.u0_projections.projections[0], dt);
    const double t_tau = h.segments.back().t1();
    h.segments.push_back(uniform_segment(t_tau, t_tau + p.m * r.That, dt));
    const double t_mom = h.segments.back().t1();

    r.state_tau = state_at_tau(p, r.modes, r.u0_projections);
    h.coefficients = phase2_coefficients(p, r.modes, r.state_tau, r.u0_norm);

    // phase 2 on [t_mom, T] in the centered variable t = s - tau - (1+m)That/2
    r.T_tilde = p.T - t_mom;
    // the family quadrature needs a fine grid even when few modes set a coarse dt
    const TimeGrid grid{r.T_tilde, std::max(4000, static_cast<int>(std::ceil(r.T_tilde / dt - 1e-9)))};
    const auto spec = rescale(p, r.T_tilde, opts.K);
    std::vector<double> htilde(grid.Nt + 1, 0.0);
    bool any = false;
    for (int k = 1; k <= opts.K; ++k) any = any || h.coefficients[k] != 0.0;

    double tail_energy = 0.0, kept_energy = 0.0;
    const double center = (1.0 + p.m) * r.That / 2.0;
    std::vector<EigenMode> tail_modes;
    for (int k = opts.K + 1; k <= opts.K + 16; ++k) tail_modes.push_back(solve_lambda_k(p, k));
    auto tail_coef = [&](const EigenMode& m) {
        double b = (4.0 * p.L / (m.k * pi * std::sqrt(p.eps)) * std::exp(-m.lambda * r.tau) +
                    2.0 * std::sqrt(2.0 * p.L) / (r.tau * (m.lambda - r.modes[0].lambda))) *
                   r.u0_norm;
        return std::exp(-m.mu * center) * b;
    };

    if (opts.solver == Solver::biorth) {
        const Multiplier mult = make_multiplier(spec.S, r.kappa, opts.beta_fraction);
        BiorthOptions bo;
        bo.tolerance = inf;
        const BiorthFamily fam = build_family(spec, mult, opts.K, grid, bo);
        r.family_residual_max = fam.max_abs_residual;
        for (int k = 1; k <= opts.K; ++k)
            for (int i = 0; i <= grid.Nt; ++i) htilde[i] -= h.coefficients[k] * fam.q[k - 1][i];
        double cmax = *std::max_element(fam.bior_constants.begin(), fam.bior_constants.end());
        double expo = 3.0 * r.kappa * p.L * p.L / (p.eps * r.T_tilde);
        for (int k = 1; k <= opts.K; ++k) kept_energy += std::pow(h.coefficients[k] * fam.norms[k - 1], 2);
        for (const auto& m : tail_modes) tail_energy += std::pow(tail_coef(m) * cmax * std::exp(expo) / m.mu, 2);
    } else {
        std::vector<int> idx;
        std::vector<double> targets;
        for (int j = 0; j <= opts.K; ++j) {
            idx.push_back(j);
            targets.push_back(j == 0 ? 0.0 : -h.coefficients[j]);
        }
        auto sol = gram_moment_solve(spec, idx, targets, grid);
        r.gram_condition = sol.condition;
        htilde = sol.values;
        for (int k = 1; k <= opts.K; ++k) kept_energy += h.coefficients[k] * h.coefficients[k];
        for (const auto& m : tail_modes) tail_energy += std::pow(tail_coef(m), 2);
    }
    r.tail_ratio = tail_energy == 0.0 ? 0.0 : tail_energy / kept_energy;
    if (any && !(r.tail_ratio <= 1e-8)) {
        std::ostringstream os;
        os << "estimated tail energy ratio " << r.tail_ratio << " with K=" << opts.K;
        throw NumericError("mode-truncation-insufficient", os.str());
    }

    {
        std::vector<int> idx;
        for (int j = 0; j <= opts.K; ++j) idx.push_back(j);
        r.phase2_moments = moments(spec, idx, grid, htilde);
        r.phase2_targets.assign(opts.K + 1, 0.0);
        for (int j = 1; j <= opts.K; ++j) r.phase2_targets[j] = -h.coefficients[j];
    }

    Segment s2;
    s2.t0 = t_mom;
    s2.dt = grid.dt();
    s2.h.resize(grid.Nt + 1);
    for (int i = 0; i <= grid.Nt; ++i) {
        double rel = center + grid.t(i);  // s - tau
        s2.h[i] = std::exp(-rel / (4.0 * p.eps)) * htilde[i];
    }
    h.segments.push_back(s2);
    h.phase_boundaries = {t_tau, t_mom, s2.t1()};
    r.signal = std::move(h);

    // costs and bounds
    r.h1_norm = r.signal.l2_norm(0.0, t_tau);
    r.h2_norm = r.signal.l2_norm(t_mom, p.T + 1.0);
    r.l2_norm = r.signal.l2_norm();
    const double sq = 2.0 * std::sqrt(2.0 * p.L);
    r.cout1_printed_ok = r.h1_norm <= sq / r.tau * r.u0_norm * (1.0 + 1e-12);
    r.cout1_ok = r.h1_norm <= sq / std::sqrt(r.tau) * r.u0_norm * (1.0 + 1e-12);
    if (!r.cout1_ok) {
        std::ostringstream os;
        os << "||h1||=" << r.h1_norm << " above 2 sqrt(2L)||u0||/sqrt(tau)";
        throw NumericError("phase1-bound-violation", os.str());
    }
    if (r.u0_norm > 0.0) {
        double ratio = r.h2_norm / r.u0_norm;
        r.C_fit = fit_decay_constant(ratio, p.eps);
        double tail = std::isnan(r.C_fit) ? p.eps / std::exp(1.0) : ratio;
        r.bound_rhs = (sq / (p.T - p.Tstar()) + tail) * r.u0_norm;
    } else {
        r.C_fit = inf;
        r.bound_rhs = 0.0;
    }
    r.bound_ok = r.l2_norm <= r.bound_rhs * (1.0 + 1e-12);

    // certification through the duality formula on the sampled signal
    const double scale = r.u0_norm > 0.0 ? r.u0_norm : 1.0;
    r.ground_residual = std::abs(mode_update(r.modes, 0.0, t_tau, r.u0_projections, r.signal, 0)) / scale;
    r.final_modes.resize(r.modes.size());
    for (size_t j = 0; j < r.modes.size(); ++j) {
        r.final_modes[j] = mode_update(r.modes, 0.0, r.signal.t_end(), r.u0_projections, r.signal, static_cast<int>(j));
        r.moment_residual_max = std::max(r.moment_residual_max, std::abs(r.final_modes[j]) / scale);
    }
    return r;
}

ControlSignal limit_control(const ProblemParams& p, const std::vector<double>& x, const std::vector<double>& u0,
                            LimitShape shape, double dt) {
    const double mass = trapezoid(x, u0);
    if (shape == LimitShape::theorem2) {
        if (!(p.T > p.Tstar())) throw ValidationError("Theorem-2 limit control needs T > T*");
        double sw = 0.5 * (p.T - p.Tstar());
        return ControlSignal::step(-2.0 * mass / (p.T - p.Tstar()), sw, p.T, dt);
    }
    if (!(p.T > p.L)) throw ValidationError("optimal limit control needs T > L");
    return ControlSignal::step(-mass / (p.T - p.L), p.T - p.L, p.T, dt);
}

nlohmann::json synthesis_report(const ProblemParams& p, const SynthesisResult& r) {
    nlohmann::json j;
    j["eps"] = p.eps;
    j["L"] = p.L;
    j["T"] = p.T;
    j["tau"] = r.tau;
    j["m"] = p.m;
    j["kappa"] = r.kappa;
    j["K"] = r.K;
    j["l2_norm"] = r.l2_norm;
    j["bound_rhs"] = r.bound_rhs;
    j["moment_residual_max"] = r.moment_residual_max;
    j["ground_residual"] = r.ground_residual;
    j["h1_norm"] = r.h1_norm;
    j["h2_norm"] = r.h2_norm;
    j["C_fit"] = std::isfinite(r.C_fit) ? nlohmann::json(r.C_fit) : nlohmann::json(nullptr);
    j["bound_ok"] = r.bound_ok;
    j["cout1_printed_ok"] = r.cout1_printed_ok;
    j["tail_ratio"] = r.tail_ratio;
    j["u0_norm"] = r.u0_norm;
    std::vector<double> c(r.signal.coefficients.begin() + (r.signal.coefficients.empty() ? 0 : 1),
                          r.signal.coefficients.end());
    j["coefficients"] = c;
    j["phase_boundaries"] = r.signal.phase_boundaries;
    return j;
}

void write_control_csv(const std::string& path, const ControlSignal& h) {
    std::vector<double> t, v;
    h.samples(t, v);
    write_columns_csv(path, {"t", "h"}, {t, v});
}

}  // namespace shockctl
