#include "shockctl/pde.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "shockctl/io.hpp"

namespace shockctl {

namespace {

// G(x) = int_0^x rho, odd in x
double graded_primitive(double x, double L, double A, double w) {
    double u = std::abs(x);
    double g = u + A * w * (-std::expm1(-u / w)) + A * w * (std::exp(-(L - u) / w) - std::exp(-L / w));
    return x < 0.0 ? -g : g;
}

std::vector<double> graded_nodes(double L, int n, double A, double w) {
    std::vector<double> x(n);
    const double GL = graded_primitive(L, L, A, w);
    for (int i = 0; i < n; ++i) {
        double target = (2.0 * i / (n - 1) - 1.0) * GL;
        double lo = -L, hi = L;
        for (int it = 0; it < 200 && hi - lo > 1e-16 * L; ++it) {
            double mid = 0.5 * (lo + hi);
            (graded_primitive(mid, L, A, w) < target ? lo : hi) = mid;
        }
        x[i] = 0.5 * (lo + hi);
    }
    for (int i = 0; i < n / 2; ++i) x[n - 1 - i] = -x[i];
    if (n % 2 == 1) x[n / 2] = 0.0;
    x.front() = -L;
    x.back() = L;
    return x;
}

double max_spacing_ratio(const std::vector<double>& x) {
    double r = 1.0;
    for (size_t i = 1; i + 1 < x.size(); ++i) {
        double a = x[i] - x[i - 1], b = x[i + 1] - x[i];
        r = std::max(r, std::max(a / b, b / a));
    }
    return r;
}

// Piecewise-linear interpolant of samples, zero outside [x0, xn].
double interp(const std::vector<double>& x, const std::vector<double>& u, double t) {
    if (t < x.front() || t > x.back()) return 0.0;
    size_t i = std::upper_bound(x.begin(), x.end(), t) - x.begin();
    if (i >= x.size()) return u.back();
    if (i == 0) return u.front();
    double w = (t - x[i - 1]) / (x[i] - x[i - 1]);
    return (1.0 - w) * u[i - 1] + w * u[i];
}

// Exact integral of the interpolant over [a, b].
double interp_integral(const std::vector<double>& x, const std::vector<double>& u, double a, double b) {
    a = std::max(a, x.front());
    b = std::min(b, x.back());
    if (!(b > a)) return 0.0;
    double s = 0.0;
    for (size_t i = 1; i < x.size(); ++i) {
        double lo = std::max(a, x[i - 1]), hi = std::min(b, x[i]);
        if (hi <= lo) continue;
        s += 0.5 * (hi - lo) * (interp(x, u, lo) + interp(x, u, hi));
    }
    return s;
}

// Face coefficients: F_{i+1/2} = a[i] u_i + b[i] u_{i+1}
struct Fluxes {
    std::vector<double> a, b, vol;
};

Fluxes assemble(const ProblemParams& p, const std::vector<double>& x) {
    const int n = static_cast<int>(x.size());
    Fluxes f;
    f.a.resize(n - 1);
    f.b.resize(n - 1);
    f.vol.assign(n, 0.0);
    for (int i = 0; i + 1 < n; ++i) {
        double d = x[i + 1] - x[i];
        double U = shock_profile(p, 0.5 * (x[i] + x[i + 1]));
        double pe = std::abs(U) * d / p.eps;
        double th = pe > 2.0 ? 1.0 - 2.0 / pe : 0.0;
        double wl = 0.5 * (1.0 - th) + (U > 0.0 ? th : 0.0);
        double wr = 0.5 * (1.0 - th) + (U > 0.0 ? 0.0 : th);
        f.a[i] = U * wl + p.eps / d;
        f.b[i] = U * wr - p.eps / d;
    }
    for (int i = 1; i + 1 < n; ++i) f.vol[i] = 0.5 * (x[i + 1] - x[i - 1]);
    return f;
}

// One theta step on the interior unknowns u[1..n-2]; u[0], u[n-1] are boundary values.
void theta_step(const Fluxes& f, std::vector<double>& u, double dt, double theta, double h_old, double h_new,
                std::vector<double>& sub, std::vector<double>& diag, std::vector<double>& sup,
                std::vector<double>& rhs) {
    const int n = static_cast<int>(u.size());
    const int m = n - 2;
    for (int r = 0; r < m; ++r) {
        int i = r + 1;
        double lo = f.a[i - 1] / f.vol[i];
        double di = (f.b[i - 1] - f.a[i]) / f.vol[i];
        double up = -f.b[i] / f.vol[i];
        double Au = lo * u[i - 1] + di * u[i] + up * u[i + 1];
        if (i == 1) Au = Au - lo * u[0] + lo * h_old;  // explicit part with the old boundary value
        rhs[r] = u[i] + (1.0 - theta) * dt * Au;
        if (i == 1) rhs[r] += theta * dt * lo * h_new;
        sub[r] = -theta * dt * lo;
        diag[r] = 1.0 - theta * dt * di;
        sup[r] = -theta * dt * up;
    }
    // Thomas
    for (int r = 1; r < m; ++r) {
        double w = sub[r] / diag[r - 1];
        diag[r] -= w * sup[r - 1];
        rhs[r] -= w * rhs[r - 1];
    }
    for (int r = m - 1; r >= 0; --r) {
        double v = rhs[r] - (r + 1 < m ? sup[r] * u[r + 2] : 0.0);
        if (!(std::isfinite(v) && diag[r] != 0.0)) {
            std::ostringstream os;
            os << "tridiagonal solve broke down at row " << r;
            throw NumericError("linear-solve-failed", os.str());
        }
        u[r + 1] = v / diag[r];
    }
    u[0] = h_new;
    u[n - 1] = 0.0;
}

}  // namespace

double shock_profile(const ProblemParams& p, double x) { return -std::tanh(x / (2.0 * p.eps)); }

Grid make_grid(const ProblemParams& p, int n, bool graded) {
    p.validate();
    if (n < 16) throw ValidationError("grid needs at least 16 nodes");
    const double w = 2.0 * p.eps;
    Grid g;
    double A = graded ? 4.0 : 0.0;
    for (;;) {
        g.nodes = graded_nodes(p.L, n, A, w);
        g.max_ratio = max_spacing_ratio(g.nodes);
        if (g.max_ratio <= 1.1 || A == 0.0) break;
        A = A < 1e-3 ? 0.0 : 0.5 * A;
    }
    g.graded = A > 0.0;

    int inside = 0;
    double hs = 1e300, hw = 1e300;
    for (int i = 0; i < n; ++i) {
        if (std::abs(g.nodes[i]) <= 2.0 * p.eps) ++inside;
        if (i + 1 < n) {
            double d = g.nodes[i + 1] - g.nodes[i];
            double mid = 0.5 * (g.nodes[i] + g.nodes[i + 1]);
            if (std::abs(mid) <= 2.0 * p.eps) hs = std::min(hs, d);
            if (p.L - std::abs(mid) <= 2.0 * p.eps) hw = std::min(hw, d);
        }
    }
    if (inside < 8) {
        std::ostringstream os;
        os << "grid-too-coarse: " << inside << " nodes in |x| <= 2 eps, need 8";
        throw ValidationError(os.str());
    }
    g.layer_resolution_shock = hs / p.eps;
    g.layer_resolution_wall = hw / p.eps;
    return g;
}

SimulationResult simulate(const ProblemParams& p, const Grid& grid, const std::vector<double>& u0,
                          const ControlSignal& h, const SimulationOptions& opts) {
    p.validate();
    const auto& x = grid.nodes;
    const int n = grid.size();
    if (static_cast<int>(u0.size()) != n) throw ValidationError("u0 must be sampled on the grid");
    if (h.segments.empty()) throw ValidationError("control signal is empty");
    if (opts.K < 0 || opts.stride < 1) throw ValidationError("K >= 0 and stride >= 1 required");

    const auto modes = opts.K >= 1 ? spectrum(p, opts.K) : std::vector<EigenMode>{solve_lambda0(p)};
    const double lamK = modes.back().lambda;
    const double dt_max = std::min(p.eps, 1.0 / lamK) / 4.0;
    if (!(opts.dt > 0.0 && opts.dt <= dt_max * (1.0 + 1e-12))) {
        std::ostringstream os;
        os << "dt=" << opts.dt << " violates dt <= min(eps, 1/lambda_K)/4 = " << dt_max;
        throw ValidationError(os.str());
    }
    const auto psi = sample_eigenfunctions(p, modes, x);
    const Fluxes f = assemble(p, x);

    SimulationResult res;
    res.dt = opts.dt;
    std::vector<double> u = u0;
    u.front() = h.value(0.0, Side::right);
    u.back() = 0.0;
    auto snap = [&](double t) {
        res.mode_history.push_back(project(psi, x, u, t));
        res.norm_history.push_back(l2_norm(x, u));
        if (opts.keep_states) res.states.push_back(u);
    };
    snap(0.0);

    std::vector<double> sub(n), diag(n), sup(n), rhs(n);
    int step = 0;
    for (const auto& seg : h.segments) {
        const double t0 = seg.t0, t1 = seg.t1();
        const int ns = std::max(1, static_cast<int>(std::ceil((t1 - t0) / opts.dt - 1e-9)));
        const double d = (t1 - t0) / ns;
        auto hv = [&](double t) {
            // one-sided inside this segment
            const int m = static_cast<int>(seg.h.size()) - 1;
            double r = (t - seg.t0) / seg.dt;
            int i = std::clamp(static_cast<int>(std::floor(r)), 0, m - 1);
            double w = std::clamp(r - i, 0.0, 1.0);
            return (1.0 - w) * seg.h[i] + w * seg.h[i + 1];
        };
        u.front() = hv(t0);
        for (int s = 0; s < ns; ++s) {
            double ta = t0 + s * d, tb = (s + 1 == ns) ? t1 : t0 + (s + 1) * d;
            if (s == 0) {
                double tm = 0.5 * (ta + tb);
                theta_step(f, u, tm - ta, 1.0, hv(ta), hv(tm), sub, diag, sup, rhs);
                theta_step(f, u, tb - tm, 1.0, hv(tm), hv(tb), sub, diag, sup, rhs);
            } else {
                theta_step(f, u, tb - ta, 0.5, hv(ta), hv(tb), sub, diag, sup, rhs);
            }
            ++step;
            if (step % opts.stride == 0 || s + 1 == ns) snap(tb);
        }
    }
    res.steps = step;
    res.final_state = u;
    res.final_l2 = l2_norm(x, u);
    res.cost_measured = h.l2_norm();
    return res;
}

InviscidState limit_solve(const ProblemParams& p, const std::vector<double>& x, const std::vector<double>& u0,
                          const ControlSignal& h, double t) {
    if (!(t >= 0.0)) throw ValidationError("time must be nonnegative");
    if (x.size() != u0.size()) throw ValidationError("u0 must be sampled on x");
    const double L = p.L;
    InviscidState s;
    s.t = t;
    s.x = x;
    s.left_part.assign(x.size(), 0.0);
    s.right_part.assign(x.size(), 0.0);
    for (size_t i = 0; i < x.size(); ++i) {
        double xi = x[i];
        if (xi < 0.0)
            s.left_part[i] = (t < xi + L) ? interp(x, u0, xi - t) : h.value(t - xi - L, Side::right);
        else if (xi > 0.0)
            s.right_part[i] = (t < L - xi) ? interp(x, u0, xi + t) : 0.0;
    }
    if (t < L)
        s.dirac_mass = interp_integral(x, u0, -t, t);
    else
        s.dirac_mass = interp_integral(x, u0, -L, L) + h.integral(0.0, t - L);
    return s;
}

ViscousLimitReport viscous_vs_limit(const ProblemParams& base, const std::vector<double>& eps_grid,
                                    const std::function<double(double)>& u0fn, int n, const SynthesisOptions& sopts,
                                    double dt) {
    ViscousLimitReport rep;
    for (double e : eps_grid) {
        ProblemParams p = base;
        p.eps = e;
        Grid g = make_grid(p, n);
        auto u0 = sample_datum(u0fn, g.nodes, true);
        auto syn = synthesize(p, g.nodes, u0, sopts);
        SimulationOptions so;
        so.dt = dt;
        so.K = 4;
        so.stride = 1000000;
        auto sim = simulate(p, g, u0, syn.signal, so);
        auto h0 = limit_control(p, g.nodes, u0, LimitShape::theorem2);
        ViscousLimitRow row;
        row.eps = e;
        row.distance = l2_distance(syn.signal, h0);
        row.final_l2 = sim.final_l2 / syn.u0_norm;
        row.cost = syn.l2_norm / syn.u0_norm;
        row.bound_rhs = syn.bound_rhs / syn.u0_norm;
        rep.rows.push_back(row);

        if (rep.rows.size() == 1) {
            auto lim = limit_solve(p, g.nodes, u0, h0, p.T);
            std::vector<double> dens(g.nodes.size());
            for (size_t i = 0; i < dens.size(); ++i) dens[i] = lim.left_part[i] + lim.right_part[i];
            rep.limit_final_l2 = l2_norm(g.nodes, dens);
            rep.limit_final_mass = lim.dirac_mass;
            rep.limit_cost = h0.l2_norm() / syn.u0_norm;
        }
    }
    rep.distance_decreasing = rep.rows.size() >= 2;
    for (size_t i = 1; i < rep.rows.size(); ++i)
        if (!(rep.rows[i].distance < rep.rows[i - 1].distance)) rep.distance_decreasing = false;
    return rep;
}

nlohmann::json simulation_manifest(const ProblemParams& p, const Grid& g, const SimulationResult& r) {
    nlohmann::json j;
    j["eps"] = p.eps;
    j["L"] = p.L;
    j["T"] = p.T;
    j["n"] = g.size();
    j["dt"] = r.dt;
    j["final_l2"] = r.final_l2;
    j["cost_measured"] = r.cost_measured;
    j["steps"] = r.steps;
    j["graded"] = g.graded;
    j["max_spacing_ratio"] = g.max_ratio;
    return j;
}

}  // namespace shockctl
