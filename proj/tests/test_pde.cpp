#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "shockctl/control.hpp"
#include "shockctl/io.hpp"
#include "shockctl/pde.hpp"

using namespace shockctl;

namespace {

ProblemParams at(double eps, double T) {
    ProblemParams p;
    p.eps = eps;
    p.L = 1.0;
    p.T = T;
    return p;
}

// least-squares slope of log ||u(t)|| over t >= t_min
double decay_rate(const SimulationResult& r, double t_min) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (size_t i = 0; i < r.mode_history.size(); ++i) {
        double t = r.mode_history[i].t;
        if (t < t_min) continue;
        double y = std::log(r.norm_history[i]);
        sx += t;
        sy += y;
        sxx += t * t;
        sxy += t * y;
        ++n;
    }
    return -(n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// eigenfunction of the forward operator: sech^2(x/2eps) times the adjoint one
std::vector<double> forward_mode(const ProblemParams& p, const EigenMode& m, const Grid& g) {
    EigenFunction f(m, p);
    std::vector<double> u(g.size());
    for (int i = 0; i < g.size(); ++i) {
        double c = std::cosh(g.nodes[i] / (2.0 * p.eps));
        u[i] = f(g.nodes[i]) / (c * c);
    }
    return u;
}

}  // namespace

TEST_SUITE("pde") {

TEST_CASE("shock profile") {
    auto p = at(0.1, 1.0);
    CHECK(shock_profile(p, 0.0) == 0.0);
    CHECK(shock_profile(p, 0.2) == doctest::Approx(-0.7615941559557649).epsilon(1e-15));
    CHECK(shock_profile(at(0.01, 1.0), -1.0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("graded grid invariants") {
    for (double eps : {0.2, 0.1, 0.05, 0.02}) {
        auto p = at(eps, 1.0);
        for (int n : {513, 2048}) {
            auto g = make_grid(p, n);
            CHECK(g.nodes.front() == -1.0);
            CHECK(g.nodes.back() == 1.0);
            CHECK(g.max_ratio <= 1.1);
            for (int i = 0; i + 1 < n; ++i) CHECK(g.nodes[i + 1] > g.nodes[i]);
            for (int i = 0; i < n; ++i) CHECK(g.nodes[i] == -g.nodes[n - 1 - i]);
            int inside = 0;
            for (double x : g.nodes) inside += std::abs(x) <= 2.0 * eps;
            CHECK(inside >= 8);
        }
    }
}

TEST_CASE("coarse grids are rejected") {
    CHECK_THROWS_AS(make_grid(at(0.002, 1.0), 64), ValidationError);
    CHECK_THROWS_AS(make_grid(at(0.1, 1.0), 8), ValidationError);
}

TEST_CASE("zero data stay zero") {
    auto p = at(0.1, 1.0);
    auto g = make_grid(p, 257);
    std::vector<double> u0(g.size(), 0.0);
    auto r = simulate(p, g, u0, ControlSignal::zero(1.0, 0.01), {});
    CHECK(r.final_l2 == 0.0);
}

TEST_CASE("step guard") {
    auto p = at(0.1, 1.0);
    auto g = make_grid(p, 257);
    std::vector<double> u0(g.size(), 0.0);
    SimulationOptions o;
    o.dt = 0.05;  // > min(eps, 1/lambda_4)/4
    CHECK_THROWS_AS(simulate(p, g, u0, ControlSignal::zero(1.0, 0.01), o), ValidationError);
}

TEST_CASE("first excited mode decays at lambda_1") {
    auto p = at(0.1, 3.0);
    auto g = make_grid(p, 2048);
    auto m1 = solve_lambda_k(p, 1);
    auto u0 = forward_mode(p, m1, g);
    SimulationOptions o;
    o.dt = 1e-3;
    o.stride = 50;
    auto r = simulate(p, g, u0, ControlSignal::zero(p.T, 0.01), o);
    CHECK(decay_rate(r, 0.5) == doctest::Approx(m1.lambda).epsilon(0.02));
}

TEST_CASE("ground mode is metastable") {
    auto p = at(0.05, 3.0);
    auto g = make_grid(p, 2048);
    auto u0 = forward_mode(p, solve_lambda0(p), g);
    SimulationOptions o;
    o.dt = 2e-3;
    o.stride = 50;
    auto r = simulate(p, g, u0, ControlSignal::zero(p.T, 0.01), o);
    CHECK(decay_rate(r, 0.5) <= 1e-2);
}

TEST_CASE("maximum principle without control") {
    auto p = at(0.05, 2.0);
    auto g = make_grid(p, 1024);
    auto u0 = sample_datum(make_initial_datum("bump", p), g.nodes, false);
    SimulationOptions o;
    o.dt = 2e-3;
    o.stride = 10;
    o.keep_states = true;
    auto r = simulate(p, g, u0, ControlSignal::zero(p.T, 0.01), o);
    double mn = 0.0;
    for (const auto& s : r.states) mn = std::min(mn, *std::min_element(s.begin(), s.end()));
    CHECK(mn >= -1e-10);
}

TEST_CASE("second-order self-convergence in space and time") {
    auto p = at(0.1, 0.5);
    std::vector<std::vector<double>> finals;
    std::vector<Grid> grids;
    // smooth boundary input h(t) = sin(2 pi t) t
    for (int level = 0; level < 4; ++level) {
        int n = (256 << level) + 1;
        double dt = 4e-3 / (1 << level);
        auto g = make_grid(p, n, false);
        ControlSignal h;
        Segment s{0.0, 1e-4, {}};
        for (int i = 0; i <= 5000; ++i) s.h.push_back(std::sin(2 * std::numbers::pi * i * 1e-4) * i * 1e-4);
        h.segments.push_back(s);
        auto u0 = sample_datum(make_initial_datum("bump", p), g.nodes, false);
        SimulationOptions o;
        o.dt = dt;
        auto r = simulate(p, g, u0, h, o);
        finals.push_back(r.final_state);
        grids.push_back(g);
    }
    std::vector<double> diff;
    for (int l = 0; l < 3; ++l) {
        double s = 0.0;
        const auto& c = finals[l];
        const auto& f = finals[l + 1];
        for (size_t i = 0; i < c.size(); ++i) s = std::max(s, std::abs(c[i] - f[2 * i]));
        diff.push_back(s);
    }
    CHECK(grids[0].nodes[7] == grids[1].nodes[14]);
    CHECK(diff[0] / diff[1] > 3.5);
    CHECK(diff[1] / diff[2] > 3.5);
}

TEST_CASE("duality consistency along a controlled trajectory") {
    auto p = at(0.1, 1.5 * 4.0 * std::sqrt(3.0));
    auto g = make_grid(p, 2048);
    auto u0 = sample_datum(make_initial_datum("bump", p), g.nodes, true);
    auto syn = synthesize(p, g.nodes, u0);
    SimulationOptions o;
    o.dt = 1e-3;
    o.K = 4;
    o.stride = 200;
    auto r = simulate(p, g, u0, syn.signal, o);
    CHECK(r.final_l2 <= 1e-3);
    double worst = 0.0;
    for (size_t i = 0; i + 1 < r.mode_history.size(); ++i) {
        const auto& a = r.mode_history[i];
        const auto& b = r.mode_history[i + 1];
        for (int k = 0; k <= 4; ++k) {
            double pred = mode_update(syn.modes, a.t, b.t, a, syn.signal, k);
            double ctrl = syn.signal.exp_integral(a.t, b.t, syn.modes[k].lambda);
            double scale = r.norm_history[i] * norm_ratio(syn.modes[k], p) + std::abs(ctrl);
            worst = std::max(worst, std::abs(pred - b.projections[k]) / scale);
        }
    }
    CHECK(worst <= 1e-4);
}

TEST_CASE("inviscid solver: optimal control empties the domain") {
    auto p = at(0.1, 2.5);
    auto g = make_grid(p, 801, false);
    auto u0 = sample_datum(make_initial_datum("bump", p), g.nodes, false);
    auto h = limit_control(p, g.nodes, u0, LimitShape::optimal);
    auto s = limit_solve(p, g.nodes, u0, h, p.T);
    for (size_t i = 0; i < g.nodes.size(); ++i) {
        CHECK(s.left_part[i] == 0.0);
        CHECK(s.right_part[i] == 0.0);
    }
    // the inflow cancels the collected mass up to rounding
    CHECK(std::abs(s.dirac_mass) <= 1e-13 * trapezoid(g.nodes, u0));
}

TEST_CASE("inviscid solver: mass before the walls empty") {
    auto p = at(0.1, 2.0);
    auto g = make_grid(p, 801, false);
    auto u0 = sample_datum(make_initial_datum("sin", p), g.nodes, false);
    for (double& v : u0) v = v * v;
    auto zero = ControlSignal::zero(p.T, 0.01);
    for (double t : {0.1, 0.35, 0.8}) {
        auto s = limit_solve(p, g.nodes, u0, zero, t);
        // -t and t are grid nodes, so the trapezoid over [-t, t] is exact for the interpolant
        std::vector<double> xs, us;
        for (size_t i = 0; i < g.nodes.size(); ++i)
            if (std::abs(g.nodes[i]) <= t + 1e-12) {
                xs.push_back(g.nodes[i]);
                us.push_back(u0[i]);
            }
        CHECK(s.dirac_mass == doctest::Approx(trapezoid(xs, us)).epsilon(1e-12));
    }
}

TEST_CASE("inviscid solver: total mass changes only through the inflow") {
    auto p = at(0.1, 3.0);
    auto g = make_grid(p, 2001, false);
    auto u0 = sample_datum(make_initial_datum("bump", p), g.nodes, false);
    auto h = ControlSignal::step(0.3, 2.0, 3.0, 0.01);
    const double m0 = trapezoid(g.nodes, u0);
    for (double t : {0.5, 1.0, 1.5, 2.5}) {
        auto s = limit_solve(p, g.nodes, u0, h, t);
        std::vector<double> dens(g.nodes.size());
        for (size_t i = 0; i < dens.size(); ++i) dens[i] = s.left_part[i] + s.right_part[i];
        double total = trapezoid(g.nodes, dens) + s.dirac_mass;
        CHECK(total == doctest::Approx(m0 + h.integral(0.0, t)).epsilon(2e-3));
    }
}

TEST_CASE("inviscid solver: zero in, zero out") {
    auto p = at(0.1, 2.0);
    auto g = make_grid(p, 101, false);
    std::vector<double> u0(g.size(), 0.0);
    auto s = limit_solve(p, g.nodes, u0, ControlSignal::zero(2.0, 0.1), 1.5);
    CHECK(s.dirac_mass == 0.0);
    for (double v : s.left_part) CHECK(v == 0.0);
}

TEST_CASE("simulation manifest fields") {
    auto p = at(0.1, 0.1);
    auto g = make_grid(p, 257);
    std::vector<double> u0(g.size(), 0.0);
    auto r = simulate(p, g, u0, ControlSignal::zero(0.1, 0.01), {});
    auto j = simulation_manifest(p, g, r);
    for (auto key : {"eps", "L", "T", "n", "dt", "final_l2", "cost_measured"}) CHECK(j.contains(key));
}

}
