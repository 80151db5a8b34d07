#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "shockctl/biorth.hpp"
#include "shockctl/bounds.hpp"
#include "shockctl/control.hpp"
#include "shockctl/io.hpp"
#include "shockctl/pde.hpp"
#include "shockctl/spectral.hpp"

using namespace shockctl;
using nlohmann::json;

namespace {

struct Config {
    std::string eps = "0.1";
    double L = 1.0;
    std::string T;
    int K = -1;
    int n = -1;
    double dt = -1.0;
    double m = 0.5;
    double kappa = std::nan("");
    std::string u0;
    std::string solver = "biorth";
    std::string out;
    int snapshots = 0;
    std::string shape = "optimal";
    double beta_fraction = -1.0;
    bool zero_control = false;
};

std::string datum(const Config& c) { return c.u0.empty() ? "sin" : c.u0; }

std::vector<double> parse_list(const std::string& s, const char* what) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            size_t used = 0;
            v.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ValidationError(std::string("bad value '") + item + "' for " + what);
        }
    }
    return v;
}

double parse_one(const std::string& s, const char* what) {
    auto v = parse_list(s, what);
    if (v.size() != 1) throw ValidationError(std::string(what) + " takes a single value here");
    return v[0];
}

std::string stem_of(const std::string& out) {
    auto dot = out.find_last_of('.');
    auto slash = out.find_last_of('/');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return out;
    return out.substr(0, dot);
}

ProblemParams params_of(const Config& c, double T_default) {
    ProblemParams p;
    p.eps = parse_one(c.eps, "--eps");
    p.L = c.L;
    p.T = c.T.empty() ? T_default : parse_one(c.T, "--T");
    p.m = c.m;
    p.kappa_mult = c.kappa;
    p.validate();
    return p;
}

json params_json(const ProblemParams& p) {
    json j;
    j["eps"] = p.eps;
    j["L"] = p.L;
    j["T"] = p.T;
    j["m"] = p.m;
    j["kappa"] = std::isnan(p.kappa_mult) ? json(nullptr) : json(p.kappa_mult);
    return j;
}

Solver solver_of(const std::string& s) {
    if (s == "biorth") return Solver::biorth;
    if (s == "gram") return Solver::gram;
    throw ValidationError("--solver must be biorth or gram");
}

json run_spectrum(const Config& c) {
    auto p = params_of(c, 1.0);
    int K = c.K < 0 ? 8 : c.K;
    std::string out = c.out.empty() ? "spectrum.csv" : c.out;
    auto modes = spectrum(p, K);
    write_spectrum_csv(out, modes, p);
    json m = params_json(p);
    m["K"] = K;
    m["outputs"] = {out};
    return m;
}

json run_biorth(const Config& c) {
    // --T is the rescaled horizon T~ here
    auto p = params_of(c, 7.0);
    int K = c.K < 0 ? 6 : c.K;
    int Nt = c.n < 0 ? 2000 : c.n;
    double kappa = std::isnan(c.kappa) ? 3.0 : c.kappa;
    double bf = c.beta_fraction < 0.0 ? 0.1 : c.beta_fraction;
    std::string stem = stem_of(c.out.empty() ? "biorth" : c.out);
    auto spec = rescale(p, p.T, K);
    auto mult = make_multiplier(spec.S, kappa, bf);
    auto fam = build_family(spec, mult, K, TimeGrid{p.T, Nt});
    write_family_csv(stem, fam);
    write_residual_json(stem + "_residual.json", fam);
    json m = params_json(p);
    m["T_tilde"] = p.T;
    m["K"] = K;
    m["J"] = fam.J;
    m["Nt"] = Nt;
    m["kappa"] = kappa;
    m["beta_fraction"] = bf;
    m["S"] = mult.S;
    m["beta"] = mult.beta;
    m["delta"] = mult.delta;
    m["nu"] = mult.nu;
    m["X"] = fam.X;
    m["J_max"] = fam.J_max;
    m["max_abs_residual"] = fam.max_abs_residual;
    m["norms"] = fam.norms;
    m["bior_constants"] = fam.bior_constants;
    m["outside_energy"] = fam.outside_energy;
    std::vector<std::string> outs;
    for (int k = 1; k <= K; ++k) outs.push_back(stem + "_q" + std::to_string(k) + ".csv");
    outs.push_back(stem + "_residual.json");
    m["outputs"] = outs;
    return m;
}

struct Synth {
    ProblemParams p;
    Grid grid;
    std::vector<double> u0;
    SynthesisResult r;
    SynthesisOptions so;
};

Synth synth_of(const Config& c) {
    Synth s;
    s.p = params_of(c, 1.5 * 4.0 * std::sqrt(3.0));
    s.grid = make_grid(s.p, c.n < 0 ? 2048 : c.n);
    s.u0 = sample_datum(make_initial_datum(datum(c), s.p), s.grid.nodes, true);
    s.so.K = c.K < 0 ? 16 : c.K;
    s.so.solver = solver_of(c.solver);
    if (c.beta_fraction >= 0.0) s.so.beta_fraction = c.beta_fraction;
    s.r = synthesize(s.p, s.grid.nodes, s.u0, s.so);
    return s;
}

json synth_json(const Config& c, const Synth& s) {
    json m = synthesis_report(s.p, s.r);
    m["kappa_input"] = std::isnan(s.p.kappa_mult) ? json(nullptr) : json(s.p.kappa_mult);
    m["n"] = s.grid.size();
    m["u0"] = datum(c);
    m["solver"] = c.solver;
    m["beta_fraction"] = s.so.beta_fraction;
    m["Tstar"] = s.p.Tstar();
    m["control_dt"] = s.r.signal.max_dt();
    return m;
}

int finish_synth(const Synth& s) {
    if (!s.r.bound_ok) {
        std::cerr << "numeric failure: measured ||h|| exceeds the Theorem-2 bound\n";
        return 1;
    }
    return 0;
}

json run_synthesize(const Config& c, int& code) {
    auto s = synth_of(c);
    std::string out = c.out.empty() ? "control.csv" : c.out;
    std::string report = stem_of(out) + "_report.json";
    write_control_csv(out, s.r.signal);
    json m = synth_json(c, s);
    write_json(report, m);
    m["outputs"] = {out, report};
    code = finish_synth(s);
    return m;
}

json run_simulate(const Config& c, int& code) {
    std::string stem = stem_of(c.out.empty() ? "sim" : c.out);
    ProblemParams p = params_of(c, 1.5 * 4.0 * std::sqrt(3.0));
    Grid g;
    std::vector<double> u0;
    ControlSignal h;
    json m;
    const double dt = c.dt > 0.0 ? c.dt : 1e-3;
    if (c.zero_control || !(p.T > p.Tstar())) {
        g = make_grid(p, c.n < 0 ? 2048 : c.n);
        u0 = sample_datum(make_initial_datum(datum(c), p), g.nodes, true);
        h = ControlSignal::zero(p.T, dt);
        m = params_json(p);
        m["control"] = "zero";
        m["u0"] = datum(c);
    } else {
        auto s = synth_of(c);
        g = s.grid;
        u0 = s.u0;
        h = s.r.signal;
        m = synth_json(c, s);
        m["control"] = "synthesized";
        code = finish_synth(s);
    }
    SimulationOptions so;
    so.dt = dt;
    so.K = 4;
    so.keep_states = c.snapshots > 0;
    int total = static_cast<int>(std::ceil(p.T / dt));
    so.stride = c.snapshots > 0 ? std::max(1, total / c.snapshots) : 1000000000;
    auto r = simulate(p, g, u0, h, so);

    json sm = simulation_manifest(p, g, r);
    for (auto it = sm.begin(); it != sm.end(); ++it) m[it.key()] = it.value();
    std::vector<std::string> outs;
    write_control_csv(stem + "_control.csv", h);
    outs.push_back(stem + "_control.csv");
    write_columns_csv(stem + "_final.csv", {"x", "u"}, {g.nodes, r.final_state});
    outs.push_back(stem + "_final.csv");
    json hist = json::array();
    for (size_t i = 0; i < r.mode_history.size(); ++i) {
        hist.push_back({{"t", r.mode_history[i].t}, {"l2", r.norm_history[i]}, {"projections", r.mode_history[i].projections}});
        if (so.keep_states) {
            char name[32];
            std::snprintf(name, sizeof name, "_snap%04zu.csv", i);
            write_columns_csv(stem + name, {"x", "u"}, {g.nodes, r.states[i]});
            outs.push_back(stem + name);
        }
    }
    m["snapshots"] = c.snapshots;
    m["mode_history"] = hist;
    m["outputs"] = outs;
    return m;
}

json run_limit(const Config& c) {
    ProblemParams p = params_of(c, 3.0);
    LimitShape shape;
    if (c.shape == "optimal")
        shape = LimitShape::optimal;
    else if (c.shape == "theorem2")
        shape = LimitShape::theorem2;
    else
        throw ValidationError("--shape must be optimal or theorem2");
    Grid g = make_grid(p, c.n < 0 ? 2048 : c.n, false);
    auto u0 = sample_datum(make_initial_datum(datum(c), p), g.nodes, true);
    double dt = c.dt > 0.0 ? c.dt : 1e-3;
    auto h = limit_control(p, g.nodes, u0, shape, dt);
    auto st = limit_solve(p, g.nodes, u0, h, p.T);
    std::string stem = stem_of(c.out.empty() ? "limit" : c.out);
    std::vector<double> u(g.nodes.size());
    for (size_t i = 0; i < u.size(); ++i) u[i] = st.left_part[i] + st.right_part[i];
    write_control_csv(stem + "_control.csv", h);
    write_columns_csv(stem + "_state.csv", {"x", "u"}, {g.nodes, u});
    json m = params_json(p);
    m["shape"] = c.shape;
    m["u0"] = datum(c);
    m["n"] = g.size();
    m["dt"] = dt;
    m["mass_u0"] = trapezoid(g.nodes, u0);
    m["dirac_mass"] = st.dirac_mass;
    m["final_l2"] = l2_norm(g.nodes, u);
    m["cost"] = h.l2_norm();
    m["outputs"] = {stem + "_control.csv", stem + "_state.csv"};
    return m;
}

json run_sweep(const Config& c) {
    auto eps = parse_list(c.eps, "--eps");
    auto Ts = parse_list(c.T.empty() ? "2.9256,8.3138" : c.T, "--T");
    SweepOptions so;
    so.K = c.K < 0 ? 16 : c.K;
    so.n = c.n < 0 ? 1024 : c.n;
    so.u0 = c.u0.empty() ? "bump" : c.u0;
    so.L = c.L;
    so.m = c.m;
    auto s = sweep(eps, Ts, so);
    std::string out = c.out.empty() ? "sweep.csv" : c.out;
    write_sweep_csv(out, s);
    json m;
    m["eps"] = eps;
    m["T"] = Ts;
    m["L"] = c.L;
    m["m"] = c.m;
    m["K"] = so.K;
    m["K_empirical"] = so.K_empirical;
    m["n"] = so.n;
    m["u0"] = so.u0;
    m["cells"] = s.cells.size();
    json tr = json::array();
    for (const auto& t : s.trends)
        tr.push_back({{"T", t.T}, {"growing", t.growing}, {"bounded", t.bounded}, {"within_bound", t.within_bound}});
    m["trends"] = tr;
    m["outputs"] = {out};
    return m;
}

json run_lower_bound(const Config& c) {
    ProblemParams p = params_of(c, 2.0);
    auto r = lower_bound_rate(p);
    json m = params_json(p);
    m["lambda1"] = r.lambda1;
    m["exponent_rate"] = r.exponent_rate;
    m["prefactor_log"] = r.prefactor_log;
    m["blowup_flag"] = r.blowup_flag;
    m["note"] = "rate only; the constant of the lower bound is unknown";
    std::string out = c.out.empty() ? "lower_bound.json" : c.out;
    write_json(out, m);
    m["outputs"] = {out};
    return m;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Null control of the viscous Burgers shock: spectra, moment controls, simulation, sweeps"};
    app.require_subcommand(1);
    Config c;

    auto add_common = [&](CLI::App* s) {
        s->add_option("--eps", c.eps, "viscosity (comma list for sweep)")->capture_default_str();
        s->add_option("--L", c.L, "half-length")->capture_default_str();
        s->add_option("--T", c.T, "horizon (comma list for sweep; T~ for biorth)");
        s->add_option("--K", c.K, "number of modes");
        s->add_option("--n", c.n, "grid nodes (time intervals for biorth)");
        s->add_option("--dt", c.dt, "time step");
        s->add_option("--m", c.m, "dissipation fraction")->capture_default_str();
        s->add_option("--kappa", c.kappa, "multiplier margin kappa > 1");
        s->add_option("--u0", c.u0, "initial datum: sin, bump, file:<path> (sweep defaults to bump)");
        s->add_option("--solver", c.solver, "biorth or gram")->capture_default_str();
        s->add_option("--out", c.out, "output path");
        s->add_option("--snapshots", c.snapshots, "state snapshots to write")->capture_default_str();
        s->add_option("--beta-fraction", c.beta_fraction, "beta position in (S/kappa, S)");
    };
    std::vector<CLI::App*> subs;
    for (auto name : {"spectrum", "biorth", "synthesize", "simulate", "limit", "sweep", "lower-bound"}) {
        auto s = app.add_subcommand(name);
        add_common(s);
        subs.push_back(s);
    }
    subs[3]->add_flag("--zero-control", c.zero_control, "simulate with h = 0");
    subs[4]->add_option("--shape", c.shape, "optimal or theorem2")->capture_default_str();
    std::string manifest_path;
    app.add_option("--manifest", manifest_path, "manifest path (default <out stem>_manifest.json)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e, std::cerr, std::cerr);
        std::cerr << app.help();
        return 2;
    }

    std::string cmd = app.get_subcommands().front()->get_name();
    int code = 0;
    try {
        json m;
        if (cmd == "spectrum") m = run_spectrum(c);
        else if (cmd == "biorth") m = run_biorth(c);
        else if (cmd == "synthesize") m = run_synthesize(c, code);
        else if (cmd == "simulate") m = run_simulate(c, code);
        else if (cmd == "limit") m = run_limit(c);
        else if (cmd == "sweep") m = run_sweep(c);
        else m = run_lower_bound(c);
        m["command"] = cmd;
        m["deterministic"] = true;
        std::string path = manifest_path;
        if (path.empty()) {
            std::string base = c.out.empty() ? cmd : stem_of(c.out);
            path = base + "_manifest.json";
        }
        write_json(path, m);
        std::cout << cmd << ": wrote " << path << '\n';
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure [" << e.code() << "]: " << e.what() << '\n';
        return 1;
    }
    return code;
}
