#include "shockctl/bounds.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <numbers>
#include <sstream>

#include "shockctl/control.hpp"
#include "shockctl/io.hpp"
#include "shockctl/pde.hpp"
#include "shockctl/spectral.hpp"

namespace shockctl {

namespace {

constexpr double pi = std::numbers::pi;

// (1 - e^{-s T})/s, continuous at s = 0
double decay_integral(double s, double T) {
    double z = s * T;
    return std::abs(z) < 1e-12 ? T : -std::expm1(-z) / s;
}

}  // namespace

LowerBoundReport lower_bound_rate(const ProblemParams& p) {
    p.validate();
    LowerBoundReport r;
    r.eps = p.eps;
    r.T = p.T;
    r.lambda1 = solve_lambda_k(p, 1).lambda;
    const double L = p.L, e = p.eps;
    r.exponent_rate = -r.lambda1 * p.T + std::sqrt(2.0) * L / e - L / (2.0 * e);
    r.prefactor_log = std::log(4.0 * L * L / (3.0 * e * pi * pi)) + 2.0 * std::log1p(2.0 * L * L / (pi * pi * e * e));
    r.blowup_flag = -p.T / 4.0 + std::sqrt(2.0) * L - L / 2.0 > 0.0;
    return r;
}

double single_mode_cost(const ProblemParams& p) {
    if (!(p.T > 0.0)) throw ValidationError("T must be positive");
    auto g = solve_lambda0(p);
    double nrm = norm_ratio(g, p);
    return nrm * std::exp(-g.lambda * p.T) / std::sqrt(decay_integral(2.0 * g.lambda, p.T));
}

double empirical_cost(const ProblemParams& p, int K, double max_condition) {
    p.validate();
    if (K < 1) throw ValidationError("empirical cost needs K >= 1");
    auto modes = K == 1 ? std::vector<EigenMode>{solve_lambda0(p)} : spectrum(p, K - 1);

    std::vector<EigenFunction> fs;
    for (const auto& m : modes) fs.emplace_back(m, p);
    Eigen::MatrixXd G(K, K), P(K, K);
    Eigen::VectorXd D(K), S(K);
    for (int j = 0; j < K; ++j) {
        D[j] = std::exp(-modes[j].lambda * p.T);
        for (int k = 0; k <= j; ++k) {
            G(j, k) = G(k, j) = decay_integral(modes[j].lambda + modes[k].lambda, p.T);
            auto prod = [&](double x) { return fs[j](x) * fs[k](x); };
            P(j, k) = P(k, j) = integrate(prod, -p.L, 0.0) + integrate(prod, 0.0, p.L);
        }
    }
    for (int j = 0; j < K; ++j) S[j] = 1.0 / std::sqrt(G(j, j));
    Eigen::MatrixXd Gn = S.asDiagonal() * G * S.asDiagonal();
    Eigen::MatrixXd Mn = (S.cwiseProduct(D)).asDiagonal() * P * (S.cwiseProduct(D)).asDiagonal();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ge(Gn);
    double cond = ge.eigenvalues().maxCoeff() / ge.eigenvalues().minCoeff();
    if (!(cond > 0.0 && cond <= max_condition)) {
        std::ostringstream os;
        os << "normalized Gram condition " << cond << " with K=" << K << "; reduce K";
        throw NumericError("gram-ill-conditioned", os.str());
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> gs(Mn, Gn);
    return std::sqrt(std::max(0.0, gs.eigenvalues().maxCoeff()));
}

CostSweep sweep(const std::vector<double>& eps_grid, const std::vector<double>& T_grid, const SweepOptions& opts) {
    CostSweep out;
    if (eps_grid.empty() || T_grid.empty()) return out;

    auto cell = [&](double e, double T) {
        ProblemParams p;
        p.eps = e;
        p.L = opts.L;
        p.T = T;
        p.m = opts.m;
        p.validate();
        SweepCell c;
        c.eps = e;
        c.T = T;
        auto lb = lower_bound_rate(p);
        c.exponent_rate = lb.exponent_rate;
        c.blowup_flag = lb.blowup_flag;
        if (T > p.Tstar()) {
            Grid g = make_grid(p, opts.n);
            auto u0 = sample_datum(make_initial_datum(opts.u0, p), g.nodes, true);
            SynthesisOptions so;
            so.K = opts.K;
            auto r = synthesize(p, g.nodes, u0, so);
            c.measured_cost = r.l2_norm / r.u0_norm;
            c.bound_rhs = r.bound_rhs / r.u0_norm;
            c.synthesized = true;
        } else {
            c.measured_cost = empirical_cost(p, opts.K_empirical);
            c.bound_rhs = std::nan("");
        }
        return c;
    };

    std::vector<std::future<SweepCell>> jobs;
    for (double e : eps_grid)
        for (double T : T_grid) jobs.push_back(std::async(std::launch::async, cell, e, T));
    for (auto& j : jobs) out.cells.push_back(j.get());

    const double Tstar = 4.0 * std::sqrt(3.0) * opts.L;
    for (size_t ti = 0; ti < T_grid.size(); ++ti) {
        std::vector<SweepCell> col;
        for (size_t ei = 0; ei < eps_grid.size(); ++ei) col.push_back(out.cells[ei * T_grid.size() + ti]);
        std::sort(col.begin(), col.end(), [](const SweepCell& a, const SweepCell& b) { return a.eps > b.eps; });
        SweepTrend tr;
        tr.T = T_grid[ti];
        tr.growing = true;
        for (size_t i = 0; i < col.size(); ++i) {
            tr.growing = tr.growing && col[i].blowup_flag;
            if (i > 0) tr.growing = tr.growing && col[i].exponent_rate > col[i - 1].exponent_rate;
        }
        double lo = 1e300, hi = 0.0;
        for (const auto& c : col) {
            lo = std::min(lo, c.measured_cost);
            hi = std::max(hi, c.measured_cost);
            if (c.synthesized && !(c.measured_cost <= 1.5 * c.bound_rhs)) tr.within_bound = false;
        }
        tr.bounded = tr.T > Tstar && lo > 0.0 && hi / lo < 2.0;
        out.trends.push_back(tr);
    }
    return out;
}

void write_sweep_csv(const std::string& path, const CostSweep& s) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open " + path);
    out << "eps,T,measured_cost,bound_rhs,exponent_rate,blowup_flag\n";
    for (const auto& c : s.cells)
        out << fmt17(c.eps) << ',' << fmt17(c.T) << ',' << fmt17(c.measured_cost) << ','
            << (std::isnan(c.bound_rhs) ? std::string("nan") : fmt17(c.bound_rhs)) << ',' << fmt17(c.exponent_rate)
            << ',' << (c.blowup_flag ? 1 : 0) << '\n';
}

}  // namespace shockctl
