#pragma once

#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "shockctl/control.hpp"
#include "shockctl/params.hpp"
#include "shockctl/spectral.hpp"

namespace shockctl {

/// U(x) = -tanh(x/(2 eps)).
double shock_profile(const ProblemParams& p, double x);

/// Spatial nodes on [-L, L], mirror-symmetric about 0.
struct Grid {
    std::vector<double> nodes;
    /// smallest spacing within 2 eps of the shock and of the walls, divided by eps
    double layer_resolution_shock = 0.0;
    double layer_resolution_wall = 0.0;
    /// largest ratio of neighbouring spacings
    double max_ratio = 1.0;
    bool graded = false;

    int size() const { return static_cast<int>(nodes.size()); }
};

/// n nodes clustered at x = 0 and x = +-L by equidistributing the density
/// 1 + A (e^{-|x|/w} + e^{-(L-|x|)/w}), w = 2 eps. A is halved until neighbouring
/// spacings differ by at most 10%; A = 0 is the uniform fallback.
/// Rejects grids with fewer than 8 nodes in |x| <= 2 eps.
Grid make_grid(const ProblemParams& p, int n, bool graded = true);

struct SimulationOptions {
    double dt = 1e-3;
    /// modes projected at every snapshot (k = 0..K)
    int K = 4;
    /// a snapshot every `stride` steps, plus one at every segment end
    int stride = 100;
    /// keep the sampled state at every snapshot
    bool keep_states = false;
};

struct SimulationResult {
    std::vector<double> final_state;
    std::vector<ModeState> mode_history;
    std::vector<double> norm_history;
    std::vector<std::vector<double>> states;
    double final_l2 = 0.0;
    double cost_measured = 0.0;
    double dt = 0.0;
    int steps = 0;
};

/// Crank-Nicolson on the node-centred finite-volume form of
/// u_t + (U u)_x = eps u_xx, u(-L) = h(t), u(L) = 0, restarted with two
/// backward-Euler half steps at t = 0 and at every segment joint of h.
/// The first snapshot is the initial state at t = 0.
SimulationResult simulate(const ProblemParams& p, const Grid& grid, const std::vector<double>& u0,
                          const ControlSignal& h, const SimulationOptions& opts = {});

/// Limit system state at time t.
struct InviscidState {
    double t = 0.0;
    std::vector<double> x;
    /// u on the nodes with x < 0 (left_part) and x > 0 (right_part); both share `x`,
    /// entries on the other side are 0
    std::vector<double> left_part;
    std::vector<double> right_part;
    double dirac_mass = 0.0;
};

/// Characteristics of u_t + (sign(-x) u)_x = 0 with inflow h at -L and 0 at L;
/// u0 is the piecewise-linear interpolant of the samples.
InviscidState limit_solve(const ProblemParams& p, const std::vector<double>& x, const std::vector<double>& u0,
                          const ControlSignal& h, double t);

struct ViscousLimitRow {
    double eps = 0.0;
    double distance = 0.0;
    double final_l2 = 0.0;
    double cost = 0.0;
    double bound_rhs = 0.0;
};

struct ViscousLimitReport {
    std::vector<ViscousLimitRow> rows;
    double limit_cost = 0.0;
    double limit_final_l2 = 0.0;
    double limit_final_mass = 0.0;
    bool distance_decreasing = false;
};

/// Synthesizes and simulates at each eps and compares with the Theorem-2 limit control.
ViscousLimitReport viscous_vs_limit(const ProblemParams& base, const std::vector<double>& eps_grid,
                                    const std::function<double(double)>& u0, int n, const SynthesisOptions& sopts,
                                    double dt);

/// Manifest {eps, L, T, n, dt, final_l2, cost_measured}.
nlohmann::json simulation_manifest(const ProblemParams& p, const Grid& g, const SimulationResult& r);

}  // namespace shockctl
