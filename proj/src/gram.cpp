#include <Eigen/Dense>

#include <cmath>
#include <sstream>

#include "shockctl/biorth.hpp"

namespace shockctl {

GramSolution gram_moment_solve(const RescaledSpectrum& spec, const std::vector<int>& modes,
                               const std::vector<double>& targets, const TimeGrid& grid, double max_condition) {
    if (modes.size() != targets.size() || modes.empty())
        throw ValidationError("gram_moment_solve needs one target per mode");
    const int M = grid.Nt + 1;
    const int K = static_cast<int>(modes.size());

    GramSolution sol;
    sol.values.assign(M, 0.0);
    bool all_zero = true;
    for (double t : targets) all_zero = all_zero && t == 0.0;

    auto dot = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        double s = 0.0;
        for (int i = 0; i < M; ++i) s += grid.weight(i) * a[i] * b[i];
        return s;
    };

    // exponentials normalized in the discrete norm, with their log scales
    std::vector<Eigen::VectorXd> B(K, Eigen::VectorXd(M));
    std::vector<double> log_scale(K);
    for (int c = 0; c < K; ++c) {
        double mu = spec.mu.at(modes[c]);
        double top = std::max(mu * grid.t(0), mu * grid.t(M - 1));
        for (int i = 0; i < M; ++i) B[c][i] = std::exp(mu * grid.t(i) - top);
        double n = std::sqrt(dot(B[c], B[c]));
        B[c] /= n;
        log_scale[c] = top + std::log(n);
    }

    // modified Gram-Schmidt, two passes
    std::vector<Eigen::VectorXd> Q(K);
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(K, K);
    for (int c = 0; c < K; ++c) {
        Eigen::VectorXd v = B[c];
        for (int pass = 0; pass < 2; ++pass)
            for (int i = 0; i < c; ++i) {
                double r = dot(Q[i], v);
                v -= r * Q[i];
                R(i, c) += r;
            }
        R(c, c) = std::sqrt(dot(v, v));
        Q[c] = v / R(c, c);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(R);
    double cr = svd.singularValues()(0) / svd.singularValues()(K - 1);
    sol.condition = cr * cr;
    if (!(sol.condition <= max_condition)) {
        std::ostringstream os;
        os << "condition " << sol.condition << " > " << max_condition << " with " << K << " modes";
        throw NumericError("gram-ill-conditioned", os.str());
    }
    if (all_zero) return sol;

    // <h, B_c> = targets_c / scale_c, and <Q_i, B_c> = R(i,c)
    Eigen::VectorXd rhs(K);
    for (int c = 0; c < K; ++c) rhs[c] = targets[c] * std::exp(-log_scale[c]);
    Eigen::VectorXd alpha = R.transpose().triangularView<Eigen::Lower>().solve(rhs);
    for (int c = 0; c < K; ++c)
        for (int i = 0; i < M; ++i) sol.values[i] += alpha[c] * Q[c][i];
    return sol;
}

}  // namespace shockctl
