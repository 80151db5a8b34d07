#include "doctest.h"

#include <cmath>
#include <fstream>
#include <numbers>
#include <string>

#include "shockctl/fd_oracle.hpp"
#include "shockctl/io.hpp"
#include "shockctl/spectral.hpp"

using namespace shockctl;

namespace {

ProblemParams at(double eps, double L = 1.0) {
    ProblemParams p;
    p.eps = eps;
    p.L = L;
    p.T = 10.0;
    return p;
}

// 40-digit mpmath roots of s = (a/2) tanh(sL/eps) and y L/eps - k pi/2 = atan(2y/a),
// a = tanh(L/2eps), L = 1.
struct Frozen {
    double eps;
    double lambda[5];
};
constexpr Frozen frozen[] = {
    {0.2, {0.070495418713377293, 2.3330966681622425, 4.7431640238925044, 8.1799116292703147, 12.613500981150461}},
    {0.1, {0.00090865931015410183, 2.8768043543373417, 3.9366165252015525, 5.580149835571101, 7.7566758248934678}},
    {0.05, {8.2446151015173425e-8, 5.151972474209907, 5.604177572775445, 6.3474365102418117, 7.3710117436727047}},
};

}  // namespace

TEST_SUITE("spectral") {

TEST_CASE("eigenvalues match frozen high-precision roots") {
    for (const auto& f : frozen) {
        auto modes = spectrum(at(f.eps), 4);
        for (int k = 0; k <= 4; ++k) CHECK(modes[k].lambda == doctest::Approx(f.lambda[k]).epsilon(1e-13));
    }
}

TEST_CASE("brackets and gaps hold up to k = 32") {
    const double pi = std::numbers::pi;
    for (double eps : {0.2, 0.1, 0.05}) {
        auto p = at(eps);
        auto modes = spectrum(p, 32);
        REQUIRE(modes.size() == 33);
        CHECK(modes[0].lambda > 0.0);
        CHECK(modes[0].lambda < 0.25 / eps);
        for (int k = 1; k <= 32; ++k) {
            CHECK(modes[k].lambda > bracket_lo(p, k));
            CHECK(modes[k].lambda < bracket_hi(p, k));
            CHECK(modes[k].theta > 0.0);
            CHECK(modes[k].theta < pi / 2);
            CHECK(modes[k].parity == (k % 2 ? Parity::odd : Parity::even));
        }
    }
}

TEST_CASE("ground eigenvalue is exponentially small and decreasing in eps") {
    double prev = 1e300;
    for (double eps : {0.2, 0.1, 0.05, 0.03, 0.02}) {
        auto g = solve_lambda0(at(eps));
        CHECK_FALSE(g.below_resolution);
        CHECK(eps * g.lambda * std::exp(1.0 / (2.0 * eps)) <= 2.0);
        CHECK(g.lambda < prev);
        prev = g.lambda;
    }
}

TEST_CASE("ground root disappears for large eps") {
    try {
        solve_lambda0(at(1.0));
        FAIL("expected ground-root-not-bracketed");
    } catch (const NumericError& e) {
        CHECK(e.code() == "ground-root-not-bracketed");
    }
}

TEST_CASE("below-resolution ground mode is flagged, not faked") {
    auto g = solve_lambda0(at(1e-3));
    CHECK(g.below_resolution);
    CHECK_THROWS_AS(EigenFunction(g, at(1e-3)), NumericError);
}

TEST_CASE("eigenfunctions satisfy Dirichlet walls and the boundary normalization") {
    for (double eps : {0.2, 0.1, 0.05}) {
        auto p = at(eps);
        for (const auto& m : spectrum(p, 6)) {
            EigenFunction f(m, p);
            CHECK(std::abs(f(-1.0)) < 1e-12);
            CHECK(std::abs(f(1.0)) < 1e-12);
            CHECK(eps * f.derivative(-1.0) == doctest::Approx(1.0).epsilon(1e-10));
        }
    }
}

TEST_CASE("ground eigenfunction tends to 1 on the interior") {
    auto p = at(0.05);
    EigenFunction f(solve_lambda0(p), p);
    CHECK(f(0.0) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(f(-0.5) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("norm ratios respect Eqs. (0) and (k)") {
    for (double eps : {0.2, 0.1, 0.05}) {
        auto p = at(eps);
        for (const auto& m : spectrum(p, 8)) CHECK(norm_ratio(m, p) <= norm_ratio_bound(m.k, p));
    }
    auto p = at(0.05);
    CHECK(std::abs(norm_ratio(solve_lambda0(p), p) - std::sqrt(2.0)) <= 0.1 * std::sqrt(2.0));
}

TEST_CASE("finite-difference oracle agrees with the roots") {
    auto p = at(0.1);
    auto modes = spectrum(p, 8);
    auto orc = discretized_operator_oracle(p, 2048, 9);
    for (int k = 0; k <= 8; ++k)
        CHECK(std::abs(orc.eigenvalues[k] - modes[k].lambda) <= 1e-8 * modes[k].lambda + 1e-12);
}

TEST_CASE("oracle refuses coarse grids") {
    CHECK_THROWS_AS(discretized_operator_oracle(at(0.1), 100, 3), NumericError);
}

TEST_CASE("non-symmetric and symmetric assemblies share their spectrum") {
    auto p = at(0.1);
    auto a = fd_eigenvalues_symmetric(p, 512, 6);
    auto b = fd_eigenvalues_nonsymmetric(p, 512, 6);
    // lambda0 sits at 1e-3 of the operator scale 1/(4 eps)
    CHECK(std::abs(a[0] - b[0]) < 1e-12 * 0.25 / p.eps);
    for (int k = 1; k < 6; ++k) CHECK(b[k] == doctest::Approx(a[k]).epsilon(1e-10));
}

TEST_CASE("closed-form eigenfunctions are eigenvectors of the assembled operator") {
    auto p = at(0.1);
    for (const auto& m : spectrum(p, 4)) CHECK(conjugation_residual(p, m, 4096) < 1e-5);
}

TEST_CASE("spectrum CSV has K+1 rows at 17 digits") {
    auto p = at(0.1);
    const std::string path = "test_spectrum.csv";
    write_spectrum_csv(path, spectrum(p, 8), p);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "k,lambda,mu,theta,parity,norm_ratio");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 9);
    CHECK(fmt17(0.1) == "0.10000000000000001");
}

TEST_CASE("invalid parameters are rejected") {
    CHECK_THROWS_AS(spectrum(at(-0.1), 3), ValidationError);
    CHECK_THROWS_AS(spectrum(at(0.1), 0), ValidationError);
    CHECK_THROWS_AS(solve_lambda_k(at(0.1), 0), ValidationError);
}

}
