#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <sstream>

namespace shockctl {

template <class F>
double integrate(F f, double a, double b, double abs_tol) {
    double err = 0.0;
    double l1 = 0.0;
    // Boost terminates on a relative criterion; ask for far more than needed
    // and then enforce the absolute tolerance on the reported estimate.
    double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        f, a, b, 30, 1e-13, &err, &l1);
    if (!(err <= abs_tol) || !std::isfinite(v)) {
        std::ostringstream os;
        os << "on [" << a << "," << b << "] achieved error estimate " << err;
        throw NumericError("quadrature-not-converged", os.str());
    }
    return v;
}

}  // namespace shockctl
