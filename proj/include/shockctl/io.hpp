#pragma once

#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "shockctl/params.hpp"

namespace shockctl {

/// Shortest round-trip-safe decimal rendering used by every CSV writer.
std::string fmt17(double v);

/// Writes a CSV with the given header and equally long columns.
void write_columns_csv(const std::string& path, const std::vector<std::string>& header,
                       const std::vector<std::vector<double>>& columns);

void write_json(const std::string& path, const nlohmann::json& j);

/// Initial datum sampled on nodes; built-ins clamp u(+-L) = 0.
///   "sin"  : sin(pi x / L)
///   "bump" : (1 - (x/r)^2)^3 on |x + c| < r, a C^2 bump shifted off the shock
///   "file:<path>" : CSV x,u, linearly interpolated
std::function<double(double)> make_initial_datum(const std::string& spec, const ProblemParams& p);

/// Samples u0 on nodes, forces the wall values to 0 and rescales to unit L2
/// norm (trapezoid) when `normalize` is set.
std::vector<double> sample_datum(const std::function<double(double)>& u0, const std::vector<double>& x,
                                 bool normalize);

/// Trapezoid integral of samples on arbitrary nodes.
double trapezoid(const std::vector<double>& x, const std::vector<double>& f);

/// Trapezoid L2 norm.
double l2_norm(const std::vector<double>& x, const std::vector<double>& f);

}  // namespace shockctl
