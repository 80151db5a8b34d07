#include "shockctl/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace shockctl {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_columns_csv(const std::string& path, const std::vector<std::string>& header,
                       const std::vector<std::vector<double>>& columns) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open " + path);
    for (size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
    out << '\n';
    size_t rows = columns.empty() ? 0 : columns[0].size();
    for (size_t r = 0; r < rows; ++r) {
        for (size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << fmt17(columns[c][r]);
        out << '\n';
    }
}

void write_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open " + path);
    out << j.dump(2) << '\n';
}

std::function<double(double)> make_initial_datum(const std::string& spec, const ProblemParams& p) {
    const double L = p.L;
    if (spec == "sin") {
        return [L](double x) { return std::sin(std::numbers::pi * x / L); };
    }
    if (spec == "bump") {
        // support [-0.9L, 0.1L]: positive mass, mostly upstream of the shock
        return [L](double x) {
            double c = -0.4 * L, r = 0.5 * L;
            double z = (x - c) / r;
            if (std::abs(z) >= 1.0) return 0.0;
            double w = 1.0 - z * z;
            return w * w * w;
        };
    }
    if (spec.rfind("file:", 0) == 0) {
        std::string path = spec.substr(5);
        std::ifstream in(path);
        if (!in) throw ValidationError("cannot read initial datum " + path);
        std::vector<double> xs, us;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::replace(line.begin(), line.end(), ',', ' ');
            std::istringstream ls(line);
            double x, u;
            if (ls >> x >> u) {
                xs.push_back(x);
                us.push_back(u);
            }
        }
        if (xs.size() < 2) throw ValidationError("initial datum file needs at least two x,u rows");
        for (size_t i = 1; i < xs.size(); ++i)
            if (!(xs[i] > xs[i - 1])) throw ValidationError("initial datum x column must increase");
        return [xs, us](double x) {
            if (x <= xs.front()) return us.front();
            if (x >= xs.back()) return us.back();
            size_t i = std::upper_bound(xs.begin(), xs.end(), x) - xs.begin();
            double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
            return (1.0 - t) * us[i - 1] + t * us[i];
        };
    }
    throw ValidationError("unknown initial datum '" + spec + "' (sin, bump, file:<path>)");
}

double trapezoid(const std::vector<double>& x, const std::vector<double>& f) {
    double s = 0.0;
    for (size_t i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (f[i] + f[i - 1]);
    return s;
}

double l2_norm(const std::vector<double>& x, const std::vector<double>& f) {
    std::vector<double> sq(f.size());
    for (size_t i = 0; i < f.size(); ++i) sq[i] = f[i] * f[i];
    return std::sqrt(trapezoid(x, sq));
}

std::vector<double> sample_datum(const std::function<double(double)>& u0, const std::vector<double>& x,
                                 bool normalize) {
    std::vector<double> u(x.size());
    for (size_t i = 0; i < x.size(); ++i) u[i] = u0(x[i]);
    u.front() = 0.0;
    u.back() = 0.0;
    if (normalize) {
        double n = l2_norm(x, u);
        if (n > 0.0)
            for (double& v : u) v /= n;
    }
    return u;
}

}  // namespace shockctl
