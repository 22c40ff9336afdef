#include "vbr/pipeline.hpp"

#include "vbr/error.hpp"
#include "vbr/resum.hpp"

#include <cstdio>
#include <string>

namespace vbr {

void CurveSet::add(std::string name, std::vector<double> values) {
    if (values.size() != lambdas.size()) throw DomainError("curve '" + name + "' does not match the grid");
    names.push_back(std::move(name));
    columns.push_back(std::move(values));
}

void CurveSet::add(std::string name, const std::function<double(double)>& f) {
    std::vector<double> values;
    values.reserve(lambdas.size());
    for (double l : lambdas) values.push_back(f(l));
    add(std::move(name), std::move(values));
}

std::string CurveSet::to_csv() const {
    std::string out = "lambda";
    for (const auto& n : names) out += "," + n;
    out += "\n";
    char buf[32];
    for (std::size_t j = 0; j < lambdas.size(); ++j) {
        std::snprintf(buf, sizeof buf, "%.17g", lambdas[j]);
        out += buf;
        for (const auto& col : columns) {
            std::snprintf(buf, sizeof buf, ",%.17g", col[j]);
            out += buf;
        }
        out += "\n";
    }
    return out;
}

std::vector<double> uniform_grid(double hi, int points) {
    if (!(hi > 0.0) || points < 1) throw DomainError("grid needs hi > 0 and at least one point");
    std::vector<double> g;
    for (int j = 1; j <= points; ++j) g.push_back(hi * j / points);
    return g;
}

std::vector<double> linear_grid(double lo, double hi, int points) {
    if (!(hi > lo) || points < 2) throw DomainError("grid needs lo < hi and at least two points");
    std::vector<double> g;
    for (int j = 0; j < points; ++j) g.push_back(lo + (hi - lo) * j / (points - 1));
    return g;
}

CurveSet chain_curves(const CoefficientSeries& series, const ExtremumSequence& sequence,
                      const std::vector<double>& lambdas, const MomentSource& source,
                      const std::string& prefix) {
    CurveSet set;
    set.lambdas = lambdas;
    for (const auto& r : sequence.available()) {
        set.add(prefix + std::to_string(r.N),
                [&](double l) { return resum_curve(series, r.N, l, r.p_star, source); });
    }
    return set;
}

CurveSet partial_sum_curves(const CoefficientSeries& series, const std::vector<int>& orders,
                            const std::vector<double>& lambdas, const std::string& prefix) {
    CurveSet set;
    set.lambdas = lambdas;
    for (int N : orders) {
        set.add(prefix + std::to_string(N), [&](double l) { return partial_sum(series, N, l); });
    }
    return set;
}

}  // namespace vbr
