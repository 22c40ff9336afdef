#include "vbr/bounds.hpp"

#include "vbr/error.hpp"
#include "vbr/resum.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace vbr {

std::string_view to_string(BoundDirection d) {
    switch (d) {
        case BoundDirection::lower_bound: return "lower_bound";
        case BoundDirection::upper_bound: return "upper_bound";
        case BoundDirection::inconclusive: return "inconclusive";
    }
    return "?";
}

std::string_view to_string(BoundBasis b) {
    switch (b) {
        case BoundBasis::global_minima_chain: return "global_minima_chain";
        case BoundBasis::local_chain: return "local_chain";
        case BoundBasis::maxima_chain: return "maxima_chain";
    }
    return "?";
}

namespace {

constexpr double kTrendTol = 1e-10;

/// +1 all non-decreasing with one strict rise, -1 mirror, 0 flat, 2 mixed.
int trend_of(const std::vector<double>& v) {
    double scale = 1.0;
    for (double x : v) scale = std::max(scale, std::abs(x));
    const double tol = kTrendTol * scale;
    bool rises = false, falls = false, up_ok = true, down_ok = true;
    for (std::size_t k = 1; k < v.size(); ++k) {
        const double d = v[k] - v[k - 1];
        if (d > tol) rises = true;
        if (d < -tol) falls = true;
        if (d < -tol) up_ok = false;
        if (d > tol) down_ok = false;
    }
    if (!rises && !falls) return 0;
    if (up_ok) return 1;
    if (down_ok) return -1;
    return 2;
}

bool grid_agrees(const std::vector<double>& v, int trend) {
    const int t = trend_of(v);
    return t == trend || t == 0;
}

}  // namespace

BoundVerdict bound_verdict(const BoundInput& input) {
    BoundVerdict out;
    const auto& chain = input.chain;
    bool all_min = !chain.empty(), all_max = !chain.empty(), any_global_min = false, any_global_max = false;
    for (const auto& r : chain) {
        all_min = all_min && is_minimum(r.kind);
        all_max = all_max && (is_maximum(r.kind) || r.kind == ExtremumKind::inflexion);
        any_global_min = any_global_min || r.kind == ExtremumKind::global_min;
        any_global_max = any_global_max || r.kind == ExtremumKind::global_max;
    }
    if (all_min) {
        out.basis = any_global_min ? BoundBasis::global_minima_chain : BoundBasis::local_chain;
    } else if (all_max) {
        out.basis = BoundBasis::maxima_chain;
    } else {
        out.basis = BoundBasis::local_chain;
    }
    if (chain.size() < 2) {
        out.reason = chain.empty() ? "no extrema" : "fewer than two orders";
        return out;
    }

    std::vector<double> values;
    for (const auto& r : chain) values.push_back(r.S_value);
    const int t = trend_of(values);
    if (t == 0) {
        out.monotone = true;
        out.reason = "constant sequence";
        return out;
    }
    if (t == 2) {
        out.reason = "sequence is not monotone at lambda0";
        return out;
    }
    out.trend = t;
    out.trend_holds_on_grid = true;
    for (const auto& row : input.grid_values) {
        if (row.size() != chain.size()) throw DomainError("grid row length differs from chain length");
        out.trend_holds_on_grid = out.trend_holds_on_grid && grid_agrees(row, t);
    }
    if (!out.trend_holds_on_grid) {
        out.reason = "trend at lambda0 does not persist over the lambda grid";
        return out;
    }
    out.monotone = true;

    if (all_min && t > 0) {
        if (any_global_min) {
            out.direction = BoundDirection::lower_bound;
            out.reason = "increasing chain containing a global minimum";
        } else {
            out.reason = "increasing chain of local minima only";
            out.caveats.push_back("no global minimum in the chain: the bound argument does not apply");
        }
    } else if (all_min && t < 0) {
        out.direction = BoundDirection::upper_bound;
        out.reason = "decreasing minima chain";
        out.caveats.push_back("not a priori guaranteed: decreasing minima do not imply an upper bound");
    } else if (all_max && t > 0) {
        out.direction = BoundDirection::lower_bound;
        out.reason = "increasing maxima chain";
        out.caveats.push_back("local extrema: the global-extremum bound argument is unavailable");
    } else if (all_max && t < 0) {
        if (any_global_max) {
            out.direction = BoundDirection::upper_bound;
            out.reason = "decreasing chain containing a global maximum";
        } else {
            out.reason = "decreasing chain of local maxima only";
            out.caveats.push_back("no global maximum in the chain: the bound argument does not apply");
        }
    } else {
        out.reason = "chain mixes minima and maxima";
    }
    return out;
}

BoundVerdict bound_verdict(const CoefficientSeries& series, const ExtremumSequence& sequence,
                           double lambda0, const MomentSource& source) {
    BoundInput input;
    input.rule = sequence.rule;
    input.chain = sequence.available();
    constexpr int points = 20;
    for (int j = 1; j <= points; ++j) {
        const double lambda = lambda0 * j / points;
        input.lambdas.push_back(lambda);
        std::vector<double> row;
        for (const auto& r : input.chain) row.push_back(resum_curve(series, r.N, lambda, r.p_star, source));
        input.grid_values.push_back(std::move(row));
    }
    return bound_verdict(input);
}

std::optional<double> fit_K(const std::vector<CNEntry>& values) {
    std::vector<std::pair<double, double>> pts;  // (N, y)
    for (const auto& v : values) {
        if (v.c > 1.0) pts.emplace_back(v.N_from, 1.0 - 1.0 / v.c);
    }
    if (pts.empty()) return std::nullopt;
    if (pts.size() == 1) return 1.0 / pts[0].second - pts[0].first;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo, n_min = lo;
    for (const auto& [N, y] : pts) {
        lo = std::min(lo, 1.0 / y - N);
        hi = std::max(hi, 1.0 / y - N);
        n_min = std::min(n_min, N);
    }
    lo = std::max(lo - 10.0, -n_min + 1e-6);
    hi += 10.0;
    auto sse = [&](double K) {
        double s = 0.0;
        for (const auto& [N, y] : pts) s += std::pow(y - 1.0 / (N + K), 2);
        return s;
    };
    return boost::math::tools::brent_find_minima(sse, lo, hi, 50).first;
}

CNSequence cn_sequence(const std::vector<ExtremumRecord>& chain) {
    CNSequence out;
    for (std::size_t k = 1; k < chain.size(); ++k) {
        out.values.push_back({chain[k - 1].N, chain[k].N, chain[k].p_star / chain[k - 1].p_star});
    }
    out.all_above_one = !out.values.empty();
    out.strictly_decreasing = !out.values.empty();
    for (std::size_t k = 0; k < out.values.size(); ++k) {
        out.all_above_one = out.all_above_one && out.values[k].c > 1.0;
        if (k == 0) continue;
        const double prev = 1.0 / out.values[k - 1].c;
        out.recursion_residuals.push_back(std::abs(1.0 / out.values[k].c - (1.0 - prev + prev * prev)));
        out.strictly_decreasing = out.strictly_decreasing && out.values[k].c < out.values[k - 1].c;
    }
    out.K_fit = fit_K(out.values);
    return out;
}

}  // namespace vbr
