#include "vbr/bounds.hpp"

#include "vbr/error.hpp"
#include "vbr/resum.hpp"

#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <cstdint>
#include <sstream>

namespace vbr {
namespace {

constexpr double kLogStep = 1e-4;
constexpr double kIdentityTol = 1e-4;
constexpr double kOriginEps = 1e-3;

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

/// d f / d log x at x by central differences at h and h/2, one Richardson level.
template <class F>
std::pair<double, double> log_derivative(F f, double x) {
    auto diff = [&](double h) { return (f(x * std::exp(h)) - f(x * std::exp(-h))) / (2.0 * h); };
    const double d1 = diff(kLogStep);
    const double d2 = diff(0.5 * kLogStep);
    return {(4.0 * d2 - d1) / 3.0, std::abs(d2 - d1) / 3.0};
}

double curve_slope(const CoefficientSeries& series, int N, double lambda, double p,
                   const MomentSource& source) {
    auto f = [&](double l) { return resum_curve(series, N, l, p, source); };
    return log_derivative(f, lambda).first / lambda;
}

/// Coefficient of lambda^2 in the curve's expansion at the origin.
double origin_curvature(const CoefficientSeries& series) {
    if (series.is_auxiliary()) return series.order() >= 1 ? series.prefactor() * series.coefficient(1) : 0.0;
    return series.order() >= 2 ? series.prefactor() * series.coefficient(2) : 0.0;
}

bool is_slope_root(const ExtremumRecord& r) {
    return r.kind != ExtremumKind::inflexion ||
           r.slope_residual <= 1e-8 * std::max(std::abs(r.S_value), 1.0) / r.p_star;
}

}  // namespace

SlopeReport slope_checks(const CoefficientSeries& series, const ExtremumSequence& sequence,
                         const std::vector<double>& lambdas, const MomentSource& source) {
    SlopeReport out;
    const double v0 = series.origin_value();
    const double v1 = series.origin_slope();
    const double K = 2.0 * std::max(std::abs(origin_curvature(series)), std::abs(series.prefactor()));
    const int min_order = series.is_auxiliary() ? 1 : 2;
    out.principal_sign_constant = true;
    for (const auto& r : sequence.available()) {
        const double eps = kOriginEps;
        const bool applicable = r.N >= min_order;
        IdentityCheck value{"origin_value", r.N, r.p_star};
        value.residual = std::abs(resum_curve(series, r.N, eps, r.p_star, source) - (v0 + v1 * eps));
        value.tolerance = K * eps * eps;
        value.applicable = applicable;
        value.pass = value.residual <= value.tolerance;
        out.origin_checks.push_back(value);

        IdentityCheck slope{"origin_slope", r.N, r.p_star};
        const double numeric = (resum_curve(series, r.N, 1.5 * eps, r.p_star, source) -
                                resum_curve(series, r.N, 0.5 * eps, r.p_star, source)) / eps;
        slope.residual = std::abs(numeric - v1);
        slope.tolerance = 4.0 * K * eps;
        slope.applicable = applicable;
        slope.pass = slope.residual <= slope.tolerance;
        out.origin_checks.push_back(slope);

        SlopeProfile prof;
        prof.N = r.N;
        prof.p = r.p_star;
        prof.lambdas = lambdas;
        prof.origin_sign = sign_of(v1);
        for (double l : lambdas) prof.slopes.push_back(curve_slope(series, r.N, l, r.p_star, source));
        prof.sign_constant = true;
        for (std::size_t j = 0; j < lambdas.size(); ++j) {
            if (sign_of(prof.slopes[j]) != prof.origin_sign) prof.sign_constant = false;
            if (j == 0 || sign_of(prof.slopes[j]) == sign_of(prof.slopes[j - 1])) continue;
            auto g = [&](double l) { return curve_slope(series, r.N, l, r.p_star, source); };
            std::uintmax_t iters = 100;
            auto stop = [](double a, double b) { return std::abs(b - a) <= 1e-8 * std::abs(a); };
            const auto [a, b] = boost::math::tools::toms748_solve(
                g, lambdas[j - 1], lambdas[j], prof.slopes[j - 1], prof.slopes[j], stop, iters);
            prof.sign_changes.push_back(0.5 * (a + b));
        }
        out.principal_sign_constant = out.principal_sign_constant && prof.sign_constant;
        out.profiles.push_back(std::move(prof));
    }
    return out;
}

DiagnosticsReport appendix_diagnostics(const CoefficientSeries& series, const ExtremumSequence& sequence,
                                       double lambda0, const MomentSource& source) {
    const auto chain = sequence.available();
    if (chain.size() < 2) throw DomainError("diagnostics need at least two orders with records");
    DiagnosticsReport out;
    out.partial = chain.size() < 3;
    out.cn = cn_sequence(chain);

    std::vector<std::vector<double>> terms;
    for (const auto& r : chain) {
        terms.push_back(term_decomposition(series, r.N, lambda0, r.p_star, source));
        AlphaEntry a;
        a.N = r.N;
        a.p = r.p_star;
        a.A1 = terms.back().size() > 1 ? terms.back()[1] : 0.0;
        a.A2 = terms.back().size() > 2 ? terms.back()[2] : 0.0;
        auto A1 = [&](double l) { return term_decomposition(series, r.N, l, r.p_star, source)[1]; };
        const auto [d, err] = log_derivative(A1, lambda0);
        a.alpha = a.A1 - d;
        a.error = err;
        out.alpha.push_back(a);

        IdentityCheck id{"extremum_identity", r.N, r.p_star};
        const auto dl = resum_derivative(series, r.N, lambda0, r.p_star, DerivativeVariable::lambda, source);
        double weighted = 0.0;
        for (std::size_t n = 1; n < terms.back().size(); ++n) {
            weighted += static_cast<double>(n) * terms.back()[n] / std::pow(r.p_star, static_cast<double>(n));
        }
        const double scale = std::max(std::abs(weighted), 1e-12 * std::max(std::abs(r.S_value), 1.0));
        id.residual = std::abs(lambda0 * dl.value - weighted) / scale;
        id.tolerance = kIdentityTol;
        id.applicable = is_slope_root(r);
        id.pass = id.residual <= id.tolerance;
        out.identity_checks.push_back(id);
    }

    out.magic_sign_consistent = true;
    for (std::size_t k = 0; k + 1 < chain.size(); ++k) {
        DeltaSEntry e;
        e.N_from = chain[k].N;
        e.N_to = chain[k + 1].N;
        e.measured = chain[k + 1].S_value - chain[k].S_value;
        const double c = out.cn.values[k].c;
        const auto& a = out.alpha[k];
        e.estimated = a.A1 / chain[k].p_star * (1.0 / c - 1.0);
        if (out.cn.K_fit && a.A2 != 0.0) {
            const double nk = chain[k].N + *out.cn.K_fit;
            e.asymptotic = a.alpha * a.A1 / (2.0 * a.A2) / (nk * nk);
        }
        e.sign_consistent = sign_of(e.estimated) != 0 && sign_of(e.estimated) == sign_of(e.measured);
        out.magic_sign_consistent = out.magic_sign_consistent && e.sign_consistent;
        out.delta_S.push_back(e);
    }

    std::vector<double> grid;
    for (int j = 1; j <= 20; ++j) grid.push_back(lambda0 * j / 20.0);
    out.slopes = slope_checks(series, sequence, grid, source);

    std::ostringstream os;
    if (out.cn.all_above_one) {
        os << "c(N) > 1 at every available order" << (out.cn.strictly_decreasing ? " and decreasing" : "");
    } else {
        os << "c(N) is not above one at every available order";
    }
    out.observations.push_back(os.str());
    if (!out.magic_sign_consistent) {
        out.observations.push_back("estimated change of S disagrees in sign with the measured change");
    }
    if (out.partial) out.observations.push_back("fewer than three orders: report is partial");
    return out;
}

}  // namespace vbr
