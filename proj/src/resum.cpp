#include "vbr/resum.hpp"

#include "vbr/conformal.hpp"
#include "vbr/error.hpp"

#include <cmath>
#include <string>

namespace vbr {
namespace {

void check_args(const CoefficientSeries& series, int N, double lambda, double p) {
    if (N < 0 || N > series.order()) {
        throw DomainError("order N=" + std::to_string(N) + " outside 0.." +
                          std::to_string(series.order()));
    }
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be > 0");
    if (!(p > 0.0) || !std::isfinite(p)) throw DomainError("p must be > 0");
}

}  // namespace

ResumEvaluation resum_eval(const CoefficientSeries& series, int N, double lambda, double p,
                           const MomentSource& source) {
    check_args(series, N, lambda, p);
    const auto table = source.moments(lambda, p, N);
    const auto& I = table->values;
    const auto& err = table->errors;

    ResumEvaluation out;
    out.N = N;
    out.lambda = lambda;
    out.p = p;
    out.terms.resize(static_cast<std::size_t>(N) + 1);

    double scale = series.prefactor();  // prefactor * 4^n / n!
    for (int n = 0; n <= N; ++n) {
        if (n > 0) scale *= 4.0 / n;
        double inner = 0.0;
        double inner_err = 0.0;
        for (int k = 0; k <= N - n; ++k) {
            const double c = expansion_coefficient(n, k);
            inner += c * I[n + k];
            inner_err += c * err[n + k];
        }
        const double coeff = scale * series.coefficients()[n];
        out.terms[n] = coeff * inner;
        const double inv_pn = std::pow(p, -n);
        out.value += out.terms[n] * inv_pn;
        out.quadrature_error_estimate += std::abs(coeff) * inner_err * inv_pn;
    }
    return out;
}

ResumEvaluation resum_eval(const CoefficientSeries& series, int N, double lambda, double p,
                           const QuadratureSpec& quad) {
    return resum_eval(series, N, lambda, p, MomentSource(quad));
}

std::vector<double> term_decomposition(const CoefficientSeries& series, int N, double lambda,
                                       double p, const MomentSource& source) {
    return resum_eval(series, N, lambda, p, source).terms;
}

double resum_curve(const CoefficientSeries& series, int N, double lambda, double p,
                   const MomentSource& source) {
    const double v = resum_eval(series, N, lambda, p, source).value;
    return series.is_auxiliary() ? lambda * v : v;
}

DerivativeResult resum_derivative(const CoefficientSeries& series, int N, double lambda, double p,
                                  DerivativeVariable wrt, const MomentSource& source) {
    check_args(series, N, lambda, p);
    constexpr double h = 1e-4;
    const double x = wrt == DerivativeVariable::p ? p : lambda;
    double noise = 0.0;
    double magnitude = 0.0;
    auto at = [&](double log_shift) {
        const double shifted = x * std::exp(log_shift);
        const auto ev = wrt == DerivativeVariable::p ? resum_eval(series, N, lambda, shifted, source)
                                                     : resum_eval(series, N, shifted, p, source);
        noise = std::max(noise, ev.quadrature_error_estimate);
        magnitude = std::max(magnitude, std::abs(ev.value));
        return ev.value;
    };
    // dS/dlog x by central differences at h and h/2
    const double d1 = (at(h) - at(-h)) / (2.0 * h);
    const double d2 = (at(0.5 * h) - at(-0.5 * h)) / h;
    const double richardson = (4.0 * d2 - d1) / 3.0;

    DerivativeResult out;
    out.value = richardson / x;
    // Quadrature errors are smooth in x for a fixed rule; the bound below is
    // the worst case where they are not.
    const double noise_floor = 2.0 * noise / h;
    out.error = (std::abs(d2 - d1) / 3.0 + noise_floor) / x;
    out.low_confidence = noise_floor > 1e-4 * std::max(magnitude, std::abs(richardson));
    return out;
}

}  // namespace vbr
