#pragma once

#include "vbr/quadrature.hpp"
#include "vbr/series.hpp"

#include <vector>

namespace vbr {

/// S_N(lambda, p) together with its decomposition S = sum_n A_n / p^n.
struct ResumEvaluation {
    double value = 0.0;
    int N = 0;
    double lambda = 0.0;
    double p = 0.0;
    std::vector<double> terms;  ///< A_n(N), n = 0..N (prefactor included)
    double quadrature_error_estimate = 0.0;
};

/// Conformally mapped, w-truncated Borel resummation of the first N+1
/// coefficients, evaluated in the scaled form with integrand e^{-z} w(lambda z)^m.
/// The value is that of the series itself: for auxiliary series it is S'_N,
/// not the reconstructed lambda*S'_N (see resum_curve).
ResumEvaluation resum_eval(const CoefficientSeries& series, int N, double lambda, double p,
                           const MomentSource& source);
ResumEvaluation resum_eval(const CoefficientSeries& series, int N, double lambda, double p,
                           const QuadratureSpec& quad = {});

/// A_n(N) for n = 0..N.
std::vector<double> term_decomposition(const CoefficientSeries& series, int N, double lambda,
                                       double p, const MomentSource& source);

/// Curve value in the parent's terms: lambda * S'_N for auxiliary series,
/// S_N otherwise.
double resum_curve(const CoefficientSeries& series, int N, double lambda, double p,
                   const MomentSource& source);

enum class DerivativeVariable { p, lambda };

struct DerivativeResult {
    double value = 0.0;   ///< dS/dp or dS/dlambda
    double error = 0.0;   ///< |Richardson correction| plus quadrature noise bound
    bool low_confidence = false;
};

/// Central difference in log p (or log lambda) with relative step 1e-4 and one
/// Richardson level. Flags low confidence when the quadrature noise floor
/// (error estimate / step) exceeds 1e-4 of max(|S|, |dS/dlog x|).
DerivativeResult resum_derivative(const CoefficientSeries& series, int N, double lambda, double p,
                                  DerivativeVariable wrt, const MomentSource& source);

/// Result of composing the w-truncated Borel polynomial with the z-series of w(z).
struct TaylorResidual {
    int order = 0;
    double expected = 0.0;       ///< f_n / n! (zero beyond N)
    double reconstructed = 0.0;
    double residual = 0.0;       ///< reconstructed - expected
    bool exact_zero = false;     ///< residual is exactly zero in rational arithmetic
};

/// Verifies in exact rational arithmetic that the truncated map reproduces the
/// Borel coefficients f_n/n! for n <= N; reports orders 0..N+1.
std::vector<TaylorResidual> taylor_consistency(const CoefficientSeries& series, int N, double p);

}  // namespace vbr
