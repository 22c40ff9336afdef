#pragma once

#include "vbr/series.hpp"

#include <functional>
#include <optional>
#include <string_view>

namespace vbr {

struct ExactModel {
    BuiltinModel id;
    std::string_view borel_function;
    bool closed_form = false;        ///< exact_sum has an elementary closed form
    bool borel_summable = true;
    std::optional<double> pole;      ///< singularity on the positive axis, if any
};

/// Reference data for the models whose sum is known; beta_polymer has none.
std::optional<ExactModel> exact_model(BuiltinModel model);

/// Borel sum for the summable models: prototype by double-exponential
/// quadrature of int e^{-t}/(1+lambda t) dt, geometric as 1/(1+lambda),
/// euler_heisenberg by the proper-time integral (Taylor expansion of the
/// integrand below s = 0.5, Gauss-Kronrod above, tail dropped once
/// e^{-s/sqrt(lambda)} < 1e-16). Throws DomainError for the other models.
double exact_sum(BuiltinModel model, double lambda);

/// (coth s - 1/s - s/3) e^{-s/sqrt(lambda)} / s^2, the proper-time integrand
/// without its factor 100. Evaluated from its odd power series for s < 0.5.
double schwinger_integrand(double s, double lambda);

struct PVSplit {
    double s_pert = 0.0;   ///< principal value of the Borel integral
    double s_np = 0.0;     ///< ln5 e^{-5/lambda} / (6 lambda)
    double s_exact = 0.0;  ///< subtracted, singularity-free integral
    double lambda = 0.0;
};

/// Principal-value decomposition for B(z) = 1/((1+z)(5-z)). The subtracted
/// numerator is written with expm1 so the point z = 5 is regular.
PVSplit pv_split(double lambda);

struct ZeroSlopeResult {
    double lambda_star = 0.0;
    double omega = 0.0;  ///< curve'(lambda_star), central difference
};

/// Bracketed root (TOMS 748, width tol) and the slope there.
/// Throws SearchError("no zero in bracket") without a sign change.
ZeroSlopeResult zero_and_slope(const std::function<double(double)>& curve, double lo, double hi,
                               double tol = 1e-10);

}  // namespace vbr
