#pragma once

#include "vbr/quadrature.hpp"
#include "vbr/scan.hpp"
#include "vbr/series.hpp"

#include <optional>
#include <string>
#include <vector>

namespace vbr {

enum class BoundDirection { lower_bound, upper_bound, inconclusive };
enum class BoundBasis { global_minima_chain, local_chain, maxima_chain };

std::string_view to_string(BoundDirection d);
std::string_view to_string(BoundBasis b);

struct BoundVerdict {
    BoundDirection direction = BoundDirection::inconclusive;
    bool monotone = false;
    BoundBasis basis = BoundBasis::local_chain;
    std::vector<std::string> caveats;
    std::string reason;            ///< why the verdict is what it is
    int trend = 0;                 ///< +1 increasing, -1 decreasing, 0 flat or mixed at lambda0
    bool trend_holds_on_grid = false;
};

/// Purely numeric input: the chain at lambda0 plus the same chain sampled on
/// a lambda grid (grid_values[j][i] is order i at lambdas[j]).
struct BoundInput {
    SelectionRule rule = SelectionRule::principal_min;
    std::vector<ExtremumRecord> chain;  ///< ascending N
    std::vector<double> lambdas;
    std::vector<std::vector<double>> grid_values;
};

/// Direction of the bound suggested by the trend of S_N:
///  - increasing chain with a global minimum: lower_bound
///  - increasing chain of local minima only: inconclusive
///  - increasing maxima chain: lower_bound, caveat that local extrema carry no bound argument
///  - decreasing minima chain: upper_bound, caveat that it is not guaranteed a priori
///  - decreasing maxima chain with a global maximum: upper_bound
///  - flat chains (monotone, trivially) and mixed chains: inconclusive
/// The trend must hold at lambda0 and at every grid point.
BoundVerdict bound_verdict(const BoundInput& input);

/// Builds the input on the 20-point grid lambda0*j/20, j = 1..20, and
/// evaluates it. Auxiliary series contribute the reconstructed curve.
BoundVerdict bound_verdict(const CoefficientSeries& series, const ExtremumSequence& sequence,
                           double lambda0, const MomentSource& source);

struct CNEntry {
    int N_from = 0;
    int N_to = 0;
    double c = 0.0;  ///< p(N_to) / p(N_from)
};

struct CNSequence {
    std::vector<CNEntry> values;
    /// |1/c(N+1) - (1 - 1/c(N) + 1/c(N)^2)| for consecutive entries.
    std::vector<double> recursion_residuals;
    /// K in 1/c(N) = 1 - 1/(N+K), least squares over entries with c > 1.
    std::optional<double> K_fit;
    bool all_above_one = false;
    bool strictly_decreasing = false;
};

/// Ratios between consecutive available records of one chain.
CNSequence cn_sequence(const std::vector<ExtremumRecord>& chain);

/// Least-squares K for y_N = 1 - 1/c(N) = 1/(N+K); one point is solved exactly.
std::optional<double> fit_K(const std::vector<CNEntry>& values);

struct DeltaSEntry {
    int N_from = 0;
    int N_to = 0;
    double measured = 0.0;                ///< S(N_to) - S(N_from)
    double estimated = 0.0;               ///< (A_1 / p) (1/c - 1)
    std::optional<double> asymptotic;     ///< alpha A_1 / (2 A_2) / (N + K)^2
    bool sign_consistent = false;         ///< estimated and measured agree in sign
};

struct AlphaEntry {
    int N = 0;
    double p = 0.0;
    double A1 = 0.0;
    double A2 = 0.0;
    double alpha = 0.0;  ///< A_1 - lambda dA_1/dlambda at lambda0
    double error = 0.0;
};

struct IdentityCheck {
    std::string name;
    int N = 0;
    double p = 0.0;
    double residual = 0.0;
    double tolerance = 0.0;
    bool applicable = true;  ///< false for inflexions that are not roots of the slope
    bool pass = false;
};

struct SlopeProfile {
    int N = 0;
    double p = 0.0;
    std::vector<double> lambdas;
    std::vector<double> slopes;          ///< d curve / d lambda
    std::vector<double> sign_changes;    ///< lambda where the slope changes sign
    int origin_sign = 0;                 ///< sign of the slope at the origin
    bool sign_constant = false;
};

struct SlopeReport {
    std::vector<IdentityCheck> origin_checks;
    std::vector<SlopeProfile> profiles;
    /// Meaningful for principal minima chains: no profile changes sign.
    bool principal_sign_constant = false;
};

/// Origin identities |C(eps) - (v_0 + v_1 eps)| <= K eps^2 and
/// |C'(eps) - v_1| <= 4 K eps at eps = 1e-3 for every record, with C the
/// curve (lambda*S' for auxiliary series), v_0, v_1 its origin value and
/// slope and K = 2 max(|v_2|, 1) |prefactor|. Slope profiles on `lambdas`.
SlopeReport slope_checks(const CoefficientSeries& series, const ExtremumSequence& sequence,
                         const std::vector<double>& lambdas, const MomentSource& source);

struct DiagnosticsReport {
    CNSequence cn;
    std::vector<DeltaSEntry> delta_S;
    std::vector<AlphaEntry> alpha;
    std::vector<IdentityCheck> identity_checks;  ///< extremum identity per record
    SlopeReport slopes;
    bool magic_sign_consistent = false;  ///< every delta_S entry sign-consistent
    bool partial = false;                ///< fewer than three records
    std::vector<std::string> observations;
};

/// c(N) ratios, recursion residuals, K, alpha, measured against estimated
/// changes of S, and the identity lambda dS/dlambda = sum n A_n / p^n at each
/// record (relative tolerance 1e-4). Needs at least two records.
DiagnosticsReport appendix_diagnostics(const CoefficientSeries& series, const ExtremumSequence& sequence,
                                       double lambda0, const MomentSource& source);

}  // namespace vbr
