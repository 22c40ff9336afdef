#pragma once

#include "vbr/quadrature.hpp"
#include "vbr/series.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vbr {

struct ScanConfig {
    double lambda0 = 1.0;
    double p_min = 1e-2;
    double p_max = 1e3;
    int grid_points_per_decade = 60;
    double refine_tol = 1e-9;  ///< relative bracket width at which refinement stops
    QuadratureSpec quad;
    int threads = 1;           ///< grid evaluation workers; 0 picks the hardware count

    /// Throws DomainError on p_min >= p_max, fewer than 20 points per decade,
    /// non-positive lambda0 or refine_tol outside (0, 1e-3].
    void validate() const;
};

enum class ExtremumKind { global_min, local_min, local_max, global_max, inflexion };

std::string_view to_string(ExtremumKind kind);
bool is_minimum(ExtremumKind kind);
bool is_maximum(ExtremumKind kind);

struct WindowFlags {
    bool touches_p_min = false;
    bool touches_p_max = false;
};

struct ExtremumRecord {
    int N = 0;
    double p_star = 0.0;
    double S_value = 0.0;
    ExtremumKind kind = ExtremumKind::local_min;
    int curvature_sign = 0;      ///< sign of d2S/d(log p)2; 0 for inflexions
    WindowFlags window;
    double slope_residual = 0.0; ///< |dS/dp| at p_star
};

/// Roots of dS_N(lambda0, p)/dp on a log-uniform grid over [p_min, p_max],
/// bracketed by sign changes of the grid differences and refined with TOMS 748.
/// A minimum is global when it lies at or below every grid value, every other
/// root and both analytic limits: the partial sum (p -> 0) and prefactor*f_0
/// (p -> inf). Maxima mirror this. A root whose curvature falls below 1e-3 of
/// the largest grid curvature within three grid points is an inflexion. An
/// adjacent min/max pair whose values agree to 3e-5*max(|S|,1) within a
/// quarter decade collapses into one inflexion at the zero of the second
/// derivative between them.
std::vector<ExtremumRecord> scan_extrema(const CoefficientSeries& series, int N,
                                         const ScanConfig& config, const MomentSource& source);
std::vector<ExtremumRecord> scan_extrema(const CoefficientSeries& series, int N,
                                         const ScanConfig& config);

using OrderScans = std::map<int, std::vector<ExtremumRecord>>;

/// scan_extrema for every N in [N_lo, N_hi], sharing one moment cache.
OrderScans scan_orders(const CoefficientSeries& series, int N_lo, int N_hi,
                       const ScanConfig& config);

enum class SelectionRule { principal_min, principal_max, bar_branch, fixed_point_branch };

std::string_view to_string(SelectionRule rule);

struct SequenceEntry {
    int N = 0;
    std::optional<ExtremumRecord> record;  ///< empty means "no solution"
};

struct ExtremumSequence {
    SelectionRule rule = SelectionRule::principal_min;
    std::vector<SequenceEntry> entries;  ///< ascending N, one per scanned order

    const ExtremumRecord* at(int N) const;
    std::vector<ExtremumRecord> available() const;
};

/// principal_min: the global minimum if there is one, otherwise the local
/// minimum nearest in log p to the previous order's choice (the largest-p local
/// minimum when there is no previous choice). principal_max mirrors this and
/// falls back to an inflexion when an order has no maximum. bar_branch keeps,
/// for every order with a principal minimum, the largest-p maximum below it.
/// fixed_point_branch defers to detect_fixed_point over the default scan window.
/// Two candidates tied in both S and distance raise SearchError.
ExtremumSequence select_principal(const OrderScans& scans, SelectionRule rule);

struct FixedPointCandidate {
    std::vector<ExtremumRecord> branch;  ///< p0(N), ascending N
    double limit_estimate = 0.0;
    bool alternation = false;  ///< kinds alternate between maxima and minima
    int rank = 0;              ///< position of the branch counted from the smallest p
    double last_relative_gap = 0.0;
};

/// Heuristic branch search. Branch r collects the r-th smallest-p extremum of
/// each order over the longest run of consecutive orders ending at the highest
/// one. A branch qualifies when it has at least three orders, its successive
/// gaps share one sign and shrink strictly, the last gap is at most 15% of the
/// last value, and the geometric extrapolation p_last + d*r/(1-r), r = d/d_prev,
/// is positive, inside the window and within 15% of p_last. Among qualifying
/// branches the one with the smallest last relative gap wins.
/// Throws SearchError("no fixed point detected") otherwise.
FixedPointCandidate detect_fixed_point(const OrderScans& scans, double window_lo, double window_hi);

}  // namespace vbr
