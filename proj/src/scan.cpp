#include "vbr/scan.hpp"

#include "parallel.hpp"
#include "vbr/error.hpp"
#include "vbr/resum.hpp"

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>

namespace vbr {

void ScanConfig::validate() const {
    if (!(lambda0 > 0.0) || !std::isfinite(lambda0)) throw DomainError("lambda0 must be > 0");
    if (!(p_min > 0.0) || !(p_max > p_min) || !std::isfinite(p_max)) {
        throw DomainError("scan window needs 0 < p_min < p_max");
    }
    if (grid_points_per_decade < 20) throw DomainError("grid_points_per_decade must be >= 20");
    if (!(refine_tol > 0.0) || refine_tol > 1e-3) throw DomainError("refine_tol must lie in (0, 1e-3]");
    quad.validate();
}

std::string_view to_string(ExtremumKind kind) {
    switch (kind) {
        case ExtremumKind::global_min: return "global_min";
        case ExtremumKind::local_min: return "local_min";
        case ExtremumKind::local_max: return "local_max";
        case ExtremumKind::global_max: return "global_max";
        case ExtremumKind::inflexion: return "inflexion";
    }
    return "?";
}

bool is_minimum(ExtremumKind kind) {
    return kind == ExtremumKind::global_min || kind == ExtremumKind::local_min;
}

bool is_maximum(ExtremumKind kind) {
    return kind == ExtremumKind::global_max || kind == ExtremumKind::local_max;
}

std::string_view to_string(SelectionRule rule) {
    switch (rule) {
        case SelectionRule::principal_min: return "principal_min";
        case SelectionRule::principal_max: return "principal_max";
        case SelectionRule::bar_branch: return "bar_branch";
        case SelectionRule::fixed_point_branch: return "fixed_point_branch";
    }
    return "?";
}

namespace {

constexpr double kCurvatureStep = 1e-3;    // in log p
constexpr double kInflexionRatio = 1e-3;
constexpr double kMergeValueTol = 3e-5;
constexpr double kMergeDecades = 0.25;

struct Profile {
    const CoefficientSeries& series;
    int N;
    double lambda;
    const MomentSource& source;

    double value(double u) const { return resum_eval(series, N, lambda, std::exp(u), source).value; }
    /// dS/dlog p
    double slope(double u) const {
        const double p = std::exp(u);
        return resum_derivative(series, N, lambda, p, DerivativeVariable::p, source).value * p;
    }
    /// Second difference in log p at step kCurvatureStep (unscaled).
    double second_difference(double u) const {
        return value(u + kCurvatureStep) - 2.0 * value(u) + value(u - kCurvatureStep);
    }
};

struct Root {
    double u = 0.0;
    double S = 0.0;
    int direction = 0;  // +1 minimum, -1 maximum, 0 inflexion
    std::size_t grid_index = 0;
    double slope_residual = 0.0;
};

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

/// Refines a zero of f on [a, b] (f(a), f(b) of opposite sign) to relative width tol in p.
double refine(const auto& f, double a, double b, double fa, double fb, double tol) {
    std::uintmax_t iters = 200;
    auto stop = [tol](double x, double y) { return std::abs(y - x) <= tol; };
    const auto [lo, hi] = boost::math::tools::toms748_solve(f, a, b, fa, fb, stop, iters);
    return 0.5 * (lo + hi);
}

/// Root of the slope in [a, b]; `centre` breaks ties between several sign changes.
Root locate(const Profile& prof, double a, double b, double centre, std::size_t grid_index,
            int direction, double tol) {
    auto g = [&](double x) { return prof.slope(x); };
    double ga = g(a), gb = g(b);
    double root = std::numeric_limits<double>::quiet_NaN();
    if (sign_of(ga) * sign_of(gb) < 0) {
        root = refine(g, a, b, ga, gb, tol);
    } else if (ga == 0.0 || gb == 0.0) {
        root = ga == 0.0 ? a : b;
    } else {
        // Bracket endpoints disagree with the grid differences; look for the
        // sign change closest to the central grid point.
        constexpr int pieces = 16;
        double best = std::numeric_limits<double>::infinity();
        double prev_x = a, prev_g = ga;
        for (int k = 1; k <= pieces; ++k) {
            const double x = a + (b - a) * k / pieces;
            const double gx = g(x);
            if (sign_of(prev_g) * sign_of(gx) < 0) {
                const double r = refine(g, prev_x, x, prev_g, gx, tol);
                if (std::abs(r - centre) < std::abs(best - centre)) best = r;
            }
            prev_x = x;
            prev_g = gx;
        }
        if (std::isfinite(best)) {
            root = best;
        } else {
            auto h = [&](double x) { return direction * prof.value(x); };
            root = boost::math::tools::brent_find_minima(h, a, b, 40).first;
        }
    }
    Root r;
    r.u = root;
    r.S = prof.value(root);
    r.direction = direction;
    r.grid_index = grid_index;
    r.slope_residual = std::abs(prof.slope(root)) / std::exp(root);
    return r;
}

}  // namespace

std::vector<ExtremumRecord> scan_extrema(const CoefficientSeries& series, int N,
                                         const ScanConfig& config, const MomentSource& source) {
    config.validate();
    if (N < 1) throw DomainError("scan_extrema needs N >= 1");
    if (N > series.order()) {
        throw DomainError("order N=" + std::to_string(N) + " exceeds series order " +
                          std::to_string(series.order()));
    }
    const Profile prof{series, N, config.lambda0, source};

    const double u_lo = std::log(config.p_min), u_hi = std::log(config.p_max);
    const double decades = std::log10(config.p_max / config.p_min);
    const auto intervals = static_cast<std::size_t>(
        std::max(2.0, std::ceil(decades * config.grid_points_per_decade - 1e-9)));
    std::vector<double> u(intervals + 1), S(intervals + 1), qerr(intervals + 1);
    for (std::size_t i = 0; i <= intervals; ++i) {
        u[i] = i == intervals ? u_hi : u_lo + (u_hi - u_lo) * static_cast<double>(i) / intervals;
    }
    detail::parallel_for(u.size(), config.threads, [&](std::size_t i) {
        const auto ev = resum_eval(series, N, config.lambda0, std::exp(u[i]), source);
        S[i] = ev.value;
        qerr[i] = ev.quadrature_error_estimate;
    });

    // Signs of the grid differences, with differences below the evaluation
    // noise treated as zero and inheriting the previous sign.
    std::vector<int> dsign(intervals, 0);
    int carried = 0;
    for (std::size_t i = 0; i < intervals; ++i) {
        const double d = S[i + 1] - S[i];
        const double noise = 64.0 * std::numeric_limits<double>::epsilon() *
                                 (std::abs(S[i]) + std::abs(S[i + 1])) +
                             qerr[i] + qerr[i + 1];
        const int s = std::abs(d) > noise ? sign_of(d) : 0;
        if (s != 0) carried = s;
        dsign[i] = s != 0 ? s : carried;
    }

    std::vector<Root> roots;
    int last = 0;
    for (std::size_t i = 0; i < intervals; ++i) {
        if (dsign[i] == 0) continue;
        if (last != 0 && dsign[i] != last) {
            // the slope changes sign at grid point i
            const std::size_t centre = std::clamp<std::size_t>(i, 1, intervals - 1);
            roots.push_back(locate(prof, u[centre - 1], u[centre + 1], u[centre], centre,
                                   dsign[i] > 0 ? +1 : -1, config.refine_tol));
        }
        last = dsign[i];
    }
    // A root inside an end interval leaves no sign change between grid
    // differences; compare the analytic slope at each window edge instead.
    if (const int first = dsign.front(); first != 0) {
        const int edge = sign_of(prof.slope(u.front()));
        if (edge != 0 && edge != first) {
            roots.push_back(locate(prof, u[0], u[1], u[0], 0, first > 0 ? +1 : -1, config.refine_tol));
        }
    }
    if (const int final_sign = dsign.back(); final_sign != 0) {
        const int edge = sign_of(prof.slope(u.back()));
        if (edge != 0 && edge != final_sign) {
            roots.push_back(locate(prof, u[intervals - 1], u[intervals], u[intervals], intervals,
                                   edge > 0 ? +1 : -1, config.refine_tol));
        }
    }
    std::sort(roots.begin(), roots.end(), [](const Root& a, const Root& b) { return a.u < b.u; });

    // Curvature scale around each root from grid second differences.
    const double hg = (u_hi - u_lo) / static_cast<double>(intervals);
    auto curvature_scale = [&](std::size_t i) {
        constexpr std::size_t span = 3;
        const std::size_t lo = i > span ? i - span : 1;
        const std::size_t hi = std::min(intervals - 1, i + span);
        double m = 0.0;
        for (std::size_t j = lo; j <= hi; ++j) m = std::max(m, std::abs(S[j + 1] - 2.0 * S[j] + S[j - 1]));
        return m / (hg * hg);
    };
    for (auto& r : roots) {
        const double c = prof.second_difference(r.u) / (kCurvatureStep * kCurvatureStep);
        if (std::abs(c) < kInflexionRatio * curvature_scale(r.grid_index)) r.direction = 0;
    }

    // Collapse near-degenerate min/max pairs.
    std::vector<Root> merged;
    for (std::size_t k = 0; k < roots.size(); ++k) {
        if (k + 1 < roots.size()) {
            const Root& a = roots[k];
            const Root& b = roots[k + 1];
            const double scale = std::max({std::abs(a.S), std::abs(b.S), 1.0});
            const bool opposite = a.direction * b.direction < 0;
            if (opposite && std::abs(a.S - b.S) < kMergeValueTol * scale &&
                (b.u - a.u) / std::log(10.0) < kMergeDecades) {
                auto c = [&](double x) { return prof.second_difference(x); };
                const double ca = c(a.u), cb = c(b.u);
                Root r;
                r.u = sign_of(ca) * sign_of(cb) < 0 ? refine(c, a.u, b.u, ca, cb, config.refine_tol)
                                                    : 0.5 * (a.u + b.u);
                r.S = prof.value(r.u);
                r.direction = 0;
                r.grid_index = a.grid_index;
                r.slope_residual = std::abs(prof.slope(r.u)) / std::exp(r.u);
                merged.push_back(r);
                ++k;
                continue;
            }
        }
        merged.push_back(roots[k]);
    }

    const double limit_small_p = partial_sum(series, N, config.lambda0);
    const double limit_large_p = series.prefactor() * series.coefficient(0);

    std::vector<ExtremumRecord> out;
    out.reserve(merged.size());
    for (std::size_t k = 0; k < merged.size(); ++k) {
        const Root& r = merged[k];
        ExtremumRecord rec;
        rec.N = N;
        rec.p_star = std::exp(r.u);
        rec.S_value = r.S;
        rec.curvature_sign = r.direction;
        rec.slope_residual = r.slope_residual;
        rec.window.touches_p_min = r.grid_index <= 1;
        rec.window.touches_p_max = r.grid_index + 1 >= intervals;
        if (r.direction == 0) {
            rec.kind = ExtremumKind::inflexion;
        } else {
            // s*S is minimised by a minimum (s = +1) and by a maximum (s = -1)
            const double s = r.direction;
            const double tol = 1e-12 * std::max(std::abs(r.S), 1.0);
            bool global = s * r.S <= s * limit_small_p + tol && s * r.S <= s * limit_large_p + tol;
            for (double v : S) global = global && s * r.S <= s * v + tol;
            for (std::size_t j = 0; j < merged.size(); ++j) {
                if (j != k) global = global && s * r.S <= s * merged[j].S + tol;
            }
            if (r.direction > 0) {
                rec.kind = global ? ExtremumKind::global_min : ExtremumKind::local_min;
            } else {
                rec.kind = global ? ExtremumKind::global_max : ExtremumKind::local_max;
            }
        }
        out.push_back(rec);
    }
    return out;
}

std::vector<ExtremumRecord> scan_extrema(const CoefficientSeries& series, int N,
                                         const ScanConfig& config) {
    return scan_extrema(series, N, config, MomentSource::cached(config.quad));
}

OrderScans scan_orders(const CoefficientSeries& series, int N_lo, int N_hi,
                       const ScanConfig& config) {
    if (N_lo < 1 || N_hi < N_lo) throw DomainError("order range must satisfy 1 <= N_lo <= N_hi");
    const auto source = MomentSource::cached(config.quad);
    OrderScans out;
    for (int N = N_lo; N <= N_hi; ++N) out[N] = scan_extrema(series, N, config, source);
    return out;
}

const ExtremumRecord* ExtremumSequence::at(int N) const {
    for (const auto& e : entries) {
        if (e.N == N) return e.record ? &*e.record : nullptr;
    }
    return nullptr;
}

std::vector<ExtremumRecord> ExtremumSequence::available() const {
    std::vector<ExtremumRecord> out;
    for (const auto& e : entries) {
        if (e.record) out.push_back(*e.record);
    }
    return out;
}

namespace {

std::string describe(const ExtremumRecord& r) {
    std::ostringstream os;
    os.precision(10);
    os << "N=" << r.N << " p=" << r.p_star << " S=" << r.S_value << " (" << to_string(r.kind) << ")";
    return os.str();
}

[[noreturn]] void ambiguous(const ExtremumRecord& a, const ExtremumRecord& b) {
    throw SearchError("ambiguous extremum selection: " + describe(a) + " and " + describe(b));
}

/// Picks among candidates of one order. `global` are certified extrema; the
/// rest are chosen by proximity to `previous` (largest p if none).
std::optional<ExtremumRecord> choose(const std::vector<ExtremumRecord>& global,
                                     const std::vector<ExtremumRecord>& local,
                                     std::optional<double> previous) {
    if (!global.empty()) {
        if (global.size() > 1) ambiguous(global[0], global[1]);
        return global.front();
    }
    if (local.empty()) return std::nullopt;
    if (!previous) {
        return *std::max_element(local.begin(), local.end(),
                                 [](const auto& a, const auto& b) { return a.p_star < b.p_star; });
    }
    const double anchor = std::log(*previous);
    const ExtremumRecord* best = nullptr;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& r : local) {
        const double d = std::abs(std::log(r.p_star) - anchor);
        if (best && std::abs(d - best_d) <= 1e-12 * std::max(d, 1.0) &&
            std::abs(r.S_value - best->S_value) <= 1e-12 * std::max(std::abs(r.S_value), 1.0)) {
            ambiguous(*best, r);
        }
        if (d < best_d) {
            best_d = d;
            best = &r;
        }
    }
    return *best;
}

ExtremumSequence select_extremal(const OrderScans& scans, bool minima) {
    ExtremumSequence seq;
    seq.rule = minima ? SelectionRule::principal_min : SelectionRule::principal_max;
    std::optional<double> previous;
    for (const auto& [N, records] : scans) {
        std::vector<ExtremumRecord> global, local, inflexions;
        for (const auto& r : records) {
            if (minima ? r.kind == ExtremumKind::global_min : r.kind == ExtremumKind::global_max) {
                global.push_back(r);
            } else if (minima ? r.kind == ExtremumKind::local_min : r.kind == ExtremumKind::local_max) {
                local.push_back(r);
            } else if (r.kind == ExtremumKind::inflexion) {
                inflexions.push_back(r);
            }
        }
        auto pick = choose(global, local, previous);
        if (!pick && !minima) pick = choose({}, inflexions, previous);
        if (pick) previous = pick->p_star;
        seq.entries.push_back({N, pick});
    }
    return seq;
}

}  // namespace

ExtremumSequence select_principal(const OrderScans& scans, SelectionRule rule) {
    switch (rule) {
        case SelectionRule::principal_min: return select_extremal(scans, true);
        case SelectionRule::principal_max: return select_extremal(scans, false);
        case SelectionRule::bar_branch: {
            const auto principal = select_extremal(scans, true);
            ExtremumSequence seq;
            seq.rule = rule;
            for (const auto& entry : principal.entries) {
                SequenceEntry out{entry.N, std::nullopt};
                if (entry.record) {
                    for (const auto& r : scans.at(entry.N)) {
                        if (is_maximum(r.kind) && r.p_star < entry.record->p_star &&
                            (!out.record || r.p_star > out.record->p_star)) {
                            out.record = r;
                        }
                    }
                }
                seq.entries.push_back(out);
            }
            return seq;
        }
        case SelectionRule::fixed_point_branch: {
            ExtremumSequence seq;
            seq.rule = rule;
            const ScanConfig defaults;
            const auto fp = detect_fixed_point(scans, defaults.p_min, defaults.p_max);
            for (const auto& [N, records] : scans) {
                SequenceEntry out{N, std::nullopt};
                for (const auto& r : fp.branch) {
                    if (r.N == N) out.record = r;
                }
                seq.entries.push_back(out);
            }
            return seq;
        }
    }
    throw DomainError("unknown selection rule");
}

}  // namespace vbr
