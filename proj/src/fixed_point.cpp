#include "vbr/error.hpp"
#include "vbr/scan.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace vbr {
namespace {

constexpr double kMaxRelativeGap = 0.15;

std::vector<ExtremumRecord> branch_of_rank(const OrderScans& scans, std::size_t rank) {
    std::vector<ExtremumRecord> branch;
    int expected = 0;
    for (auto it = scans.rbegin(); it != scans.rend(); ++it) {
        const auto& [N, records] = *it;
        if (!branch.empty() && N != expected) break;
        if (records.size() <= rank) break;
        auto sorted = records;
        std::sort(sorted.begin(), sorted.end(),
                  [](const auto& a, const auto& b) { return a.p_star < b.p_star; });
        branch.push_back(sorted[rank]);
        expected = N - 1;
    }
    std::reverse(branch.begin(), branch.end());
    return branch;
}

std::optional<FixedPointCandidate> assess(std::vector<ExtremumRecord> branch, std::size_t rank,
                                          double lo, double hi) {
    if (branch.size() < 3) return std::nullopt;
    std::vector<double> gaps;
    for (std::size_t k = 1; k < branch.size(); ++k) gaps.push_back(branch[k].p_star - branch[k - 1].p_star);
    for (std::size_t k = 0; k < gaps.size(); ++k) {
        if (gaps[k] == 0.0 || std::signbit(gaps[k]) != std::signbit(gaps[0])) return std::nullopt;
        if (k > 0 && !(std::abs(gaps[k]) < std::abs(gaps[k - 1]))) return std::nullopt;
    }
    const double p_last = branch.back().p_star;
    const double d = gaps.back();
    const double rel = std::abs(d) / p_last;
    if (rel > kMaxRelativeGap) return std::nullopt;
    const double r = d / gaps[gaps.size() - 2];
    const double limit = p_last + d * r / (1.0 - r);
    if (!std::isfinite(limit) || !(limit > 0.0) || limit < lo || limit > hi) return std::nullopt;
    if (std::abs(limit - p_last) > kMaxRelativeGap * p_last) return std::nullopt;

    FixedPointCandidate out;
    out.limit_estimate = limit;
    out.rank = static_cast<int>(rank);
    out.last_relative_gap = rel;
    out.alternation = true;
    for (std::size_t k = 1; k < branch.size(); ++k) {
        const bool alternates = (is_minimum(branch[k].kind) && is_maximum(branch[k - 1].kind)) ||
                                (is_maximum(branch[k].kind) && is_minimum(branch[k - 1].kind));
        out.alternation = out.alternation && alternates;
    }
    out.branch = std::move(branch);
    return out;
}

}  // namespace

FixedPointCandidate detect_fixed_point(const OrderScans& scans, double window_lo, double window_hi) {
    if (!(window_lo > 0.0) || !(window_hi > window_lo)) {
        throw DomainError("fixed point window needs 0 < lo < hi");
    }
    std::size_t max_rank = 0;
    for (const auto& [N, records] : scans) max_rank = std::max(max_rank, records.size());
    std::optional<FixedPointCandidate> best;
    for (std::size_t rank = 0; rank < max_rank; ++rank) {
        auto c = assess(branch_of_rank(scans, rank), rank, window_lo, window_hi);
        if (c && (!best || c->last_relative_gap < best->last_relative_gap)) best = std::move(c);
    }
    if (!best) throw SearchError("no fixed point detected");
    return *best;
}

}  // namespace vbr
