#include "vbr/app/report.hpp"

#include "vbr/error.hpp"

#include <fstream>
#include <system_error>

#ifndef VBR_VERSION
#define VBR_VERSION "0.0.0"
#endif

namespace vbr::app {

json to_json(const ExtremumRecord& r) {
    return {{"N", r.N},
            {"p", r.p_star},
            {"S", r.S_value},
            {"kind", std::string(to_string(r.kind))},
            {"curvature_sign", r.curvature_sign},
            {"touches_p_min", r.window.touches_p_min},
            {"touches_p_max", r.window.touches_p_max},
            {"slope_residual", r.slope_residual}};
}

json to_json(const std::vector<ExtremumRecord>& records) {
    json out = json::array();
    for (const auto& r : records) out.push_back(to_json(r));
    return out;
}

json to_json(const ExtremumSequence& seq) {
    json entries = json::array();
    for (const auto& e : seq.entries) {
        entries.push_back(e.record ? to_json(*e.record) : json{{"N", e.N}, {"solution", nullptr}});
    }
    return {{"rule", std::string(to_string(seq.rule))}, {"entries", entries}};
}

json to_json(const FixedPointCandidate& fp) {
    return {{"branch", to_json(fp.branch)},
            {"limit_estimate", fp.limit_estimate},
            {"alternation", fp.alternation},
            {"rank", fp.rank},
            {"last_relative_gap", fp.last_relative_gap}};
}

json to_json(const BoundVerdict& v) {
    return {{"direction", std::string(to_string(v.direction))},
            {"monotone", v.monotone},
            {"basis", std::string(to_string(v.basis))},
            {"caveats", v.caveats},
            {"reason", v.reason},
            {"trend", v.trend},
            {"trend_holds_on_grid", v.trend_holds_on_grid}};
}

namespace {

json checks_json(const std::vector<IdentityCheck>& checks) {
    json out = json::array();
    for (const auto& c : checks) {
        out.push_back({{"name", c.name},
                       {"N", c.N},
                       {"p", c.p},
                       {"residual", c.residual},
                       {"tolerance", c.tolerance},
                       {"applicable", c.applicable},
                       {"pass", c.pass}});
    }
    return out;
}

}  // namespace

json to_json(const DiagnosticsReport& d) {
    json cn = json::array();
    for (const auto& e : d.cn.values) cn.push_back({{"from", e.N_from}, {"to", e.N_to}, {"c", e.c}});
    json ds = json::array();
    for (const auto& e : d.delta_S) {
        ds.push_back({{"from", e.N_from},
                      {"to", e.N_to},
                      {"measured", e.measured},
                      {"estimated", e.estimated},
                      {"asymptotic", e.asymptotic ? json(*e.asymptotic) : json(nullptr)},
                      {"sign_consistent", e.sign_consistent}});
    }
    json alpha = json::array();
    for (const auto& a : d.alpha) {
        alpha.push_back({{"N", a.N}, {"p", a.p}, {"A1", a.A1}, {"A2", a.A2}, {"alpha", a.alpha}, {"error", a.error}});
    }
    json profiles = json::array();
    for (const auto& p : d.slopes.profiles) {
        profiles.push_back({{"N", p.N},
                            {"p", p.p},
                            {"sign_changes", p.sign_changes},
                            {"origin_sign", p.origin_sign},
                            {"sign_constant", p.sign_constant}});
    }
    return {{"cn",
             {{"values", cn},
              {"recursion_residuals", d.cn.recursion_residuals},
              {"K_fit", d.cn.K_fit ? json(*d.cn.K_fit) : json(nullptr)},
              {"all_above_one", d.cn.all_above_one},
              {"strictly_decreasing", d.cn.strictly_decreasing}}},
            {"delta_S", ds},
            {"alpha", alpha},
            {"identity_checks", checks_json(d.identity_checks)},
            {"origin_checks", checks_json(d.slopes.origin_checks)},
            {"slope_profiles", profiles},
            {"principal_sign_constant", d.slopes.principal_sign_constant},
            {"magic_sign_consistent", d.magic_sign_consistent},
            {"partial", d.partial},
            {"observations", d.observations}};
}

json to_json(const ResumEvaluation& e) {
    return {{"N", e.N},
            {"lambda", e.lambda},
            {"p", e.p},
            {"value", e.value},
            {"terms", e.terms},
            {"quadrature_error_estimate", e.quadrature_error_estimate}};
}

json to_json(const ScanConfig& c) {
    return {{"lambda0", c.lambda0},
            {"p_min", c.p_min},
            {"p_max", c.p_max},
            {"grid_points_per_decade", c.grid_points_per_decade},
            {"refine_tol", c.refine_tol},
            {"quadrature",
             {{"rule", c.quad.rule == QuadratureRule::gauss_laguerre ? "gauss_laguerre" : "adaptive_exp_tail"},
              {"node_count", c.quad.node_count},
              {"rel_tol", c.quad.rel_tol},
              {"abs_tol", c.quad.abs_tol}}}};
}

json to_json(const PVSplit& s) {
    return {{"lambda", s.lambda}, {"s_pert", s.s_pert}, {"s_np", s.s_np}, {"s_exact", s.s_exact}};
}

json series_json(const CoefficientSeries& s) {
    return {{"name", s.name()},
            {"prefactor", s.prefactor()},
            {"order", s.order()},
            {"auxiliary", s.is_auxiliary()}};
}

json provenance(const json& config) {
    return {{"tool", "vbr"}, {"version", VBR_VERSION}, {"config", config}};
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw ParseError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ParseError("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw ParseError("write failed for " + tmp.string());
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw ParseError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
    }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace vbr::app
