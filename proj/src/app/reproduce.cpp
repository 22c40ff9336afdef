#include "vbr/app/reproduce.hpp"

#include "../parallel.hpp"
#include "manifest_data.hpp"
#include "vbr/error.hpp"
#include "vbr/oracles.hpp"
#include "vbr/resum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace vbr::app {
namespace {

ToleranceMode parse_mode(const std::string& s) {
    if (s == "absolute") return ToleranceMode::absolute;
    if (s == "relative") return ToleranceMode::relative;
    if (s == "equals") return ToleranceMode::equals;
    if (s == "at_most") return ToleranceMode::at_most;
    if (s == "report") return ToleranceMode::report;
    throw ParseError("manifest: unknown mode '" + s + "'");
}

std::string_view mode_name(ToleranceMode m) {
    switch (m) {
        case ToleranceMode::absolute: return "abs";
        case ToleranceMode::relative: return "rel";
        case ToleranceMode::equals: return "eq";
        case ToleranceMode::at_most: return "max";
        case ToleranceMode::report: return "info";
    }
    return "?";
}

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", x);
    return buf;
}

std::string key(const std::string& prefix, int N) { return prefix + "_" + std::to_string(N); }
std::string key_at(const std::string& prefix, int N, double lambda) {
    return key(prefix, N) + "(" + num(lambda) + ")";
}

/// One builtin model scanned over orders 1..max at its reference coupling.
struct Context {
    CoefficientSeries series;
    ScanConfig config;
    MomentSource source;
    OrderScans scans;

    Context(CoefficientSeries s, double lambda0, int max_order, const ReproduceOptions& o)
        : series(std::move(s)), source(MomentSource::cached()) {
        config.lambda0 = lambda0;
        config.grid_points_per_decade = o.grid_points_per_decade;
        config.quad = source.spec();
        for (int N = 1; N <= max_order; ++N) scans[N] = scan_extrema(series, N, config, source);
    }

    ExtremumSequence select(SelectionRule rule) const { return select_principal(scans, rule); }

    double curve(int N, double lambda, double p) const { return resum_curve(series, N, lambda, p, source); }

    json scans_json() const {
        json out = json::object();
        for (const auto& [N, recs] : scans) out[std::to_string(N)] = to_json(recs);
        return out;
    }
};

ExtremumSequence orders(const ExtremumSequence& seq, int lo, int hi) {
    ExtremumSequence out;
    out.rule = seq.rule;
    for (const auto& e : seq.entries) {
        if (e.N >= lo && e.N <= hi) out.entries.push_back(e);
    }
    return out;
}

ExtremumSequence as_sequence(const std::vector<ExtremumRecord>& chain, SelectionRule rule) {
    ExtremumSequence out;
    out.rule = rule;
    for (const auto& r : chain) out.entries.push_back({r.N, r});
    return out;
}

/// p, kind and optionally the curve at lambda_eval for every record.
void put_chain(json& computed, const Context& ctx, const std::vector<ExtremumRecord>& chain,
               const std::string& p_prefix, const std::string& kind_prefix, const std::string& S_prefix,
               std::optional<double> lambda_eval) {
    for (const auto& r : chain) {
        computed[key(p_prefix, r.N)] = r.p_star;
        computed[key(kind_prefix, r.N)] = std::string(to_string(r.kind));
        if (lambda_eval) computed[key_at(S_prefix, r.N, *lambda_eval)] = ctx.curve(r.N, *lambda_eval, r.p_star);
    }
}

json verdict_json(const Context& ctx, const ExtremumSequence& seq) {
    try {
        return to_json(bound_verdict(ctx.series, seq, ctx.config.lambda0, ctx.source));
    } catch (const Error& e) {
        return {{"error", e.what()}};
    }
}

json diagnostics_json(const Context& ctx, const ExtremumSequence& seq) {
    try {
        return to_json(appendix_diagnostics(ctx.series, seq, ctx.config.lambda0, ctx.source));
    } catch (const Error& e) {
        return {{"error", e.what()}};
    }
}

CurveSet with_exact(CurveSet set, BuiltinModel model) {
    set.add("exact", [model](double l) { return exact_sum(model, l); });
    return set;
}

std::vector<double> figure_grid(BuiltinModel model, const ReproduceOptions& o) {
    return uniform_grid(model_info(model).lambda_max, o.figure_points);
}

SectionResult sec31(const ReproduceOptions& o) {
    constexpr auto model = BuiltinModel::prototype;
    constexpr double lambda_eval = 0.5;
    Context ctx(builtin_series(model, 7), 1.0, 7, o);
    SectionResult out;
    out.computed = json::object();
    const auto pmin = ctx.select(SelectionRule::principal_min);
    put_chain(out.computed, ctx, pmin.available(), "p", "kind", "S", lambda_eval);
    out.computed["exact(0.5)"] = exact_sum(model, lambda_eval);
    out.details["scans"] = ctx.scans_json();
    out.details["principal_min"] = to_json(pmin);
    out.details["verdict"] = verdict_json(ctx, orders(pmin, 2, 4));
    out.details["diagnostics"] = diagnostics_json(ctx, pmin);

    const auto grid = figure_grid(model, o);
    std::optional<ExtremumSequence> fixed;
    try {
        const auto fp = detect_fixed_point(ctx.scans, ctx.config.p_min, ctx.config.p_max);
        put_chain(out.computed, ctx, fp.branch, "p0", "kind0", "S0", lambda_eval);
        out.computed["p0_limit"] = fp.limit_estimate;
        out.details["fixed_point"] = to_json(fp);
        fixed = as_sequence(fp.branch, SelectionRule::fixed_point_branch);
    } catch (const SearchError& e) {
        out.details["fixed_point"] = {{"error", e.what()}};
    }

    out.figures["fig1a"] = with_exact(partial_sum_curves(ctx.series, {2, 3, 4, 5}, grid), model);
    out.figures["fig1b"] = with_exact(chain_curves(ctx.series, orders(pmin, 2, 4), grid, ctx.source), model);
    if (fixed) {
        out.figures["fig1c"] =
            with_exact(chain_curves(ctx.series, orders(*fixed, 3, 5), grid, ctx.source, "S0_"), model);
    }
    return out;
}

SectionResult sec32(const ReproduceOptions& o) {
    constexpr auto model = BuiltinModel::geometric;
    constexpr double lambda_eval = 0.8;
    Context ctx(builtin_series(model, 7), 1.0, 7, o);
    SectionResult out;
    out.computed = json::object();
    const auto pmin = ctx.select(SelectionRule::principal_min);
    put_chain(out.computed, ctx, pmin.available(), "p", "kind", "S", lambda_eval);
    out.computed["exact(0.8)"] = exact_sum(model, lambda_eval);
    const auto verdict = verdict_json(ctx, orders(pmin, 2, 4));
    if (verdict.contains("direction")) {
        out.computed["verdict"] = verdict["direction"];
        out.computed["verdict_monotone"] = verdict["monotone"];
    }
    out.details["scans"] = ctx.scans_json();
    out.details["principal_min"] = to_json(pmin);
    out.details["verdict"] = verdict;
    out.details["diagnostics"] = diagnostics_json(ctx, pmin);

    const auto grid = figure_grid(model, o);
    out.figures["fig2a"] = with_exact(partial_sum_curves(ctx.series, {2, 3, 4}, grid), model);
    out.figures["fig2b"] = with_exact(chain_curves(ctx.series, orders(pmin, 2, 4), grid, ctx.source), model);
    return out;
}

SectionResult sec33(const ReproduceOptions& o) {
    constexpr auto model = BuiltinModel::pv_model;
    Context ctx(builtin_series(model, 7), 1.0, 7, o);
    SectionResult out;
    out.computed = json::object();
    const auto pmin = ctx.select(SelectionRule::principal_min);
    put_chain(out.computed, ctx, pmin.available(), "p", "kind", "S", std::nullopt);

    json splits = json::array();
    double identity = 0.0;
    for (double l : {0.5, 1.0, 2.0, 5.0, 10.0}) {
        const auto s = pv_split(l);
        splits.push_back(to_json(s));
        identity = std::max(identity, std::abs(s.s_pert - s.s_np - s.s_exact));
    }
    out.computed["pv_identity_residual"] = identity;
    if (const auto* r5 = pmin.at(5)) {
        for (double l : {5.0, 10.0}) {
            const auto s = pv_split(l);
            const double S5 = ctx.curve(5, l, r5->p_star);
            out.computed[key_at("S", 5, l)] = S5;
            out.computed["s_exact(" + num(l) + ")"] = s.s_exact;
            out.computed["s_np(" + num(l) + ")"] = s.s_np;
            out.computed["S_5-s_np(" + num(l) + ")"] = S5 - s.s_np;
        }
    }
    out.details["scans"] = ctx.scans_json();
    out.details["principal_min"] = to_json(pmin);
    out.details["pv_splits"] = splits;
    out.details["verdict"] = verdict_json(ctx, orders(pmin, 2, 5));
    out.details["diagnostics"] = diagnostics_json(ctx, pmin);

    const auto grid = figure_grid(model, o);
    std::vector<PVSplit> s;
    for (double l : grid) s.push_back(pv_split(l));
    auto column = [&](auto member) {
        std::vector<double> v;
        for (const auto& x : s) v.push_back(x.*member);
        return v;
    };
    auto a = chain_curves(ctx.series, orders(pmin, 2, 5), grid, ctx.source);
    a.add("s_pert", column(&PVSplit::s_pert));
    out.figures["fig3a"] = std::move(a);
    CurveSet b;
    b.lambdas = grid;
    b.add("s_exact", column(&PVSplit::s_exact));
    if (const auto* r5 = pmin.at(5)) {
        std::vector<double> S5, diff;
        for (std::size_t j = 0; j < grid.size(); ++j) {
            S5.push_back(ctx.curve(5, grid[j], r5->p_star));
            diff.push_back(S5.back() - s[j].s_np);
        }
        b.add("S_5", S5);
        b.add("S_5-s_np", diff);
    }
    out.figures["fig3b"] = std::move(b);
    return out;
}

SectionResult sec34(const ReproduceOptions& o) {
    constexpr auto model = BuiltinModel::euler_heisenberg;
    constexpr double lambda0 = 10.0;
    Context ctx(builtin_series(model, 7), lambda0, 7, o);
    SectionResult out;
    out.computed = json::object();
    const auto pmin = ctx.select(SelectionRule::principal_min);
    put_chain(out.computed, ctx, pmin.available(), "p", "kind", "S", lambda0);

    std::vector<ExtremumRecord> globals;
    for (const auto& [N, recs] : ctx.scans) {
        for (const auto& r : recs) {
            if (r.kind == ExtremumKind::global_min) globals.push_back(r);
        }
    }
    std::string labels;
    for (std::size_t k = 0; k < globals.size(); ++k) {
        out.computed[key("p_gmin", static_cast<int>(k) + 1)] = globals[k].p_star;
        out.computed[key_at("S_gmin", static_cast<int>(k) + 1, lambda0)] = globals[k].S_value;
        labels += (k ? "," : "") + std::to_string(globals[k].N);
    }
    out.computed["global_min_count"] = globals.size();
    out.computed["global_min_orders"] = labels;
    out.computed["exact(10)"] = exact_sum(model, lambda0);
    const auto verdict = verdict_json(ctx, orders(pmin, 2, 7));
    if (verdict.contains("direction")) {
        out.computed["verdict"] = verdict["direction"];
        out.computed["verdict_has_caveat"] = !verdict["caveats"].empty();
    }
    out.details["scans"] = ctx.scans_json();
    out.details["principal_min"] = to_json(pmin);
    out.details["verdict"] = verdict;
    out.details["diagnostics"] = diagnostics_json(ctx, pmin);

    const auto grid = figure_grid(model, o);
    out.figures["fig4"] = with_exact(chain_curves(ctx.series, orders(pmin, 2, 7), grid, ctx.source), model);
    return out;
}

SectionResult sec35(const ReproduceOptions& o) {
    constexpr auto model = BuiltinModel::beta_polymer;
    const int top = *model_info(model).max_order;
    Context ctx(builtin_series(model, top), 1.0, top, o);
    Context aux(auxiliary_series(ctx.series), 1.0, top - 1, o);
    SectionResult out;
    out.computed = json::object();
    const auto pmin = ctx.select(SelectionRule::principal_min);
    const auto bar = ctx.select(SelectionRule::bar_branch);
    const auto pmax = aux.select(SelectionRule::principal_max);
    put_chain(out.computed, ctx, pmin.available(), "p", "kind", "S", std::nullopt);
    put_chain(out.computed, ctx, bar.available(), "pbar", "kindbar", "Sbar", std::nullopt);
    put_chain(out.computed, aux, pmax.available(), "paux", "kindaux", "Saux", std::nullopt);

    json zeros = json::object();
    if (const auto* r = pmax.at(top - 1)) {
        try {
            const auto z = zero_and_slope([&](double l) { return aux.curve(r->N, l, r->p_star); }, 1.0, 2.0);
            out.computed["lambda_star"] = z.lambda_star;
            out.computed["omega"] = z.omega;
        } catch (const SearchError& e) {
            zeros["aux"] = e.what();
        }
    }
    if (const auto* r = bar.at(top)) {
        try {
            const auto z = zero_and_slope([&](double l) { return ctx.curve(r->N, l, r->p_star); }, 1.0, 2.0);
            out.computed[key("lambda_bar", top)] = z.lambda_star;
            out.computed[key("omega_bar", top)] = z.omega;
        } catch (const SearchError& e) {
            zeros["bar"] = e.what();
        }
    }
    out.details["scans"] = ctx.scans_json();
    out.details["auxiliary_scans"] = aux.scans_json();
    out.details["principal_min"] = to_json(pmin);
    out.details["bar_branch"] = to_json(bar);
    out.details["auxiliary_principal_max"] = to_json(pmax);
    out.details["verdict"] = verdict_json(ctx, pmin);
    out.details["bar_verdict"] = verdict_json(ctx, bar);
    out.details["auxiliary_verdict"] = verdict_json(aux, pmax);
    out.details["diagnostics"] = diagnostics_json(ctx, pmin);
    out.details["auxiliary_diagnostics"] = diagnostics_json(aux, pmax);
    out.details["bracket"] = {1.0, 2.0};
    if (!zeros.empty()) out.details["zero_errors"] = zeros;

    const auto grid = figure_grid(model, o);
    out.figures["fig5a"] = chain_curves(ctx.series, pmin, grid, ctx.source);
    out.figures["fig5b"] = chain_curves(ctx.series, bar, grid, ctx.source, "Sbar_");
    out.figures["fig5c"] = chain_curves(aux.series, pmax, grid, aux.source, "lambdaSaux_");
    out.figures["fig5d"] = chain_curves(aux.series, orders(pmax, top - 1, top - 1),
                                        linear_grid(1.37, 1.47, o.figure_points + 1), aux.source,
                                        "lambdaSaux_");
    return out;
}

bool equal_values(const json& a, const json& b) {
    if (a.is_number() && b.is_number()) return a.get<double>() == b.get<double>();
    return a == b;
}

}  // namespace

Manifest parse_manifest(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("manifest: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("rows") || !doc["rows"].is_array()) {
        throw ParseError("manifest: missing 'rows' array");
    }
    Manifest m;
    for (const auto& r : doc["rows"]) {
        try {
            ManifestRow row;
            row.section = r.at("section").get<std::string>();
            row.quantity = r.at("quantity").get<std::string>();
            row.label = r.value("label", row.quantity);
            row.mode = parse_mode(r.at("mode").get<std::string>());
            row.expected = r.at("expected");
            row.tolerance = r.value("tolerance", 0.0);
            if (row.tolerance < 0.0) throw ParseError("manifest: negative tolerance for " + row.quantity);
            m.rows.push_back(std::move(row));
        } catch (const json::exception& e) {
            throw ParseError(std::string("manifest row: ") + e.what());
        }
    }
    return m;
}

const std::string& embedded_manifest() {
    static const std::string text = detail::kManifestText;
    return text;
}

Manifest load_manifest(const std::optional<std::string>& path) {
    if (!path) return parse_manifest(embedded_manifest());
    std::ifstream in(*path);
    if (!in) throw ParseError("cannot read manifest " + *path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_manifest(ss.str());
}

const std::vector<std::string>& section_ids() {
    static const std::vector<std::string> ids{"sec31", "sec32", "sec33", "sec34", "sec35"};
    return ids;
}

SectionResult run_section(std::string_view id, const ReproduceOptions& options) {
    SectionResult out;
    if (id == "sec31") out = sec31(options);
    else if (id == "sec32") out = sec32(options);
    else if (id == "sec33") out = sec33(options);
    else if (id == "sec34") out = sec34(options);
    else if (id == "sec35") out = sec35(options);
    else throw DomainError("unknown section '" + std::string(id) + "'");
    out.id = std::string(id);
    return out;
}

RowOutcome compare_row(const ManifestRow& row, const json& computed) {
    RowOutcome out{row, computed, false};
    if (row.mode == ToleranceMode::report) {
        out.pass = true;
        return out;
    }
    if (computed.is_null()) return out;
    switch (row.mode) {
        case ToleranceMode::equals:
            out.pass = equal_values(computed, row.expected);
            break;
        case ToleranceMode::absolute:
        case ToleranceMode::relative:
        case ToleranceMode::at_most: {
            if (!computed.is_number() || !row.expected.is_number()) break;
            const double c = computed.get<double>();
            const double e = row.expected.get<double>();
            if (row.mode == ToleranceMode::at_most) {
                out.pass = c <= e;
            } else {
                const double tol = row.mode == ToleranceMode::relative ? row.tolerance * std::abs(e) : row.tolerance;
                out.pass = std::abs(c - e) <= tol;
            }
            break;
        }
        case ToleranceMode::report:
            break;
    }
    return out;
}

ReproduceResult reproduce(std::string_view example_id, const Manifest& manifest, const ReproduceOptions& options) {
    std::vector<std::string> ids;
    if (example_id == "all") {
        ids = section_ids();
    } else if (std::find(section_ids().begin(), section_ids().end(), example_id) != section_ids().end()) {
        ids.emplace_back(example_id);
    } else {
        throw DomainError("unknown example id '" + std::string(example_id) + "'");
    }

    ReproduceResult out;
    out.sections.resize(ids.size());
    vbr::detail::parallel_for(ids.size(), options.threads,
                         [&](std::size_t i) { out.sections[i] = run_section(ids[i], options); });

    out.all_pass = true;
    json sections = json::object();
    json failing = json::array();
    for (const auto& sec : out.sections) {
        json rows = json::array();
        for (const auto& row : manifest.rows) {
            if (row.section != sec.id) continue;
            const json computed = sec.computed.contains(row.quantity) ? sec.computed[row.quantity] : json(nullptr);
            auto outcome = compare_row(row, computed);
            rows.push_back({{"quantity", row.quantity},
                            {"label", row.label},
                            {"mode", std::string(mode_name(row.mode))},
                            {"expected", row.expected},
                            {"tolerance", row.tolerance},
                            {"computed", computed},
                            {"pass", outcome.pass}});
            if (!outcome.pass) {
                out.all_pass = false;
                failing.push_back(sec.id + ":" + row.quantity);
            }
            out.rows.push_back(std::move(outcome));
        }
        json figures = json::object();
        for (const auto& [name, set] : sec.figures) figures[name] = {{"file", name + ".csv"}, {"columns", set.names}};
        sections[sec.id] = {{"computed", sec.computed}, {"details", sec.details}, {"rows", rows}, {"figures", figures}};
    }
    ScanConfig scan;
    scan.grid_points_per_decade = options.grid_points_per_decade;
    out.summary = {{"provenance", provenance({{"command", "reproduce"},
                                              {"example", std::string(example_id)},
                                              {"scan", to_json(scan)},
                                              {"figure_points", options.figure_points}})},
                   {"sections", sections},
                   {"pass", out.all_pass},
                   {"failing_rows", failing}};
    return out;
}

std::string format_table(const std::vector<RowOutcome>& rows) {
    std::string out;
    char line[256];
    std::snprintf(line, sizeof line, "%-6s %-22s %-4s %14s %14s %10s  %s\n", "sec", "quantity", "mode", "expected",
                  "computed", "tolerance", "result");
    out += line;
    auto text = [](const json& j) {
        if (j.is_null()) return std::string("-");
        if (j.is_number()) {
            char b[32];
            std::snprintf(b, sizeof b, "%.6g", j.get<double>());
            return std::string(b);
        }
        if (j.is_string()) return j.get<std::string>();
        return j.dump();
    };
    for (const auto& r : rows) {
        const char* result = r.row.mode == ToleranceMode::report ? "info" : (r.pass ? "PASS" : "FAIL");
        std::snprintf(line, sizeof line, "%-6s %-22s %-4s %14s %14s %10.3g  %s\n", r.row.section.c_str(),
                      r.row.quantity.c_str(), std::string(mode_name(r.row.mode)).c_str(), text(r.row.expected).c_str(),
                      text(r.computed).c_str(), r.row.tolerance, result);
        out += line;
    }
    return out;
}

}  // namespace vbr::app
