#include "vbr/app/commands.hpp"

#include "vbr/app/report.hpp"
#include "vbr/app/reproduce.hpp"
#include "vbr/error.hpp"
#include "vbr/oracles.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <ostream>

namespace vbr::app {
namespace {

namespace fs = std::filesystem;

struct Loaded {
    CoefficientSeries series;
    std::optional<BuiltinModel> model;
};

Loaded load(const RunConfig& c) {
    std::optional<BuiltinModel> model;
    std::optional<CoefficientSeries> series;
    if (c.builtin) {
        model = parse_model(*c.builtin);
        if (!model) throw ParseError("unknown builtin '" + *c.builtin + "'");
        const auto& info = model_info(*model);
        series = builtin_series(*model, info.max_order.value_or(7));
    } else {
        series = load_series_file(*c.file);
    }
    if (c.auxiliary) return {auxiliary_series(*series), std::nullopt};
    return {*series, model};
}

double default_lambda0(const RunConfig& c) {
    if (c.lambda0) return *c.lambda0;
    if (c.builtin) {
        if (const auto m = parse_model(*c.builtin)) return model_info(*m).default_lambda0;
    }
    return 1.0;
}

ScanConfig scan_config(const RunConfig& c, const MomentSource& source) {
    ScanConfig s;
    s.lambda0 = default_lambda0(c);
    if (c.p_min) s.p_min = *c.p_min;
    if (c.p_max) s.p_max = *c.p_max;
    s.grid_points_per_decade = c.grid_points_per_decade;
    s.quad = source.spec();
    s.threads = c.threads;
    s.validate();
    return s;
}

std::pair<int, int> order_range(const RunConfig& c, const CoefficientSeries& s) {
    auto range = c.N_range.value_or(std::pair{std::min(2, s.order()), std::min(7, s.order())});
    if (c.N && !c.N_range) range = {*c.N, *c.N};
    if (range.first < 1 || range.second > s.order() || range.first > range.second) {
        throw DomainError("order range " + std::to_string(range.first) + ".." + std::to_string(range.second) +
                          " outside 1.." + std::to_string(s.order()));
    }
    return range;
}

fs::path output_dir(const RunConfig& c) {
    if (c.out_dir) return *c.out_dir;
    if (const char* env = std::getenv("VBR_OUTPUT_DIR"); env && *env) return env;
    return "vbr_out";
}

bool wants_files(const RunConfig& c) { return c.out_dir || std::getenv("VBR_OUTPUT_DIR"); }

json config_json(const RunConfig& c) {
    static const char* names[] = {"eval", "scan", "sequence", "diagnose", "reproduce", "export"};
    json j = {{"command", names[static_cast<int>(c.command)]}};
    if (c.builtin) j["builtin"] = *c.builtin;
    if (c.file) j["file"] = *c.file;
    j["auxiliary"] = c.auxiliary;
    if (c.N) j["N"] = *c.N;
    if (c.N_range) j["N_range"] = {c.N_range->first, c.N_range->second};
    if (c.lambda) j["lambda"] = *c.lambda;
    if (c.p) j["p"] = *c.p;
    j["rule"] = std::string(to_string(c.rule));
    return j;
}

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

void emit(const RunConfig& c, const json& summary, const std::string& text, const std::string& file,
          std::ostream& out) {
    if (c.json_stdout) {
        out << dump(summary);
    } else {
        out << text;
    }
    if (wants_files(c)) write_file_atomic(output_dir(c) / file, dump(summary));
}

std::string record_line(const ExtremumRecord& r) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "N=%d  p=%-12.6g S=%-14.8g %-10s%s%s\n", r.N, r.p_star, r.S_value,
                  std::string(to_string(r.kind)).c_str(), r.window.touches_p_min ? "  [touches p_min]" : "",
                  r.window.touches_p_max ? "  [touches p_max]" : "");
    return buf;
}

int cmd_eval(const RunConfig& c, std::ostream& out) {
    const auto l = load(c);
    const auto ev = resum_eval(l.series, *c.N, *c.lambda, *c.p, MomentSource{});
    json summary = {{"provenance", provenance(config_json(c))}, {"series", series_json(l.series)},
                    {"evaluation", to_json(ev)}};
    std::string text = "S_" + std::to_string(ev.N) + "(lambda=" + fmt("%g", ev.lambda) + ", p=" + fmt("%g", ev.p) +
                       ") = " + fmt("%.12g", ev.value) + "\n";
    if (l.series.is_auxiliary()) {
        summary["curve"] = ev.lambda * ev.value;
        text += "lambda*S' = " + fmt("%.12g", ev.lambda * ev.value) + "\n";
    }
    emit(c, summary, text, "eval.json", out);
    return exit_code::ok;
}

int cmd_scan(const RunConfig& c, std::ostream& out) {
    const auto l = load(c);
    const auto source = MomentSource::cached();
    const auto cfg = scan_config(c, source);
    const auto records = scan_extrema(l.series, *c.N, cfg, source);
    json summary = {{"provenance", provenance(config_json(c))},
                    {"series", series_json(l.series)},
                    {"scan", to_json(cfg)},
                    {"records", to_json(records)}};
    std::string text = "scan of " + l.series.name() + " N=" + std::to_string(*c.N) + " at lambda0=" +
                       fmt("%g", cfg.lambda0) + "\n";
    if (records.empty()) text += "no solutions\n";
    for (const auto& r : records) text += record_line(r);
    emit(c, summary, text, "scan.json", out);
    return exit_code::ok;
}

struct Chain {
    Loaded loaded;
    MomentSource source;
    ScanConfig config;
    OrderScans scans;
    ExtremumSequence sequence;
    std::optional<FixedPointCandidate> fixed;
};

Chain build_chain(const RunConfig& c) {
    Chain ch{load(c), MomentSource::cached(), {}, {}, {}, std::nullopt};
    ch.config = scan_config(c, ch.source);
    const auto [lo, hi] = order_range(c, ch.loaded.series);
    for (int N = lo; N <= hi; ++N) ch.scans[N] = scan_extrema(ch.loaded.series, N, ch.config, ch.source);
    if (c.rule == SelectionRule::fixed_point_branch) {
        ch.fixed = detect_fixed_point(ch.scans, ch.config.p_min, ch.config.p_max);
        ch.sequence.rule = c.rule;
        for (const auto& r : ch.fixed->branch) ch.sequence.entries.push_back({r.N, r});
    } else {
        ch.sequence = select_principal(ch.scans, c.rule);
    }
    return ch;
}

int cmd_sequence(const RunConfig& c, std::ostream& out) {
    const auto ch = build_chain(c);
    const auto verdict = bound_verdict(ch.loaded.series, ch.sequence, ch.config.lambda0, ch.source);
    json summary = {{"provenance", provenance(config_json(c))},
                    {"series", series_json(ch.loaded.series)},
                    {"scan", to_json(ch.config)},
                    {"sequence", to_json(ch.sequence)},
                    {"verdict", to_json(verdict)}};
    if (ch.fixed) summary["fixed_point"] = to_json(*ch.fixed);
    std::string text = std::string(to_string(ch.sequence.rule)) + " chain of " + ch.loaded.series.name() + "\n";
    for (const auto& e : ch.sequence.entries) {
        text += e.record ? record_line(*e.record) : "N=" + std::to_string(e.N) + "  no solution\n";
    }
    text += "verdict: " + std::string(to_string(verdict.direction));
    if (!verdict.reason.empty()) text += " (" + verdict.reason + ")";
    text += verdict.monotone ? ", monotone\n" : "\n";
    for (const auto& cav : verdict.caveats) text += "caveat: " + cav + "\n";
    emit(c, summary, text, "sequence.json", out);
    return exit_code::ok;
}

int cmd_diagnose(const RunConfig& c, std::ostream& out) {
    const auto ch = build_chain(c);
    const auto report = appendix_diagnostics(ch.loaded.series, ch.sequence, ch.config.lambda0, ch.source);
    json summary = {{"provenance", provenance(config_json(c))},
                    {"series", series_json(ch.loaded.series)},
                    {"scan", to_json(ch.config)},
                    {"sequence", to_json(ch.sequence)},
                    {"diagnostics", to_json(report)}};
    std::string text;
    for (const auto& e : report.cn.values) {
        text += "c(" + std::to_string(e.N_from) + "->" + std::to_string(e.N_to) + ") = " + fmt("%.6g", e.c) + "\n";
    }
    if (report.cn.K_fit) text += "K = " + fmt("%.6g", *report.cn.K_fit) + "\n";
    for (const auto& d : report.delta_S) {
        text += "dS(" + std::to_string(d.N_from) + "->" + std::to_string(d.N_to) + ") measured " +
                fmt("%.4g", d.measured) + " estimated " + fmt("%.4g", d.estimated) +
                (d.sign_consistent ? "" : "  sign mismatch") + "\n";
    }
    for (const auto& id : report.identity_checks) {
        text += "identity N=" + std::to_string(id.N) + " residual " + fmt("%.3g", id.residual) +
                (id.applicable ? (id.pass ? " ok" : " FAIL") : " n/a") + "\n";
    }
    for (const auto& o : report.observations) text += "note: " + o + "\n";
    emit(c, summary, text, "diagnostics.json", out);
    return exit_code::ok;
}

std::optional<std::string> section_of(const std::string& figure) {
    static const std::pair<const char*, const char*> map[] = {
        {"fig1a", "sec31"}, {"fig1b", "sec31"}, {"fig1c", "sec31"}, {"fig2a", "sec32"},
        {"fig2b", "sec32"}, {"fig3a", "sec33"}, {"fig3b", "sec33"}, {"fig4", "sec34"},
        {"fig5a", "sec35"}, {"fig5b", "sec35"}, {"fig5c", "sec35"}, {"fig5d", "sec35"}};
    for (const auto& [f, s] : map) {
        if (figure == f) return s;
    }
    return std::nullopt;
}

int cmd_export_figures(const RunConfig& c, std::ostream& out) {
    ReproduceOptions opt;
    opt.threads = c.threads;
    opt.figure_points = c.points;
    opt.grid_points_per_decade = c.grid_points_per_decade;
    std::vector<std::string> sections;
    if (*c.figure == "all") {
        sections = section_ids();
    } else if (auto s = section_of(*c.figure)) {
        sections.push_back(*s);
    } else {
        throw ParseError("unknown figure '" + *c.figure + "'");
    }
    const auto dir = output_dir(c);
    for (const auto& id : sections) {
        const auto sec = run_section(id, opt);
        for (const auto& [name, set] : sec.figures) {
            if (*c.figure != "all" && name != *c.figure) continue;
            write_file_atomic(dir / (name + ".csv"), set.to_csv());
            out << (dir / (name + ".csv")).string() << "\n";
        }
    }
    return exit_code::ok;
}

int cmd_export(const RunConfig& c, std::ostream& out) {
    if (c.figure) return cmd_export_figures(c, out);
    const auto ch = build_chain(c);
    const double hi = c.lambda_max.value_or(ch.loaded.model ? model_info(*ch.loaded.model).lambda_max : 1.0);
    auto set = chain_curves(ch.loaded.series, ch.sequence, uniform_grid(hi, c.points), ch.source,
                            ch.loaded.series.is_auxiliary() ? "lambdaSaux_" : "S_");
    if (ch.loaded.model && *ch.loaded.model == BuiltinModel::pv_model) {
        set.add("exact", [](double l) { return pv_split(l).s_exact; });
    } else if (ch.loaded.model && exact_model(*ch.loaded.model)) {
        set.add("exact", [m = *ch.loaded.model](double l) { return exact_sum(m, l); });
    }
    const auto dir = output_dir(c);
    write_file_atomic(dir / "curves.csv", set.to_csv());
    write_file_atomic(dir / "series.csv", to_csv(ch.loaded.series));
    json summary = {{"provenance", provenance(config_json(c))},
                    {"series", series_json(ch.loaded.series)},
                    {"scan", to_json(ch.config)},
                    {"sequence", to_json(ch.sequence)},
                    {"curves", {{"file", "curves.csv"}, {"columns", set.names}}}};
    write_file_atomic(dir / "export.json", dump(summary));
    if (c.json_stdout) {
        out << dump(summary);
    } else {
        out << (dir / "curves.csv").string() << "\n" << (dir / "series.csv").string() << "\n";
    }
    return exit_code::ok;
}

int cmd_reproduce(const RunConfig& c, std::ostream& out, std::ostream& err) {
    const auto manifest = load_manifest(c.manifest);
    ReproduceOptions opt;
    opt.threads = c.threads;
    opt.figure_points = c.points;
    opt.grid_points_per_decade = c.grid_points_per_decade;
    const auto result = reproduce(c.example, manifest, opt);
    const auto dir = output_dir(c);
    for (const auto& sec : result.sections) {
        for (const auto& [name, set] : sec.figures) write_file_atomic(dir / (name + ".csv"), set.to_csv());
    }
    write_file_atomic(dir / ("reproduce_" + c.example + ".json"), dump(result.summary));
    if (c.json_stdout) {
        out << dump(result.summary);
    } else {
        out << format_table(result.rows);
    }
    if (result.all_pass) return exit_code::ok;
    err << "out-of-tolerance rows:\n";
    for (const auto& r : result.rows) {
        if (!r.pass) {
            err << "  " << r.row.section << ":" << r.row.quantity << " expected " << r.row.expected.dump()
                << " computed " << r.computed.dump() << "\n";
        }
    }
    return exit_code::acceptance;
}

std::optional<SelectionRule> parse_rule(const std::string& s) {
    for (auto r : {SelectionRule::principal_min, SelectionRule::principal_max, SelectionRule::bar_branch,
                   SelectionRule::fixed_point_branch}) {
        if (to_string(r) == s) return r;
    }
    return std::nullopt;
}

}  // namespace

std::pair<int, int> parse_order_range(const std::string& text) {
    auto to_int = [&](const std::string& s) {
        std::size_t pos = 0;
        int v = 0;
        try {
            v = std::stoi(s, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (s.empty() || pos != s.size()) throw ParseError("bad order range '" + text + "'");
        return v;
    };
    const auto dots = text.find("..");
    if (dots == std::string::npos) {
        const int n = to_int(text);
        return {n, n};
    }
    return {to_int(text.substr(0, dots)), to_int(text.substr(dots + 2))};
}

void RunConfig::validate() const {
    if (command == Command::reproduce) {
        if (example != "all" &&
            std::find(section_ids().begin(), section_ids().end(), example) == section_ids().end()) {
            throw ParseError("unknown example id '" + example + "'");
        }
        return;
    }
    if (command == Command::export_curves && figure) return;
    if (builtin.has_value() == file.has_value()) throw ParseError("give exactly one of --builtin or --file");
    if (command == Command::eval && !(N && lambda && p)) throw ParseError("eval needs --N, --lambda and --p");
    if (command == Command::scan && !N) throw ParseError("scan needs --N");
    if (N_range && N_range->first > N_range->second) throw ParseError("empty order range");
    if (points < 2) throw ParseError("--points must be at least 2");
}

int run_command(const RunConfig& config, std::ostream& out, std::ostream& err) {
    try {
        config.validate();
        switch (config.command) {
            case Command::eval: return cmd_eval(config, out);
            case Command::scan: return cmd_scan(config, out);
            case Command::sequence: return cmd_sequence(config, out);
            case Command::diagnose: return cmd_diagnose(config, out);
            case Command::export_curves: return cmd_export(config, out);
            case Command::reproduce: return cmd_reproduce(config, out, err);
        }
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::config;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::config;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::config;
    } catch (const Error& e) {
        err << "numerical failure: " << e.what() << "\n";
        return exit_code::numerical;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << "\n";
        return exit_code::numerical;
    }
    return exit_code::config;
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Variational Borel-conformal resummation of divergent series", "vbr"};
    app.set_version_flag("--version", std::string(VBR_VERSION));
    app.require_subcommand(1);

    RunConfig c;
    std::string range;
    std::string rule = "principal_min";

    auto source_opts = [&](CLI::App* sub) {
        sub->add_option("--builtin", c.builtin, "prototype, geometric, pv_model, euler_heisenberg, beta_polymer");
        sub->add_option("--file", c.file, "coefficient file (.json or .csv)");
        sub->add_flag("--aux", c.auxiliary, "use the series f'_n = f_{n+1}");
        sub->add_option("--out", c.out_dir, "output directory (default $VBR_OUTPUT_DIR or ./vbr_out)");
        sub->add_flag("--json", c.json_stdout, "print the JSON summary instead of text");
    };
    auto scan_opts = [&](CLI::App* sub) {
        sub->add_option("--lambda0", c.lambda0, "coupling at which p is scanned");
        sub->add_option("--p-min", c.p_min, "lower end of the scan window");
        sub->add_option("--p-max", c.p_max, "upper end of the scan window");
        sub->add_option("--grid-density", c.grid_points_per_decade, "scan points per decade of p");
        sub->add_option("--threads", c.threads, "worker threads (0: hardware count)");
    };
    auto chain_opts = [&](CLI::App* sub) {
        sub->add_option("--N-range", range, "orders a..b");
        sub->add_option("--N", c.N, "single order");
        sub->add_option("--rule", rule, "principal_min, principal_max, bar_branch, fixed_point_branch");
    };

    auto* eval = app.add_subcommand("eval", "evaluate S_N(lambda, p)");
    source_opts(eval);
    eval->add_option("--N", c.N, "order")->required();
    eval->add_option("--lambda", c.lambda, "coupling")->required();
    eval->add_option("--p", c.p, "map parameter")->required();

    auto* scan = app.add_subcommand("scan", "extrema of S_N in p");
    source_opts(scan);
    scan_opts(scan);
    scan->add_option("--N", c.N, "order")->required();

    auto* sequence = app.add_subcommand("sequence", "p(N) chain and bound verdict");
    source_opts(sequence);
    scan_opts(sequence);
    chain_opts(sequence);

    auto* diagnose = app.add_subcommand("diagnose", "convergence diagnostics of a chain");
    source_opts(diagnose);
    scan_opts(diagnose);
    chain_opts(diagnose);

    auto* exp = app.add_subcommand("export", "CSV curves of a chain or a figure dataset");
    source_opts(exp);
    scan_opts(exp);
    chain_opts(exp);
    exp->add_option("--lambda-max", c.lambda_max, "upper end of the lambda grid");
    exp->add_option("--points", c.points, "lambda grid points");
    exp->add_option("--figure", c.figure, "fig1a .. fig5d, or all");

    auto* rep = app.add_subcommand("reproduce", "reproduce the worked examples against the manifest");
    rep->add_option("example", c.example, "sec31 .. sec35 or all");
    rep->add_option("--manifest", c.manifest, "tolerance manifest (default: built-in copy)");
    rep->add_option("--out", c.out_dir, "output directory (default $VBR_OUTPUT_DIR or ./vbr_out)");
    rep->add_option("--threads", c.threads, "sections run concurrently (0: hardware count)");
    rep->add_option("--points", c.points, "points per figure curve");
    rep->add_flag("--json", c.json_stdout, "print the JSON summary instead of the table");

    try {
        app.parse(argc, argv);
        if (!range.empty()) c.N_range = parse_order_range(range);
        const auto r = parse_rule(rule);
        if (!r) throw ParseError("unknown rule '" + rule + "'");
        c.rule = *r;
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_code::ok;
    } catch (const CLI::CallForVersion&) {
        out << VBR_VERSION << "\n";
        return exit_code::ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::config;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::config;
    }

    if (app.got_subcommand(eval)) c.command = Command::eval;
    else if (app.got_subcommand(scan)) c.command = Command::scan;
    else if (app.got_subcommand(sequence)) c.command = Command::sequence;
    else if (app.got_subcommand(diagnose)) c.command = Command::diagnose;
    else if (app.got_subcommand(exp)) c.command = Command::export_curves;
    else c.command = Command::reproduce;
    return run_command(c, out, err);
}

}  // namespace vbr::app
