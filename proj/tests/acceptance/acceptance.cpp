// One line per acceptance criterion. Criteria listed in kKnownFailures are
// expected to fail and do not change the exit status unless --strict is given;
// any other failure, or a known failure that starts passing, is reported.

#include "vbr/app/reproduce.hpp"
#include "vbr/bounds.hpp"
#include "vbr/conformal.hpp"
#include "vbr/error.hpp"
#include "vbr/oracles.hpp"
#include "vbr/resum.hpp"
#include "vbr/scan.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <set>
#include <string>
#include <vector>

using namespace vbr;
using namespace vbr::app;

namespace {

const std::set<int> kKnownFailures{2};

struct Criterion {
    std::vector<std::string> failures;
    int checks = 0;

    void fail(const std::string& what) { failures.push_back(what); }

    void check(bool ok, const std::string& what) {
        ++checks;
        if (!ok) fail(what);
    }

    void abs(const std::string& name, const json& computed, double expected, double tol) {
        ++checks;
        if (!computed.is_number()) return fail(name + " missing");
        const double c = computed.get<double>();
        if (!(std::abs(c - expected) <= tol)) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "%s = %.6g, expected %.6g +- %.3g", name.c_str(), c, expected, tol);
            fail(buf);
        }
    }

    void rel(const std::string& name, const json& computed, double expected, double tol) {
        ++checks;
        if (!computed.is_number()) return fail(name + " missing");
        const double c = computed.get<double>();
        if (!(std::abs(c - expected) <= tol * std::abs(expected))) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "%s = %.6g, expected %.6g +- %.0f%%", name.c_str(), c, expected,
                          100.0 * tol);
            fail(buf);
        }
    }

    void equals(const std::string& name, const json& computed, const json& expected) {
        check(computed == expected, name + " = " + computed.dump() + ", expected " + expected.dump());
    }
};

json at(const json& obj, const std::string& key) { return obj.contains(key) ? obj[key] : json(nullptr); }

ReproduceOptions base_options() { return {}; }

Criterion prototype(const SectionResult& s) {
    Criterion c;
    const auto& q = s.computed;
    const double p[] = {2.65, 5.1, 8.4};
    const double S[] = {0.704, 0.709, 0.711};
    for (int N = 2; N <= 4; ++N) {
        const auto n = std::to_string(N);
        c.rel("p(" + n + ")", at(q, "p_" + n), p[N - 2], 0.05);
        const auto kind = at(q, "kind_" + n);
        c.check(kind == "global_min" || kind == "local_min", "p(" + n + ") is not a minimum");
        c.abs("S_" + n + "(0.5)", at(q, "S_" + n + "(0.5)"), S[N - 2], 0.005);
    }
    c.abs("exact(0.5)", at(q, "exact(0.5)"), 0.722657, 1e-5);
    const double p0[] = {1.6, 1.3, 1.15};
    const double S0[] = {0.726, 0.7219, 0.7228};
    for (int N = 3; N <= 5; ++N) {
        const auto n = std::to_string(N);
        c.rel("p0(" + n + ")", at(q, "p0_" + n), p0[N - 3], 0.10);
        c.abs("S0_" + n + "(0.5)", at(q, "S0_" + n + "(0.5)"), S0[N - 3], 0.002);
    }
    return c;
}

Criterion geometric(const SectionResult& s) {
    Criterion c;
    const auto& q = s.computed;
    const double p[] = {1.2, 2.9, 5.0};
    const double S[] = {0.492, 0.507, 0.512};
    for (int N = 2; N <= 4; ++N) {
        const auto n = std::to_string(N);
        c.rel("p(" + n + ")", at(q, "p_" + n), p[N - 2], 0.05);
        c.abs("S_" + n + "(0.8)", at(q, "S_" + n + "(0.8)"), S[N - 2], 0.005);
    }
    c.abs("exact(0.8)", at(q, "exact(0.8)"), 0.5556, 5e-5);
    c.equals("verdict", at(q, "verdict"), "lower_bound");
    c.equals("monotone", at(q, "verdict_monotone"), true);
    return c;
}

Criterion pv(const SectionResult& s) {
    Criterion c;
    const auto& q = s.computed;
    const double p[] = {2.8, 5.4, 9.0, 13.5};
    for (int N = 2; N <= 5; ++N) c.rel("p(" + std::to_string(N) + ")", at(q, "p_" + std::to_string(N)), p[N - 2], 0.05);
    c.abs("s_exact(5)", at(q, "s_exact(5)"), 0.0533, 5e-4);
    c.abs("s_exact(10)", at(q, "s_exact(10)"), 0.0219, 5e-4);
    c.abs("S_5 - s_np (5)", at(q, "S_5-s_np(5)"), 0.0457, 0.003);
    c.abs("S_5 - s_np (10)", at(q, "S_5-s_np(10)"), 0.0193, 0.003);
    c.abs("pv identity", at(q, "pv_identity_residual"), 0.0, 1e-10);
    return c;
}

Criterion euler_heisenberg(const SectionResult& s) {
    Criterion c;
    const auto& q = s.computed;
    c.equals("orders with a global minimum", at(q, "global_min_count"), 3);
    const double p[] = {0.77, 1.4, 2.25};
    const double S[] = {-5.9, -6.9, -7.3};
    for (int k = 1; k <= 3; ++k) {
        const auto n = std::to_string(k);
        c.rel("p of global minimum " + n, at(q, "p_gmin_" + n), p[k - 1], 0.10);
        c.rel("S of global minimum " + n, at(q, "S_gmin_" + n + "(10)"), S[k - 1], 0.02);
    }
    c.abs("exact(10)", at(q, "exact(10)"), -8.056, 0.01);
    c.equals("verdict", at(q, "verdict"), "upper_bound");
    c.equals("caveat", at(q, "verdict_has_caveat"), true);
    c.equals("trend", s.details["verdict"].value("trend", 0), -1);
    return c;
}

Criterion beta(const SectionResult& s) {
    Criterion c;
    const auto& q = s.computed;
    const double p[] = {1.3, 3.2, 5.6, 8.6, 12.25, 16.5};
    for (int N = 2; N <= 7; ++N) c.rel("p(" + std::to_string(N) + ")", at(q, "p_" + std::to_string(N)), p[N - 2], 0.05);
    const double bar[] = {0.18, 0.21, 0.19};
    for (int N : {3, 5, 7}) {
        c.rel("bar p(" + std::to_string(N) + ")", at(q, "pbar_" + std::to_string(N)), bar[(N - 3) / 2], 0.10);
    }
    const double aux[] = {0.6, 0.875, 0.33, 0.4, 0.2525};
    for (int N = 2; N <= 6; ++N) {
        c.rel("aux p'(" + std::to_string(N) + ")", at(q, "paux_" + std::to_string(N)), aux[N - 2], 0.10);
    }
    c.equals("aux p'(5) kind", at(q, "kindaux_5"), "inflexion");
    c.abs("lambda*", at(q, "lambda_star"), 1.4193, 0.002);
    c.abs("omega", at(q, "omega"), 0.7955, 0.01);
    c.abs("bar S_7 zero", at(q, "lambda_bar_7"), 1.425, 0.01);
    return c;
}

struct Builtin {
    CoefficientSeries series;
    BuiltinModel model;
    double lambda0;
};

std::vector<Builtin> builtins() {
    std::vector<Builtin> out;
    for (const auto& info : all_models()) {
        out.push_back({builtin_series(info.id, info.max_order.value_or(7)), info.id, info.default_lambda0});
    }
    const auto& beta = model_info(BuiltinModel::beta_polymer);
    out.push_back({auxiliary_series(builtin_series(beta.id, *beta.max_order)), beta.id, beta.default_lambda0});
    return out;
}

Criterion properties() {
    Criterion c;
    char buf[200];

    for (double p : {0.1, 1.0, 10.0, 100.0}) {
        double worst = 0.0;
        for (double z = 1e-3; z < 1e3; z *= 1.37) {
            worst = std::max(worst, std::abs(conformal_z(conformal_w(z, p), p) - z) / z);
        }
        for (double w = 0.01; w < 0.99; w += 0.0137) {
            worst = std::max(worst, std::abs(conformal_w(conformal_z(w, p), p) - w) / w);
        }
        std::snprintf(buf, sizeof buf, "conformal round trip at p=%g: %.2e", p, worst);
        c.check(worst <= 1e-13, buf);
    }

    for (double lambda : {0.01, 1.0, 10.0}) {
        for (double p : {0.05, 1.0, 30.0}) {
            const auto t = compute_moments(lambda, p, 14, QuadratureSpec{});
            bool ok = t.values[0] > 0.0;
            for (std::size_t m = 1; m < t.values.size(); ++m) ok = ok && t.values[m] > 0.0 && t.values[m] < t.values[m - 1];
            std::snprintf(buf, sizeof buf, "moments not decreasing at lambda=%g p=%g", lambda, p);
            c.check(ok, buf);
        }
    }

    const auto models = builtins();
    for (const auto& b : models) {
        const auto source = MomentSource::cached();
        for (int N = 0; N <= b.series.order(); ++N) {
            for (double lambda : {0.2, 1.0, 5.0}) {
                for (double p : {0.3, 2.0, 15.0}) {
                    const auto ev = resum_eval(b.series, N, lambda, p, source);
                    double sum = 0.0;
                    for (std::size_t n = 0; n < ev.terms.size(); ++n) sum += ev.terms[n] * std::pow(p, -double(n));
                    const double scale = std::max(std::abs(ev.value), 1e-300);
                    std::snprintf(buf, sizeof buf, "decomposition %s N=%d lambda=%g p=%g", b.series.name().c_str(), N,
                                  lambda, p);
                    c.check(std::abs(sum - ev.value) <= 1e-12 * scale, buf);
                }
            }
        }
        const int top = std::min(7, b.series.order());
        for (int N = 1; N <= top; ++N) {
            for (double p : {0.5, 2.0, 7.0}) {
                bool exact = true;
                for (const auto& r : taylor_consistency(b.series, N, p)) {
                    if (r.order <= N) exact = exact && r.exact_zero;
                }
                std::snprintf(buf, sizeof buf, "taylor consistency %s N=%d p=%g", b.series.name().c_str(), N, p);
                c.check(exact, buf);
            }
        }
    }

    for (const auto& b : models) {
        const auto source = MomentSource::cached();
        ScanConfig cfg;
        cfg.lambda0 = b.lambda0;
        OrderScans scans;
        for (int N = 1; N <= b.series.order(); ++N) scans[N] = scan_extrema(b.series, N, cfg, source);
        const auto& name = b.series.name();

        for (const auto& [N, recs] : scans) {
            for (const auto& r : recs) {
                if (r.kind == ExtremumKind::inflexion &&
                    r.slope_residual > 1e-8 * std::max(std::abs(r.S_value), 1.0) / r.p_star) {
                    continue;  // merged pair, not a root of the slope
                }
                const auto terms = term_decomposition(b.series, N, cfg.lambda0, r.p_star, source);
                double weighted = 0.0;
                for (std::size_t n = 1; n < terms.size(); ++n) weighted += double(n) * terms[n] * std::pow(r.p_star, -double(n));
                const auto dl = resum_derivative(b.series, N, cfg.lambda0, r.p_star, DerivativeVariable::lambda, source);
                const double scale = std::max(std::abs(weighted), 1e-12 * std::max(std::abs(r.S_value), 1.0));
                const double residual = std::abs(cfg.lambda0 * dl.value - weighted) / scale;
                std::snprintf(buf, sizeof buf, "extremum identity %s N=%d p=%.5g: %.2e", name.c_str(), N, r.p_star,
                              residual);
                c.check(residual <= 1e-4, buf);
            }
        }

        const auto rule = b.series.is_auxiliary() ? SelectionRule::principal_max : SelectionRule::principal_min;
        const auto seq = select_principal(scans, rule);
        std::vector<double> lambdas;
        for (int j = 1; j <= 10; ++j) lambdas.push_back(cfg.lambda0 * j / 10.0);
        const auto slopes = slope_checks(b.series, seq, lambdas, source);
        for (const auto& chk : slopes.origin_checks) {
            std::snprintf(buf, sizeof buf, "%s %s N=%d: %.2e > %.2e", chk.name.c_str(), name.c_str(), chk.N,
                          chk.residual, chk.tolerance);
            c.check(!chk.applicable || chk.pass, buf);
        }
        c.check(!slopes.origin_checks.empty(), "no origin checks for " + name);

        const auto cn = cn_sequence(seq.available());
        if (cn.all_above_one) c.check(cn.strictly_decreasing, "c(N) not strictly decreasing for " + name);

        const auto diag = appendix_diagnostics(b.series, seq, cfg.lambda0, source);
        const bool sign_required = !b.series.is_auxiliary() && (b.model == BuiltinModel::prototype ||
                                                                 b.model == BuiltinModel::geometric ||
                                                                 b.model == BuiltinModel::pv_model);
        if (sign_required) c.check(diag.magic_sign_consistent, "sign of the estimated change of S fails for " + name);
        if (b.model == BuiltinModel::euler_heisenberg) {
            bool reported = false;
            for (const auto& o : diag.observations) reported = reported || o.find("disagrees in sign") != std::string::npos;
            c.check(!diag.magic_sign_consistent && reported, "sign mismatch not reported for " + name);
        }
    }
    return c;
}

bool same_scans(const json& a, const json& b, std::string& why) {
    if (a.size() != b.size()) {
        why = "different order sets";
        return false;
    }
    for (auto it = a.begin(); it != a.end(); ++it) {
        const auto& ra = it.value();
        const auto& rb = b[it.key()];
        if (ra.size() != rb.size()) {
            why = "N=" + it.key() + " record count " + std::to_string(ra.size()) + " vs " + std::to_string(rb.size());
            return false;
        }
        for (std::size_t k = 0; k < ra.size(); ++k) {
            const double pa = ra[k]["p"].get<double>();
            const double pb = rb[k]["p"].get<double>();
            if (ra[k]["kind"] != rb[k]["kind"] || std::abs(pa - pb) > 1e-6 * pa) {
                char buf[160];
                std::snprintf(buf, sizeof buf, "N=%s p %.10g (%s) vs %.10g (%s)", it.key().c_str(), pa,
                              ra[k]["kind"].get<std::string>().c_str(), pb, rb[k]["kind"].get<std::string>().c_str());
                why = buf;
                return false;
            }
        }
    }
    return true;
}

Criterion determinism(const Manifest& manifest) {
    Criterion c;
    auto opt = base_options();
    const auto first = reproduce("all", manifest, opt);
    opt.threads = 0;
    const auto second = reproduce("all", manifest, opt);
    c.check(first.summary.dump(2) == second.summary.dump(2), "reproduce all summaries differ between runs");
    for (std::size_t i = 0; i < first.sections.size(); ++i) {
        for (const auto& [name, set] : first.sections[i].figures) {
            c.check(second.sections[i].figures.count(name) && second.sections[i].figures.at(name).to_csv() == set.to_csv(),
                    name + " differs between runs");
        }
    }

    auto fine = base_options();
    fine.grid_points_per_decade = 120;
    for (const auto& sec : first.sections) {
        const auto doubled = run_section(sec.id, fine);
        for (const char* key : {"scans", "auxiliary_scans"}) {
            if (!sec.details.contains(key)) continue;
            std::string why;
            c.check(same_scans(sec.details[key], doubled.details[key], why),
                    sec.id + " " + key + " unstable under grid doubling: " + why);
        }
    }
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    const bool strict = argc > 1 && std::strcmp(argv[1], "--strict") == 0;
    struct Item {
        int id;
        const char* title;
        std::function<Criterion()> run;
    };
    const auto manifest = load_manifest(std::nullopt);
    const auto opt = base_options();
    const std::vector<Item> items{
        {1, "prototype: minima, S_N, exact sum, fixed-point branch", [&] { return prototype(run_section("sec31", opt)); }},
        {2, "geometric: minima, S_N, exact sum, lower bound", [&] { return geometric(run_section("sec32", opt)); }},
        {3, "pv model: minima, subtracted sum, S_5 - s_np, pv identity", [&] { return pv(run_section("sec33", opt)); }},
        {4, "euler-heisenberg: three global minima, S_N, oracle, upper bound",
         [&] { return euler_heisenberg(run_section("sec34", opt)); }},
        {5, "beta function: minima, bar and auxiliary branches, zero and slope",
         [&] { return beta(run_section("sec35", opt)); }},
        {6, "property suite", [] { return properties(); }},
        {7, "determinism and grid-doubling stability", [&] { return determinism(manifest); }},
    };

    int unexpected = 0;
    int failed = 0;
    for (const auto& item : items) {
        Criterion c;
        try {
            c = item.run();
        } catch (const std::exception& e) {
            c.fail(std::string("exception: ") + e.what());
        }
        const bool pass = c.failures.empty();
        std::printf("[%s] criterion %d: %s (%d checks)\n", pass ? "PASS" : "FAIL", item.id, item.title, c.checks);
        for (const auto& f : c.failures) std::printf("       %s\n", f.c_str());
        const bool known = kKnownFailures.count(item.id) > 0;
        if (!pass) ++failed;
        if (!pass && known) std::printf("       known deviation, recorded\n");
        if (pass && known) std::printf("       listed as a known deviation but now passes\n");
        if (pass == known) ++unexpected;
    }
    std::printf("%zu criteria, %d failed, %d unexpected\n", items.size(), failed, unexpected);
    if (strict) return failed == 0 ? 0 : 1;
    return unexpected == 0 ? 0 : 1;
}
