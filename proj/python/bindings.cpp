#include "vbr/app/reproduce.hpp"
#include "vbr/bounds.hpp"
#include "vbr/error.hpp"
#include "vbr/oracles.hpp"
#include "vbr/resum.hpp"
#include "vbr/scan.hpp"
#include "vbr/series.hpp"

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <sstream>

namespace py = pybind11;
using namespace vbr;

namespace {

BuiltinModel model_of(const std::string& name) {
    const auto m = parse_model(name);
    if (!m) throw DomainError("unknown builtin '" + name + "'");
    return *m;
}

py::dict record_dict(const ExtremumRecord& r) {
    py::dict d;
    d["N"] = r.N;
    d["p"] = r.p_star;
    d["S"] = r.S_value;
    d["kind"] = std::string(to_string(r.kind));
    d["curvature_sign"] = r.curvature_sign;
    d["touches_p_min"] = r.window.touches_p_min;
    d["touches_p_max"] = r.window.touches_p_max;
    return d;
}

ScanConfig make_config(double lambda0, double p_min, double p_max, int density) {
    ScanConfig c;
    c.lambda0 = lambda0;
    c.p_min = p_min;
    c.p_max = p_max;
    c.grid_points_per_decade = density;
    return c;
}

SelectionRule rule_of(const std::string& name) {
    for (auto r : {SelectionRule::principal_min, SelectionRule::principal_max, SelectionRule::bar_branch}) {
        if (to_string(r) == name) return r;
    }
    throw DomainError("unknown rule '" + name + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Variational Borel-conformal resummation";

    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<QuadratureError>(m, "QuadratureError", PyExc_ArithmeticError);
    py::register_exception<SearchError>(m, "SearchError", PyExc_RuntimeError);

    py::class_<CoefficientSeries>(m, "Series")
        .def(py::init([](std::string name, std::vector<double> coefficients, double prefactor) {
                 return CoefficientSeries(std::move(name), std::move(coefficients), prefactor);
             }),
             py::arg("name"), py::arg("coefficients"), py::arg("prefactor") = 1.0)
        .def_property_readonly("name", &CoefficientSeries::name)
        .def_property_readonly("coefficients",
                               [](const CoefficientSeries& s) {
                                   return std::vector<double>(s.coefficients().begin(), s.coefficients().end());
                               })
        .def_property_readonly("prefactor", &CoefficientSeries::prefactor)
        .def_property_readonly("order", &CoefficientSeries::order)
        .def_property_readonly("is_auxiliary", &CoefficientSeries::is_auxiliary)
        .def("to_json", [](const CoefficientSeries& s) { return to_json(s); })
        .def("to_csv", [](const CoefficientSeries& s) { return to_csv(s); })
        .def("__repr__", [](const CoefficientSeries& s) {
            return "<Series " + s.name() + " order " + std::to_string(s.order()) + ">";
        });

    m.def("builtin", [](const std::string& name, std::optional<int> max_order) {
        const auto model = model_of(name);
        return builtin_series(model, max_order.value_or(model_info(model).max_order.value_or(7)));
    }, py::arg("name"), py::arg("max_order") = py::none());
    m.def("builtin_names", [] {
        std::vector<std::string> out;
        for (const auto& info : all_models()) out.emplace_back(info.name);
        return out;
    });
    m.def("load_series", &load_series_file, py::arg("path"));
    m.def("parse_series", [](const std::string& text, const std::string& format) {
        std::istringstream in(text);
        if (format != "json" && format != "csv") throw DomainError("format must be json or csv");
        return load_series(in, format == "json" ? SeriesFormat::json : SeriesFormat::csv);
    }, py::arg("text"), py::arg("format") = "json");
    m.def("auxiliary", &auxiliary_series, py::arg("parent"));
    m.def("partial_sum", &partial_sum, py::arg("series"), py::arg("N"), py::arg("lam"));

    m.def("evaluate", [](const CoefficientSeries& s, int N, double lam, double p) {
        const auto ev = resum_eval(s, N, lam, p);
        py::dict d;
        d["value"] = ev.value;
        d["terms"] = ev.terms;
        d["curve"] = resum_curve(s, N, lam, p, MomentSource{});
        d["error_estimate"] = ev.quadrature_error_estimate;
        return d;
    }, py::arg("series"), py::arg("N"), py::arg("lam"), py::arg("p"));
    m.def("moment", [](int k, double lam, double p) { return moment(k, lam, p); }, py::arg("m"), py::arg("lam"),
          py::arg("p"));

    m.def("scan", [](const CoefficientSeries& s, int N, double lambda0, double p_min, double p_max, int density) {
        py::list out;
        for (const auto& r : scan_extrema(s, N, make_config(lambda0, p_min, p_max, density))) out.append(record_dict(r));
        return out;
    }, py::arg("series"), py::arg("N"), py::arg("lambda0") = 1.0, py::arg("p_min") = 1e-2, py::arg("p_max") = 1e3,
       py::arg("grid_points_per_decade") = 60);

    m.def("sequence", [](const CoefficientSeries& s, int N_lo, int N_hi, const std::string& rule, double lambda0) {
        const auto cfg = make_config(lambda0, 1e-2, 1e3, 60);
        const auto seq = select_principal(scan_orders(s, N_lo, N_hi, cfg), rule_of(rule));
        const auto verdict = bound_verdict(s, seq, lambda0, MomentSource::cached());
        py::dict d;
        py::list chain;
        for (const auto& e : seq.entries) chain.append(e.record ? py::object(record_dict(*e.record)) : py::none());
        d["chain"] = chain;
        d["verdict"] = std::string(to_string(verdict.direction));
        d["monotone"] = verdict.monotone;
        d["caveats"] = verdict.caveats;
        d["reason"] = verdict.reason;
        return d;
    }, py::arg("series"), py::arg("N_lo"), py::arg("N_hi"), py::arg("rule") = "principal_min",
       py::arg("lambda0") = 1.0);

    m.def("exact_sum", [](const std::string& name, double lam) { return exact_sum(model_of(name), lam); },
          py::arg("name"), py::arg("lam"));
    m.def("pv_split", [](double lam) {
        const auto s = pv_split(lam);
        py::dict d;
        d["s_pert"] = s.s_pert;
        d["s_np"] = s.s_np;
        d["s_exact"] = s.s_exact;
        return d;
    }, py::arg("lam"));
    m.def("zero_and_slope", [](const std::function<double(double)>& f, double lo, double hi) {
        const auto z = zero_and_slope(f, lo, hi);
        return py::make_tuple(z.lambda_star, z.omega);
    }, py::arg("curve"), py::arg("lo"), py::arg("hi"));

    m.def("reproduce", [](const std::string& example) {
        const auto result = app::reproduce(example, app::load_manifest(std::nullopt), {});
        return result.summary.dump();
    }, py::arg("example") = "all", "JSON summary of a reproduction run");
}
