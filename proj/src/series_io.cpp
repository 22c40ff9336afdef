#include "vbr/error.hpp"
#include "vbr/series.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace vbr {
namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

double parse_number(const std::string& token, std::size_t index) {
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (token.empty() || end != token.c_str() + token.size()) {
        throw ParseError("coefficients[" + std::to_string(index) + "]: cannot parse '" + token + "'");
    }
    if (!std::isfinite(v)) {
        throw ParseError("coefficients[" + std::to_string(index) + "] is not finite");
    }
    return v;
}

CoefficientSeries load_json(std::istream& in, std::string default_name) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("document: expected a JSON object");

    std::string name = std::move(default_name);
    if (doc.contains("name")) {
        if (!doc["name"].is_string()) throw ParseError("name: expected a string");
        name = doc["name"].get<std::string>();
    }
    double prefactor = 1.0;
    if (doc.contains("prefactor")) {
        if (!doc["prefactor"].is_number()) throw ParseError("prefactor: expected a number");
        prefactor = doc["prefactor"].get<double>();
    }
    if (!doc.contains("coefficients")) throw ParseError("coefficients: missing");
    const auto& list = doc["coefficients"];
    if (!list.is_array()) throw ParseError("coefficients: expected an array");
    if (list.empty()) throw ParseError("empty coefficient list");

    std::vector<double> f;
    f.reserve(list.size());
    for (std::size_t i = 0; i < list.size(); ++i) {
        if (!list[i].is_number()) {
            throw ParseError("coefficients[" + std::to_string(i) + "]: expected a number");
        }
        f.push_back(list[i].get<double>());
    }
    return CoefficientSeries(std::move(name), std::move(f), prefactor);
}

CoefficientSeries load_csv(std::istream& in, std::string default_name) {
    std::string name = std::move(default_name);
    double prefactor = 1.0;
    std::vector<double> f;
    bool have_row = false;

    std::string line;
    while (std::getline(in, line)) {
        const std::string body = trim(line);
        if (body.empty()) continue;
        if (body.front() == '#') {
            // '# key: value' metadata; anything else is a comment.
            const std::string meta = trim(std::string_view(body).substr(1));
            const auto colon = meta.find(':');
            if (colon == std::string::npos) continue;
            const std::string key = trim(std::string_view(meta).substr(0, colon));
            const std::string value = trim(std::string_view(meta).substr(colon + 1));
            if (key == "name") {
                name = value;
            } else if (key == "prefactor") {
                char* end = nullptr;
                prefactor = std::strtod(value.c_str(), &end);
                if (value.empty() || end != value.c_str() + value.size()) {
                    throw ParseError("prefactor: cannot parse '" + value + "'");
                }
            }
            continue;
        }
        if (have_row) throw ParseError("coefficients: expected a single CSV row");
        have_row = true;
        std::stringstream row(body);
        std::string cell;
        while (std::getline(row, cell, ',')) {
            f.push_back(parse_number(trim(cell), f.size()));
        }
    }
    if (f.empty()) throw ParseError("empty coefficient list");
    return CoefficientSeries(std::move(name), std::move(f), prefactor);
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

CoefficientSeries load_series(std::istream& in, SeriesFormat format, std::string default_name) {
    return format == SeriesFormat::json ? load_json(in, std::move(default_name))
                                        : load_csv(in, std::move(default_name));
}

CoefficientSeries load_series_file(const std::string& path) {
    SeriesFormat format;
    if (path.ends_with(".json")) {
        format = SeriesFormat::json;
    } else if (path.ends_with(".csv")) {
        format = SeriesFormat::csv;
    } else {
        throw ParseError(path + ": unknown series format (expected .json or .csv)");
    }
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open");
    auto stem = path.substr(path.find_last_of('/') + 1);
    stem = stem.substr(0, stem.find_last_of('.'));
    return load_series(in, format, stem);
}

std::string to_json(const CoefficientSeries& series) {
    nlohmann::json doc;
    doc["name"] = series.name();
    doc["prefactor"] = series.prefactor();
    doc["coefficients"] = std::vector<double>(series.coefficients().begin(),
                                              series.coefficients().end());
    return doc.dump(2);
}

std::string to_csv(const CoefficientSeries& series) {
    std::string out = "# name: " + series.name() + "\n";
    out += "# prefactor: " + format_double(series.prefactor()) + "\n";
    for (int n = 0; n <= series.order(); ++n) {
        if (n) out += ',';
        out += format_double(series.coefficients()[n]);
    }
    out += '\n';
    return out;
}

}  // namespace vbr
