#include "vbr/series.hpp"

#include "vbr/bernoulli.hpp"
#include "vbr/error.hpp"

#include <array>
#include <cmath>
#include <string>

namespace vbr {
namespace {

constexpr std::array<ModelInfo, 5> kModels{{
    {BuiltinModel::prototype, "prototype", 1.0, 0.0, 2.0, std::nullopt},
    {BuiltinModel::geometric, "geometric", 1.0, 0.0, 1.0, std::nullopt},
    {BuiltinModel::pv_model, "pv_model", 1.0, 0.0, 10.0, std::nullopt},
    {BuiltinModel::euler_heisenberg, "euler_heisenberg", 10.0, 0.0, 10.0, std::nullopt},
    {BuiltinModel::beta_polymer, "beta_polymer", 1.0, 0.0, 2.0, 7},
}};

// beta(lambda) of the O(0) phi^4_3 theory, including the -lambda term.
constexpr std::array<double, 8> kBetaPolymer{0.0,      -1.0,      1.0,      -0.439815,
                                             0.389923, -0.447316, 0.633855, -1.03493};

}  // namespace

const ModelInfo& model_info(BuiltinModel model) {
    for (const auto& info : kModels) {
        if (info.id == model) return info;
    }
    throw DomainError("unknown builtin model");
}

std::optional<BuiltinModel> parse_model(std::string_view name) {
    for (const auto& info : kModels) {
        if (info.name == name) return info.id;
    }
    return std::nullopt;
}

std::span<const ModelInfo> all_models() { return kModels; }

CoefficientSeries::CoefficientSeries(std::string name, std::vector<double> coefficients,
                                     double prefactor, SeriesOrigin origin)
    : name_(std::move(name)),
      coefficients_(std::move(coefficients)),
      prefactor_(prefactor),
      origin_(std::move(origin)) {
    if (coefficients_.empty()) throw ParseError("empty coefficient list");
    for (std::size_t i = 0; i < coefficients_.size(); ++i) {
        if (!std::isfinite(coefficients_[i])) {
            throw ParseError("coefficients[" + std::to_string(i) + "] is not finite");
        }
    }
    if (!std::isfinite(prefactor_) || prefactor_ == 0.0) {
        throw ParseError("prefactor must be finite and nonzero");
    }
}

double CoefficientSeries::coefficient(int n) const {
    if (n < 0 || n > order()) {
        throw DomainError("coefficient index " + std::to_string(n) + " outside 0.." +
                          std::to_string(order()));
    }
    return coefficients_[static_cast<std::size_t>(n)];
}

double CoefficientSeries::origin_value() const {
    return is_auxiliary() ? 0.0 : prefactor_ * coefficients_[0];
}

double CoefficientSeries::origin_slope() const {
    if (is_auxiliary()) return prefactor_ * coefficients_[0];
    return order() >= 1 ? prefactor_ * coefficients_[1] : 0.0;
}

CoefficientSeries CoefficientSeries::truncated(int N) const {
    if (N < 0 || N > order()) {
        throw DomainError("order " + std::to_string(N) + " outside 0.." + std::to_string(order()));
    }
    return CoefficientSeries(name_, {coefficients_.begin(), coefficients_.begin() + N + 1},
                             prefactor_, origin_);
}

CoefficientSeries builtin_series(BuiltinModel model, int max_order) {
    if (max_order < 1) throw DomainError("max_order must be >= 1");
    const auto& info = model_info(model);
    if (info.max_order && max_order > *info.max_order) {
        throw DomainError("insufficient published coefficients: " + std::string(info.name) +
                          " has orders up to " + std::to_string(*info.max_order) +
                          ", requested " + std::to_string(max_order));
    }

    std::vector<double> f(static_cast<std::size_t>(max_order) + 1);
    double prefactor = 1.0;
    double factorial = 1.0;
    switch (model) {
        case BuiltinModel::prototype:
            for (int n = 0; n <= max_order; ++n) {
                if (n > 0) factorial *= n;
                f[n] = (n % 2 == 0 ? 1.0 : -1.0) * factorial;
            }
            break;
        case BuiltinModel::geometric:
            for (int n = 0; n <= max_order; ++n) f[n] = n % 2 == 0 ? 1.0 : -1.0;
            break;
        case BuiltinModel::pv_model:
            for (int n = 0; n <= max_order; ++n) {
                if (n > 0) factorial *= n;
                const double alternating = n % 2 == 0 ? 1.0 : -1.0;
                f[n] = (alternating + std::pow(5.0, -(n + 1))) * factorial / 6.0;
            }
            break;
        case BuiltinModel::euler_heisenberg: {
            prefactor = 1600.0;
            const auto bernoulli = bernoulli_numbers(2 * max_order + 2);
            f[0] = 0.0;
            for (int n = 1; n <= max_order; ++n) {
                const Rational scale = Rational(boost::multiprecision::pow(
                                           boost::multiprecision::cpp_int(4), n - 1)) /
                                       Rational(2 * n * (2 * n + 1) * (2 * n + 2));
                f[n] = static_cast<double>(scale * bernoulli.at(2 * n + 2));
            }
            break;
        }
        case BuiltinModel::beta_polymer:
            for (int n = 0; n <= max_order; ++n) f[n] = kBetaPolymer[n];
            break;
    }

    SeriesOrigin origin{SeriesOriginKind::builtin, model, {}};
    return CoefficientSeries(std::string(info.name), std::move(f), prefactor, origin);
}

CoefficientSeries auxiliary_series(const CoefficientSeries& parent) {
    if (parent.coefficients()[0] != 0.0) {
        throw DomainError("auxiliary series undefined: parent f_0 = " +
                          std::to_string(parent.coefficients()[0]) + " is nonzero");
    }
    if (parent.order() < 1) {
        throw DomainError("auxiliary series undefined: parent has no f_1");
    }
    auto f = parent.coefficients().subspan(1);
    SeriesOrigin origin{SeriesOriginKind::auxiliary, std::nullopt, parent.name()};
    return CoefficientSeries(parent.name() + "_aux", {f.begin(), f.end()}, parent.prefactor(),
                             origin);
}

double partial_sum(const CoefficientSeries& series, int N, double lambda) {
    if (N < 0 || N > series.order()) {
        throw DomainError("partial sum order " + std::to_string(N) + " outside 0.." +
                          std::to_string(series.order()));
    }
    // Horner
    double acc = 0.0;
    for (int n = N; n >= 0; --n) acc = acc * lambda + series.coefficients()[n];
    return series.prefactor() * acc;
}

}  // namespace vbr
