#include "vbr/oracles.hpp"

#include "vbr/bernoulli.hpp"
#include "vbr/error.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace vbr {
namespace {

constexpr double kSchwingerSplit = 0.5;
constexpr int kSchwingerTerms = 24;

void require_positive(double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be > 0");
}

/// c_k with coth s - 1/s - s/3 = sum_{k>=2} c_k s^{2k-1}.
const std::vector<double>& coth_coefficients() {
    static const std::vector<double> c = [] {
        const auto B = bernoulli_numbers(2 * kSchwingerTerms);
        std::vector<double> out(kSchwingerTerms + 1, 0.0);
        Rational factorial = 1;
        Rational pow4 = 1;
        for (int k = 1; k <= kSchwingerTerms; ++k) {
            factorial *= (2 * k - 1) * (2 * k);
            pow4 *= 4;
            if (k >= 2) out[k] = static_cast<double>(Rational(pow4 * B.at(2 * k) / factorial));
        }
        return out;
    }();
    return c;
}

template <class F>
double kronrod(F f, double a, double b, double tol) {
    double err = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, tol, &err);
    if (!(err <= 1e3 * tol * std::max(std::abs(v), 1e-300)) && err > 1e-15) {
        throw QuadratureError("oracle quadrature did not converge", err);
    }
    return v;
}

double prototype_sum(double lambda) {
    boost::math::quadrature::exp_sinh<double> rule;
    double err = 0.0;
    const double v = rule.integrate([lambda](double t) { return std::exp(-t) / (1.0 + lambda * t); },
                                    0.0, std::numeric_limits<double>::infinity(), 1e-14, &err);
    if (!(err <= 1e-12 * v)) throw QuadratureError("prototype Borel integral did not converge", err);
    return v;
}

double euler_heisenberg_sum(double lambda) {
    const double cut = 16.0 * std::log(10.0) * std::sqrt(lambda);
    auto f = [lambda](double s) { return schwinger_integrand(s, lambda); };
    double total = kronrod(f, 0.0, kSchwingerSplit, 1e-14);
    if (cut > kSchwingerSplit) total += kronrod(f, kSchwingerSplit, cut, 1e-14);
    return 100.0 * total;
}

}  // namespace

std::optional<ExactModel> exact_model(BuiltinModel model) {
    switch (model) {
        case BuiltinModel::prototype:
            return ExactModel{model, "1/(1+z)", false, true, std::nullopt};
        case BuiltinModel::geometric:
            return ExactModel{model, "exp(-z)", true, true, std::nullopt};
        case BuiltinModel::pv_model:
            return ExactModel{model, "1/((1+z)(5-z))", false, false, 5.0};
        case BuiltinModel::euler_heisenberg:
            return ExactModel{model, "proper-time integral", false, true, std::nullopt};
        case BuiltinModel::beta_polymer:
            return std::nullopt;
    }
    return std::nullopt;
}

double schwinger_integrand(double s, double lambda) {
    require_positive(lambda);
    if (!(s > 0.0)) throw DomainError("proper time s must be > 0");
    double g;
    if (s < kSchwingerSplit) {
        const auto& c = coth_coefficients();
        const double s2 = s * s;
        // sum_k c_k s^{2k-3}, k >= 2
        double acc = 0.0;
        for (int k = kSchwingerTerms; k >= 2; --k) acc = acc * s2 + c[k];
        g = acc * s;
    } else {
        g = (1.0 / std::tanh(s) - 1.0 / s - s / 3.0) / (s * s);
    }
    return g * std::exp(-s / std::sqrt(lambda));
}

double exact_sum(BuiltinModel model, double lambda) {
    require_positive(lambda);
    switch (model) {
        case BuiltinModel::prototype: return prototype_sum(lambda);
        case BuiltinModel::geometric: return 1.0 / (1.0 + lambda);
        case BuiltinModel::euler_heisenberg: return euler_heisenberg_sum(lambda);
        case BuiltinModel::pv_model:
            throw DomainError("pv_model is not Borel summable; use pv_split");
        case BuiltinModel::beta_polymer:
            throw DomainError("no exact sum is known for beta_polymer");
    }
    throw DomainError("unknown model");
}

PVSplit pv_split(double lambda) {
    require_positive(lambda);
    constexpr double q = 5.0;
    const double e5 = std::exp(-q / lambda);
    // (e^{-z/lambda} - e^{-5/lambda}) / ((1+z)(5-z)) = e^{-5/lambda} h(z-5) / (1+z)
    auto integrand = [lambda, e5](double z) {
        const double x = z - q;
        const double h = x == 0.0 ? 1.0 / lambda : std::expm1(-x / lambda) / (-x);
        return e5 * h / (1.0 + z);
    };
    // Beyond F the term e^{-z/lambda} is below e^{-40} of e^{-5/lambda} and
    // what remains, e^{-5/lambda}/((1+z)(z-5)), integrates in closed form.
    const double far = q + 40.0 * lambda;
    double integral = kronrod(integrand, 0.0, q, 1e-14) + kronrod(integrand, q, far, 1e-14);
    integral += e5 * std::log1p((1.0 + q) / (far - q)) / (1.0 + q);

    PVSplit out;
    out.lambda = lambda;
    out.s_exact = integral / lambda;
    out.s_np = std::log(q) * e5 / (6.0 * lambda);
    out.s_pert = out.s_exact + out.s_np;
    return out;
}

ZeroSlopeResult zero_and_slope(const std::function<double(double)>& curve, double lo, double hi,
                               double tol) {
    if (!(lo < hi)) throw DomainError("bracket needs lo < hi");
    const double flo = curve(lo), fhi = curve(hi);
    ZeroSlopeResult out;
    if (flo == 0.0 || fhi == 0.0) {
        out.lambda_star = flo == 0.0 ? lo : hi;
    } else {
        if (std::signbit(flo) == std::signbit(fhi)) throw SearchError("no zero in bracket");
        std::uintmax_t iters = 200;
        auto stop = [tol](double a, double b) { return std::abs(b - a) <= tol; };
        const auto [a, b] = boost::math::tools::toms748_solve(curve, lo, hi, flo, fhi, stop, iters);
        out.lambda_star = 0.5 * (a + b);
    }
    const double h = 1e-5 * std::max(1.0, std::abs(out.lambda_star));
    out.omega = (curve(out.lambda_star + h) - curve(out.lambda_star - h)) / (2.0 * h);
    return out;
}

}  // namespace vbr
