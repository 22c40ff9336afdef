#include "vbr/error.hpp"
#include "vbr/resum.hpp"

#include <doctest.h>

#include <boost/math/tools/roots.hpp>

#include <cmath>

using namespace vbr;

namespace {

const auto kProto = builtin_series(BuiltinModel::prototype, 8);
const auto kGeo = builtin_series(BuiltinModel::geometric, 8);

/// Test-side extremum locator: bisection on the p-derivative in a known bracket.
double locate_extremum(const CoefficientSeries& s, int N, double lambda, double lo, double hi,
                       const MomentSource& src) {
    auto g = [&](double log_p) {
        return resum_derivative(s, N, lambda, std::exp(log_p), DerivativeVariable::p, src).value;
    };
    auto [a, b] = boost::math::tools::bisect(g, std::log(lo), std::log(hi),
                                             boost::math::tools::eps_tolerance<double>(40));
    return std::exp(0.5 * (a + b));
}

}  // namespace

TEST_CASE("resum_eval values") {
    const auto src = MomentSource::cached();
    SUBCASE("N = 0 keeps only the constant term") {
        const CoefficientSeries s("c", {2.5, 7.0}, 3.0);
        CHECK(resum_eval(s, 0, 0.8, 4.0, src).value == 7.5);
    }
    SUBCASE("reference approximants") {
        CHECK(std::abs(resum_eval(kProto, 4, 0.5, 8.4, src).value - 0.711) <= 0.005);
        CHECK(std::abs(resum_eval(kGeo, 4, 0.8, 5.0, src).value - 0.512) <= 0.005);
        CHECK(std::abs(resum_eval(kProto, 5, 0.5, 1.15, src).value - 0.7228) <= 0.001);
    }
    SUBCASE("decomposition identity and term signs") {
        for (const auto* s : {&kProto, &kGeo}) {
            for (int N = 1; N <= 7; ++N) {
                for (double p : {0.2, 1.0, 2.65, 40.0}) {
                    const auto ev = resum_eval(*s, N, 1.0, p, src);
                    double sum = 0.0;
                    for (int n = 0; n <= N; ++n) sum += ev.terms[n] / std::pow(p, n);
                    CHECK(std::abs(sum - ev.value) <= 1e-12 * std::abs(ev.value));
                    for (int n = 0; n <= N; ++n) {
                        if (s->coefficient(n) != 0.0) CHECK(std::signbit(ev.terms[n]) == std::signbit(s->coefficient(n)));
                    }
                }
            }
        }
        const auto terms = term_decomposition(kProto, 3, 1.0, 2.65, src);
        CHECK(terms[0] == 1.0);
        CHECK(terms[1] < 0.0);
    }
    SUBCASE("prefactor scales every term") {
        const auto eh = builtin_series(BuiltinModel::euler_heisenberg, 4);
        const CoefficientSeries unit("u", {eh.coefficients().begin(), eh.coefficients().end()});
        CHECK(resum_eval(eh, 4, 10.0, 1.4, src).value ==
              doctest::Approx(1600.0 * resum_eval(unit, 4, 10.0, 1.4, src).value).epsilon(1e-14));
    }
    SUBCASE("large p approaches the constant term") {
        for (int N = 2; N <= 6; ++N) {
            CHECK(std::abs(resum_eval(kProto, N, 1.0, 1e6, src).value - 1.0) <= 1e-4);
        }
    }
    SUBCASE("origin value and slope are f_0 and f_1 for any p") {
        const auto eh = builtin_series(BuiltinModel::euler_heisenberg, 6);
        const auto beta = builtin_series(BuiltinModel::beta_polymer, 7);
        for (const auto* s : {&kProto, &kGeo, &eh, &beta}) {
            for (int N = 1; N <= 6; ++N) {
                for (double p : {0.2, 2.0, 15.0}) {
                    const double lam = 1e-6 / p;
                    const auto d = resum_derivative(*s, N, lam, p, DerivativeVariable::lambda, src);
                    const double f1 = s->prefactor() * s->coefficient(1);
                    CHECK(std::abs(d.value - f1) <= 1e-3 * std::abs(f1));
                    const double v = resum_eval(*s, N, 1e-6, p, src).value;
                    CHECK(std::abs(v - s->prefactor() * s->coefficient(0)) <= 2e-6 * std::abs(f1) + 1e-15);
                }
            }
        }
    }
    SUBCASE("auxiliary curves are reconstructed with a factor lambda") {
        const auto aux = auxiliary_series(builtin_series(BuiltinModel::beta_polymer, 7));
        const double v = resum_eval(aux, 4, 1.3, 0.4, src).value;
        CHECK(resum_curve(aux, 4, 1.3, 0.4, src) == 1.3 * v);
        CHECK(resum_curve(kProto, 4, 1.3, 0.4, src) == resum_eval(kProto, 4, 1.3, 0.4, src).value);
    }
    SUBCASE("argument checks") {
        CHECK_THROWS_AS(resum_eval(kProto, 9, 1.0, 1.0, src), DomainError);
        CHECK_THROWS_AS(resum_eval(kProto, 2, 0.0, 1.0, src), DomainError);
        CHECK_THROWS_AS(resum_eval(kProto, 2, 1.0, -1.0, src), DomainError);
    }
    SUBCASE("cached and uncached sources agree") {
        const MomentSource plain;
        for (double p : {0.3, 3.0, 300.0}) {
            CHECK(resum_eval(kProto, 6, 1.0, p, plain).value ==
                  doctest::Approx(resum_eval(kProto, 6, 1.0, p, src).value).epsilon(1e-10));
        }
    }
}

TEST_CASE("resum_derivative") {
    const auto src = MomentSource::cached();
    SUBCASE("scaling identity p dS/dp = lambda dS/dlambda - sum n A_n / p^n") {
        for (int N = 2; N <= 6; ++N) {
            for (double p : {0.5, 2.65, 9.0}) {
                for (double lambda : {0.5, 1.0}) {
                    const auto ev = resum_eval(kProto, N, lambda, p, src);
                    double weighted = 0.0;
                    for (int n = 1; n <= N; ++n) weighted += n * ev.terms[n] / std::pow(p, n);
                    const auto dp = resum_derivative(kProto, N, lambda, p, DerivativeVariable::p, src);
                    const auto dl = resum_derivative(kProto, N, lambda, p, DerivativeVariable::lambda, src);
                    INFO("N=" << N << " p=" << p << " lambda=" << lambda << " err=" << dp.error); CHECK_FALSE(dp.low_confidence);
                    CHECK(std::abs(p * dp.value - (lambda * dl.value - weighted)) <=
                          1e-6 * std::abs(weighted));
                }
            }
        }
    }
    SUBCASE("at an extremum lambda dS/dlambda equals sum n A_n / p^n") {
        const double p2 = locate_extremum(kProto, 2, 1.0, 2.0, 3.5, src);
        CHECK(p2 == doctest::Approx(2.65).epsilon(0.05));
        const auto ev = resum_eval(kProto, 2, 1.0, p2, src);
        const auto dp = resum_derivative(kProto, 2, 1.0, p2, DerivativeVariable::p, src);
        CHECK(std::abs(dp.value) <= 1e-6 * std::abs(ev.value));
        const auto dl = resum_derivative(kProto, 2, 1.0, p2, DerivativeVariable::lambda, src);
        double weighted = 0.0;
        for (int n = 1; n <= 2; ++n) weighted += n * ev.terms[n] / std::pow(p2, n);
        CHECK(std::abs(dl.value - weighted) <= 1e-4 * std::abs(weighted));
    }
    SUBCASE("finite-difference oracle") {
        auto S = [&](double p) { return resum_eval(kGeo, 5, 0.8, p, src).value; };
        const double p = 3.0, h = 1e-3;
        const double fd = (S(p + h) - S(p - h)) / (2 * h);
        CHECK(resum_derivative(kGeo, 5, 0.8, p, DerivativeVariable::p, src).value ==
              doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("taylor_consistency") {
    SUBCASE("prototype N=2 at p=1 reproduces f_n/n!") {
        const auto r = taylor_consistency(kProto, 2, 1.0);
        REQUIRE(r.size() == 4);
        CHECK(r[0].reconstructed == 1.0);
        CHECK(r[1].reconstructed == -1.0);
        CHECK(r[2].reconstructed == 1.0);
        for (int n = 0; n <= 2; ++n) CHECK(r[n].exact_zero);
        CHECK_FALSE(r[3].exact_zero);
    }
    SUBCASE("N = 0 is trivially exact") {
        const auto r = taylor_consistency(kProto, 0, 3.0);
        CHECK(r[0].exact_zero);
        CHECK(r[0].reconstructed == 1.0);
    }
    SUBCASE("exact through order N for every builtin and N <= 7") {
        for (const auto& info : all_models()) {
            const auto s = builtin_series(info.id, 7);
            for (int N = 0; N <= 7; ++N) {
                for (double p : {0.37, 2.65, 13.5}) {
                    const auto r = taylor_consistency(s, N, p);
                    for (int n = 0; n <= N; ++n) CHECK(r[n].exact_zero);
                }
            }
        }
    }
}
