#include "vbr/bernoulli.hpp"
#include "vbr/conformal.hpp"
#include "vbr/error.hpp"
#include "vbr/resum.hpp"

#include <string>

namespace vbr {
namespace {

using Poly = std::vector<Rational>;  // coefficients in z, truncated at a fixed length

Poly multiply(const Poly& a, const Poly& b) {
    Poly out(a.size(), Rational(0));
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) continue;
        for (std::size_t j = 0; i + j < out.size(); ++j) out[i + j] += a[i] * b[j];
    }
    return out;
}

/// z-series of w(z) from the fixed point w = (p z / 4)(1 - w)^2.
Poly conformal_series(const Rational& p, std::size_t length) {
    Poly w(length, Rational(0));
    for (std::size_t iter = 0; iter < length; ++iter) {
        Poly one_minus_w(length, Rational(0));
        for (std::size_t i = 0; i < length; ++i) one_minus_w[i] = -w[i];
        one_minus_w[0] += 1;
        const Poly sq = multiply(one_minus_w, one_minus_w);
        Poly next(length, Rational(0));
        for (std::size_t i = 0; i + 1 < length; ++i) next[i + 1] = p * sq[i] / 4;
        w = std::move(next);
    }
    return w;
}

}  // namespace

std::vector<TaylorResidual> taylor_consistency(const CoefficientSeries& series, int N, double p) {
    if (N < 0 || N > series.order()) {
        throw DomainError("order N=" + std::to_string(N) + " outside 0.." +
                          std::to_string(series.order()));
    }
    if (!(p > 0.0)) throw DomainError("p must be > 0");

    const auto length = static_cast<std::size_t>(N) + 2;  // orders 0..N+1
    const Rational pr(p);

    // Borel coefficients f_n / n!
    std::vector<Rational> borel(static_cast<std::size_t>(N) + 1);
    Rational factorial = 1;
    for (int n = 0; n <= N; ++n) {
        if (n > 0) factorial *= n;
        borel[n] = Rational(series.coefficients()[n]) / factorial;
    }

    // w-truncated Borel polynomial: sum_n sum_{k<=N-n} borel_n (4/p)^n C(n,k) w^{n+k}
    std::vector<Rational> in_w(static_cast<std::size_t>(N) + 1, Rational(0));
    Rational four_over_p_n = 1;
    for (int n = 0; n <= N; ++n) {
        if (n > 0) four_over_p_n *= Rational(4) / pr;
        for (int k = 0; k <= N - n; ++k) {
            in_w[n + k] += borel[n] * four_over_p_n *
                           Rational(static_cast<long long>(expansion_coefficient(n, k)));
        }
    }

    // Compose with w(z)
    const Poly w = conformal_series(pr, length);
    Poly composed(length, Rational(0));
    Poly w_power(length, Rational(0));
    w_power[0] = 1;
    for (int j = 0; j <= N; ++j) {
        for (std::size_t i = 0; i < length; ++i) composed[i] += in_w[j] * w_power[i];
        w_power = multiply(w_power, w);
    }

    std::vector<TaylorResidual> out;
    for (std::size_t n = 0; n < length; ++n) {
        const Rational expected = n <= static_cast<std::size_t>(N) ? borel[n] : Rational(0);
        const Rational diff = composed[n] - expected;
        out.push_back({static_cast<int>(n), static_cast<double>(expected),
                       static_cast<double>(composed[n]), static_cast<double>(diff), diff == 0});
    }
    return out;
}

}  // namespace vbr
