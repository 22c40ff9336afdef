#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <vector>

namespace vbr {

using Rational = boost::multiprecision::cpp_rational;

/// Exact Bernoulli numbers B_0, B_2, B_4, ... (B_1 is not stored).
class BernoulliTable {
public:
    /// B_k for even k <= max_even_index(); throws DomainError otherwise.
    const Rational& at(int even_index) const;
    double value(int even_index) const;
    int max_even_index() const noexcept { return 2 * (static_cast<int>(even_.size()) - 1); }

private:
    friend BernoulliTable bernoulli_numbers(int);
    std::vector<Rational> even_;
};

/// Generates the table from sum_{k=0}^{m} C(m+1,k) B_k = 0 in exact arithmetic.
BernoulliTable bernoulli_numbers(int max_even_index);

}  // namespace vbr
