#include "vbr/bernoulli.hpp"

#include "vbr/error.hpp"

#include <string>

namespace vbr {

const Rational& BernoulliTable::at(int even_index) const {
    if (even_index < 0 || even_index % 2 != 0 || even_index > max_even_index()) {
        throw DomainError("Bernoulli index " + std::to_string(even_index) +
                          " not stored (even indices 0.." + std::to_string(max_even_index()) + ")");
    }
    return even_[static_cast<std::size_t>(even_index / 2)];
}

double BernoulliTable::value(int even_index) const {
    return static_cast<double>(at(even_index));
}

BernoulliTable bernoulli_numbers(int max_even_index) {
    if (max_even_index < 2 || max_even_index % 2 != 0) {
        throw DomainError("max_even_index must be an even integer >= 2");
    }
    // Full table including odd indices; only B_1 is nonzero among them.
    std::vector<Rational> b(static_cast<std::size_t>(max_even_index) + 1);
    b[0] = 1;
    for (int m = 1; m <= max_even_index; ++m) {
        Rational acc = 0;
        boost::multiprecision::cpp_int binom = 1;  // C(m+1, k)
        for (int k = 0; k < m; ++k) {
            acc += Rational(binom) * b[static_cast<std::size_t>(k)];
            binom = binom * (m + 1 - k) / (k + 1);
        }
        b[static_cast<std::size_t>(m)] = -acc / Rational(m + 1);
    }

    BernoulliTable table;
    for (int k = 0; k <= max_even_index; k += 2) {
        table.even_.push_back(b[static_cast<std::size_t>(k)]);
    }
    return table;
}

}  // namespace vbr
