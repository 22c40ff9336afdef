#include "vbr/conformal.hpp"

#include "vbr/error.hpp"

#include <cmath>

namespace vbr {

double conformal_w(double z, double p) {
    const double y = z * p;
    const double s = std::sqrt(1.0 + y);
    // s - 1 = y / (s + 1) avoids cancellation for small y
    return y <= 1.0 ? y / ((s + 1.0) * (s + 1.0)) : (s - 1.0) / (s + 1.0);
}

double conformal_z(double w, double p) {
    if (!(w >= 0.0 && w < 1.0)) throw DomainError("conformal_z: w must lie in [0, 1)");
    const double u = 1.0 - w;
    return 4.0 * w / (p * u * u);
}

double expansion_coefficient(int n, int k) {
    if (n < 0 || k < 0) throw DomainError("expansion_coefficient: negative index");
    if (n == 0) return k == 0 ? 1.0 : 0.0;
    // C(2n+k-1, k) by the multiplicative formula; exact for the orders in use.
    double c = 1.0;
    for (int j = 1; j <= k; ++j) c = c * (2 * n - 1 + j) / j;
    return std::round(c);
}

}  // namespace vbr
