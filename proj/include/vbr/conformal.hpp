#pragma once

namespace vbr {

/// w(z) = (sqrt(1+zp) - 1) / (sqrt(1+zp) + 1); maps [0, inf) onto [0, 1).
double conformal_w(double z, double p);

/// Inverse map z(w) = 4w / (p (1-w)^2); throws DomainError unless 0 <= w < 1.
double conformal_z(double w, double p);

/// Coefficient of w^k in the expansion of (1-w)^{-2n}: C(2n+k-1, k) for
/// n >= 1, and delta_{k0} for n = 0.
double expansion_coefficient(int n, int k);

}  // namespace vbr
