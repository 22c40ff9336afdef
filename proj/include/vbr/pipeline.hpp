#pragma once

#include "vbr/quadrature.hpp"
#include "vbr/scan.hpp"
#include "vbr/series.hpp"

#include <functional>
#include <string>
#include <vector>

namespace vbr {

/// Columns of curves sampled on one lambda grid.
struct CurveSet {
    std::vector<double> lambdas;
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;  ///< columns[k][j] at lambdas[j]

    void add(std::string name, std::vector<double> values);
    void add(std::string name, const std::function<double(double)>& f);
    /// Header row "lambda,<names...>", then one row per lambda, 17 significant digits.
    std::string to_csv() const;
};

/// hi * j / points for j = 1..points.
std::vector<double> uniform_grid(double hi, int points);
/// lo + (hi - lo) * j / (points - 1) for j = 0..points-1.
std::vector<double> linear_grid(double lo, double hi, int points);

/// One column per available record, named prefix + N, holding the curve
/// (reconstructed for auxiliary series) at the record's p.
CurveSet chain_curves(const CoefficientSeries& series, const ExtremumSequence& sequence,
                      const std::vector<double>& lambdas, const MomentSource& source,
                      const std::string& prefix = "S_");

/// Plain partial sums, one column per order.
CurveSet partial_sum_curves(const CoefficientSeries& series, const std::vector<int>& orders,
                            const std::vector<double>& lambdas, const std::string& prefix = "hatS_");

}  // namespace vbr
