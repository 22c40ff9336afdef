#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vbr {

/// Built-in example series with known exact sums.
enum class BuiltinModel {
    prototype,         ///< f_n = (-1)^n n!,            B(z) = 1/(1+z)
    geometric,         ///< f_n = (-1)^n,               B(z) = e^{-z}
    pv_model,          ///< f_n = ((-1)^n + 5^{-(n+1)}) n!/6, pole at z = 5
    euler_heisenberg,  ///< Bernoulli-number series, prefactor 1600
    beta_polymer,      ///< seven published coefficients of the N=0 beta function
};

struct ModelInfo {
    BuiltinModel id;
    std::string_view name;
    double default_lambda0;
    double lambda_min;
    double lambda_max;
    std::optional<int> max_order;  ///< set when only finitely many coefficients exist
};

const ModelInfo& model_info(BuiltinModel model);
std::optional<BuiltinModel> parse_model(std::string_view name);
std::span<const ModelInfo> all_models();

enum class SeriesOriginKind { file, builtin, auxiliary };

struct SeriesOrigin {
    SeriesOriginKind kind = SeriesOriginKind::file;
    std::optional<BuiltinModel> model;  ///< builtin models only
    std::string parent;                 ///< auxiliary series only: parent name
};

/// Perturbation coefficients f_0..f_Nmax scaled by a common prefactor.
/// Immutable after construction.
class CoefficientSeries {
public:
    /// Throws ParseError when the list is empty or any value is non-finite,
    /// or when the prefactor is zero or non-finite.
    CoefficientSeries(std::string name, std::vector<double> coefficients,
                      double prefactor = 1.0, SeriesOrigin origin = {});

    const std::string& name() const noexcept { return name_; }
    std::span<const double> coefficients() const noexcept { return coefficients_; }
    double coefficient(int n) const;
    double prefactor() const noexcept { return prefactor_; }
    const SeriesOrigin& origin() const noexcept { return origin_; }
    int order() const noexcept { return static_cast<int>(coefficients_.size()) - 1; }
    bool is_auxiliary() const noexcept { return origin_.kind == SeriesOriginKind::auxiliary; }

    /// Leading coefficients including the prefactor, and in parent terms for
    /// auxiliary series: value at the origin and slope there of the
    /// reconstructed curve.
    double origin_value() const;
    double origin_slope() const;

    /// First N+1 coefficients; N must not exceed order().
    CoefficientSeries truncated(int N) const;

private:
    std::string name_;
    std::vector<double> coefficients_;
    double prefactor_;
    SeriesOrigin origin_;
};

/// Exact coefficient list f_0..f_max_order of a built-in model.
/// beta_polymer only has seven published coefficients.
CoefficientSeries builtin_series(BuiltinModel model, int max_order);

/// f'_n = f_{n+1}; requires f_0 == 0.
CoefficientSeries auxiliary_series(const CoefficientSeries& parent);

/// prefactor * sum_{n=0}^{N} f_n lambda^n.
double partial_sum(const CoefficientSeries& series, int N, double lambda);

enum class SeriesFormat { json, csv };

/// Reads a series document; missing prefactor defaults to 1.
CoefficientSeries load_series(std::istream& in, SeriesFormat format,
                              std::string default_name = "series");
/// Format from the extension (.json or .csv).
CoefficientSeries load_series_file(const std::string& path);

std::string to_json(const CoefficientSeries& series);
/// One row of coefficients preceded by '# name:' and '# prefactor:' lines,
/// which load_series reads back; other '#' lines are comments.
std::string to_csv(const CoefficientSeries& series);

}  // namespace vbr
