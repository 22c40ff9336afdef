#pragma once

#include <cstdint>
#include <memory>
#include <shared_mutex>
#include <span>
#include <unordered_map>
#include <vector>

namespace vbr {

enum class QuadratureRule {
    /// Gauss-Laguerre on int e^{-z} w(lambda z)^m dz. When its embedded error
    /// estimate misses the tolerance (large lambda*p, where w^m has structure
    /// at z ~ 1/(lambda p)), the table is recomputed with a trapezoid rule in
    /// t = ln z, which converges uniformly in lambda*p.
    gauss_laguerre,
    /// Globally adaptive Gauss-Kronrod (7/15) on [0, 50 + 10m], tail dropped.
    adaptive_exp_tail,
};

struct QuadratureSpec {
    QuadratureRule rule = QuadratureRule::gauss_laguerre;
    int node_count = 200;
    double rel_tol = 1e-10;
    double abs_tol = 1e-13;

    /// Throws DomainError unless node_count >= 16 and tolerances are positive.
    void validate() const;
    std::uint64_t fingerprint() const;
};

/// Nodes and weights for int_0^inf e^{-x} g(x) dx.
struct LaguerreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Golub-Welsch eigen-decomposition followed by a Newton polish of each node.
/// Rules are built once per size and shared.
const LaguerreRule& laguerre_rule(int node_count);

/// I_0..I_M at one (lambda, p) together with per-moment error estimates.
struct MomentTable {
    std::vector<double> values;
    std::vector<double> errors;
    int max_moment() const noexcept { return static_cast<int>(values.size()) - 1; }
};

/// Computes I_m(lambda, p) = int_0^inf e^{-z} w(lambda z, p)^m dz for
/// m = 0..max_moment. I_0 is exactly 1. Throws QuadratureError when the
/// error estimate exceeds rel_tol*|I_m| + abs_tol.
MomentTable compute_moments(double lambda, double p, int max_moment, const QuadratureSpec& spec);

/// Thread-safe memo of moment tables keyed on the exact bit patterns of
/// (lambda, p) and the quadrature fingerprint. Concurrent inserts of the same
/// key store identical values, so duplicate work is harmless.
class MomentCache {
public:
    std::shared_ptr<const MomentTable> find(double lambda, double p, std::uint64_t fingerprint,
                                            int max_moment) const;
    void insert(double lambda, double p, std::uint64_t fingerprint,
                std::shared_ptr<const MomentTable> table);
    std::size_t size() const;
    void clear();

private:
    struct Key {
        std::uint64_t lambda_bits;
        std::uint64_t p_bits;
        std::uint64_t fingerprint;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const noexcept;
    };
    static Key make_key(double lambda, double p, std::uint64_t fingerprint);

    mutable std::shared_mutex mutex_;
    std::unordered_map<Key, std::shared_ptr<const MomentTable>, KeyHash> tables_;
};

/// Quadrature settings plus an optional shared cache; cheap to copy.
class MomentSource {
public:
    MomentSource() = default;
    explicit MomentSource(QuadratureSpec spec, std::shared_ptr<MomentCache> cache = nullptr);

    /// Shares a fresh cache.
    static MomentSource cached(QuadratureSpec spec = {});

    std::shared_ptr<const MomentTable> moments(double lambda, double p, int max_moment) const;
    double moment(int m, double lambda, double p) const;

    const QuadratureSpec& spec() const noexcept { return spec_; }
    const std::shared_ptr<MomentCache>& cache() const noexcept { return cache_; }

private:
    QuadratureSpec spec_;
    std::shared_ptr<MomentCache> cache_;
};

/// Single moment, uncached.
double moment(int m, double lambda, double p, const QuadratureSpec& spec = {});

}  // namespace vbr
