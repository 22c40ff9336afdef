#include "vbr/quadrature.hpp"

#include "vbr/conformal.hpp"
#include "vbr/error.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <queue>
#include <string>

namespace vbr {
namespace {

/// L_{n-1}(x)/L_n(x) from the three-term recurrence, rescaled against overflow.
double laguerre_ratio(int n, double x) {
    double prev = 1.0;     // L_0
    double cur = 1.0 - x;  // L_1
    for (int k = 2; k <= n; ++k) {
        const double next = ((2.0 * k - 1.0 - x) * cur - (k - 1.0) * prev) / k;
        prev = cur;
        cur = next;
        const double mag = std::abs(cur);
        if (mag > 1e150) {
            prev /= mag;
            cur /= mag;
        }
    }
    return prev / cur;
}

LaguerreRule build_laguerre(int n) {
    Eigen::VectorXd diag(n);
    Eigen::VectorXd sub(n - 1);
    for (int i = 0; i < n; ++i) diag(i) = 2.0 * i + 1.0;
    for (int i = 1; i < n; ++i) sub(i - 1) = i;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    const Eigen::VectorXd& guess = solver.eigenvalues();

    LaguerreRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double x = guess(i);
        for (int it = 0; it < 20; ++it) {
            // L_n' = n (L_n - L_{n-1}) / x
            const double step = x / (n * (1.0 - laguerre_ratio(n, x)));
            x -= step;
            if (std::abs(step) <= 4e-16 * x) break;
        }
        rule.nodes[i] = x;
        const double v0 = solver.eigenvectors()(0, i);
        rule.weights[i] = v0 * v0;
    }
    return rule;
}

bool within_tolerance(const MomentTable& t, const QuadratureSpec& spec) {
    for (int m = 0; m <= t.max_moment(); ++m) {
        if (!(t.errors[m] <= spec.rel_tol * std::abs(t.values[m]) + spec.abs_tol)) return false;
    }
    return true;
}

double worst_residual(const MomentTable& t) {
    return *std::max_element(t.errors.begin(), t.errors.end());
}

/// Accumulates sum_i weight_i * w(lambda x_i)^m for m = 0..M.
void accumulate_powers(std::vector<double>& acc, double weight, double w) {
    double power = weight;
    for (double& a : acc) {
        a += power;
        power *= w;
    }
}

MomentTable laguerre_moments(double lambda, double p, int max_moment, int node_count) {
    const auto& fine = laguerre_rule(node_count);
    const auto& coarse = laguerre_rule(std::max(16, 3 * node_count / 4));
    const auto m_count = static_cast<std::size_t>(max_moment) + 1;
    std::vector<double> q_fine(m_count, 0.0);
    std::vector<double> q_coarse(m_count, 0.0);
    for (std::size_t i = 0; i < fine.nodes.size(); ++i) {
        accumulate_powers(q_fine, fine.weights[i], conformal_w(lambda * fine.nodes[i], p));
    }
    for (std::size_t i = 0; i < coarse.nodes.size(); ++i) {
        accumulate_powers(q_coarse, coarse.weights[i], conformal_w(lambda * coarse.nodes[i], p));
    }
    MomentTable t{q_fine, std::vector<double>(m_count)};
    for (std::size_t m = 0; m < m_count; ++m) t.errors[m] = std::abs(q_fine[m] - q_coarse[m]);
    return t;
}

/// Trapezoid rule in t = ln z. The transformed integrand e^{t - e^t} w(lambda p e^t)^m
/// is analytic in a strip around the real axis independent of lambda*p, so the
/// rule converges geometrically for every lambda*p.
MomentTable log_trapezoid_moments(double lambda, double p, int max_moment) {
    constexpr double t_lo = -42.0;  // e^{t_lo} < 1e-18 bounds the dropped head
    constexpr double t_hi = 3.85;   // e^{t - e^t} < 1e-18 beyond
    constexpr double h = 0.1;
    const int steps = static_cast<int>(std::ceil((t_hi - t_lo) / h));
    const auto m_count = static_cast<std::size_t>(max_moment) + 1;
    std::vector<double> fine(m_count, 0.0);
    std::vector<double> coarse(m_count, 0.0);
    for (int i = 0; i <= steps; ++i) {
        const double t = t_lo + i * h;
        const double z = std::exp(t);
        const double weight = std::exp(t - z);
        const double w = conformal_w(lambda * z, p);
        accumulate_powers(fine, h * weight, w);
        if (i % 2 == 0) accumulate_powers(coarse, 2.0 * h * weight, w);
    }
    constexpr double truncation = 2e-18;
    MomentTable t{fine, std::vector<double>(m_count)};
    for (std::size_t m = 0; m < m_count; ++m) {
        t.errors[m] = std::abs(fine[m] - coarse[m]) + truncation;
    }
    return t;
}

/// Globally adaptive Gauss-Kronrod 7/15 over a vector of integrands.
MomentTable adaptive_moments(double lambda, double p, int max_moment, const QuadratureSpec& spec) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    using G = boost::math::quadrature::gauss<double, 7>;
    const auto& xk = GK::abscissa();
    const auto& wk = GK::weights();
    const auto& wg = G::weights();
    const auto m_count = static_cast<std::size_t>(max_moment) + 1;

    struct Panel {
        double a, b;
        std::vector<double> value, error;
        double priority;
        bool operator<(const Panel& o) const { return priority < o.priority; }
    };

    std::vector<double> fp(m_count), fm(m_count);
    auto integrand = [&](double z, std::vector<double>& out) {
        const double w = conformal_w(lambda * z, p);
        double v = std::exp(-z);
        for (auto& o : out) {
            o = v;
            v *= w;
        }
    };
    auto panel = [&](double a, double b) {
        const double c = 0.5 * (a + b);
        const double r = 0.5 * (b - a);
        Panel out{a, b, std::vector<double>(m_count, 0.0), std::vector<double>(m_count, 0.0), 0.0};
        std::vector<double> gauss(m_count, 0.0);
        integrand(c, fp);
        for (std::size_t m = 0; m < m_count; ++m) {
            out.value[m] = fp[m] * wk[0];
            gauss[m] = fp[m] * wg[0];
        }
        for (std::size_t i = 1; i < xk.size(); ++i) {
            integrand(c + r * xk[i], fp);
            integrand(c - r * xk[i], fm);
            for (std::size_t m = 0; m < m_count; ++m) {
                out.value[m] += (fp[m] + fm[m]) * wk[i];
                if (i % 2 == 0) gauss[m] += (fp[m] + fm[m]) * wg[i / 2];
            }
        }
        for (std::size_t m = 0; m < m_count; ++m) {
            out.value[m] *= r;
            gauss[m] *= r;
            out.error[m] = std::abs(out.value[m] - gauss[m]);
        }
        return out;
    };

    const double cut = 50.0 + 10.0 * max_moment;
    const double scale = 1.0 / (lambda * p);
    std::vector<double> breaks{0.0};
    for (double c : {1e-2, 1e-1, 1.0, 1e1, 1e2}) {
        if (c * scale < cut) breaks.push_back(c * scale);
    }
    for (double c : {1.0, 10.0}) breaks.push_back(c);
    breaks.push_back(cut);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    std::vector<Panel> done;
    std::priority_queue<Panel> queue;
    std::vector<double> total(m_count, 0.0), total_err(m_count, 0.0);
    auto push = [&](Panel pnl) {
        for (std::size_t m = 0; m < m_count; ++m) {
            total[m] += pnl.value[m];
            total_err[m] += pnl.error[m];
        }
        queue.push(std::move(pnl));
    };
    auto tolerance = [&](std::size_t m) {
        return std::max(spec.rel_tol * std::abs(total[m]), spec.abs_tol);
    };
    auto reprioritize = [&](Panel& pnl) {
        pnl.priority = 0.0;
        for (std::size_t m = 0; m < m_count; ++m) {
            pnl.priority = std::max(pnl.priority, pnl.error[m] / tolerance(m));
        }
    };
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        auto pnl = panel(breaks[i], breaks[i + 1]);
        push(std::move(pnl));
    }
    {
        // priorities depend on totals, so assign after the first pass
        std::vector<Panel> initial;
        while (!queue.empty()) {
            initial.push_back(queue.top());
            queue.pop();
        }
        for (auto& pnl : initial) {
            reprioritize(pnl);
            queue.push(std::move(pnl));
        }
    }

    constexpr int max_panels = 4000;
    auto converged = [&] {
        for (std::size_t m = 0; m < m_count; ++m) {
            if (total_err[m] > tolerance(m)) return false;
        }
        return true;
    };
    while (!converged() && static_cast<int>(queue.size()) < max_panels) {
        Panel worst = queue.top();
        queue.pop();
        for (std::size_t m = 0; m < m_count; ++m) {
            total[m] -= worst.value[m];
            total_err[m] -= worst.error[m];
        }
        const double mid = 0.5 * (worst.a + worst.b);
        auto left = panel(worst.a, mid);
        auto right = panel(mid, worst.b);
        reprioritize(left);
        reprioritize(right);
        push(std::move(left));
        push(std::move(right));
    }

    // Re-sum from the panels to shed the running-sum drift.
    std::fill(total.begin(), total.end(), 0.0);
    std::fill(total_err.begin(), total_err.end(), 0.0);
    while (!queue.empty()) {
        const auto& pnl = queue.top();
        for (std::size_t m = 0; m < m_count; ++m) {
            total[m] += pnl.value[m];
            total_err[m] += pnl.error[m];
        }
        queue.pop();
    }
    const double tail = std::exp(-cut);
    MomentTable t{total, total_err};
    for (auto& e : t.errors) e += tail;
    return t;
}

}  // namespace

void QuadratureSpec::validate() const {
    if (node_count < 16) throw DomainError("quadrature node_count must be >= 16");
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
        throw DomainError("quadrature tolerances must be positive");
    }
}

std::uint64_t QuadratureSpec::fingerprint() const {
    // FNV-1a over the defining fields
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xffU;
            h *= 1099511628211ULL;
        }
    };
    mix(static_cast<std::uint64_t>(rule));
    mix(static_cast<std::uint64_t>(node_count));
    mix(std::bit_cast<std::uint64_t>(rel_tol));
    mix(std::bit_cast<std::uint64_t>(abs_tol));
    return h;
}

const LaguerreRule& laguerre_rule(int node_count) {
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<LaguerreRule>> rules;
    std::lock_guard lock(mutex);
    auto& slot = rules[node_count];
    if (!slot) slot = std::make_unique<LaguerreRule>(build_laguerre(node_count));
    return *slot;
}

MomentTable compute_moments(double lambda, double p, int max_moment, const QuadratureSpec& spec) {
    spec.validate();
    if (max_moment < 0) throw DomainError("max_moment must be >= 0");
    if (!(lambda > 0.0) || !(p > 0.0) || !std::isfinite(lambda) || !std::isfinite(p)) {
        throw DomainError("moments need finite lambda > 0 and p > 0");
    }

    MomentTable t;
    if (spec.rule == QuadratureRule::gauss_laguerre) {
        t = laguerre_moments(lambda, p, max_moment, spec.node_count);
        if (!within_tolerance(t, spec)) t = log_trapezoid_moments(lambda, p, max_moment);
    } else {
        t = adaptive_moments(lambda, p, max_moment, spec);
    }
    t.values[0] = 1.0;
    t.errors[0] = 0.0;
    if (!within_tolerance(t, spec)) {
        throw QuadratureError("moment quadrature did not converge at lambda=" +
                                  std::to_string(lambda) + ", p=" + std::to_string(p),
                              worst_residual(t));
    }
    return t;
}

MomentCache::Key MomentCache::make_key(double lambda, double p, std::uint64_t fingerprint) {
    return {std::bit_cast<std::uint64_t>(lambda), std::bit_cast<std::uint64_t>(p), fingerprint};
}

std::size_t MomentCache::KeyHash::operator()(const Key& k) const noexcept {
    std::size_t h = std::hash<std::uint64_t>{}(k.lambda_bits);
    h ^= std::hash<std::uint64_t>{}(k.p_bits) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= std::hash<std::uint64_t>{}(k.fingerprint) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
}

std::shared_ptr<const MomentTable> MomentCache::find(double lambda, double p,
                                                     std::uint64_t fingerprint,
                                                     int max_moment) const {
    std::shared_lock lock(mutex_);
    const auto it = tables_.find(make_key(lambda, p, fingerprint));
    if (it == tables_.end() || it->second->max_moment() < max_moment) return nullptr;
    return it->second;
}

void MomentCache::insert(double lambda, double p, std::uint64_t fingerprint,
                         std::shared_ptr<const MomentTable> table) {
    std::unique_lock lock(mutex_);
    auto& slot = tables_[make_key(lambda, p, fingerprint)];
    if (!slot || slot->max_moment() < table->max_moment()) slot = std::move(table);
}

std::size_t MomentCache::size() const {
    std::shared_lock lock(mutex_);
    return tables_.size();
}

void MomentCache::clear() {
    std::unique_lock lock(mutex_);
    tables_.clear();
}

MomentSource::MomentSource(QuadratureSpec spec, std::shared_ptr<MomentCache> cache)
    : spec_(spec), cache_(std::move(cache)) {
    spec_.validate();
}

MomentSource MomentSource::cached(QuadratureSpec spec) {
    return MomentSource(spec, std::make_shared<MomentCache>());
}

std::shared_ptr<const MomentTable> MomentSource::moments(double lambda, double p,
                                                         int max_moment) const {
    if (!cache_) return std::make_shared<MomentTable>(compute_moments(lambda, p, max_moment, spec_));
    const auto fp = spec_.fingerprint();
    if (auto hit = cache_->find(lambda, p, fp, max_moment)) return hit;
    // Compute a little beyond the request so neighbouring orders reuse the entry.
    auto table = std::make_shared<const MomentTable>(
        compute_moments(lambda, p, std::max(max_moment, 16), spec_));
    cache_->insert(lambda, p, fp, table);
    return table;
}

double MomentSource::moment(int m, double lambda, double p) const {
    if (m < 0) throw DomainError("moment index must be >= 0");
    return moments(lambda, p, m)->values[static_cast<std::size_t>(m)];
}

double moment(int m, double lambda, double p, const QuadratureSpec& spec) {
    return MomentSource(spec).moment(m, lambda, p);
}

}  // namespace vbr
