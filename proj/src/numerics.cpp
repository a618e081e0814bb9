#include "aff/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "aff/error.hpp"

namespace aff {

void CompensatedSum::add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
        comp_ += (sum_ - t) + x;
    else
        comp_ += (x - t) + sum_;
    sum_ = t;
}

const GaussRule& gauss_legendre(int order) {
    static std::mutex mu;
    static std::map<int, GaussRule> cache;
    require(order >= 1 && order <= 128, "gauss_legendre: order out of range");
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(order);
    if (it != cache.end()) return it->second;

    GaussRule rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    for (int i = 0; i < order; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
        double dp = 0.0;
        for (int it2 = 0; it2 < 100; ++it2) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= order; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (order == 1) {
                p1 = x;
                p0 = 1.0;
            }
            dp = order * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        rule.nodes[i] = x;
        rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    if (order == 1) {
        rule.nodes[0] = 0.0;
        rule.weights[0] = 2.0;
    }
    return cache.emplace(order, std::move(rule)).first->second;
}

double integrate_gl(const std::function<double(double)>& f, double a, double b, int order) {
    const GaussRule& g = gauss_legendre(order);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    CompensatedSum s;
    for (std::size_t i = 0; i < g.nodes.size(); ++i)
        s.add(g.weights[i] * f(mid + half * g.nodes[i]));
    return half * s.value();
}

double integrate_piecewise(const std::function<double(double)>& f,
                           std::vector<double> breakpoints, int order) {
    std::sort(breakpoints.begin(), breakpoints.end());
    breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()), breakpoints.end());
    CompensatedSum s;
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i)
        if (breakpoints[i + 1] > breakpoints[i])
            s.add(integrate_gl(f, breakpoints[i], breakpoints[i + 1], order));
    return s.value();
}

QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a,
                                    double b, double rel_tol, int max_level,
                                    double abs_tol) {
    QuadratureResult r;
    if (a == b) {
        r.converged = true;
        return r;
    }
    auto level_value = [&](int cells) {
        CompensatedSum s;
        const double h = (b - a) / cells;
        for (int c = 0; c < cells; ++c) s.add(integrate_gl(f, a + c * h, a + (c + 1) * h, 16));
        return s.value();
    };
    double prev = level_value(1);
    for (int level = 1; level <= max_level; ++level) {
        const int cells = 1 << level;
        const double cur = level_value(cells);
        r.value = cur;
        r.cells = cells;
        r.error_estimate = std::abs(cur - prev);
        if (r.error_estimate <= std::max(rel_tol * std::abs(cur), abs_tol)) {
            r.converged = true;
            return r;
        }
        prev = cur;
    }
    return r;
}

double integrate_unit_cube(const std::function<double(std::span<const double>)>& f,
                           int dim, int cells, int order) {
    require(dim >= 1 && dim <= 4, "integrate_unit_cube: dim must be in 1..4");
    const GaussRule& g = gauss_legendre(order);
    const int per_axis = cells * order;
    std::vector<double> x1(per_axis), w1(per_axis);
    for (int c = 0; c < cells; ++c)
        for (int k = 0; k < order; ++k) {
            x1[c * order + k] = (c + 0.5 * (g.nodes[k] + 1.0)) / cells;
            w1[c * order + k] = 0.5 * g.weights[k] / cells;
        }
    long total = 1;
    for (int d = 0; d < dim; ++d) total *= per_axis;
    std::vector<int> idx(dim, 0);
    std::vector<double> pt(dim);
    CompensatedSum s;
    for (long t = 0; t < total; ++t) {
        long rem = t;
        double w = 1.0;
        for (int d = 0; d < dim; ++d) {
            idx[d] = static_cast<int>(rem % per_axis);
            rem /= per_axis;
            pt[d] = x1[idx[d]];
            w *= w1[idx[d]];
        }
        s.add(w * f(pt));
    }
    return s.value();
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

namespace {
inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
}  // namespace

Rng::Rng(std::uint64_t seed) {
    for (int i = 0; i < 4; ++i) s_[i] = mix_seed(seed, static_cast<std::uint64_t>(i));
}

std::uint64_t Rng::next() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

long Rng::integer(long lo, long hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<long>(next() % span);
}

}  // namespace aff

#include <atomic>
#include <exception>
#include <thread>

namespace aff {

namespace {
std::atomic<int> g_workers{0};
}

int default_workers() {
    const int w = g_workers.load();
    if (w > 0) return w;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(std::min(hc, 16u));
}

void set_default_workers(int n) {
    require(n >= 0, "workers must be >= 0");
    g_workers.store(n);
}

void parallel_for(long n, int workers, const std::function<void(long)>& body) {
    if (workers <= 0) workers = default_workers();
    if (n <= 0) return;
    if (workers == 1 || n == 1) {
        for (long i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<long> next{0};
    std::exception_ptr first_error;
    std::mutex err_mu;
    auto run = [&] {
        for (;;) {
            const long i = next.fetch_add(1);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mu);
                if (!first_error) first_error = std::current_exception();
                next.store(n);
                return;
            }
        }
    };
    const int t = static_cast<int>(std::min<long>(workers, n));
    std::vector<std::thread> pool;
    pool.reserve(t - 1);
    for (int k = 0; k + 1 < t; ++k) pool.emplace_back(run);
    run();
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace aff
