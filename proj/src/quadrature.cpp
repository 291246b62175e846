#include "qcr/quadrature.hpp"

#include <atomic>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

namespace qcr {

namespace {
std::atomic<int> g_threads{1};
}

void set_thread_count(int k) { g_threads = k < 1 ? 1 : k; }
int thread_count() { return g_threads; }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    int k = thread_count();
    if (k <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr err;
    std::mutex err_mu;
    for (int t = 0; t < k; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next++;
                if (i >= n) return;
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lk(err_mu);
                    if (!err) err = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

namespace {

Rule compute_gl(int n) {
    Rule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) {
                p1 = x;
                p0 = 1.0;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // one more derivative evaluation at the converged node
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n == 1 ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.nodes[i] = -x;
        r.nodes[n - 1 - i] = x;
        r.weights[i] = w;
        r.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) r.nodes[n / 2] = 0.0;
    return r;
}

Rule compute_gh(int n) {
    RMat T = RMat::Zero(n, n);
    for (int i = 1; i < n; ++i) {
        T(i, i - 1) = T(i - 1, i) = std::sqrt(i / 2.0);
    }
    Eigen::SelfAdjointEigenSolver<RMat> es(T);
    Rule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        r.nodes[i] = es.eigenvalues()(i);
        double v = es.eigenvectors()(0, i);
        r.weights[i] = std::sqrt(kPi) * v * v;
    }
    // symmetrize against round-off
    for (int i = 0; i < n / 2; ++i) {
        double x = 0.5 * (r.nodes[n - 1 - i] - r.nodes[i]);
        double w = 0.5 * (r.weights[i] + r.weights[n - 1 - i]);
        r.nodes[i] = -x;
        r.nodes[n - 1 - i] = x;
        r.weights[i] = r.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) r.nodes[n / 2] = 0.0;
    return r;
}

template <class F>
const Rule& cached(std::map<int, std::unique_ptr<Rule>>& cache, std::mutex& mu, int n, F make) {
    std::lock_guard lk(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, std::make_unique<Rule>(make(n))).first;
    return *it->second;
}

}  // namespace

const Rule& gauss_legendre(int n) {
    require(n >= 1, "gauss_legendre: n >= 1");
    static std::map<int, std::unique_ptr<Rule>> cache;
    static std::mutex mu;
    return cached(cache, mu, n, compute_gl);
}

Rule gauss_legendre(int n, double a, double b) {
    const Rule& base = gauss_legendre(n);
    Rule r = base;
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    for (std::size_t i = 0; i < r.size(); ++i) {
        r.nodes[i] = c + h * base.nodes[i];
        r.weights[i] = h * base.weights[i];
    }
    return r;
}

const Rule& gauss_hermite(int n) {
    require(n >= 1, "gauss_hermite: n >= 1");
    static std::map<int, std::unique_ptr<Rule>> cache;
    static std::mutex mu;
    return cached(cache, mu, n, compute_gh);
}

Rule trapezoid(int n, double a, double b) {
    require(n >= 2, "trapezoid: n >= 2");
    Rule r;
    double h = (b - a) / (n - 1);
    for (int i = 0; i < n; ++i) {
        r.nodes.push_back(a + h * i);
        r.weights.push_back((i == 0 || i == n - 1) ? 0.5 * h : h);
    }
    return r;
}

Rule simpson(int n, double a, double b) {
    require(n >= 3 && n % 2 == 1, "simpson: odd n >= 3");
    Rule r;
    double h = (b - a) / (n - 1);
    for (int i = 0; i < n; ++i) {
        r.nodes.push_back(a + h * i);
        double w = (i == 0 || i == n - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        r.weights.push_back(w * h / 3.0);
    }
    return r;
}

}  // namespace qcr
