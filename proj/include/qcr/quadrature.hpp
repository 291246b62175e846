#pragma once

#include "qcr/core.hpp"

#include <span>

namespace qcr {

struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;
    std::size_t size() const { return nodes.size(); }
};

// Gauss-Legendre on [-1, 1]; cached, safe to call concurrently.
const Rule& gauss_legendre(int n);
Rule gauss_legendre(int n, double a, double b);

// Gauss-Hermite for the weight exp(-x^2); cached.
const Rule& gauss_hermite(int n);

// Closed trapezoid / composite Simpson on [a, b] with n nodes (Simpson needs odd n).
Rule trapezoid(int n, double a, double b);
Rule simpson(int n, double a, double b);

template <class T>
T pairwise_sum(const T* p, std::size_t n) {
    if (n <= 16) {
        T s{};
        for (std::size_t i = 0; i < n; ++i) s += p[i];
        return s;
    }
    std::size_t h = n / 2;
    return pairwise_sum(p, h) + pairwise_sum(p + h, n - h);
}

template <class T>
T pairwise_sum(std::span<const T> v) {
    return pairwise_sum(v.data(), v.size());
}

template <class T>
T pairwise_sum(const std::vector<T>& v) {
    return pairwise_sum(v.data(), v.size());
}

}  // namespace qcr
