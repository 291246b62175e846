#pragma once

#include "qcr/model.hpp"

#include <random>

namespace qcr::test {

struct Rng {
    std::mt19937_64 gen;
    explicit Rng(std::uint64_t seed) : gen(seed) {}
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(gen); }
    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(gen); }
    RVec rvec(int k) {
        RVec v(k);
        for (int i = 0; i < k; ++i) v(i) = normal();
        return v;
    }
    CVec cvec(int k) {
        CVec v(k);
        for (int i = 0; i < k; ++i) v(i) = cplx(normal(), normal());
        return v;
    }
    GroupPoint point(int n, int m) { return {cvec(n), rvec(m)}; }
};

inline CVec c1(cplx a) {
    CVec v(1);
    v << a;
    return v;
}

inline RVec r1(double a) {
    RVec v(1);
    v << a;
    return v;
}

inline RVec r2(double a, double b) {
    RVec v(2);
    v << a, b;
    return v;
}

inline CMat cmat2(cplx a, cplx b, cplx c, cplx d) {
    CMat M(2, 2);
    M << a, b, c, d;
    return M;
}

}  // namespace qcr::test
