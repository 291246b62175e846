#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace qcr {

using cplx = std::complex<double>;
using RVec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;

inline constexpr cplx kI{0.0, 1.0};
inline constexpr double kPi = std::numbers::pi;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ContractViolation : public Error {
public:
    using Error::Error;
};

class EvaluationError : public Error {
public:
    using Error::Error;
};

class NumericalConsistencyError : public Error {
public:
    using Error::Error;
};

class RangeError : public Error {
public:
    using Error::Error;
};

class UnsupportedError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class MissingReference : public Error {
public:
    using Error::Error;
};

inline void require(bool cond, const std::string& what) {
    if (!cond) throw ContractViolation(what);
}

// Worker count used by parallel_for. Results never depend on it.
void set_thread_count(int k);
int thread_count();

// Runs body(i) for i in [0, n). Each index writes only its own output slot.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace qcr
