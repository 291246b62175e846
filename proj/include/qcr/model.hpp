#pragma once

#include "qcr/core.hpp"

namespace qcr {

struct GroupPoint {
    CVec zeta;
    RVec x;
};

struct AmbientPoint {
    CVec zeta;
    CVec z;
};

// Hermitian map Phi: E x E -> F_C given by m Hermitian n x n matrices.
// Phi is linear in the first slot: <e_k, Phi(z, w)> = w^H A_k z.
class QuadraticModel {
public:
    QuadraticModel(int n, std::vector<CMat> coeffs);

    static QuadraticModel heisenberg();
    static QuadraticModel zero(int n, int m);

    int n() const { return n_; }
    int m() const { return m_; }
    const std::vector<CMat>& coeffs() const { return A_; }

    CMat A(const RVec& lambda) const;
    CVec phi(const CVec& z, const CVec& w) const;
    RVec phi(const CVec& z) const;
    double max_coeff_norm() const;

    void check(const GroupPoint& p) const;
    void check(const AmbientPoint& a) const;
    void check_covector(const RVec& lambda) const;

private:
    int n_;
    int m_;
    std::vector<CMat> A_;
};

struct GridSpec {
    double L_E = 6.0;
    double L_F = 6.0;
    int n_E = 49;
    int n_F = 49;
    void validate() const;
};

// Tensor grid in R^m; dimension 0 varies slowest.
struct XGrid {
    RVec origin;
    RVec step;
    std::vector<int> counts;
    std::size_t size() const;
    RVec point(std::size_t idx) const;
};

class SampledFunction {
public:
    using Eval = std::function<cplx(const CVec&, const RVec&)>;
    using XEval = std::function<void(const CVec&, const XGrid&, cplx*)>;

    SampledFunction() = default;
    SampledFunction(int n, int m, Eval eval, GridSpec grid = {}, XEval xeval = {});

    cplx operator()(const CVec& zeta, const RVec& x) const { return eval_(zeta, x); }
    cplx operator()(const GroupPoint& p) const { return eval_(p.zeta, p.x); }

    // Samples along an x-grid at fixed zeta; uses a batched evaluator when one exists.
    void sample_x(const CVec& zeta, const XGrid& g, cplx* out) const;

    int n() const { return n_; }
    int m() const { return m_; }
    const GridSpec& grid() const { return grid_; }
    SampledFunction with_grid(const GridSpec& g) const;

private:
    int n_ = 0;
    int m_ = 0;
    Eval eval_;
    GridSpec grid_;
    XEval xeval_;
};

using AmbientEval = std::function<cplx(const CVec&, const CVec&)>;

GroupPoint multiply(const QuadraticModel& model, const GroupPoint& p, const GroupPoint& q);
GroupPoint inverse(const QuadraticModel& model, const GroupPoint& p);
GroupPoint commutator(const QuadraticModel& model, const GroupPoint& p, const GroupPoint& q);
GroupPoint identity(const QuadraticModel& model);

AmbientPoint ambient_multiply(const QuadraticModel& model, const AmbientPoint& a, const AmbientPoint& b);
AmbientPoint embed(const QuadraticModel& model, const GroupPoint& p);

RVec rho(const QuadraticModel& model, const AmbientPoint& a);

// Orthonormal basis (columns) of the common kernel of the A_k.
CMat radical(const QuadraticModel& model);

// Z_v f(p), or its conjugate field, by central differences of step h.
cplx apply_cr_field(const QuadraticModel& model, const CVec& v, const SampledFunction& f,
                    const GroupPoint& p, bool conjugate, double h = 1e-4);

// Same field extended to E x F_C as the left-invariant field of the ambient law.
cplx apply_ambient_cr_field(const QuadraticModel& model, const CVec& v, const AmbientEval& f,
                            const AmbientPoint& a, bool conjugate, double h = 1e-4);

// f_h(zeta, x) = f(zeta, x + i Phi(zeta) + i h).
SampledFunction slice(const QuadraticModel& model, const AmbientEval& f, const RVec& h,
                      GridSpec grid = {});

// Makes the phase of a vector deterministic: largest entry real and positive.
void normalize_phase(CVec& v);
void normalize_phase_columns(CMat& U);

}  // namespace qcr
