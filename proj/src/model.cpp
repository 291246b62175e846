#include "qcr/model.hpp"

#include <cmath>

namespace qcr {

QuadraticModel::QuadraticModel(int n, std::vector<CMat> coeffs) : n_(n), m_(int(coeffs.size())), A_(std::move(coeffs)) {
    require(n_ >= 1, "model: n >= 1");
    require(m_ >= 1, "model: m >= 1");
    for (const auto& a : A_) {
        require(a.rows() == n_ && a.cols() == n_, "model: coefficient shape");
        double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
        require((a - a.adjoint()).cwiseAbs().maxCoeff() <= 1e-14 * scale, "model: coefficient not Hermitian");
    }
}

QuadraticModel QuadraticModel::heisenberg() {
    return QuadraticModel(1, {CMat::Identity(1, 1)});
}

QuadraticModel QuadraticModel::zero(int n, int m) {
    return QuadraticModel(n, std::vector<CMat>(m, CMat::Zero(n, n)));
}

CMat QuadraticModel::A(const RVec& lambda) const {
    check_covector(lambda);
    CMat out = CMat::Zero(n_, n_);
    for (int k = 0; k < m_; ++k) out += lambda(k) * A_[k];
    return 0.5 * (out + out.adjoint());
}

CVec QuadraticModel::phi(const CVec& z, const CVec& w) const {
    CVec out(m_);
    for (int k = 0; k < m_; ++k) out(k) = w.dot(A_[k] * z);
    return out;
}

RVec QuadraticModel::phi(const CVec& z) const {
    RVec out(m_);
    for (int k = 0; k < m_; ++k) out(k) = z.dot(A_[k] * z).real();
    return out;
}

double QuadraticModel::max_coeff_norm() const {
    double s = 0.0;
    for (const auto& a : A_) s = std::max(s, a.operatorNorm());
    return s;
}

void QuadraticModel::check(const GroupPoint& p) const {
    require(p.zeta.size() == n_ && p.x.size() == m_, "group point dimension mismatch");
}

void QuadraticModel::check(const AmbientPoint& a) const {
    require(a.zeta.size() == n_ && a.z.size() == m_, "ambient point dimension mismatch");
}

void QuadraticModel::check_covector(const RVec& lambda) const {
    require(lambda.size() == m_, "covector dimension mismatch");
}

void GridSpec::validate() const {
    require(L_E > 0 && L_F > 0 && n_E > 1 && n_F > 1, "grid spec must be strictly positive");
}

std::size_t XGrid::size() const {
    std::size_t s = 1;
    for (int c : counts) s *= std::size_t(c);
    return s;
}

RVec XGrid::point(std::size_t idx) const {
    int m = int(counts.size());
    RVec x(m);
    for (int d = m - 1; d >= 0; --d) {
        std::size_t j = idx % std::size_t(counts[d]);
        idx /= std::size_t(counts[d]);
        x(d) = origin(d) + step(d) * double(j);
    }
    return x;
}

SampledFunction::SampledFunction(int n, int m, Eval eval, GridSpec grid, XEval xeval)
    : n_(n), m_(m), eval_(std::move(eval)), grid_(grid), xeval_(std::move(xeval)) {
    grid_.validate();
    require(bool(eval_), "sampled function needs an evaluator");
}

void SampledFunction::sample_x(const CVec& zeta, const XGrid& g, cplx* out) const {
    if (xeval_) {
        xeval_(zeta, g, out);
        return;
    }
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = eval_(zeta, g.point(i));
}

SampledFunction SampledFunction::with_grid(const GridSpec& g) const {
    SampledFunction f = *this;
    g.validate();
    f.grid_ = g;
    return f;
}

GroupPoint multiply(const QuadraticModel& model, const GroupPoint& p, const GroupPoint& q) {
    model.check(p);
    model.check(q);
    return {p.zeta + q.zeta, p.x + q.x + 2.0 * model.phi(p.zeta, q.zeta).imag()};
}

GroupPoint inverse(const QuadraticModel& model, const GroupPoint& p) {
    model.check(p);
    return {-p.zeta, -p.x};
}

GroupPoint commutator(const QuadraticModel& model, const GroupPoint& p, const GroupPoint& q) {
    model.check(p);
    model.check(q);
    return {CVec::Zero(model.n()), 4.0 * model.phi(p.zeta, q.zeta).imag()};
}

GroupPoint identity(const QuadraticModel& model) {
    return {CVec::Zero(model.n()), RVec::Zero(model.m())};
}

AmbientPoint ambient_multiply(const QuadraticModel& model, const AmbientPoint& a, const AmbientPoint& b) {
    model.check(a);
    model.check(b);
    return {a.zeta + b.zeta, a.z + b.z + 2.0 * kI * model.phi(b.zeta, a.zeta)};
}

AmbientPoint embed(const QuadraticModel& model, const GroupPoint& p) {
    model.check(p);
    return {p.zeta, p.x.cast<cplx>() + kI * model.phi(p.zeta).cast<cplx>()};
}

RVec rho(const QuadraticModel& model, const AmbientPoint& a) {
    model.check(a);
    return a.z.imag() - model.phi(a.zeta);
}

void normalize_phase(CVec& v) {
    if (v.size() == 0) return;
    Eigen::Index idx = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        // earliest index wins among near-ties so the choice is stable
        if (std::abs(v(i)) > best + 1e-12) {
            best = std::abs(v(i));
            idx = i;
        }
    }
    if (best <= 0.0) return;
    v *= std::conj(v(idx)) / std::abs(v(idx));
}

void normalize_phase_columns(CMat& U) {
    for (Eigen::Index j = 0; j < U.cols(); ++j) {
        CVec c = U.col(j);
        normalize_phase(c);
        U.col(j) = c;
    }
}

CMat radical(const QuadraticModel& model) {
    int n = model.n(), m = model.m();
    CMat S(n * m, n);
    for (int k = 0; k < m; ++k) S.block(k * n, 0, n, n) = model.coeffs()[k];
    Eigen::JacobiSVD<CMat> svd(S, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    double smax = sv.size() ? sv(0) : 0.0;
    int rank = 0;
    if (smax > 0.0) {
        for (Eigen::Index i = 0; i < sv.size(); ++i)
            if (sv(i) > 1e-10 * smax) ++rank;
    }
    CMat basis = svd.matrixV().rightCols(n - rank);
    normalize_phase_columns(basis);
    return basis;
}

namespace {

cplx checked(cplx v) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw EvaluationError("non-finite function value");
    return v;
}

}  // namespace

cplx apply_cr_field(const QuadraticModel& model, const CVec& v, const SampledFunction& f,
                    const GroupPoint& p, bool conjugate, double h) {
    model.check(p);
    require(v.size() == model.n(), "cr field: direction dimension");
    require(h > 0.0 && h <= 1e-2, "cr field: step must lie in (0, 1e-2]");
    auto dz = [&](const CVec& w) {
        return (checked(f(p.zeta + h * w, p.x)) - checked(f(p.zeta - h * w, p.x))) / (2.0 * h);
    };
    auto dx = [&](const RVec& w) {
        return (checked(f(p.zeta, p.x + h * w)) - checked(f(p.zeta, p.x - h * w))) / (2.0 * h);
    };
    CVec ph = model.phi(p.zeta, v);
    cplx d_v = dz(v), d_iv = dz(kI * v);
    cplx d_re = dx(ph.real()), d_im = dx(ph.imag());
    if (conjugate) return 0.5 * (d_v + kI * d_iv) - kI * d_re + d_im;
    return 0.5 * (d_v - kI * d_iv) + kI * d_re + d_im;
}

cplx apply_ambient_cr_field(const QuadraticModel& model, const CVec& v, const AmbientEval& f,
                            const AmbientPoint& a, bool conjugate, double h) {
    model.check(a);
    require(v.size() == model.n(), "cr field: direction dimension");
    require(h > 0.0 && h <= 1e-2, "cr field: step must lie in (0, 1e-2]");
    // X_w f(a) = d/dt f(a . (t w, 0)) at t = 0
    auto X = [&](const CVec& w) {
        AmbientPoint fwd = ambient_multiply(model, a, {h * w, CVec::Zero(model.m())});
        AmbientPoint bwd = ambient_multiply(model, a, {-h * w, CVec::Zero(model.m())});
        return (checked(f(fwd.zeta, fwd.z)) - checked(f(bwd.zeta, bwd.z))) / (2.0 * h);
    };
    cplx xv = X(v), xiv = X(kI * v);
    return conjugate ? 0.5 * (xv + kI * xiv) : 0.5 * (xv - kI * xiv);
}

SampledFunction slice(const QuadraticModel& model, const AmbientEval& f, const RVec& h, GridSpec grid) {
    require(h.size() == model.m(), "slice: height dimension");
    return SampledFunction(
        model.n(), model.m(),
        [model, f, h](const CVec& zeta, const RVec& x) {
            CVec z = x.cast<cplx>() + kI * (model.phi(zeta) + h).cast<cplx>();
            return f(zeta, z);
        },
        grid);
}

}  // namespace qcr
