#include "qcr/convex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace qcr {

namespace {

// Calls fn(subset) for every k-subset of {0..n-1} in lexicographic order.
template <class F>
void for_each_subset(int n, int k, F&& fn) {
    std::vector<int> idx(k);
    for (int i = 0; i < k; ++i) idx[i] = i;
    if (k > n) return;
    for (;;) {
        fn(idx);
        int i = k - 1;
        while (i >= 0 && idx[i] == n - k + i) --i;
        if (i < 0) return;
        ++idx[i];
        for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

// Kernel direction of a (r-1) x r matrix of full row rank; nullopt otherwise.
std::optional<RVec> kernel_direction(const RMat& M, int r) {
    if (M.rows() == 0) {
        if (r != 1) return std::nullopt;
        return RVec::Ones(1);
    }
    Eigen::JacobiSVD<RMat> svd(M, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    double smax = sv.size() ? sv(0) : 0.0;
    if (smax <= 0.0) return std::nullopt;
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > 1e-10 * smax) ++rank;
    if (rank != r - 1) return std::nullopt;
    return RVec(svd.matrixV().col(r - 1));
}

bool near(const RVec& a, const RVec& b, double tol) { return (a - b).cwiseAbs().maxCoeff() <= tol; }

double scale_of(const std::vector<RVec>& pts) {
    double s = 1.0;
    for (const auto& p : pts) s = std::max(s, p.cwiseAbs().maxCoeff());
    return s;
}

bool lex_less(const RVec& a, const RVec& b) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (a(i) < b(i)) return true;
        if (a(i) > b(i)) return false;
    }
    return false;
}

}  // namespace

ConvexBody::ConvexBody(int m, std::vector<RVec> v, bool cone) : m_(m), is_cone_(cone), vertices_(std::move(v)) {
    for (const auto& p : vertices_) {
        require(p.size() == m_, "convex body: vertex dimension");
        require(p.allFinite(), "convex body: non-finite vertex");
    }
    build();
}

ConvexBody ConvexBody::polytope(std::vector<RVec> vertices) {
    require(!vertices.empty(), "polytope needs at least one vertex");
    int m = int(vertices.front().size());
    return ConvexBody(m, std::move(vertices), false);
}

ConvexBody ConvexBody::cone(std::vector<RVec> generators) {
    require(!generators.empty(), "cone needs at least one generator");
    int m = int(generators.front().size());
    return ConvexBody(m, std::move(generators), true);
}

ConvexBody ConvexBody::empty(int m) { return ConvexBody(m, {}, false); }

ConvexBody ConvexBody::box(const RVec& lo, const RVec& hi) {
    int m = int(lo.size());
    require(hi.size() == m, "box: dimension mismatch");
    std::vector<RVec> v;
    for (int mask = 0; mask < (1 << m); ++mask) {
        RVec p(m);
        for (int d = 0; d < m; ++d) p(d) = (mask >> d) & 1 ? hi(d) : lo(d);
        v.push_back(p);
    }
    return polytope(std::move(v));
}

void ConvexBody::build() {
    if (vertices_.empty()) {
        hull_dim_ = -1;
        return;
    }
    const int V = int(vertices_.size());
    origin_ = is_cone_ ? RVec::Zero(m_) : vertices_.front();
    RMat D(m_, V);
    for (int i = 0; i < V; ++i) D.col(i) = vertices_[i] - origin_;
    double sc = scale_of(vertices_);
    Eigen::JacobiSVD<RMat> svd(D, Eigen::ComputeFullU);
    int r = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > 1e-10 * sc) ++r;
    hull_dim_ = r;
    basis_ = svd.matrixU().leftCols(r);
    if (r == 0) return;

    std::vector<RVec> y(V);
    for (int i = 0; i < V; ++i) y[i] = basis_.transpose() * (vertices_[i] - origin_);
    const double tol = 1e-10 * sc;

    auto add = [&](const RVec& a, double b) {
        for (std::size_t j = 0; j < local_normals_.size(); ++j)
            if (near(local_normals_[j], a, 1e-9) && std::abs(local_offsets_[j] - b) <= 1e-9 * sc) return;
        local_normals_.push_back(a);
        local_offsets_.push_back(b);
    };
    auto try_side = [&](const RVec& a, double b) {
        double hi = -std::numeric_limits<double>::infinity();
        double lo = std::numeric_limits<double>::infinity();
        for (int i = 0; i < V; ++i) {
            double t = a.dot(y[i]) - b;
            hi = std::max(hi, t);
            lo = std::min(lo, t);
        }
        if (hi <= tol) add(a, b);
        if (lo >= -tol) add(-a, -b);
    };

    if (is_cone_) {
        for_each_subset(V, r - 1, [&](const std::vector<int>& s) {
            RMat M(r - 1, r);
            for (int i = 0; i < r - 1; ++i) M.row(i) = y[s[i]].transpose();
            if (auto a = kernel_direction(M, r)) try_side(a->normalized(), 0.0);
        });
    } else {
        for_each_subset(V, r, [&](const std::vector<int>& s) {
            RMat M(r - 1, r);
            for (int i = 1; i < r; ++i) M.row(i - 1) = (y[s[i]] - y[s[0]]).transpose();
            if (auto a = kernel_direction(M, r)) {
                RVec an = a->normalized();
                try_side(an, an.dot(y[s[0]]));
            }
        });
    }
    if (r == m_) {
        for (std::size_t j = 0; j < local_normals_.size(); ++j) {
            RVec nrm = basis_ * local_normals_[j];
            normals_.push_back(nrm);
            offsets_.push_back(local_offsets_[j] + nrm.dot(origin_));
        }
    }
}

bool ConvexBody::contains(const RVec& lambda, double tol) const {
    require(lambda.size() == m_, "contains: dimension mismatch");
    if (vertices_.empty()) return false;
    double sc = std::max(scale_of(vertices_), lambda.cwiseAbs().maxCoeff());
    RVec d = lambda - origin_;
    RVec y = basis_.transpose() * d;
    if ((d - basis_ * y).norm() > tol * sc) return false;
    for (std::size_t j = 0; j < local_normals_.size(); ++j)
        if (local_normals_[j].dot(y) > local_offsets_[j] + tol * sc) return false;
    return true;
}

RVec ConvexBody::bbox_lo() const {
    require(!vertices_.empty() && !is_cone_, "bbox of an empty body or cone");
    RVec lo = vertices_.front();
    for (const auto& v : vertices_) lo = lo.cwiseMin(v);
    return lo;
}

RVec ConvexBody::bbox_hi() const {
    require(!vertices_.empty() && !is_cone_, "bbox of an empty body or cone");
    RVec hi = vertices_.front();
    for (const auto& v : vertices_) hi = hi.cwiseMax(v);
    return hi;
}

double support_function(const ConvexBody& K, const RVec& v) {
    require(v.size() == K.dim(), "support function: dimension mismatch");
    if (K.is_empty()) return -std::numeric_limits<double>::infinity();
    if (K.is_cone()) {
        for (const auto& g : K.vertices())
            if (-g.dot(v) > 1e-14 * g.norm() * v.norm()) return std::numeric_limits<double>::infinity();
        return 0.0;
    }
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& p : K.vertices()) best = std::max(best, -p.dot(v));
    return best;
}

bool PolarBody::contains(const RVec& lambda, double tol) const {
    require(lambda.size() == m, "polar: dimension mismatch");
    double floor = is_cone ? 0.0 : -1.0;
    for (const auto& g : generators)
        if (lambda.dot(g) < floor - tol) return false;
    return true;
}

std::vector<RVec> PolarBody::cone_generators() const {
    if (!is_cone) throw UnsupportedError("explicit generators are provided for polar cones only");
    if (m > 3) throw UnsupportedError("explicit polar generators need m <= 3");
    const int N = int(generators.size());
    RMat G(std::max(N, 1), m);
    G.setZero();
    for (int i = 0; i < N; ++i) G.row(i) = generators[i].transpose();
    Eigen::JacobiSVD<RMat> svd(G, Eigen::ComputeFullV);
    double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    int r = 0;
    if (smax > 0.0)
        for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
            if (svd.singularValues()(i) > 1e-10 * smax) ++r;
    std::vector<RVec> out;
    for (int j = r; j < m; ++j) {
        RVec l = svd.matrixV().col(j);
        out.push_back(l);
        out.push_back(-l);
    }
    if (r == 0) return out;
    RMat P = svd.matrixV().leftCols(r);
    RMat GP = G * P;
    std::vector<RVec> rays;
    auto feasible = [&](const RVec& d) { return (GP * d).minCoeff() >= -1e-12; };
    auto add = [&](const RVec& d) {
        for (const auto& q : rays)
            if (near(q, d, 1e-9)) return;
        rays.push_back(d);
    };
    for_each_subset(N, r - 1, [&](const std::vector<int>& s) {
        RMat M(r - 1, r);
        for (int i = 0; i < r - 1; ++i) M.row(i) = GP.row(s[i]);
        if (auto d = kernel_direction(M, r)) {
            RVec dn = d->normalized();
            if (feasible(dn)) add(dn);
            if (feasible(-dn)) add(-dn);
        }
    });
    for (const auto& d : rays) out.push_back(P * d);
    return out;
}

PolarBody polar(const std::vector<RVec>& generators, bool is_cone) {
    require(!generators.empty(), "polar: need at least one generator");
    PolarBody p;
    p.generators = generators;
    p.is_cone = is_cone;
    p.m = int(generators.front().size());
    return p;
}

std::vector<RVec> vertices_from_halfspaces(const std::vector<RVec>& a, const std::vector<double>& b) {
    require(a.size() == b.size() && !a.empty(), "halfspaces: shape");
    const int m = int(a.front().size());
    const int H = int(a.size());
    double sc = 1.0;
    for (double v : b) sc = std::max(sc, std::abs(v));
    std::vector<RVec> out;
    for_each_subset(H, m, [&](const std::vector<int>& s) {
        RMat M(m, m);
        RVec rhs(m);
        for (int i = 0; i < m; ++i) {
            M.row(i) = a[s[i]].transpose();
            rhs(i) = b[s[i]];
        }
        Eigen::FullPivLU<RMat> lu(M);
        lu.setThreshold(1e-12);
        if (lu.rank() < m) return;
        RVec x = lu.solve(rhs);
        for (int i = 0; i < H; ++i)
            if (a[i].dot(x) > b[i] + 1e-10 * sc) return;
        for (const auto& q : out)
            if (near(q, x, 1e-9 * sc)) return;
        out.push_back(x);
    });
    std::sort(out.begin(), out.end(), lex_less);
    return out;
}

std::vector<RVec> polar_vertices(const std::vector<RVec>& points) {
    std::vector<double> b(points.size(), 1.0);
    std::vector<RVec> a;
    for (const auto& p : points) a.push_back(-p);
    return vertices_from_halfspaces(a, b);
}

double boundary_distance(const ConvexBody& K, const RVec& lambda) {
    if (!K.contains(lambda)) return 0.0;
    if (!K.has_interior()) return 0.0;
    if (K.facet_normals().empty()) return std::numeric_limits<double>::infinity();
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < K.facet_normals().size(); ++j)
        d = std::min(d, K.facet_offsets()[j] - K.facet_normals()[j].dot(lambda));
    return std::max(d, 0.0);
}

ConvexBody erode(const ConvexBody& K, double eps) {
    require(eps > 0.0, "erode: eps > 0");
    require(!K.is_cone(), "erode: polytopes only");
    if (K.is_empty() || !K.has_interior()) return ConvexBody::empty(K.dim());
    std::vector<double> b = K.facet_offsets();
    for (double& v : b) v -= eps;
    auto verts = vertices_from_halfspaces(K.facet_normals(), b);
    if (verts.empty()) return ConvexBody::empty(K.dim());
    return ConvexBody::polytope(std::move(verts));
}

double cone_inequality_constant(const ConvexBody& K, int samples, std::uint64_t seed) {
    require(K.is_cone(), "cone inequality: K must be a cone");
    if (!K.has_interior()) throw UnsupportedError("cone inequality: cone has empty interior");
    require(!K.facet_normals().empty(), "cone inequality: K = F' is excluded");
    auto dual = polar(K.vertices(), true).cone_generators();
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> ex(1.0);
    auto draw = [&](const std::vector<RVec>& gens) {
        RVec v = RVec::Zero(K.dim());
        for (const auto& g : gens) v += ex(rng) * g.normalized();
        return RVec(v.normalized());
    };
    double best = std::numeric_limits<double>::infinity();
    for (int s = 0; s < samples; ++s) {
        RVec lam = draw(K.vertices());
        RVec h = draw(dual);
        double d = boundary_distance(K, lam);
        if (d <= 1e-12) continue;
        best = std::min(best, lam.dot(h) / d);
    }
    return best;
}

ConvexBody project_body(const ConvexBody& K, const RMat& basis) {
    require(basis.rows() == K.dim(), "project_body: basis dimension");
    RMat gram = basis.transpose() * basis;
    require((gram - RMat::Identity(basis.cols(), basis.cols())).cwiseAbs().maxCoeff() <= 1e-10,
            "project_body: basis is not orthonormal");
    if (K.is_empty()) return ConvexBody::empty(int(basis.cols()));
    std::vector<RVec> v;
    for (const auto& p : K.vertices()) v.push_back(basis.transpose() * p);
    return K.is_cone() ? ConvexBody::cone(std::move(v)) : ConvexBody::polytope(std::move(v));
}

namespace {

std::pair<double, double> eig_range(const QuadraticModel& model, const RVec& lambda) {
    Eigen::SelfAdjointEigenSolver<CMat> es(model.A(lambda), Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    double norm = ev.cwiseAbs().maxCoeff();
    return {ev.minCoeff(), 1e-10 * norm};
}

}  // namespace

bool lambda_plus_contains(const QuadraticModel& model, const RVec& lambda) {
    auto [lo, tol] = eig_range(model, lambda);
    return tol > 0.0 && lo > tol;
}

bool P_contains(const QuadraticModel& model, const RVec& lambda) {
    auto [lo, tol] = eig_range(model, lambda);
    return lo >= -tol;
}

}  // namespace qcr
