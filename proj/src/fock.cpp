#include "qcr/fock.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace qcr {

std::vector<MultiIndex> multi_indices(int k, int D) {
    require(k >= 0 && D >= 0, "multi_indices: k, D >= 0");
    std::vector<MultiIndex> out;
    if (k == 0) {
        out.push_back({});
        return out;
    }
    for (int deg = 0; deg <= D; ++deg) {
        MultiIndex a(k, 0);
        // enumerate compositions of deg in descending lexicographic order
        std::function<void(int, int)> rec = [&](int pos, int left) {
            if (pos == k - 1) {
                a[pos] = left;
                out.push_back(a);
                return;
            }
            for (int v = left; v >= 0; --v) {
                a[pos] = v;
                rec(pos + 1, left - v);
            }
        };
        rec(0, deg);
    }
    return out;
}

int FockTruncation::index_of(const MultiIndex& a) const {
    for (int i = 0; i < size(); ++i)
        if (indices[i] == a) return i;
    return -1;
}

std::vector<int> FockTruncation::block(int cap) const {
    std::vector<int> out;
    for (int i = 0; i < size(); ++i) {
        int deg = 0;
        for (int v : indices[i]) deg += v;
        if (deg <= cap) out.push_back(i);
    }
    return out;
}

namespace {

double log_factorial(int a) { return std::lgamma(double(a) + 1.0); }

// Phi_lambda(omega, u_j) from the defining formula, using A(lambda) and J'.
cplx phi_lambda_against(const SpectralData& sd, const CVec& omega, int j) {
    CVec u = sd.basis.col(j);
    cplx first = u.dot(sd.A_lambda * (sd.Jprime * omega));
    cplx second = u.dot(sd.A_lambda * omega);
    return first.imag() + kI * second.imag();
}

}  // namespace

cplx fock_basis_function(const FockTruncation& tr, int i, const CVec& omega) {
    cplx v = 1.0;
    const auto& a = tr.indices[i];
    for (int j = 0; j < tr.k(); ++j)
        if (a[j] > 0) v *= std::pow(phi_lambda_against(tr.spectral, omega, j), a[j]);
    return v / tr.norms[i];
}

CMat fock_gram_by_quadrature(const FockTruncation& tr, int cap, int nodes_per_axis) {
    const SpectralData& sd = tr.spectral;
    const int k = sd.k();
    std::vector<int> blk = tr.block(cap);
    const int B = int(blk.size());
    CMat G = CMat::Zero(B, B);
    if (k == 0) {
        G(0, 0) = 1.0;
        return G;
    }
    const Rule& gh = gauss_hermite(nodes_per_axis);
    const int q = nodes_per_axis;
    std::size_t total = 1;
    for (int ax = 0; ax < 2 * k; ++ax) total *= std::size_t(q);
    std::vector<int> idx(2 * k, 0);
    for (std::size_t t = 0; t < total; ++t) {
        std::size_t r = t;
        for (int ax = 2 * k - 1; ax >= 0; --ax) {
            idx[ax] = int(r % q);
            r /= q;
        }
        CVec omega = CVec::Zero(sd.n());
        double w = 1.0;
        for (int j = 0; j < k; ++j) {
            double s = 1.0 / std::sqrt(2.0 * sd.mu(j));
            double xr = gh.nodes[idx[2 * j]] * s, xi = gh.nodes[idx[2 * j + 1]] * s;
            w *= gh.weights[idx[2 * j]] * gh.weights[idx[2 * j + 1]] * s * s;
            omega += cplx(xr, xi) * sd.basis.col(j);
        }
        std::vector<cplx> vals(B);
        for (int a = 0; a < B; ++a) vals[a] = fock_basis_function(tr, blk[a], omega);
        for (int a = 0; a < B; ++a)
            for (int b = 0; b < B; ++b) G(a, b) += w * vals[b] * std::conj(vals[a]);
    }
    return G;
}

FockTruncation fock_basis(const SpectralData& sd, int D) {
    require(D >= 0, "fock_basis: D >= 0");
    FockTruncation tr;
    tr.spectral = sd;
    tr.D = D;
    tr.indices = multi_indices(sd.k(), D);
    for (const auto& a : tr.indices) {
        double logn2 = 0.0;
        for (int j = 0; j < sd.k(); ++j) {
            double mu = sd.mu(j);
            logn2 += 2.0 * a[j] * std::log(mu) + std::log(kPi) + log_factorial(a[j]) - (a[j] + 1.0) * std::log(2.0 * mu);
        }
        tr.norms.push_back(std::exp(0.5 * logn2));
    }
    if (sd.k() > 0 && sd.k() <= 2) {
        CMat G = fock_gram_by_quadrature(tr, std::min(D, 2));
        double err = (G - CMat::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff();
        if (err > 1e-6) throw NumericalConsistencyError("fock basis: quadrature Gram check failed");
    }
    return tr;
}

CMat displacement_matrix(cplx beta, int D) {
    CMat M(D + 1, D + 1);
    double x = std::norm(beta);
    double e = std::exp(-0.5 * x);
    std::vector<double> L(D + 1);
    for (int k = 0; k <= D; ++k) {
        // generalized Laguerre L_n^{(k)}(x) for n = 0..D-k
        int nmax = D - k;
        L[0] = 1.0;
        if (nmax >= 1) L[1] = 1.0 + k - x;
        for (int n = 1; n < nmax; ++n) L[n + 1] = ((2.0 * n + 1.0 + k - x) * L[n] - (n + k) * L[n - 1]) / (n + 1.0);
        for (int n = 0; n <= nmax; ++n) {
            int m = n + k;
            double ratio = std::exp(0.5 * (log_factorial(n) - log_factorial(m)));
            cplx bp = k == 0 ? cplx(1.0) : std::pow(beta, k);
            cplx bm = k == 0 ? cplx(1.0) : std::pow(-std::conj(beta), k);
            M(m, n) = ratio * bp * e * L[n];
            if (k > 0) M(n, m) = ratio * bm * e * L[n];
        }
    }
    return M;
}

namespace {

cplx central_phase(const SpectralData& sd, const RVec& tau, const GroupPoint& p) {
    require(tau.size() == 2 * sd.d_lambda, "tau must have 2 d_lambda entries");
    double arg = -sd.lambda.dot(p.x);
    if (sd.d_lambda > 0) {
        CVec t = sd.radical_coords(p.zeta);
        for (int l = 0; l < sd.d_lambda; ++l) arg -= tau(2 * l) * t(l).real() + tau(2 * l + 1) * t(l).imag();
    }
    return std::polar(1.0, arg);
}

CMat assemble_tensor(const FockTruncation& tr, const std::vector<CMat>& per_coord, cplx scale) {
    const int S = tr.size();
    CMat out(S, S);
    for (int a = 0; a < S; ++a)
        for (int b = 0; b < S; ++b) {
            cplx v = scale;
            for (int j = 0; j < tr.k(); ++j) v *= per_coord[j](tr.indices[a][j], tr.indices[b][j]);
            out(a, b) = v;
        }
    return out;
}

CMat displacement_by_quadrature(cplx g, int D, int q) {
    const Rule& gh = gauss_hermite(q);
    const int N = q * q;
    CMat P(N, D + 1), Q(N, D + 1);
    CVec w(N);
    double half = 0.5 * std::norm(g);
    for (int i1 = 0; i1 < q; ++i1)
        for (int i2 = 0; i2 < q; ++i2) {
            int r = i1 * q + i2;
            cplx s(gh.nodes[i1], gh.nodes[i2]);
            w(r) = gh.weights[i1] * gh.weights[i2] / kPi * std::exp(s * std::conj(g) - half);
            cplx pb = 1.0, pa = 1.0;
            for (int a = 0; a <= D; ++a) {
                double nf = std::exp(-0.5 * log_factorial(a));
                P(r, a) = pb * nf;
                Q(r, a) = std::conj(pa) * nf;
                pb *= (s - g);
                pa *= s;
            }
        }
    // M(a, b) = sum_r w_r Q(r, a) P(r, b)
    return Q.transpose() * w.asDiagonal() * P;
}

}  // namespace

OperatorMatrix rep_apply(const FockTruncation& tr, const RVec& tau, const GroupPoint& p, int gh_nodes) {
    const SpectralData& sd = tr.spectral;
    require(p.zeta.size() == sd.n(), "rep_apply: point dimension");
    require(p.x.size() == sd.lambda.size(), "rep_apply: point dimension");
    cplx phase = central_phase(sd, tau, p);
    CVec c = sd.coords(p.zeta);
    std::vector<CMat> per;
    for (int j = 0; j < sd.k(); ++j) {
        cplx g = std::sqrt(2.0 * sd.mu(j)) * c(j);
        if (std::abs(g) > 6.0) throw RangeError("rep_apply: point outside the quadrature box");
        per.push_back(displacement_by_quadrature(g, tr.D, gh_nodes));
    }
    return assemble_tensor(tr, per, phase);
}

OperatorMatrix rep_apply_closed_form(const FockTruncation& tr, const RVec& tau, const GroupPoint& p) {
    const SpectralData& sd = tr.spectral;
    cplx phase = central_phase(sd, tau, p);
    CVec c = sd.coords(p.zeta);
    std::vector<CMat> per;
    for (int j = 0; j < sd.k(); ++j) per.push_back(displacement_matrix(std::sqrt(2.0 * sd.mu(j)) * std::conj(c(j)), tr.D));
    return assemble_tensor(tr, per, phase);
}

Rule grid_axis(double L, int count) { return trapezoid(count, -L, L); }

namespace {

// Streaming pairwise (cascade) summation of equally shaped matrices.
class MatrixCascade {
public:
    void add(const CMat& x) {
        block_ = block_.size() ? CMat(block_ + x) : x;
        if (++in_block_ == 32) flush();
    }
    CMat result() {
        flush();
        CMat acc;
        for (auto it = levels_.rbegin(); it != levels_.rend(); ++it) {
            if (!it->has) continue;
            acc = acc.size() ? CMat(acc + it->m) : it->m;
        }
        return acc;
    }

private:
    struct Slot {
        bool has = false;
        CMat m;
    };
    void flush() {
        if (in_block_ == 0) return;
        CMat carry = std::move(block_);
        block_ = CMat();
        in_block_ = 0;
        for (std::size_t lv = 0;; ++lv) {
            if (lv == levels_.size()) levels_.push_back({});
            if (!levels_[lv].has) {
                levels_[lv] = {true, std::move(carry)};
                return;
            }
            carry = levels_[lv].m + carry;
            levels_[lv].has = false;
        }
    }
    CMat block_;
    int in_block_ = 0;
    std::vector<Slot> levels_;
};

// Applies T (n_out x n_in) along one axis of a tensor with `axes` axes of equal input size.
std::vector<cplx> transform_axes(const std::vector<cplx>& in, int axes, int n_in, const CMat& T) {
    std::vector<cplx> cur = in;
    std::vector<int> dims(axes, n_in);
    const int n_out = int(T.rows());
    for (int ax = 0; ax < axes; ++ax) {
        std::size_t outer = 1, inner = 1;
        for (int d = 0; d < ax; ++d) outer *= dims[d];
        for (int d = ax + 1; d < axes; ++d) inner *= dims[d];
        std::vector<cplx> next(outer * n_out * inner, 0.0);
        for (std::size_t o = 0; o < outer; ++o)
            for (int r = 0; r < n_out; ++r)
                for (int s = 0; s < dims[ax]; ++s) {
                    cplx t = T(r, s);
                    const cplx* src = &cur[(o * dims[ax] + s) * inner];
                    cplx* dst = &next[(o * n_out + r) * inner];
                    for (std::size_t i = 0; i < inner; ++i) dst[i] += t * src[i];
                }
        dims[ax] = n_out;
        cur = std::move(next);
    }
    return cur;
}

struct Group {
    CMat basis;
    CMat radical;
    std::vector<int> members;
};

bool same_frame(const SpectralData& a, const CMat& basis, const CMat& radical) {
    if (a.basis.cols() != basis.cols() || a.radical_basis.cols() != radical.cols()) return false;
    if (basis.size() && (a.basis - basis).cwiseAbs().maxCoeff() > 1e-12) return false;
    if (radical.size() && (a.radical_basis - radical).cwiseAbs().maxCoeff() > 1e-12) return false;
    return true;
}

XGrid x_grid_of(const GridSpec& g, int m) {
    XGrid xg;
    xg.origin = RVec::Constant(m, -g.L_F);
    xg.step = RVec::Constant(m, 2.0 * g.L_F / (g.n_F - 1));
    xg.counts.assign(m, g.n_F);
    return xg;
}

std::vector<double> x_weights(const GridSpec& g, int m) {
    Rule ax = grid_axis(g.L_F, g.n_F);
    std::size_t total = 1;
    for (int d = 0; d < m; ++d) total *= g.n_F;
    std::vector<double> w(total, 1.0);
    for (std::size_t i = 0; i < total; ++i) {
        std::size_t r = i;
        for (int d = m - 1; d >= 0; --d) {
            w[i] *= ax.weights[r % g.n_F];
            r /= g.n_F;
        }
    }
    return w;
}

// Index digits of a tensor node with `axes` axes of size q.
void digits(std::size_t t, int axes, int q, std::vector<int>& out) {
    out.assign(axes, 0);
    for (int ax = axes - 1; ax >= 0; --ax) {
        out[ax] = int(t % q);
        t /= q;
    }
}

}  // namespace

FourierBatch pi_of_f_batch(const QuadraticModel& model, const SampledFunction& f, const std::vector<RVec>& lambdas,
                           const Rule& tau_axis, int D) {
    require(f.n() == model.n() && f.m() == model.m(), "pi_of_f: function dimension");
    const int n = model.n(), m = model.m();
    const GridSpec& gs = f.grid();
    FourierBatch out;
    out.lambdas = lambdas;
    out.used.assign(lambdas.size(), false);
    out.pi.resize(lambdas.size());
    out.truncs.resize(lambdas.size());

    GenericDimension gd = generic_dimension(model, 32, 0x5eedULL);
    std::vector<Group> groups;
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (lambdas[i].norm() == 0.0) continue;
        SpectralData sd = spectral_data(model, lambdas[i]);
        if (sd.d_lambda > gd.d) continue;
        out.used[i] = true;
        out.truncs[i] = fock_basis(sd, D);
        bool placed = false;
        for (auto& g : groups)
            if (same_frame(sd, g.basis, g.radical)) {
                g.members.push_back(int(i));
                placed = true;
                break;
            }
        if (!placed) groups.push_back({sd.basis, sd.radical_basis, {int(i)}});
    }

    // tau grid: tensor of tau_axis over the 2d radical axes
    const int d = gd.d;
    const int q_tau = d > 0 ? int(tau_axis.size()) : 1;
    std::size_t n_tau = 1;
    for (int ax = 0; ax < 2 * d; ++ax) n_tau *= q_tau;
    {
        std::vector<int> dig;
        for (std::size_t t = 0; t < n_tau; ++t) {
            digits(t, 2 * d, q_tau, dig);
            RVec tv(2 * d);
            double w = 1.0;
            for (int ax = 0; ax < 2 * d; ++ax) {
                tv(ax) = tau_axis.nodes[dig[ax]];
                w *= tau_axis.weights[dig[ax]];
            }
            out.taus.push_back(tv);
            out.tau_weights.push_back(w);
        }
    }

    const Rule eax = grid_axis(gs.L_E, gs.n_E);
    const int qE = gs.n_E;
    const XGrid xg = x_grid_of(gs, m);
    const std::vector<double> wx = x_weights(gs, m);
    const std::size_t n_x = xg.size();

    double total_mass = 0.0, edge_mass = 0.0;
    bool first_group = true;
    for (const auto& grp : groups) {
        const int k = int(grp.basis.cols());
        const int dd = int(grp.radical.cols());
        const int G = int(grp.members.size());
        std::size_t n_a = 1, n_b = 1;
        for (int ax = 0; ax < 2 * k; ++ax) n_a *= qE;
        for (int ax = 0; ax < 2 * dd; ++ax) n_b *= qE;

        // x -> lambda transform table, weights folded in
        CMat Ex(n_x, G);
        for (std::size_t xi = 0; xi < n_x; ++xi) {
            RVec x = xg.point(xi);
            for (int gi = 0; gi < G; ++gi)
                Ex(Eigen::Index(xi), gi) = wx[xi] * std::polar(1.0, -lambdas[grp.members[gi]].dot(x));
        }
        // radical axis -> tau axis table
        CMat T(q_tau, qE);
        for (int r = 0; r < q_tau; ++r)
            for (int s = 0; s < qE; ++s)
                T(r, s) = dd > 0 ? eax.weights[s] * std::polar(1.0, -tau_axis.nodes[r] * eax.nodes[s]) : cplx(0.0);

        std::vector<std::vector<MatrixCascade>> acc(G, std::vector<MatrixCascade>(n_tau));
        std::vector<int> dig, digb;
        for (std::size_t a = 0; a < n_a; ++a) {
            digits(a, 2 * k, qE, dig);
            CVec zperp = CVec::Zero(n);
            double wa = 1.0;
            bool edge_a = false;
            std::vector<cplx> w_coord(k);
            for (int j = 0; j < k; ++j) {
                double xr = eax.nodes[dig[2 * j]], xi = eax.nodes[dig[2 * j + 1]];
                wa *= eax.weights[dig[2 * j]] * eax.weights[dig[2 * j + 1]];
                edge_a = edge_a || dig[2 * j] == 0 || dig[2 * j] == qE - 1 || dig[2 * j + 1] == 0 ||
                         dig[2 * j + 1] == qE - 1;
                w_coord[j] = cplx(xr, xi);
                zperp += w_coord[j] * grp.basis.col(j);
            }
            CMat S(n_b, n_x);
            std::vector<cplx> row(n_x);
            for (std::size_t b = 0; b < n_b; ++b) {
                digits(b, 2 * dd, qE, digb);
                CVec zeta = zperp;
                double wb = 1.0;
                bool edge_b = false;
                for (int l = 0; l < dd; ++l) {
                    zeta += cplx(eax.nodes[digb[2 * l]], eax.nodes[digb[2 * l + 1]]) * grp.radical.col(l);
                    wb *= eax.weights[digb[2 * l]] * eax.weights[digb[2 * l + 1]];
                    edge_b = edge_b || digb[2 * l] == 0 || digb[2 * l] == qE - 1 || digb[2 * l + 1] == 0 ||
                             digb[2 * l + 1] == qE - 1;
                }
                f.sample_x(zeta, xg, row.data());
                for (std::size_t xi = 0; xi < n_x; ++xi) {
                    if (!std::isfinite(row[xi].real()) || !std::isfinite(row[xi].imag()))
                        throw EvaluationError("pi_of_f: non-finite sample");
                    S(Eigen::Index(b), Eigen::Index(xi)) = row[xi];
                }
                if (first_group) {
                    for (std::size_t xi = 0; xi < n_x; ++xi) {
                        double mass = wa * wb * wx[xi] * std::norm(row[xi]);
                        total_mass += mass;
                        bool edge_x = false;
                        {
                            std::size_t r = xi;
                            for (int dm = 0; dm < m; ++dm) {
                                std::size_t j = r % gs.n_F;
                                r /= gs.n_F;
                                edge_x = edge_x || j == 0 || j == std::size_t(gs.n_F - 1);
                            }
                        }
                        if (edge_a || edge_b || edge_x) edge_mass += mass;
                    }
                }
            }
            CMat Gm = S * Ex;  // n_b x G
            parallel_for(std::size_t(G), [&](std::size_t gi) {
                const int li = grp.members[gi];
                const FockTruncation& tr = out.truncs[li];
                const SpectralData& sd = tr.spectral;
                std::vector<cplx> col(n_b);
                for (std::size_t b = 0; b < n_b; ++b) col[b] = Gm(Eigen::Index(b), Eigen::Index(gi));
                std::vector<cplx> H = dd > 0 ? transform_axes(col, 2 * dd, qE, T) : col;
                std::vector<CMat> per;
                for (int j = 0; j < k; ++j) {
                    cplx c = sd.sign[j] > 0 ? w_coord[j] : std::conj(w_coord[j]);
                    per.push_back(displacement_matrix(std::sqrt(2.0 * sd.mu(j)) * std::conj(c), D));
                }
                CMat Dm = assemble_tensor(tr, per, wa);
                for (std::size_t t = 0; t < n_tau; ++t) acc[gi][t].add(H[t] * Dm);
            });
        }
        for (int gi = 0; gi < G; ++gi) {
            auto& v = out.pi[grp.members[gi]];
            v.resize(n_tau);
            for (std::size_t t = 0; t < n_tau; ++t) v[t] = acc[gi][t].result();
        }
        first_group = false;
    }
    out.l2_norm_sq = total_mass;
    out.tail_fraction = total_mass > 0.0 ? edge_mass / total_mass : 0.0;
    return out;
}

PiResult pi_of_f(const QuadraticModel& model, const FockTruncation& tr, const RVec& tau, const SampledFunction& f) {
    const SpectralData& sd = tr.spectral;
    require(tau.size() == 2 * sd.d_lambda, "pi_of_f: tau must have 2 d_lambda entries");
    // single-node tau grid per radical axis is only possible for isotropic tau; use a direct pass otherwise
    const int n = model.n(), m = model.m();
    const GridSpec& gs = f.grid();
    const Rule eax = grid_axis(gs.L_E, gs.n_E);
    const int qE = gs.n_E;
    const int k = sd.k(), dd = sd.d_lambda;
    const XGrid xg = x_grid_of(gs, m);
    const std::vector<double> wx = x_weights(gs, m);
    const std::size_t n_x = xg.size();
    std::size_t n_a = 1, n_b = 1;
    for (int ax = 0; ax < 2 * k; ++ax) n_a *= qE;
    for (int ax = 0; ax < 2 * dd; ++ax) n_b *= qE;
    std::vector<cplx> ex(n_x);
    for (std::size_t xi = 0; xi < n_x; ++xi) ex[xi] = wx[xi] * std::polar(1.0, -sd.lambda.dot(xg.point(xi)));

    MatrixCascade acc;
    double total = 0.0, edge = 0.0;
    std::vector<int> dig, digb;
    std::vector<cplx> row(n_x);
    for (std::size_t a = 0; a < n_a; ++a) {
        digits(a, 2 * k, qE, dig);
        CVec zperp = CVec::Zero(n);
        double wa = 1.0;
        bool edge_a = false;
        std::vector<CMat> per;
        for (int j = 0; j < k; ++j) {
            cplx w(eax.nodes[dig[2 * j]], eax.nodes[dig[2 * j + 1]]);
            wa *= eax.weights[dig[2 * j]] * eax.weights[dig[2 * j + 1]];
            edge_a = edge_a || dig[2 * j] == 0 || dig[2 * j] == qE - 1 || dig[2 * j + 1] == 0 || dig[2 * j + 1] == qE - 1;
            zperp += w * sd.basis.col(j);
            cplx c = sd.sign[j] > 0 ? w : std::conj(w);
            per.push_back(displacement_matrix(std::sqrt(2.0 * sd.mu(j)) * std::conj(c), tr.D));
        }
        cplx F = 0.0;
        for (std::size_t b = 0; b < n_b; ++b) {
            digits(b, 2 * dd, qE, digb);
            CVec zeta = zperp;
            double wb = 1.0, arg = 0.0;
            bool edge_b = false;
            for (int l = 0; l < dd; ++l) {
                double s1 = eax.nodes[digb[2 * l]], s2 = eax.nodes[digb[2 * l + 1]];
                zeta += cplx(s1, s2) * sd.radical_basis.col(l);
                wb *= eax.weights[digb[2 * l]] * eax.weights[digb[2 * l + 1]];
                arg -= tau(2 * l) * s1 + tau(2 * l + 1) * s2;
                edge_b = edge_b || digb[2 * l] == 0 || digb[2 * l] == qE - 1 || digb[2 * l + 1] == 0 ||
                         digb[2 * l + 1] == qE - 1;
            }
            f.sample_x(zeta, xg, row.data());
            cplx s = 0.0;
            for (std::size_t xi = 0; xi < n_x; ++xi) {
                s += row[xi] * ex[xi];
                double mass = wa * wb * wx[xi] * std::norm(row[xi]);
                total += mass;
                if (edge_a || edge_b) edge += mass;
            }
            F += wb * std::polar(1.0, arg) * s;
        }
        acc.add(assemble_tensor(tr, per, wa * F));
    }
    PiResult r;
    r.matrix = acc.result();
    r.tail_fraction = total > 0.0 ? edge / total : 0.0;
    r.tail_warning = r.tail_fraction > 1e-8;
    return r;
}

PlancherelResult plancherel_residual(const QuadraticModel& model, const SampledFunction& f, const Rule& lambda_rule,
                                     const Rule& tau_axis, int D) {
    const int n = model.n(), m = model.m();
    PlancherelResult res;
    std::vector<RVec> lambdas;
    std::vector<double> lw;
    {
        const int q = int(lambda_rule.size());
        std::size_t total = 1;
        for (int d = 0; d < m; ++d) total *= q;
        std::vector<int> dig;
        for (std::size_t t = 0; t < total; ++t) {
            digits(t, m, q, dig);
            RVec lam(m);
            double w = 1.0;
            for (int d = 0; d < m; ++d) {
                lam(d) = lambda_rule.nodes[dig[d]];
                w *= lambda_rule.weights[dig[d]];
            }
            lambdas.push_back(lam);
            lw.push_back(w);
        }
    }
    FourierBatch fb = pi_of_f_batch(model, f, lambdas, tau_axis, D);
    GenericDimension gd = generic_dimension(model, 32, 0x5eedULL);
    res.generic_d = gd.d;
    res.constant = std::pow(2.0, n - m - 3 * gd.d) / std::pow(kPi, n + m + gd.d);

    // left side on the standard grid, independent of the adapted frames
    {
        const GridSpec& gs = f.grid();
        const Rule eax = grid_axis(gs.L_E, gs.n_E);
        const XGrid xg = x_grid_of(gs, m);
        const std::vector<double> wx = x_weights(gs, m);
        std::size_t n_z = 1;
        for (int ax = 0; ax < 2 * n; ++ax) n_z *= gs.n_E;
        std::vector<double> parts(n_z);
        std::vector<int> dig;
        std::vector<cplx> row(xg.size());
        for (std::size_t zi = 0; zi < n_z; ++zi) {
            digits(zi, 2 * n, gs.n_E, dig);
            CVec zeta(n);
            double w = 1.0;
            for (int j = 0; j < n; ++j) {
                zeta(j) = cplx(eax.nodes[dig[2 * j]], eax.nodes[dig[2 * j + 1]]);
                w *= eax.weights[dig[2 * j]] * eax.weights[dig[2 * j + 1]];
            }
            f.sample_x(zeta, xg, row.data());
            std::vector<double> terms(row.size());
            for (std::size_t xi = 0; xi < row.size(); ++xi) terms[xi] = wx[xi] * std::norm(row[xi]);
            parts[zi] = w * pairwise_sum(terms);
        }
        res.lhs = pairwise_sum(parts);
    }

    std::vector<double> contrib(lambdas.size(), 0.0);
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (!fb.used[i]) continue;
        std::vector<double> tv(fb.taus.size());
        for (std::size_t t = 0; t < fb.taus.size(); ++t) tv[t] = fb.tau_weights[t] * fb.pi[i][t].squaredNorm();
        contrib[i] = lw[i] * fb.truncs[i].spectral.pfaffian * pairwise_sum(tv);
    }
    res.rhs = res.constant * pairwise_sum(contrib);
    res.tail_fraction = fb.tail_fraction;
    res.tail_warning = fb.tail_fraction > 1e-8;
    res.residual = res.lhs > 0.0 ? std::abs(res.lhs - res.rhs) / res.lhs : 0.0;
    return res;
}

SampledFunction group_convolve(const QuadraticModel& model, const SampledFunction& f, const SampledFunction& g) {
    require(f.n() == model.n() && g.n() == model.n() && f.m() == model.m() && g.m() == model.m(),
            "group_convolve: dimensions");
    auto eval = [model, f, g](const CVec& zp, const RVec& xp) -> cplx {
        const int n = model.n(), m = model.m();
        const GridSpec& gs = g.grid();
        const Rule eax = grid_axis(gs.L_E, gs.n_E);
        const XGrid xg = x_grid_of(gs, m);
        const std::vector<double> wx = x_weights(gs, m);
        std::size_t n_z = 1;
        for (int ax = 0; ax < 2 * n; ++ax) n_z *= gs.n_E;
        std::vector<cplx> parts(n_z);
        std::vector<int> dig;
        std::vector<cplx> gr(xg.size()), fr(xg.size());
        for (std::size_t zi = 0; zi < n_z; ++zi) {
            digits(zi, 2 * n, gs.n_E, dig);
            CVec zr(n);
            double w = 1.0;
            for (int j = 0; j < n; ++j) {
                zr(j) = cplx(eax.nodes[dig[2 * j]], eax.nodes[dig[2 * j + 1]]);
                w *= eax.weights[dig[2 * j]] * eax.weights[dig[2 * j + 1]];
            }
            g.sample_x(zr, xg, gr.data());
            // p r^{-1} = (zp - zr, xp - xr - 2 Im Phi(zp, zr)); x runs backwards along the grid
            XGrid fx = xg;
            fx.origin = xp - 2.0 * model.phi(zp, zr).imag() - xg.origin;
            fx.step = -xg.step;
            f.sample_x(zp - zr, fx, fr.data());
            std::vector<cplx> terms(xg.size());
            for (std::size_t xi = 0; xi < xg.size(); ++xi) terms[xi] = wx[xi] * fr[xi] * gr[xi];
            parts[zi] = w * pairwise_sum(terms);
        }
        return pairwise_sum(parts);
    };
    return SampledFunction(model.n(), model.m(), eval, f.grid());
}

}  // namespace qcr
