#include "lrlab/dynamics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace lrlab::dynamics {

using lattice::Site;

// ---------------------------------------------------------------------------
// spectral helpers

Spectrum hermitian_eig(const Mat& h) {
    const double scale = std::max(1.0, fock::max_abs(h));
    if (fock::max_abs(Mat(h - h.adjoint())) > 1e-10 * scale)
        throw std::invalid_argument("hermitian_eig: matrix is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    return {es.eigenvalues(), es.eigenvectors()};
}

FockOperator generator(const FockOperator& H, const FockOperator& B) {
    return fock::scale(Cplx(0.0, 1.0), fock::commutator(H, B));
}

namespace {

bool conserves_number(const Mat& h) {
    const double scale = std::max(1.0, fock::max_abs(h));
    for (Eigen::Index i = 0; i < h.rows(); ++i)
        for (Eigen::Index j = 0; j < h.cols(); ++j) {
            if (std::popcount(static_cast<std::size_t>(i)) ==
                std::popcount(static_cast<std::size_t>(j)))
                continue;
            if (std::abs(h(i, j)) > 1e-12 * scale) return false;
        }
    return true;
}

}  // namespace

// ---------------------------------------------------------------------------
// Evolution

Evolution::Evolution(FockOperator H) : ctx_(H.ctx) {
    const double scale = std::max(1.0, fock::max_abs(H));
    if (fock::max_abs(Mat(H.m - H.m.adjoint())) > 1e-10 * scale)
        throw std::invalid_argument("Evolution: Hamiltonian is not Hermitian");

    const std::size_t dim = ctx_.dim();
    if (dim >= 256 && conserves_number(H.m)) {
        const int n = ctx_.n();
        for (int p = 0; p <= n; ++p) {
            Sector sec;
            for (std::size_t b = 0; b < dim; ++b)
                if (std::popcount(b) == p) sec.idx.push_back(static_cast<Eigen::Index>(b));
            const auto sz = static_cast<Eigen::Index>(sec.idx.size());
            Mat hp(sz, sz);
            for (Eigen::Index i = 0; i < sz; ++i)
                for (Eigen::Index j = 0; j < sz; ++j) hp(i, j) = H.m(sec.idx[static_cast<std::size_t>(i)], sec.idx[static_cast<std::size_t>(j)]);
            Eigen::SelfAdjointEigenSolver<Mat> es(hp);
            sec.evals = es.eigenvalues();
            sec.evecs = es.eigenvectors();
            sectors_.push_back(std::move(sec));
        }
    } else {
        spec_ = hermitian_eig(H.m);
        spec_ready_ = true;
    }
}

const Spectrum& Evolution::spectrum() const {
    if (!spec_ready_) {
        // assemble the dense spectral data from the sector blocks
        const auto dim = static_cast<Eigen::Index>(ctx_.dim());
        spec_.evals.resize(dim);
        spec_.evecs = Mat::Zero(dim, dim);
        Eigen::Index col = 0;
        for (const auto& sec : sectors_) {
            for (Eigen::Index j = 0; j < sec.evals.size(); ++j, ++col) {
                spec_.evals(col) = sec.evals(j);
                for (std::size_t i = 0; i < sec.idx.size(); ++i)
                    spec_.evecs(sec.idx[i], col) = sec.evecs(static_cast<Eigen::Index>(i), j);
            }
        }
        spec_ready_ = true;
    }
    return spec_;
}

Mat Evolution::unitary(double t) const {
    const auto dim = static_cast<Eigen::Index>(ctx_.dim());
    if (sectors_.empty()) {
        const Spectrum& sp = spec_;
        Eigen::VectorXcd ph(sp.evals.size());
        for (Eigen::Index i = 0; i < sp.evals.size(); ++i)
            ph(i) = std::polar(1.0, -t * sp.evals(i));
        return sp.evecs * ph.asDiagonal() * sp.evecs.adjoint();
    }
    Mat u = Mat::Zero(dim, dim);
    for (const auto& sec : sectors_) {
        Eigen::VectorXcd ph(sec.evals.size());
        for (Eigen::Index i = 0; i < sec.evals.size(); ++i)
            ph(i) = std::polar(1.0, -t * sec.evals(i));
        const Mat up = sec.evecs * ph.asDiagonal() * sec.evecs.adjoint();
        for (std::size_t i = 0; i < sec.idx.size(); ++i)
            for (std::size_t j = 0; j < sec.idx.size(); ++j)
                u(sec.idx[i], sec.idx[j]) = up(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    return u;
}

FockOperator Evolution::heisenberg(const FockOperator& B, double t) const {
    FockOperator Bw = (B.ctx == ctx_) ? B : fock::embed(B, ctx_);
    if (sectors_.empty()) {
        const Mat u = unitary(t);
        return {ctx_, u.adjoint() * Bw.m * u};
    }
    // W^H B W with block-diagonal W: rows then columns, sector by sector
    Mat tmp = Bw.m;
    for (const auto& sec : sectors_) {
        Eigen::VectorXcd ph(sec.evals.size());
        for (Eigen::Index i = 0; i < sec.evals.size(); ++i)
            ph(i) = std::polar(1.0, -t * sec.evals(i));
        const Mat wp = sec.evecs * ph.asDiagonal() * sec.evecs.adjoint();
        const auto sz = static_cast<Eigen::Index>(sec.idx.size());
        Mat rows(sz, tmp.cols());
        for (Eigen::Index i = 0; i < sz; ++i) rows.row(i) = tmp.row(sec.idx[static_cast<std::size_t>(i)]);
        rows = wp.adjoint() * rows;
        for (Eigen::Index i = 0; i < sz; ++i) tmp.row(sec.idx[static_cast<std::size_t>(i)]) = rows.row(i);
    }
    for (const auto& sec : sectors_) {
        Eigen::VectorXcd ph(sec.evals.size());
        for (Eigen::Index i = 0; i < sec.evals.size(); ++i)
            ph(i) = std::polar(1.0, -t * sec.evals(i));
        const Mat wp = sec.evecs * ph.asDiagonal() * sec.evecs.adjoint();
        const auto sz = static_cast<Eigen::Index>(sec.idx.size());
        Mat cols(tmp.rows(), sz);
        for (Eigen::Index j = 0; j < sz; ++j) cols.col(j) = tmp.col(sec.idx[static_cast<std::size_t>(j)]);
        cols = cols * wp;
        for (Eigen::Index j = 0; j < sz; ++j) tmp.col(sec.idx[static_cast<std::size_t>(j)]) = cols.col(j);
    }
    return {ctx_, std::move(tmp)};
}

FockOperator evolve_heisenberg(const FockOperator& H, const FockOperator& B, double t) {
    return Evolution(H).heisenberg(B, t);
}

// ---------------------------------------------------------------------------
// Gibbs

GibbsState gibbs_state(const FockOperator& H, double beta) {
    if (beta < 0.0) throw std::invalid_argument("gibbs_state: beta >= 0");
    GibbsState g;
    g.ctx = H.ctx;
    g.beta = beta;
    g.spec = hermitian_eig(H.m);
    const Eigen::Index dim = g.spec.evals.size();
    g.p.resize(dim);
    const double e0 = g.spec.evals.minCoeff();
    double z = 0.0;
    for (Eigen::Index i = 0; i < dim; ++i) {
        g.p(i) = std::exp(-beta * (g.spec.evals(i) - e0));
        z += g.p(i);
    }
    g.p /= z;
    return g;
}

double GibbsState::value(const FockOperator& B) const {
    FockOperator Bw = (B.ctx == ctx) ? B : fock::embed(B, ctx);
    const Mat in_basis = spec.evecs.adjoint() * Bw.m * spec.evecs;
    double v = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) v += p(i) * in_basis(i, i).real();
    return v;
}

// ---------------------------------------------------------------------------
// non-autonomous propagator (CF4 commutator-free Magnus)

Protocol constant_protocol(const FockOperator& H) {
    Mat m = H.m;
    return {H.ctx, [m](double) { return m; }};
}

Protocol interaction_protocol(const interactions::TimeInteraction& psi,
                              const interactions::Potential& V, const Context& ctx) {
    return interaction_protocol(psi, V, ctx.sites(), ctx);
}

Protocol interaction_protocol(const interactions::TimeInteraction& psi,
                              const interactions::Potential& V,
                              const std::vector<Site>& region, const Context& ctx) {
    const std::vector<interactions::Drive> drives = psi.drives;
    const Mat h0 = interactions::hamiltonian(psi.static_part, V, region, ctx).m;
    std::vector<Mat> drive_mats;
    drive_mats.reserve(drives.size());
    for (const auto& d : drives)
        drive_mats.push_back(
            interactions::hamiltonian(d.part, interactions::Potential{}, region, ctx).m);
    return {ctx, [h0, drives, drive_mats](double t) {
                Mat h = h0;
                for (std::size_t i = 0; i < drives.size(); ++i) {
                    const double f = drives[i].value(t);
                    if (f != 0.0) h += f * drive_mats[i];
                }
                return h;
            }};
}

namespace {

Mat expm_herm(const Mat& a, double factor) {
    // exp(i * factor * a) for Hermitian a
    Eigen::SelfAdjointEigenSolver<Mat> es(a);
    Eigen::VectorXcd ph(es.eigenvalues().size());
    for (Eigen::Index i = 0; i < ph.size(); ++i)
        ph(i) = std::polar(1.0, factor * es.eigenvalues()(i));
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

Mat cf4_sweep(const Protocol& pr, double s, double t, int steps) {
    // one CF4 step: U = exp(-ih(a1 A1 + a2 A2)) exp(-ih(a2 A1 + a1 A2)),
    // A_{1,2} = H at the two Gauss-Legendre nodes of the step
    static const double sq3 = std::sqrt(3.0);
    const double a1 = (3.0 - 2.0 * sq3) / 12.0;
    const double a2 = (3.0 + 2.0 * sq3) / 12.0;
    const double c1 = 0.5 - sq3 / 6.0;
    const double c2 = 0.5 + sq3 / 6.0;
    const auto dim = static_cast<Eigen::Index>(pr.ctx.dim());
    Mat u = Mat::Identity(dim, dim);
    const double h = (t - s) / steps;
    for (int k = 0; k < steps; ++k) {
        const double t0 = s + k * h;
        const Mat A1 = pr.h(t0 + c1 * h);
        const Mat A2 = pr.h(t0 + c2 * h);
        const Mat left = expm_herm(a1 * A1 + a2 * A2, -h);
        const Mat right = expm_herm(a2 * A1 + a1 * A2, -h);
        u = left * right * u;
    }
    return u;
}

}  // namespace

PropagatorResult propagator(const Protocol& pr, double s, double t, double tol) {
    const auto dim = static_cast<Eigen::Index>(pr.ctx.dim());
    if (s == t) return {Mat::Identity(dim, dim), 0.0, 0};
    const double span = std::abs(t - s);
    int steps = std::max(1, static_cast<int>(std::ceil(span / 0.25)));
    Mat u = cf4_sweep(pr, s, t, steps);
    for (int level = 0; level < 14; ++level) {
        const Mat u2 = cf4_sweep(pr, s, t, 2 * steps);
        const double defect = fock::spectral_norm(Mat(u - u2));
        if (defect <= tol * std::max(1.0, span)) return {u2, defect, 2 * steps};
        u = u2;
        steps *= 2;
    }
    throw std::runtime_error("propagator: step halving failed to reach tolerance");
}

FockOperator evolve_nonautonomous(const Protocol& pr, const FockOperator& B, double s,
                                  double t, double tol) {
    const Mat u = propagator(pr, s, t, tol).u;
    FockOperator Bw = (B.ctx == pr.ctx) ? B : fock::embed(B, pr.ctx);
    return {pr.ctx, u.adjoint() * Bw.m * u};
}

// ---------------------------------------------------------------------------
// Dyson-Phillips series (iterated Gauss-Legendre with interpolation)

namespace {

// 16-point Gauss-Legendre nodes/weights on [0,1]
struct GL16 {
    std::array<double, 16> x, w;
    GL16() {
        static const double xs[8] = {0.0950125098376374, 0.2816035507792589,
                                     0.4580167776572274, 0.6178762444026438,
                                     0.7554044083550030, 0.8656312023878318,
                                     0.9445750230732326, 0.9894009349916499};
        static const double ws[8] = {0.1894506104550685, 0.1826034150449236,
                                     0.1691565193950025, 0.1495959888165767,
                                     0.1246289712555339, 0.0951585116824928,
                                     0.0622535239386479, 0.0271524594117541};
        for (int i = 0; i < 8; ++i) {
            x[static_cast<std::size_t>(7 - i)] = 0.5 * (1.0 - xs[i]);
            x[static_cast<std::size_t>(8 + i)] = 0.5 * (1.0 + xs[i]);
            w[static_cast<std::size_t>(7 - i)] = 0.5 * ws[i];
            w[static_cast<std::size_t>(8 + i)] = 0.5 * ws[i];
        }
    }
};

const GL16& gl16() {
    static const GL16 g;
    return g;
}

// Lagrange basis weights for interpolation from the GL nodes (barycentric form)
std::array<double, 16> lagrange_weights(const std::array<double, 16>& nodes, double xq) {
    std::array<double, 16> lw{};
    for (int i = 0; i < 16; ++i) {
        if (std::abs(xq - nodes[static_cast<std::size_t>(i)]) < 1e-15) {
            lw.fill(0.0);
            lw[static_cast<std::size_t>(i)] = 1.0;
            return lw;
        }
    }
    std::array<double, 16> bw{};
    for (int i = 0; i < 16; ++i) {
        double prod = 1.0;
        for (int j = 0; j < 16; ++j)
            if (j != i) prod *= nodes[static_cast<std::size_t>(i)] - nodes[static_cast<std::size_t>(j)];
        bw[static_cast<std::size_t>(i)] = 1.0 / prod;
    }
    double denom = 0.0;
    for (int i = 0; i < 16; ++i) {
        lw[static_cast<std::size_t>(i)] = bw[static_cast<std::size_t>(i)] / (xq - nodes[static_cast<std::size_t>(i)]);
        denom += lw[static_cast<std::size_t>(i)];
    }
    for (auto& v : lw) v /= denom;
    return lw;
}

}  // namespace

std::vector<Mat> dyson_phillips_terms(const Protocol& pr, double s, double t, int order) {
    if (order < 0) throw std::invalid_argument("dyson_phillips_terms: order >= 0");
    const auto dim = static_cast<Eigen::Index>(pr.ctx.dim());
    const auto& g = gl16();
    const double span = t - s;

    // node positions in [s,t] and H there
    std::array<double, 16> un{};
    std::vector<Mat> h_at(16);
    for (int i = 0; i < 16; ++i) {
        un[static_cast<std::size_t>(i)] = s + span * g.x[static_cast<std::size_t>(i)];
        h_at[static_cast<std::size_t>(i)] = pr.h(un[static_cast<std::size_t>(i)]);
    }

    std::vector<Mat> terms;
    terms.push_back(Mat::Identity(dim, dim));  // G_0 = 1, term (-i)^0 G_0
    if (order == 0) return terms;

    // G_j at the 16 nodes; G_0 = identity everywhere
    std::vector<Mat> gj(16, Mat::Identity(dim, dim));
    Cplx phase(1.0, 0.0);
    for (int j = 1; j <= order; ++j) {
        // integrand values at nodes: H(u_i) G_{j-1}(u_i)
        std::vector<Mat> integ(16);
        for (int i = 0; i < 16; ++i) integ[static_cast<std::size_t>(i)] = h_at[static_cast<std::size_t>(i)] * gj[static_cast<std::size_t>(i)];

        auto integral_to = [&](double u) {
            // int_s^u H(w) G_{j-1}(w) dw by GL16 on [s,u], interpolating the
            // integrand from its node values (analytic in w, so spectrally accurate)
            Mat acc = Mat::Zero(dim, dim);
            const double len = u - s;
            for (int q = 0; q < 16; ++q) {
                const double wq = s + len * g.x[static_cast<std::size_t>(q)];
                const double xq = (wq - s) / span;  // position in [0,1] of the master nodes
                const auto lw = lagrange_weights(g.x, xq);
                Mat val = Mat::Zero(dim, dim);
                for (int r = 0; r < 16; ++r)
                    if (lw[static_cast<std::size_t>(r)] != 0.0) val += lw[static_cast<std::size_t>(r)] * integ[static_cast<std::size_t>(r)];
                acc += (len * g.w[static_cast<std::size_t>(q)]) * val;
            }
            return acc;
        };

        std::vector<Mat> gj_next(16);
        for (int i = 0; i < 16; ++i) gj_next[static_cast<std::size_t>(i)] = integral_to(un[static_cast<std::size_t>(i)]);
        const Mat gj_t = integral_to(t);
        phase *= Cplx(0.0, -1.0);
        terms.push_back(phase * gj_t);
        gj = std::move(gj_next);
    }
    return terms;
}

Mat dyson_phillips(const Protocol& pr, double s, double t, int order) {
    const auto terms = dyson_phillips_terms(pr, s, t, order);
    Mat sum = terms.front();
    for (std::size_t j = 1; j < terms.size(); ++j) sum += terms[j];
    return sum;
}

// ---------------------------------------------------------------------------
// interaction picture

FockOperator interaction_picture_evolve(const Protocol& full, const Protocol& pot,
                                        const FockOperator& B, double s, double t,
                                        double tol) {
    // tilde-tau_{t,s}(B) = V_{s,t}(H) V_{t,s}(V) B V_{s,t}(V) V_{t,s}(H) with
    // V_{s,t}(X) the adjoint of the X-propagator from s to t
    const Mat uh = propagator(full, s, t, tol).u;
    const Mat uv = propagator(pot, s, t, tol).u;
    FockOperator Bw = (B.ctx == full.ctx) ? B : fock::embed(B, full.ctx);
    const Mat inner = uv * Bw.m * uv.adjoint();
    return {full.ctx, uh.adjoint() * inner * uh};
}

// ---------------------------------------------------------------------------
// telescoping blocks

TelescopingBlocks telescoping_blocks(const interactions::Interaction& psi,
                                     const interactions::Potential& V,
                                     const FockOperator& B, double t, const Site& x,
                                     int m, const Context& work) {
    const int d = work.sites().front().dim;
    auto box_fits = [&](int n) {
        for (const auto& s : lattice::box_sites(n, d, x))
            if (!work.contains(s)) return false;
        return true;
    };
    if (!box_fits(m))
        throw std::invalid_argument("telescoping_blocks: box of radius m around x must fit");
    int N = m;
    while (box_fits(N + 1)) ++N;

    const FockOperator chi_b = fock::translate_into(B, x, work);

    TelescopingBlocks out;
    out.m = m;
    out.N = N;
    for (int n = m; n <= N; ++n) {
        const FockOperator h_n =
            interactions::hamiltonian(psi, V, lattice::box_sites(n, d, x), work);
        out.partial.push_back(Evolution(h_n).heisenberg(chi_b, t));
        if (n == m)
            out.blocks.push_back(out.partial.back());
        else
            out.blocks.push_back(fock::sub(out.partial.back(), out.partial[out.partial.size() - 2]));
    }
    return out;
}

}  // namespace lrlab::dynamics
