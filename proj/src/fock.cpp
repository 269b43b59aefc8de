#include "lrlab/fock.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>

namespace lrlab::fock {

// ---------------------------------------------------------------------------
// contexts

Context Context::from_sites(std::vector<lattice::Site> sites) {
    if (sites.empty()) throw std::invalid_argument("Context: empty site list");
    const int d = sites.front().dim;
    for (const auto& s : sites)
        if (s.dim != d) throw std::invalid_argument("Context: mixed site dimensions");
    std::sort(sites.begin(), sites.end());
    if (std::adjacent_find(sites.begin(), sites.end()) != sites.end())
        throw std::invalid_argument("Context: duplicate site");
    if (sites.size() > 12 && !guards_overridden())
        throw GuardError("Context: Fock dimension 2^" + std::to_string(sites.size()) +
                         " exceeds the 2^12 guard");
    Context c;
    c.sites_ = std::move(sites);
    return c;
}

Context Context::box(int L, int d) { return from_sites(lattice::box_sites(L, d)); }
Context Context::box(int L, int d, const lattice::Site& center) {
    return from_sites(lattice::box_sites(L, d, center));
}
Context Context::chain(int x0, int n) { return from_sites(lattice::chain_sites(x0, n)); }

bool Context::contains(const lattice::Site& s) const { return index_of(s) >= 0; }

int Context::index_of(const lattice::Site& s) const {
    auto it = std::lower_bound(sites_.begin(), sites_.end(), s);
    if (it != sites_.end() && *it == s) return static_cast<int>(it - sites_.begin());
    return -1;
}

bool Context::subset_of(const Context& big) const {
    return std::includes(big.sites_.begin(), big.sites_.end(), sites_.begin(), sites_.end());
}

std::vector<int> Context::positions_in(const Context& big) const {
    std::vector<int> pos;
    pos.reserve(sites_.size());
    for (const auto& s : sites_) {
        const int i = big.index_of(s);
        if (i < 0) throw std::invalid_argument("positions_in: not a sub-context");
        pos.push_back(i);
    }
    return pos;
}

Context Context::unite(const Context& other) const {
    std::vector<lattice::Site> merged;
    std::set_union(sites_.begin(), sites_.end(), other.sites_.begin(), other.sites_.end(),
                   std::back_inserter(merged));
    return from_sites(std::move(merged));
}

// ---------------------------------------------------------------------------
// generators

FockOperator zero_op(const Context& ctx) {
    const auto dm = static_cast<Eigen::Index>(ctx.dim());
    return {ctx, Mat::Zero(dm, dm)};
}

FockOperator identity_op(const Context& ctx) {
    const auto dm = static_cast<Eigen::Index>(ctx.dim());
    return {ctx, Mat::Identity(dm, dm)};
}

FockOperator annihilation(const Context& ctx, const lattice::Site& x) {
    const int i = ctx.index_of(x);
    if (i < 0) throw std::invalid_argument("annihilation: site not in context");
    const std::size_t dim = ctx.dim();
    const std::size_t bit = std::size_t{1} << i;
    const std::size_t lower = bit - 1;
    FockOperator a = zero_op(ctx);
    for (std::size_t b = 0; b < dim; ++b) {
        if (!(b & bit)) continue;
        const double sign = (std::popcount(b & lower) & 1) ? -1.0 : 1.0;
        a.m(static_cast<Eigen::Index>(b ^ bit), static_cast<Eigen::Index>(b)) = sign;
    }
    return a;
}

FockOperator creation(const Context& ctx, const lattice::Site& x) {
    FockOperator a = annihilation(ctx, x);
    a.m = a.m.adjoint().eval();
    return a;
}

FockOperator number_op(const Context& ctx, const lattice::Site& x) {
    const int i = ctx.index_of(x);
    if (i < 0) throw std::invalid_argument("number_op: site not in context");
    FockOperator n = zero_op(ctx);
    const std::size_t bit = std::size_t{1} << i;
    for (std::size_t b = 0; b < ctx.dim(); ++b)
        if (b & bit) n.m(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(b)) = 1.0;
    return n;
}

FockOperator number_total(const Context& ctx) { return number_total(ctx, ctx.sites()); }

FockOperator number_total(const Context& ctx, const std::vector<lattice::Site>& region) {
    FockOperator n = zero_op(ctx);
    std::size_t mask = 0;
    for (const auto& s : region) {
        const int i = ctx.index_of(s);
        if (i >= 0) mask |= std::size_t{1} << i;
    }
    for (std::size_t b = 0; b < ctx.dim(); ++b)
        n.m(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(b)) =
            double(std::popcount(b & mask));
    return n;
}

// ---------------------------------------------------------------------------
// embedding
//
// big Fock space factorizes as (member modes) x (rest) after the basis change
// by the diagonal sign eta(b) = parity of inversions between occupied member
// and occupied non-member modes; then embed(B) = U (B x 1) U*.  This is the
// unique *-embedding extending a_sub -> a_big on the generators.

namespace {

struct EmbedMaps {
    std::vector<std::uint32_t> s_of;   // member-bit pattern of each big index
    std::vector<std::uint32_t> r_of;   // non-member pattern (compacted)
    std::vector<double> eta;           // +-1
    std::vector<std::size_t> idx;      // idx[(r << ns) | s] = big index
    int ns = 0, nr = 0;
};

EmbedMaps build_embed_maps(const Context& big, const std::vector<int>& pos) {
    EmbedMaps em;
    em.ns = static_cast<int>(pos.size());
    em.nr = big.n() - em.ns;
    const std::size_t dim = big.dim();
    std::size_t member_mask = 0;
    for (int p : pos) member_mask |= std::size_t{1} << p;
    const std::size_t nonmember_mask = (dim - 1) & ~member_mask;

    em.s_of.resize(dim);
    em.r_of.resize(dim);
    em.eta.resize(dim);
    em.idx.resize(dim);
    for (std::size_t b = 0; b < dim; ++b) {
        std::uint32_t s = 0, r = 0;
        int sj = 0, rj = 0, inv = 0;
        for (int q = 0; q < big.n(); ++q) {
            const std::size_t bit = std::size_t{1} << q;
            if (member_mask & bit) {
                if (b & bit) {
                    s |= std::uint32_t{1} << sj;
                    inv += std::popcount(b & nonmember_mask & (bit - 1));
                }
                ++sj;
            } else {
                if (b & bit) r |= std::uint32_t{1} << rj;
                ++rj;
            }
        }
        em.s_of[b] = s;
        em.r_of[b] = r;
        em.eta[b] = (inv & 1) ? -1.0 : 1.0;
        em.idx[(std::size_t{r} << em.ns) | s] = b;
    }
    return em;
}

}  // namespace

FockOperator embed(const FockOperator& B, const Context& big) {
    if (B.ctx == big) return B;
    const auto pos = B.ctx.positions_in(big);
    const EmbedMaps em = build_embed_maps(big, pos);
    const std::size_t ds = std::size_t{1} << em.ns;
    const std::size_t dr = std::size_t{1} << em.nr;
    FockOperator out = zero_op(big);
    for (std::size_t r = 0; r < dr; ++r) {
        for (std::size_t s2 = 0; s2 < ds; ++s2) {
            const std::size_t row = em.idx[(r << em.ns) | s2];
            for (std::size_t s1 = 0; s1 < ds; ++s1) {
                const Cplx v = B.m(static_cast<Eigen::Index>(s2), static_cast<Eigen::Index>(s1));
                if (v == Cplx(0.0, 0.0)) continue;
                const std::size_t col = em.idx[(r << em.ns) | s1];
                out.m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) =
                    em.eta[row] * em.eta[col] * v;
            }
        }
    }
    return out;
}

FockOperator translate(const FockOperator& B, const lattice::Site& shift) {
    std::vector<lattice::Site> shifted = B.ctx.sites();
    for (auto& s : shifted) s = s + shift;
    return {Context::from_sites(std::move(shifted)), B.m};
}

FockOperator translate_into(const FockOperator& B, const lattice::Site& shift,
                            const Context& target) {
    return embed(translate(B, shift), target);
}

// ---------------------------------------------------------------------------
// algebra

FockOperator add(const FockOperator& A, const FockOperator& B) {
    if (A.ctx == B.ctx) return {A.ctx, A.m + B.m};
    const Context u = A.ctx.unite(B.ctx);
    return {u, embed(A, u).m + embed(B, u).m};
}

FockOperator sub(const FockOperator& A, const FockOperator& B) {
    if (A.ctx == B.ctx) return {A.ctx, A.m - B.m};
    const Context u = A.ctx.unite(B.ctx);
    return {u, embed(A, u).m - embed(B, u).m};
}

FockOperator scale(Cplx c, const FockOperator& A) { return {A.ctx, c * A.m}; }

FockOperator adjoint(const FockOperator& A) { return {A.ctx, A.m.adjoint()}; }

namespace {

// A on the union context, B on a sub-context: C = A * embed(B) without
// materializing the embedded factor (column update per non-member block)
Mat mul_big_local(const Mat& A, const FockOperator& B, const Context& big) {
    const auto pos = B.ctx.positions_in(big);
    const EmbedMaps em = build_embed_maps(big, pos);
    const std::size_t dim = big.dim();
    const std::size_t ds = std::size_t{1} << em.ns;
    Mat C = Mat::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t b = 0; b < dim; ++b) {
        const std::uint32_t s = em.s_of[b];
        const std::size_t rbase = std::size_t{em.r_of[b]} << em.ns;
        for (std::size_t s2 = 0; s2 < ds; ++s2) {
            const Cplx v = B.m(static_cast<Eigen::Index>(s2), static_cast<Eigen::Index>(s));
            if (v == Cplx(0.0, 0.0)) continue;
            const std::size_t c = em.idx[rbase | s2];
            C.col(static_cast<Eigen::Index>(b)) +=
                (em.eta[c] * em.eta[b] * v) * A.col(static_cast<Eigen::Index>(c));
        }
    }
    return C;
}

// A on a sub-context, B on the union: C = embed(A) * B
Mat mul_local_big(const FockOperator& A, const Mat& B, const Context& big) {
    const auto pos = A.ctx.positions_in(big);
    const EmbedMaps em = build_embed_maps(big, pos);
    const std::size_t dim = big.dim();
    const std::size_t ds = std::size_t{1} << em.ns;
    Mat C = Mat::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t a = 0; a < dim; ++a) {
        const std::uint32_t s = em.s_of[a];
        const std::size_t rbase = std::size_t{em.r_of[a]} << em.ns;
        for (std::size_t s2 = 0; s2 < ds; ++s2) {
            const Cplx v = A.m(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s2));
            if (v == Cplx(0.0, 0.0)) continue;
            const std::size_t c = em.idx[rbase | s2];
            C.row(static_cast<Eigen::Index>(a)) +=
                (em.eta[a] * em.eta[c] * v) * B.row(static_cast<Eigen::Index>(c));
        }
    }
    return C;
}

}  // namespace

FockOperator multiply(const FockOperator& A, const FockOperator& B) {
    if (A.ctx == B.ctx) return {A.ctx, A.m * B.m};
    const Context u = A.ctx.unite(B.ctx);
    if (A.ctx == u) return {u, mul_big_local(A.m, B, u)};
    if (B.ctx == u) return {u, mul_local_big(A, B.m, u)};
    return {u, embed(A, u).m * embed(B, u).m};
}

FockOperator commutator(const FockOperator& A, const FockOperator& B) {
    return sub(multiply(A, B), multiply(B, A));
}

FockOperator anticommutator(const FockOperator& A, const FockOperator& B) {
    return add(multiply(A, B), multiply(B, A));
}

FockOperator multicommutator(const std::vector<FockOperator>& ops) {
    if (ops.empty()) throw std::invalid_argument("multicommutator: empty");
    const int k = static_cast<int>(ops.size()) - 1;
    if (k > kMaxCommutatorDepth && !guards_overridden())
        throw GuardError("multicommutator: depth " + std::to_string(k) + " exceeds guard 9");
    FockOperator x = ops.front();
    for (std::size_t j = 1; j < ops.size(); ++j) x = commutator(ops[j], x);
    return x;
}

// ---------------------------------------------------------------------------
// norms

double max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }
double max_abs(const FockOperator& A) { return max_abs(A.m); }

double spectral_norm(const Mat& m) {
    const Eigen::Index n = m.rows();
    if (n <= 512) {
        Eigen::SelfAdjointEigenSolver<Mat> es(m.adjoint() * m, Eigen::EigenvaluesOnly);
        return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
    }
    // power iteration on m^H m with a fixed pseudo-random start
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        v(i) = Cplx(uniform_pm1(0x517ec7a1u, static_cast<std::uint64_t>(i)),
                    uniform_pm1(0x517ec7a1u, static_cast<std::uint64_t>(i) + 0x10000u));
    }
    v.normalize();
    double lam = 0.0;
    for (int it = 0; it < 10000; ++it) {
        Vec w = m * v;
        const double lam_new = w.squaredNorm();  // Rayleigh quotient of m^H m
        Vec u = m.adjoint() * w;
        const double un = u.norm();
        if (un == 0.0) return 0.0;
        v = u / un;
        if (it > 0 && std::abs(lam_new - lam) <= 1e-10 * std::max(lam_new, 1e-300)) {
            lam = lam_new;
            break;
        }
        lam = lam_new;
    }
    return std::sqrt(std::max(0.0, lam));
}

double spectral_norm(const FockOperator& A) { return spectral_norm(A.m); }

// ---------------------------------------------------------------------------
// symmetries

ParityReport parity_defects(const FockOperator& B) {
    const std::size_t dim = B.ctx.dim();
    double even = 0.0, odd = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
            const double sgn = ((std::popcount(i) + std::popcount(j)) & 1) ? -1.0 : 1.0;
            const Cplx v = B.m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            even = std::max(even, std::abs(sgn * v - v));
            odd = std::max(odd, std::abs(sgn * v + v));
        }
    }
    return {even, odd};
}

bool is_even(const FockOperator& B, double tol) { return parity_defects(B).even_defect <= tol; }

FockOperator gauge_transform(const FockOperator& B, double theta) {
    FockOperator out = B;
    const std::size_t dim = B.ctx.dim();
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) {
            const double ph = theta * (std::popcount(i) - std::popcount(j));
            out.m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) *=
                Cplx(std::cos(ph), std::sin(ph));
        }
    return out;
}

double gauge_defect(const FockOperator& B) {
    constexpr int kGrid = 16;
    double dev = 0.0;
    for (int t = 1; t < kGrid; ++t) {
        const double theta = 2.0 * M_PI * t / kGrid;
        dev = std::max(dev, max_abs(sub(gauge_transform(B, theta), B)));
    }
    return dev;
}

// ---------------------------------------------------------------------------
// CAR suite (sparse products; the matrices are exact sign tables)

CarReport car_suite(const Context& ctx) {
    using Sp = Eigen::SparseMatrix<double>;
    const int n = ctx.n();
    const std::size_t dim = ctx.dim();
    const auto di = static_cast<Eigen::Index>(dim);

    std::vector<Sp> a(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(dim / 2);
        const std::size_t bit = std::size_t{1} << i;
        for (std::size_t b = 0; b < dim; ++b) {
            if (!(b & bit)) continue;
            const double sign = (std::popcount(b & (bit - 1)) & 1) ? -1.0 : 1.0;
            trip.emplace_back(static_cast<int>(b ^ bit), static_cast<int>(b), sign);
        }
        a[static_cast<std::size_t>(i)].resize(di, di);
        a[static_cast<std::size_t>(i)].setFromTriplets(trip.begin(), trip.end());
    }

    Sp id(di, di);
    id.setIdentity();

    CarReport rep{0.0, 0.0, 0.0};
    auto max_entry = [](const Sp& s) {
        double m = 0.0;
        for (int k = 0; k < s.outerSize(); ++k)
            for (Sp::InnerIterator it(s, k); it; ++it) m = std::max(m, std::abs(it.value()));
        return m;
    };

    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const Sp& ai = a[static_cast<std::size_t>(i)];
            const Sp& aj = a[static_cast<std::size_t>(j)];
            const Sp aa = Sp(ai * aj) + Sp(aj * ai);
            rep.max_aa_defect = std::max(rep.max_aa_defect, max_entry(aa));
            Sp ajd = aj.transpose();
            Sp mixed = Sp(ai * ajd) + Sp(ajd * ai);
            if (i == j) mixed = mixed - id;
            rep.max_a_adag_defect = std::max(rep.max_a_adag_defect, max_entry(mixed));
        }
        rep.max_norm_deviation =
            std::max(rep.max_norm_deviation,
                     std::abs(spectral_norm(annihilation(ctx, ctx.sites()[static_cast<std::size_t>(i)])) - 1.0));
    }
    return rep;
}

}  // namespace lrlab::fock
