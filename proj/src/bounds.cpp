#include "lrlab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace lrlab::bounds {

using fock::Context;
using fock::FockOperator;
using lattice::Site;

BoundReport make_report(double lhs, double rhs, std::string case_id, std::string params) {
    BoundReport r;
    r.case_id = std::move(case_id);
    r.params = std::move(params);
    r.lhs = lhs;
    r.rhs = rhs;
    r.margin = rhs - lhs;
    r.pass = r.margin >= -1e-10;
    return r;
}

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

bool disjoint(const std::vector<Site>& a, const std::vector<Site>& b) {
    std::set<Site> sa(a.begin(), a.end());
    for (const Site& s : b)
        if (sa.count(s)) return false;
    return true;
}

}  // namespace

// ---------------------------------------------------------------------------
// pair commutator

double lr_rhs(const FockOperator& B1, const FockOperator& B2, double t,
              const interactions::Interaction& psi, const lattice::DecayFunction& F,
              double alpha, double conv_const) {
    require(fock::is_even(B1), "lr_rhs: B1 must be even");
    require(disjoint(B1.ctx.sites(), B2.ctx.sites()), "lr_rhs: supports must be disjoint");
    const std::vector<Site> boundary = interactions::boundary_set(psi, B1.ctx.sites());
    if (boundary.empty() || t == 0.0) return 0.0;
    const double geom = lattice::decay_double_sum(F, boundary, B2.ctx.sites());
    const double n1 = fock::spectral_norm(B1);
    const double n2 = fock::spectral_norm(B2);
    return 2.0 / conv_const * n1 * n2 *
           (std::exp(2.0 * conv_const * std::abs(t) * alpha) - 1.0) * geom;
}

BoundReport verify_lr(const interactions::Interaction& psi,
                      const interactions::Potential& V, const Context& work,
                      const FockOperator& B1, const FockOperator& B2, double t,
                      const lattice::DecayFunction& F, double alpha,
                      double conv_const) {
    require(B1.ctx.subset_of(work) && B2.ctx.subset_of(work),
            "verify_lr: observables must live inside the working context");
    const double rhs = lr_rhs(B1, B2, t, psi, F, alpha, conv_const);
    const dynamics::Evolution ev(interactions::hamiltonian(psi, V, work));
    const FockOperator moved = ev.heisenberg(B1, t);
    const double lhs = fock::spectral_norm(fock::commutator(moved, fock::embed(B2, work)));
    return make_report(lhs, rhs);
}

BoundReport verify_lr_nonautonomous(const interactions::TimeInteraction& psi,
                                    const interactions::Potential& V,
                                    const Context& work, const FockOperator& B1,
                                    const FockOperator& B2, double s, double t,
                                    const lattice::DecayFunction& F, double alpha,
                                    double conv_const, double tol) {
    require(B1.ctx.subset_of(work) && B2.ctx.subset_of(work),
            "verify_lr_nonautonomous: observables must live inside the working context");
    // the boundary is taken with respect to every term the protocol can switch on
    const interactions::Interaction envelope = psi.envelope();
    const double rhs = lr_rhs(B1, B2, t - s, envelope, F, alpha, conv_const);
    const dynamics::Protocol pr = dynamics::interaction_protocol(psi, V, work);
    const FockOperator moved = dynamics::evolve_nonautonomous(pr, B1, s, t, tol);
    const double lhs = fock::spectral_norm(fock::commutator(moved, fock::embed(B2, work)));
    return make_report(lhs, rhs);
}

// ---------------------------------------------------------------------------
// volume convergence

namespace {

double convergence_rhs(const FockOperator& B, double span, int L1, int L2, int d,
                       const lattice::DecayFunction& F, double alpha,
                       double conv_const) {
    std::vector<Site> annulus;
    for (const Site& y : lattice::box_sites(L2, d))
        if (lattice::max_norm(y) > L1) annulus.push_back(y);
    const double geom = lattice::decay_double_sum(F, annulus, B.ctx.sites());
    return 2.0 * fock::spectral_norm(B) * alpha * std::abs(span) *
           std::exp(4.0 * conv_const * std::abs(span) * alpha) * geom;
}

}  // namespace

BoundReport convergence_rate_check(const interactions::Interaction& psi,
                                   const interactions::Potential& V,
                                   const FockOperator& B, double t, int L1, int L2,
                                   int d, const lattice::DecayFunction& F,
                                   double alpha, double conv_const) {
    require(L1 < L2, "convergence_rate_check: need L1 < L2");
    const Context work = Context::box(L2, d);
    require(B.ctx.subset_of(work), "convergence_rate_check: B must live inside box(L2)");
    for (const Site& sx : B.ctx.sites())
        require(lattice::max_norm(sx) <= L1, "convergence_rate_check: B must live inside box(L1)");

    const dynamics::Evolution big(interactions::hamiltonian(psi, V, work));
    const dynamics::Evolution small(
        interactions::hamiltonian(psi, V, lattice::box_sites(L1, d), work));
    const FockOperator diff = fock::sub(big.heisenberg(B, t), small.heisenberg(B, t));
    const double lhs = fock::spectral_norm(diff);
    return make_report(lhs, convergence_rhs(B, t, L1, L2, d, F, alpha, conv_const));
}

BoundReport convergence_rate_check_nonautonomous(
    const interactions::TimeInteraction& psi, const interactions::Potential& V,
    const FockOperator& B, double s, double t, int L1, int L2, int d,
    const lattice::DecayFunction& F, double alpha, double conv_const, double tol) {
    require(L1 < L2, "convergence_rate_check_nonautonomous: need L1 < L2");
    const Context work = Context::box(L2, d);
    require(B.ctx.subset_of(work),
            "convergence_rate_check_nonautonomous: B must live inside box(L2)");
    for (const Site& sx : B.ctx.sites())
        require(lattice::max_norm(sx) <= L1,
                "convergence_rate_check_nonautonomous: B must live inside box(L1)");

    const dynamics::Protocol big = dynamics::interaction_protocol(psi, V, work);
    const dynamics::Protocol small =
        dynamics::interaction_protocol(psi, V, lattice::box_sites(L1, d), work);
    const FockOperator diff =
        fock::sub(dynamics::evolve_nonautonomous(big, B, s, t, tol),
                  dynamics::evolve_nonautonomous(small, B, s, t, tol));
    const double lhs = fock::spectral_norm(diff);
    return make_report(lhs, convergence_rhs(B, t - s, L1, L2, d, F, alpha, conv_const));
}

// ---------------------------------------------------------------------------
// telescoping

TelescopingReport telescoping_bound_check(const interactions::Interaction& psi,
                                          const interactions::Potential& V,
                                          const FockOperator& B, double t,
                                          const Site& x, int m, const Context& work,
                                          const lattice::DecayFunction& F,
                                          double alpha, double conv_const) {
    const dynamics::TelescopingBlocks tb =
        dynamics::telescoping_blocks(psi, V, B, t, x, m, work);
    const int d = work.sites().front().dim;

    TelescopingReport out;
    out.m = tb.m;
    out.N = tb.N;

    FockOperator acc = tb.blocks.front();
    for (std::size_t i = 1; i < tb.blocks.size(); ++i) acc = fock::add(acc, tb.blocks[i]);
    out.identity_defect = fock::max_abs(fock::sub(acc, tb.partial.back()));
    out.base_norm_defect =
        std::abs(fock::spectral_norm(tb.blocks.front()) - fock::spectral_norm(B));

    const double bnorm = fock::spectral_norm(B);
    const auto box_m = lattice::box_sites(m, d);
    bool all = out.identity_defect <= 1e-10 && out.base_norm_defect <= 1e-8;
    for (int n = m + 1; n <= tb.N; ++n) {
        const double geom =
            lattice::decay_double_sum(F, box_m, lattice::shell_sites(n, d));
        const double rhs = 2.0 * bnorm * alpha * std::abs(t) *
                           std::exp(4.0 * conv_const * std::abs(t) * alpha) * geom;
        const double lhs =
            fock::spectral_norm(tb.blocks[static_cast<std::size_t>(n - m)]);
        out.block_bounds.push_back(make_report(lhs, rhs, "shell " + std::to_string(n)));
        all = all && out.block_bounds.back().pass;
    }
    out.pass = all;
    return out;
}

// ---------------------------------------------------------------------------
// multi-commutator

double multicomm_rhs(const std::vector<double>& b_norms, const trees::TreeData& data,
                     const lattice::DecayFunction& F,
                     const lattice::DecaySequenceData* seq, RemainderMode mode,
                     double alpha, double conv_const, int trunc) {
    const int k = static_cast<int>(data.s.size()) - 1;
    require(k >= 1, "multicomm_rhs: need k >= 1");
    require(b_norms.size() == data.s.size(), "multicomm_rhs: one norm per operator");
    require(mode == RemainderMode::Raw || seq != nullptr,
            "multicomm_rhs: closed-form modes need summability data");

    double prod_norm = 1.0;
    for (double v : b_norms) prod_norm *= v;

    std::vector<int> n(data.m.begin(), data.m.end());
    double tree_sum = 0.0;
    for (const trees::Tree& t : trees::enumerate_trees(k)) {
        const double kap = trees::kappa(t, n, data.x);
        double rem = 0.0;
        switch (mode) {
            case RemainderMode::Raw:
                rem = trees::remainder(t, alpha, data, F, conv_const, trunc).upper;
                break;
            case RemainderMode::Poly:
                rem = trees::remainder_poly_bound(t, alpha, data, *seq, conv_const);
                break;
            case RemainderMode::Exp:
                rem = trees::remainder_exp_bound(t, alpha, data, *seq, conv_const);
                break;
        }
        tree_sum += kap + rem;
    }
    return std::pow(2.0, k) * prod_norm * tree_sum;
}

BoundReport verify_multicomm(const interactions::Interaction& psi,
                             const interactions::Potential& V, const Context& work,
                             const std::vector<FockOperator>& B,
                             const trees::TreeData& data,
                             const lattice::DecayFunction& F,
                             const lattice::DecaySequenceData* seq,
                             RemainderMode mode, double alpha, double conv_const,
                             int trunc) {
    const int k = static_cast<int>(B.size()) - 1;
    require(k >= 1, "verify_multicomm: need k >= 1");
    require(data.m.size() == B.size() && data.x.size() == B.size() &&
                data.s.size() == B.size(),
            "verify_multicomm: data vectors must match the operator count");
    std::vector<double> b_norms;
    for (int j = 0; j <= k; ++j) {
        const auto& Bj = B[static_cast<std::size_t>(j)];
        require(j == 0 || fock::is_even(Bj), "verify_multicomm: B_j must be even for j >= 1");
        for (const Site& sx : Bj.ctx.sites())
            require(lattice::max_norm(sx) <= data.m[static_cast<std::size_t>(j)],
                    "verify_multicomm: B_j must be supported in box(m_j)");
        b_norms.push_back(fock::spectral_norm(Bj));
    }

    const dynamics::Evolution ev(interactions::hamiltonian(psi, V, work));
    std::vector<FockOperator> ops;
    ops.push_back(fock::translate_into(B[0], data.x[0], work));
    for (int j = 1; j <= k; ++j) {
        FockOperator moved =
            fock::translate_into(B[static_cast<std::size_t>(j)], data.x[static_cast<std::size_t>(j)], work);
        ops.push_back(ev.heisenberg(moved, data.s[static_cast<std::size_t>(j)]));
    }
    const double lhs = fock::spectral_norm(fock::multicommutator(ops));
    const double rhs = multicomm_rhs(b_norms, data, F, seq, mode, alpha, conv_const, trunc);
    return make_report(lhs, rhs);
}

// ---------------------------------------------------------------------------
// tree decay

BoundReport tree_decay_check(const interactions::Interaction& psi,
                             const interactions::Potential& V, const Context& work,
                             const FockOperator& B0, int m0,
                             const std::vector<Site>& x, const std::vector<Site>& z,
                             const std::vector<double>& s,
                             const lattice::DecayFunction& F,
                             const lattice::DecaySequenceData& seq, double alpha,
                             double conv_const) {
    const int k = static_cast<int>(x.size()) - 1;
    require(k >= 1, "tree_decay_check: need k >= 1");
    require(z.size() == static_cast<std::size_t>(k) && s.size() == static_cast<std::size_t>(k),
            "tree_decay_check: need k hops and k times");
    for (const Site& sx : B0.ctx.sites())
        require(lattice::max_norm(sx) <= m0, "tree_decay_check: B0 must be supported in box(m0)");
    double tmax = 0.0;
    for (double v : s) tmax = std::max(tmax, std::abs(v));

    const dynamics::Evolution ev(interactions::hamiltonian(psi, V, work));
    std::vector<FockOperator> ops;
    ops.push_back(fock::translate_into(B0, x[0], work));
    for (int j = 1; j <= k; ++j) {
        const Site a = x[static_cast<std::size_t>(j)];
        const Site b = a + z[static_cast<std::size_t>(j - 1)];
        require(lattice::max_norm(z[static_cast<std::size_t>(j - 1)]) == 1,
                "tree_decay_check: hops must have |z| = 1");
        const FockOperator hop =
            fock::multiply(fock::creation(work, a), fock::annihilation(work, b));
        ops.push_back(ev.heisenberg(hop, s[static_cast<std::size_t>(j - 1)]));
    }
    const double lhs = fock::spectral_norm(fock::multicommutator(ops));

    double rhs;
    if (seq.kind == lattice::DecayKind::Polynomial) {
        const double k0 = trees::tree_decay_k0(alpha, tmax, seq, conv_const, F.d);
        rhs = fock::spectral_norm(B0) * std::pow(1.0 + m0, seq.zeta) * std::pow(k0, k) *
              trees::tree_edge_sum_poly(k, x, seq.zeta);
    } else {
        const double k1 = trees::tree_decay_k1(alpha, tmax, seq, conv_const);
        rhs = fock::spectral_norm(B0) * std::exp(m0 * seq.zeta) * std::pow(k1, k) *
              trees::tree_edge_sum_exp(k, x, seq.zeta, F.d);
    }
    return make_report(lhs, rhs);
}

}  // namespace lrlab::bounds
