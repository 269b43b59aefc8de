#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "lrlab/bounds.hpp"

using namespace lrlab;
using namespace lrlab::bounds;
using fock::Context;
using fock::FockOperator;
using lattice::chain_sites;
using lattice::site;

namespace {

interactions::Interaction chain_model(const std::vector<lattice::Site>& window) {
    return interactions::hopping_density({0.4, 0.8}, {0.0, 0.3}, window);
}

// normalized hop + h.c. on the minimal two-site context: the bound machinery
// reads supports off the observable's own context
FockOperator pair_obs(int x, int y) {
    const Context c = Context::from_sites({site(x), site(y)});
    FockOperator hop =
        fock::multiply(fock::creation(c, site(x)), fock::annihilation(c, site(y)));
    FockOperator b = fock::add(hop, fock::adjoint(hop));
    return fock::scale(1.0 / fock::spectral_norm(b), b);
}

}  // namespace

TEST_CASE("make_report fills margin and pass") {
    const BoundReport ok = make_report(1.0, 2.0, "id", "p");
    CHECK(ok.margin == doctest::Approx(1.0));
    CHECK(ok.pass);
    CHECK(ok.case_id == "id");
    const BoundReport edge = make_report(1.0, 1.0);
    CHECK(edge.pass);  // zero margin passes with absolute slack
    const BoundReport bad = make_report(2.0, 1.0);
    CHECK_FALSE(bad.pass);
    CHECK(bad.margin == doctest::Approx(-1.0));
}

TEST_CASE("pair commutator: lhs from an independent solve stays below rhs") {
    const auto window = chain_sites(0, 7);
    const Context work = Context::from_sites(window);
    const interactions::Interaction psi = chain_model(window);
    const interactions::Potential V = interactions::random_potential(window, 0.7, 9);
    const lattice::DecayFunction F = lattice::poly_decay(1, 1.0);
    const double alpha = interactions::w_norm(psi, F, window);
    const double conv = lattice::convolution_constant_bound(F);

    const FockOperator B1 = pair_obs(0, 1);
    const FockOperator B2 = pair_obs(5, 6);

    for (double t : {0.0, 0.5, -1.3}) {
        const BoundReport rep = verify_lr(psi, V, work, B1, B2, t, F, alpha, conv);
        CHECK(rep.pass);

        // dual route for the lhs: exact eigensolve commutator norm
        const FockOperator H = interactions::hamiltonian(psi, V, work);
        dynamics::Evolution ev(H);
        const double lhs =
            fock::spectral_norm(fock::commutator(ev.heisenberg(B1, t), B2));
        CHECK(rep.lhs == doctest::Approx(lhs).epsilon(1e-9));

        // and the rhs formula itself
        const double expect_rhs = lr_rhs(B1, B2, t, psi, F, alpha, conv);
        CHECK(rep.rhs == doctest::Approx(expect_rhs));
        if (t == 0.0) {
            CHECK(rep.lhs < 1e-13);  // disjoint supports commute at t = 0
            CHECK(rep.rhs == doctest::Approx(0.0));
        }
    }

    // rhs grows with |t| and with distance shrinks
    const double r1 = lr_rhs(B1, B2, 0.5, psi, F, alpha, conv);
    const double r2 = lr_rhs(B1, B2, 1.5, psi, F, alpha, conv);
    CHECK(r2 > r1);
    const FockOperator B2near = pair_obs(3, 4);
    CHECK(lr_rhs(B1, B2near, 0.5, psi, F, alpha, conv) > r1);
}

TEST_CASE("pair commutator rejects bad inputs") {
    const auto window = chain_sites(0, 6);
    const interactions::Interaction psi = chain_model(window);
    const lattice::DecayFunction F = lattice::poly_decay(1, 1.0);
    const double alpha = interactions::w_norm(psi, F, window);
    const double conv = lattice::convolution_constant_bound(F);

    // overlapping supports
    const FockOperator Ba = pair_obs(1, 2);
    const FockOperator Bb = pair_obs(2, 3);
    CHECK_THROWS(lr_rhs(Ba, Bb, 0.5, psi, F, alpha, conv));

    // odd B1
    const FockOperator a0 =
        fock::annihilation(Context::from_sites({site(0)}), site(0));
    const FockOperator B2 = pair_obs(4, 5);
    CHECK_THROWS(lr_rhs(a0, B2, 0.5, psi, F, alpha, conv));
}

TEST_CASE("on-site disorder strength does not enter the rhs") {
    const auto window = chain_sites(0, 6);
    const Context work = Context::from_sites(window);
    const interactions::Interaction psi = chain_model(window);
    const lattice::DecayFunction F = lattice::poly_decay(1, 1.0);
    const double alpha = interactions::w_norm(psi, F, window);
    const double conv = lattice::convolution_constant_bound(F);
    const FockOperator B1 = pair_obs(0, 1);
    const FockOperator B2 = pair_obs(4, 5);
    const double t = 0.8;

    const double rhs = lr_rhs(B1, B2, t, psi, F, alpha, conv);
    // the same rhs certifies every disorder realization, however strong
    for (double lam : {0.0, 2.0, 20.0}) {
        const interactions::Potential V =
            interactions::random_potential(window, lam, 123);
        const BoundReport rep = verify_lr(psi, V, work, B1, B2, t, F, alpha, conv);
        CHECK(rep.rhs == doctest::Approx(rhs));
        CHECK(rep.pass);
    }
}

TEST_CASE("finite-volume convergence: bound holds and lhs shrinks with L1") {
    const auto window = chain_sites(-5, 11);  // box(5) in d = 1
    const interactions::Interaction psi = chain_model(window);
    const interactions::Potential V = interactions::random_potential(window, 0.5, 21);
    const lattice::DecayFunction F = lattice::poly_decay(1, 1.0);
    const double alpha = interactions::w_norm(psi, F, window);
    const double conv = lattice::convolution_constant_bound(F);

    const Context c0 = Context::from_sites({site(0)});
    const FockOperator B = fock::sub(fock::scale(2.0, fock::number_op(c0, site(0))),
                                     fock::identity_op(c0));
    const double t = 0.9;

    double prev_lhs = 1e300;
    for (int L1 : {1, 2, 3}) {
        const BoundReport rep =
            convergence_rate_check(psi, V, B, t, L1, 5, 1, F, alpha, conv);
        CHECK(rep.pass);
        CHECK(rep.lhs <= prev_lhs + 1e-12);
        prev_lhs = rep.lhs;
    }

    // degenerate and inverted volume pairs are rejected
    CHECK_THROWS(convergence_rate_check(psi, V, B, t, 4, 4, 1, F, alpha, conv));
    CHECK_THROWS(convergence_rate_check(psi, V, B, t, 5, 4, 1, F, alpha, conv));
}

TEST_CASE("telescoping: identity, base block, shell bounds") {
    const auto window = chain_sites(0, 8);
    const Context work = Context::from_sites(window);
    const interactions::Interaction psi = chain_model(window);
    const interactions::Potential V = interactions::random_potential(window, 0.5, 5);
    const lattice::DecayFunction F = lattice::poly_decay(1, 1.0);
    const double alpha = interactions::w_norm(psi, F, window);
    const double conv = lattice::convolution_constant_bound(F);

    const Context c0 = Context::from_sites({site(0)});
    const FockOperator B = fock::sub(fock::scale(2.0, fock::number_op(c0, site(0))),
                                     fock::identity_op(c0));

    const TelescopingReport rep =
        telescoping_bound_check(psi, V, B, 0.7, site(3), 0, work, F, alpha, conv);
    CHECK(rep.pass);
    CHECK(rep.identity_defect < 1e-10);
    CHECK(rep.base_norm_defect < 1e-10);
    REQUIRE(rep.block_bounds.size() == static_cast<std::size_t>(rep.N - rep.m));
    for (const BoundReport& b : rep.block_bounds) {
        CHECK(b.pass);
        CHECK(b.rhs > 0.0);
    }
}

TEST_CASE("multi-commutator rhs modes are consistently ordered") {
    const lattice::DecayFunction F = lattice::poly_decay(1, 1.0);
    const double conv = lattice::convolution_constant_bound(F);
    const auto seq = lattice::decay_sequences(F, 1);
    const double alpha = 0.9;

    trees::TreeData data;
    data.m = {1, 1, 1};
    data.s = {0.0, 0.5, -0.4};
    data.x = {site(0), site(2), site(-2)};
    const std::vector<double> norms = {1.0, 1.0, 1.0};

    const double raw8 =
        multicomm_rhs(norms, data, F, nullptr, RemainderMode::Raw, alpha, conv, 8);
    const double raw20 =
        multicomm_rhs(norms, data, F, nullptr, RemainderMode::Raw, alpha, conv, 20);
    const double poly =
        multicomm_rhs(norms, data, F, &seq, RemainderMode::Poly, alpha, conv, 8);
    CHECK(raw8 > 0.0);
    // raw rhs uses the certified upper remainder, so it may only tighten
    CHECK(raw20 <= raw8 * (1.0 + 1e-12));
    CHECK(poly > 0.0);

    // scaling the observable norms scales the rhs linearly
    const std::vector<double> two = {2.0, 1.0, 1.0};
    CHECK(multicomm_rhs(two, data, F, nullptr, RemainderMode::Raw, alpha, conv, 8) ==
          doctest::Approx(2.0 * raw8));

    // poly mode needs summability data
    CHECK_THROWS(multicomm_rhs(norms, data, F, nullptr, RemainderMode::Poly, alpha,
                               conv, 8));
}

TEST_CASE("multi-commutator bound against exact nested commutators") {
    const auto window = chain_sites(-4, 9);
    const Context work = Context::from_sites(window);
    const interactions::Interaction psi = chain_model(window);
    const interactions::Potential V = interactions::random_potential(window, 0.5, 31);
    const lattice::DecayFunction F = lattice::poly_decay(1, 1.0);
    const double alpha = interactions::w_norm(psi, F, window);
    const double conv = lattice::convolution_constant_bound(F);
    const auto seq = lattice::decay_sequences(F, 1);

    // observables on the origin box of radius 1, translates at x_j
    const Context c1 = Context::chain(-1, 3);
    FockOperator hop = fock::multiply(fock::creation(c1, site(-1)),
                                      fock::annihilation(c1, site(0)));
    FockOperator B = fock::add(hop, fock::adjoint(hop));
    B = fock::scale(1.0 / fock::spectral_norm(B), B);

    trees::TreeData data;
    data.m = {1, 1, 1};
    data.s = {0.0, 0.6, -0.5};
    data.x = {site(0), site(-2), site(2)};
    const std::vector<FockOperator> ops = {B, B, B};

    const BoundReport raw = verify_multicomm(psi, V, work, ops, data, F, nullptr,
                                             RemainderMode::Raw, alpha, conv, 12);
    CHECK(raw.pass);

    const BoundReport poly = verify_multicomm(psi, V, work, ops, data, F, &seq,
                                              RemainderMode::Poly, alpha, conv, 12);
    CHECK(poly.pass);
    CHECK(poly.lhs == doctest::Approx(raw.lhs).epsilon(1e-10));

    // independent lhs: build the nested commutator by hand
    const FockOperator H = interactions::hamiltonian(psi, V, work);
    dynamics::Evolution ev(H);
    std::vector<FockOperator> nested;
    nested.push_back(fock::translate_into(B, data.x[0], work));
    for (int j = 1; j <= 2; ++j)
        nested.push_back(ev.heisenberg(
            fock::translate_into(B, data.x[static_cast<std::size_t>(j)], work),
            data.s[static_cast<std::size_t>(j)]));
    const double lhs = fock::spectral_norm(fock::multicommutator(nested));
    CHECK(raw.lhs == doctest::Approx(lhs).epsilon(1e-9));

    // exponential-decay route on the same configuration
    const lattice::DecayFunction G = lattice::exp_poly_decay(1, 1.0, 0.5);
    const double conv_e = lattice::convolution_constant_bound(G);
    const auto seq_e = lattice::decay_sequences(G, 1);
    const double alpha_e = interactions::w_norm(psi, G, window);
    const BoundReport expb = verify_multicomm(psi, V, work, ops, data, G, &seq_e,
                                              RemainderMode::Exp, alpha_e, conv_e, 12);
    CHECK(expb.pass);
}

TEST_CASE("tree decay bound for hopping strings") {
    const auto window = chain_sites(-4, 9);
    const Context work = Context::from_sites(window);
    const interactions::Interaction psi = chain_model(window);
    const interactions::Potential V = interactions::random_potential(window, 0.4, 7);
    const double t_max = 0.8;

    const Context c1 = Context::chain(-1, 3);
    FockOperator hop = fock::multiply(fock::creation(c1, site(-1)),
                                      fock::annihilation(c1, site(0)));
    FockOperator B0 = fock::add(hop, fock::adjoint(hop));
    B0 = fock::scale(1.0 / fock::spectral_norm(B0), B0);

    const std::vector<lattice::Site> x = {site(0), site(-2), site(2)};
    const std::vector<lattice::Site> z = {site(1), site(-1)};
    const std::vector<double> s = {0.5, -0.7};
    REQUIRE(std::abs(s[0]) <= t_max);
    REQUIRE(std::abs(s[1]) <= t_max);

    const lattice::DecayFunction F = lattice::poly_decay(1, 1.0);
    const double conv = lattice::convolution_constant_bound(F);
    const auto seq = lattice::decay_sequences(F, 1);
    const double alpha = interactions::w_norm(psi, F, window);
    const BoundReport rp =
        tree_decay_check(psi, V, work, B0, 1, x, z, s, F, seq, alpha, conv);
    CHECK(rp.pass);
    CHECK(rp.rhs > 0.0);

    const lattice::DecayFunction G = lattice::exp_poly_decay(1, 1.0, 0.5);
    const double conv_e = lattice::convolution_constant_bound(G);
    const auto seq_e = lattice::decay_sequences(G, 1);
    const double alpha_e = interactions::w_norm(psi, G, window);
    const BoundReport re =
        tree_decay_check(psi, V, work, B0, 1, x, z, s, G, seq_e, alpha_e, conv_e);
    CHECK(re.pass);

    // hops must be unit steps
    CHECK_THROWS(tree_decay_check(psi, V, work, B0, 1, x, {site(2), site(-1)}, s, F,
                                  seq, alpha, conv));
}

TEST_CASE("non-autonomous pair bound under a sinusoidal drive") {
    const auto window = chain_sites(0, 6);
    const Context work = Context::from_sites(window);

    interactions::TimeInteraction psiT;
    psiT.static_part = chain_model(window);
    interactions::Drive dr;
    dr.part = interactions::hopping_density({0.0, 0.5}, {}, window);
    dr.wave = interactions::Drive::Wave::Sine;
    dr.amp = 0.7;
    dr.omega = 1.3;
    psiT.drives.push_back(dr);

    const interactions::Potential V = interactions::random_potential(window, 0.5, 3);
    const lattice::DecayFunction F = lattice::poly_decay(1, 1.0);
    const double alpha = interactions::sup_w_norm(psiT, F, window);
    const double conv = lattice::convolution_constant_bound(F);

    const FockOperator B1 = pair_obs(0, 1);
    const FockOperator B2 = pair_obs(4, 5);

    const BoundReport rep =
        verify_lr_nonautonomous(psiT, V, work, B1, B2, 0.2, 1.1, F, alpha, conv);
    CHECK(rep.pass);
    // s = t: disjoint supports commute
    const BoundReport triv =
        verify_lr_nonautonomous(psiT, V, work, B1, B2, 0.4, 0.4, F, alpha, conv);
    CHECK(triv.lhs < 1e-12);
    CHECK(triv.pass);

    const BoundReport conv_rep = convergence_rate_check_nonautonomous(
        psiT, V, B1, 0.1, 0.8, 2, 4, 1, F, alpha, conv);
    CHECK(conv_rep.pass);
}
